#pragma once

#include "quadlattice/bloch.hpp"

#include <vector>

namespace ql {

struct KernelParams {
    double t_star = 0;
    double gamma_star = 1;
    double h = 0;
};

struct Kernels {
    double k1, k2, k3, e1, e2, e3;
};
// closed forms in s = t/gamma, q = h/gamma, D = s^2 - q^2; throws at or beyond the gap edge
Kernels scalar_kernels(const KernelParams& p);

// (1/2pi) int_{pi-d^{1/9}}^{pi+d^{1/9}} p^k f^l / (d h + sign sqrt(g^2 p^4/4 + t^2 d^2)) dk / (1 + f^2),
// f = t d / (g p^2/2 + sqrt(...)); adaptive quadrature to rel. 1e-10
double scalar_integral_oracle(double delta, double h, int k, int l, int sign, double t_star, double gamma_star);

struct OracleComparison {
    double prop2_rel[2];  // sign = +1, -1: sqrt(d) (I(0,0,s) + I(0,2,-s)) against k1 / k2
    double prop2_edge_rel[2];  // same after adding s (2/(pi g)) d^{7/18}, the window-edge term
    double prop3_rel;     // sqrt(d) (I(0,1,+) - I(0,1,-)) against k3
    double k2_rel[2];     // I(2,0,s) against s 2 d^{1/9} / (pi g)
    double k4_rel[2];     // I(4,0,s) against s 2 d^{1/3} / (3 pi g)
};
OracleComparison compare_oracle(double delta, double h, double t_star, double gamma_star);

// free tail of the strip resolvent per x2-mode: -(1/pi) int_K^inf cos(k d)/(k^2 + b2) dk and its d-derivative
double tail_value(double d, double b2, double K);
double tail_derivative(double d, double b2, double K);

enum class GreenMode { Richardson, Remainder };

struct GreenEval {
    Vec2 x{0, 0}, y{0, 0};
    double lambda = 0;
    cplx value = 0;
    cplx band_sum = 0;  // bands outside the pair
    cplx pair = 0;      // regularized pair contribution with its rank-one terms
    cplx tail = 0;      // |k1| > K free correction
    cplx extended = 0;  // the four (i/gamma) terms, G0 - extended decays as x1 -> +inf
};

struct GreenOptions {
    double eps1 = 1e-6, eps2 = 1e-8;
    double exponent = 1.0 / 9.0;
    int n_outer = 32;  // Gauss-Legendre nodes on each outer interval
    int n_inner = 24;  // nodes on (pi - a, pi + a)
    GreenMode mode = GreenMode::Remainder;
    bool tail = true;  // free high-frequency correction for |k1| > K
};

// Regularized strip Green function G0(x, y; lambda*) at kappa2 = pi, lattice frame.
// Stored as kappa1 nodes with Galerkin resolvents plus rank-one terms at kappa1 = pi.
class GreenFunction {
public:
    GreenFunction(const MPointPair& pair, const FourierCoeffs& coeffs, GreenOptions opts = {});

    double lambda() const { return lambda_; }
    double K() const { return K_; }
    const GreenOptions& options() const { return opts_; }
    const PlaneWaveBasis& basis() const { return basis_; }
    std::array<double, 2> gammas() const { return gamma_; }

    // point values; x1 != y1 needed for the tail over out-of-basis x2-modes
    cplx operator()(Vec2 x, Vec2 y) const;
    GreenEval eval(Vec2 x, Vec2 y) const;
    // richardson pieces for diagnostics: value at a single epsilon (raw limit form)
    cplx raw(Vec2 x, Vec2 y, int which) const;

    // Gamma-Fourier blocks: rows/cols are x2-modes k2 = pi(2n+1) of the basis;
    // (dl, dr) = x1-derivative orders on x and y, lines x1 = tl and y1 = tr
    MatC gamma_block(double tl, int dl, double tr, int dr) const;
    const std::vector<double>& gamma_modes() const { return k2_; }

    // (G psi)(y) for a source given by its plane transform psi_hat(k1, k2)
    template <class F>
    cplx apply_source(Vec2 y, F&& psi_hat) const;

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        bool pair;
        double kappa1;
        double weight;  // includes 1/2pi and Richardson factors
        int group;      // 0: first epsilon, 1: second, 2: epsilon-independent
        MatC F;
    };
    struct RankOne {
        double weight;
        int group;
        VecC a;  // coefficient vectors at kappa1 = pi
        VecC b;
    };
    VecC point_row(double kappa1, Vec2 x) const;
    MatC trace_rows(double kappa1, double s, int deriv) const;
    cplx tail_point(Vec2 x, Vec2 y) const;
    void add_nodes(double lo, double hi, int n, double scale, int group, bool drop_pair);

    GreenOptions opts_;
    PlaneWaveBasis basis_;
    const FourierCoeffs* coeffs_;
    int n_star_ = 0;
    double lambda_ = 0;
    double K_ = 0;
    std::array<double, 2> gamma_{};
    double rich_[2] = {1, 0};
    std::vector<Node> nodes_;
    std::vector<RankOne> rank_one_;
    std::vector<double> k2_;
    std::vector<int> slot_;  // basis index -> k2 slot
    MatC v_, dv_;
    int cutoff_ = 0;
};

template <class F>
cplx GreenFunction::apply_source(Vec2 y, F&& psi_hat) const {
    cplx s = 0;
    for (const auto& nd : nodes_) {
        const VecC e = point_row(nd.kappa1, y);
        VecC p(basis_.dim());
        for (int i = 0; i < basis_.dim(); ++i) p[i] = psi_hat(nd.kappa1 + 2 * pi * basis_.indices()[i][0], basis_.k2(i));
        s += nd.weight * (e.array() * (nd.F * p).array()).sum();
    }
    VecC p(basis_.dim());
    for (int i = 0; i < basis_.dim(); ++i) p[i] = psi_hat(basis_.k1(i), basis_.k2(i));
    const VecC e = point_row(pi, y);
    for (const auto& r : rank_one_) s += r.weight * (e.transpose() * r.a)(0, 0) * r.b.dot(p);
    return s;
}

struct GreenSymmetry {
    double hermitian = 0;   // max |G(x,y) - conj G(y,x)|
    double reflection = 0;  // max |G(x,y) - G(M1 x, M1 y)|
    double scale = 0;       // max |G|
};
GreenSymmetry green_symmetry_check(const GreenFunction& G, const std::vector<std::array<Vec2, 2>>& pairs);

struct JumpReport {
    double continuity = 0;     // relative jump of S[phi] extrapolated to t -> 0
    double jump_ratio_dev = 0;  // max_k |(d1 S(0+) - d1 S(0-))_k / phi_k - 1|
    double half_dev = 0;        // max_k |d1 S(0+) - mean - phi/2| / |phi/2|
};
// density as Gamma-Fourier modes (one per basis x2-mode)
JumpReport jump_check(const GreenFunction& G, const VecC& phi_modes, double t1 = 1e-2, double t2 = 1e-3);
// density samples at nodes y2_j = -1/2 + (j + 1/2)/M with the e^{i pi y2} quasi-periodicity
VecC gamma_modes_from_samples(const GreenFunction& G, const std::vector<cplx>& samples);

// Gamma-Fourier trace of a field sum_k (c_k + i x1 d_k) e^{ik.x} at x1 = s (deriv = 0) or of its x1-derivative
VecC field_trace(const PlaneWaveBasis& basis, const VecC& c, const VecC& d, double s, int deriv);

// ||S[d1 v1 |Gamma]|| / ||d1 v1 |Gamma|| on Gamma
double kernel_property(const GreenFunction& G, const MatC& v);

struct PdeResidual {
    double max_residual = 0;
    double max_abs_phi = 0;
};
// bump phi = (1 - r^2/rho^2)^m at the interstitial origin, checks (G (div A grad + lambda) phi)(y) = phi(y)
PdeResidual pde_residual(const GreenFunction& G, const std::vector<Vec2>& ys, double rho = 0.25, int m = 4);

// pointwise value of sum_k (c_k + i x1 d_k) e^{ik.x} on the basis at kappa = (pi, pi)
cplx field_value(const PlaneWaveBasis& basis, const VecC& c, const VecC& d, Vec2 x);

struct DecayFit {
    double rate_raw = 0;
    double rate_remainder = 0;
    std::vector<double> x1;
    std::vector<double> abs_raw;
    std::vector<double> abs_remainder;
};
// subtracts the four (i/gamma_n) extended terms and fits log|.| on x1 in [x_start, x_max];
// whole-cell steps sample the same point of each period
DecayFit decay_split_check(const GreenFunction& G, Vec2 y, double x2, double x_start, double x_max, double step = 1.0);

}  // namespace ql
