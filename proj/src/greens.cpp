#include "quadlattice/greens.hpp"

#include "quadlattice/parallel.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_expint.h>

#include <algorithm>
#include <cmath>
#include <memory>

namespace ql {

Kernels scalar_kernels(const KernelParams& p) {
    if (!(p.gamma_star > 0)) throw std::invalid_argument("gamma_star must be positive");
    const double g = p.gamma_star;
    const double s = p.t_star / g, q = p.h / g;
    const double D = s * s - q * q;
    if (!(D > 0)) throw NumericalError("kernel divergence: h at or outside the gap edge");
    const double r = std::sqrt(D), d34 = std::pow(D, 0.75), d14 = std::pow(D, 0.25);
    Kernels k;
    k.k1 = -(q - r) / (2 * g * d34);
    k.k2 = -(q + r) / (2 * g * d34);
    k.k3 = s / (2 * g * d34);
    k.e1 = -(q + r) / (g * d14);
    k.e2 = -(q - r) / (g * d14);
    k.e3 = s / (g * d14);
    return k;
}

namespace {

struct GslOff {
    gsl_error_handler_t* old;
    GslOff() : old(gsl_set_error_handler_off()) {}
    ~GslOff() { gsl_set_error_handler(old); }
};

struct Workspace {
    gsl_integration_workspace* w;
    explicit Workspace(std::size_t n) : w(gsl_integration_workspace_alloc(n)) {}
    ~Workspace() { gsl_integration_workspace_free(w); }
};

template <class F>
double gsl_call(double x, void* p) {
    return (*static_cast<F*>(p))(x);
}

}  // namespace

double scalar_integral_oracle(double delta, double h, int k, int l, int sign, double t_star, double gamma_star) {
    if (!(delta > 0 && delta <= 1e-2)) throw std::invalid_argument("delta must lie in (0, 1e-2]");
    if (k != 0 && k != 2 && k != 4) throw std::invalid_argument("k must be 0, 2 or 4");
    if (l < 0 || l > 2) throw std::invalid_argument("l must be 0, 1 or 2");
    if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
    const double g = gamma_star, t = t_star, d = delta;
    const double a = std::pow(d, 1.0 / 9.0);
    auto f = [&](double p) {
        const double r = std::sqrt(g * g * p * p * p * p / 4 + t * t * d * d);
        const double fs = t * d / (g * p * p / 2 + r);
        return std::pow(p, k) * std::pow(fs, l) / (d * h + sign * r) / (1 + fs * fs) / (2 * pi);
    };
    gsl_function F{&gsl_call<decltype(f)>, &f};
    GslOff off;
    Workspace ws(1000);
    const double s = std::sqrt(d);
    const double pts[] = {0, s, 10 * s, 100 * s, 1000 * s, a};
    double total = 0;
    for (int i = 0; i + 1 < 6; ++i) {
        const double lo = pts[i], hi = std::min(pts[i + 1], a);
        if (lo >= a) break;
        double v = 0, err = 0;
        const int st = gsl_integration_qags(&F, lo, hi, 0, 1e-11, 1000, ws.w, &v, &err);
        if (st != GSL_SUCCESS || !std::isfinite(v))
            throw NumericalError("oracle quadrature did not converge (denominator vanishes outside the gap)");
        total += v;
    }
    return 2 * total;  // even integrand
}

OracleComparison compare_oracle(double delta, double h, double t, double g) {
    OracleComparison c{};
    const Kernels K = scalar_kernels({t, g, h});
    const double sd = std::sqrt(delta);
    for (int j = 0; j < 2; ++j) {
        const int sg = j == 0 ? 1 : -1;
        const double o = sd * (scalar_integral_oracle(delta, h, 0, 0, sg, t, g) +
                               scalar_integral_oracle(delta, h, 0, 2, -sg, t, g));
        const double ref = sg == 1 ? K.k1 : K.k2;
        c.prop2_rel[j] = std::abs(o - ref) / std::abs(ref);
        const double edge = sg * 2 / (pi * g) * std::pow(delta, 7.0 / 18.0);
        c.prop2_edge_rel[j] = std::abs(o + edge - ref) / std::abs(ref);
        const double o2 = scalar_integral_oracle(delta, h, 2, 0, sg, t, g);
        const double r2 = sg * 2 / (pi * g) * std::pow(delta, 1.0 / 9.0);
        c.k2_rel[j] = std::abs(o2 - r2) / std::abs(r2);
        const double o4 = scalar_integral_oracle(delta, h, 4, 0, sg, t, g);
        const double r4 = sg * 2 / (3 * pi * g) * std::pow(delta, 1.0 / 3.0);
        c.k4_rel[j] = std::abs(o4 - r4) / std::abs(r4);
    }
    const double o3 =
        sd * (scalar_integral_oracle(delta, h, 0, 1, 1, t, g) - scalar_integral_oracle(delta, h, 0, 1, -1, t, g));
    c.prop3_rel = std::abs(o3 - K.k3) / std::abs(K.k3);
    return c;
}

// ---- free tail -------------------------------------------------------------

namespace {

double tail_at_zero(double b2, double K) {
    if (b2 > 0) {
        const double b = std::sqrt(b2);
        return -(pi / 2 - std::atan(K / b)) / (pi * b);
    }
    if (b2 < 0) {
        const double be = std::sqrt(-b2);
        return -std::log((K + be) / (K - be)) / (2 * pi * be);
    }
    return -1 / (pi * K);
}

double qawf(double (*fn)(double, void*), void* p, double a, double omega, gsl_integration_qawo_enum kind) {
    GslOff off;
    Workspace w1(2000), w2(2000);
    gsl_integration_qawo_table* tab = gsl_integration_qawo_table_alloc(omega, 1, kind, 50);
    gsl_function F{fn, p};
    double v = 0, err = 0;
    const int st = gsl_integration_qawf(&F, a, 1e-13, 2000, w1.w, w2.w, tab, &v, &err);
    gsl_integration_qawo_table_free(tab);
    if (st != GSL_SUCCESS && std::abs(err) > 1e-10 * std::max(1.0, std::abs(v)))
        throw NumericalError("tail quadrature did not converge");
    return v;
}

double inv_quad(double k, void* p) { return 1 / (k * k + *static_cast<double*>(p)); }
double inv_cubic(double k, void* p) { return 1 / (k * (k * k + *static_cast<double*>(p))); }

template <class F>
double upper_tail(F&& f, double a) {
    GslOff off;
    Workspace w(2000);
    gsl_function G{&gsl_call<std::remove_reference_t<F>>, &f};
    double v = 0, err = 0;
    const int st = gsl_integration_qagiu(&G, a, 1e-15, 1e-12, 2000, w.w, &v, &err);
    if (st != GSL_SUCCESS && std::abs(err) > 1e-10 * std::max(1.0, std::abs(v)))
        throw NumericalError("tail quadrature did not converge");
    return v;
}

// below this K|d| the cycle length defeats the oscillatory rule
constexpr double near_line = 2.0;

}  // namespace

double tail_value(double d, double b2, double K) {
    if (d == 0) return tail_at_zero(b2, K);
    const double ad = std::abs(d), z = K * ad;
    if (z >= near_line) return -qawf(&inv_quad, &b2, K, ad, GSL_INTEG_COSINE) / pi;
    // tau(0) + (1/pi) int (1 - cos kd) / (k^2 + b2)
    const double free = ad * ((1 - std::cos(z)) / z + pi / 2 - gsl_sf_Si(z));
    auto f = [&](double k) { return 2 * sq(std::sin(k * ad / 2)) / (k * k * (k * k + b2)); };
    return tail_at_zero(b2, K) + (free - b2 * upper_tail(f, K)) / pi;
}

double tail_derivative(double d, double b2, double K) {
    if (d == 0) return 0;
    const double ad = std::abs(d), sg = d > 0 ? 1 : -1;
    const double si = pi / 2 - gsl_sf_Si(K * ad);
    double rest = 0;
    if (b2 != 0) {
        if (K * ad >= near_line) {
            rest = b2 * qawf(&inv_cubic, &b2, K, ad, GSL_INTEG_SINE);
        } else {
            auto f = [&](double k) { return std::sin(k * ad) / (k * (k * k + b2)); };
            rest = b2 * upper_tail(f, K);
        }
    }
    return sg * (si - rest) / pi;
}

namespace {

// -sin(K d)/(pi d) + b2 tau(d), d != 0
double tail_second(double d, double b2, double K) {
    if (d == 0) throw NumericalError("hypersingular tail at coincident lines");
    return -std::sin(K * d) / (pi * d) + b2 * tail_value(d, b2, K);
}

void gauss_legendre(double lo, double hi, int n, std::vector<double>& x, std::vector<double>& w) {
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(n);
    for (int i = 0; i < n; ++i) {
        double xi, wi;
        gsl_integration_glfixed_point(lo, hi, i, &xi, &wi, t);
        x.push_back(xi);
        w.push_back(wi);
    }
    gsl_integration_glfixed_table_free(t);
}

}  // namespace

// ---- G0 --------------------------------------------------------------------

GreenFunction::GreenFunction(const MPointPair& pair, const FourierCoeffs& coeffs, GreenOptions opts)
    : opts_(opts), basis_(pair.basis), coeffs_(&coeffs), n_star_(pair.n_star), lambda_(pair.lambda_star) {
    if (opts_.n_outer < 2 || opts_.n_inner < 2 || opts_.n_inner % 2) throw std::invalid_argument("bad node counts");
    if (!(opts_.eps1 > 0 && opts_.eps2 > 0 && opts_.eps1 != opts_.eps2)) throw std::invalid_argument("bad epsilon pair");
    cutoff_ = basis_.cutoff();
    gamma_ = {-2 * pair.curvatures[0], 2 * pair.curvatures[1]};
    if (!(gamma_[0] > 0 && gamma_[1] > 0)) throw AssumptionError("quadratic dispersion", "pair curvatures are not of opposite sign");
    int lo = 0, hi = 0;
    for (const auto& n : basis_.indices()) lo = std::min(lo, n[0]), hi = std::max(hi, n[0]);
    K_ = 2 * pi * std::min(-lo, hi + 1);

    for (int i = 0; i < basis_.dim(); ++i) {
        const double k2 = basis_.k2(i);
        auto it = std::find_if(k2_.begin(), k2_.end(), [&](double v) { return std::abs(v - k2) < 1e-9; });
        if (it == k2_.end()) {
            slot_.push_back(static_cast<int>(k2_.size()));
            k2_.push_back(k2);
        } else {
            slot_.push_back(static_cast<int>(it - k2_.begin()));
        }
    }

    v_ = pair.v;
    dv_ = pair.dv;
    const VecC v1 = pair.v.col(0), v2 = pair.v.col(1);
    // everything outside the pair, smooth over the whole period
    add_nodes(0, pi, opts_.n_outer, 1, 2, true);
    add_nodes(pi, 2 * pi, opts_.n_outer, 1, 2, true);
    if (opts_.mode == GreenMode::Richardson) {
        const double a[2] = {std::pow(opts_.eps1, opts_.exponent), std::pow(opts_.eps2, opts_.exponent)};
        rich_[0] = -a[1] / (a[0] - a[1]);
        rich_[1] = a[0] / (a[0] - a[1]);
        for (int g = 0; g < 2; ++g) {
            add_nodes(0, pi - a[g], opts_.n_outer, rich_[g], g, false);
            add_nodes(pi + a[g], 2 * pi, opts_.n_outer, rich_[g], g, false);
            rank_one_.push_back({-rich_[g] * 2 / (pi * gamma_[0] * a[g]), g, v1, v1});
            rank_one_.push_back({rich_[g] * 2 / (pi * gamma_[1] * a[g]), g, v2, v2});
        }
    } else {
        const double a = std::pow(opts_.eps1, opts_.exponent);
        add_nodes(0, pi - a, opts_.n_outer, 1, 2, false);
        add_nodes(pi + a, 2 * pi, opts_.n_outer, 1, 2, false);
        // pair resolvent minus its 1/p^2 part on symmetric inner nodes, finite part of the rest
        std::vector<double> px, pw;
        gauss_legendre(-a, a, opts_.n_inner, px, pw);
        const std::size_t first = nodes_.size();
        for (std::size_t j = 0; j < px.size(); ++j) nodes_.push_back({true, pi + px[j], pw[j] / (2 * pi), 2, {}});
        const std::size_t last = nodes_.size();
        parallel_for(last - first, [&](std::size_t i) {
            Node& nd = nodes_[first + i];
            const Eig e = eigh(assemble({nd.kappa1, pi}, 0, coeffs, basis_.shifted({nd.kappa1, pi})));
            nd.F = MatC::Zero(basis_.dim(), basis_.dim());
            for (int n = n_star_; n <= n_star_ + 1; ++n)
                nd.F += e.vectors.col(n) * e.vectors.col(n).adjoint() / (lambda_ - e.values[n]);
        });
        double s = 0;
        for (std::size_t j = 0; j < px.size(); ++j) s += pw[j] / (2 * pi) * 2 / (px[j] * px[j]);
        rank_one_.push_back({-s / gamma_[0], 2, v1, v1});
        rank_one_.push_back({s / gamma_[1], 2, v2, v2});
        rank_one_.push_back({-2 / (pi * gamma_[0] * a), 2, v1, v1});
        rank_one_.push_back({2 / (pi * gamma_[1] * a), 2, v2, v2});
    }
}

void GreenFunction::add_nodes(double lo, double hi, int n, double scale, int group, bool drop_pair) {
    std::vector<double> x, w;
    gauss_legendre(lo, hi, n, x, w);
    const std::size_t first = nodes_.size();
    for (int i = 0; i < n; ++i) nodes_.push_back({!drop_pair, x[i], scale * w[i] / (2 * pi), group, {}});
    const int p0 = n_star_, p1 = n_star_ + 1;
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        Node& nd = nodes_[first + i];
        const Eig e = eigh(assemble({nd.kappa1, pi}, 0, *coeffs_, basis_.shifted({nd.kappa1, pi})));
        const int dim = basis_.dim();
        VecC d(dim);
        for (int j = 0; j < dim; ++j) {
            const bool in_pair = j == p0 || j == p1;
            d[j] = in_pair == drop_pair ? 0.0 : 1 / (lambda_ - e.values[j]);
        }
        nd.F = e.vectors * d.asDiagonal() * e.vectors.adjoint();
    });
}

VecC GreenFunction::point_row(double kappa1, Vec2 x) const {
    VecC e(basis_.dim());
    for (int i = 0; i < basis_.dim(); ++i) {
        const double k1 = kappa1 + 2 * pi * basis_.indices()[i][0];
        e[i] = std::exp(I * (k1 * x[0] + basis_.k2(i) * x[1]));
    }
    return e;
}

MatC GreenFunction::trace_rows(double kappa1, double s, int deriv) const {
    MatC T = MatC::Zero(static_cast<int>(k2_.size()), basis_.dim());
    for (int i = 0; i < basis_.dim(); ++i) {
        const double k1 = kappa1 + 2 * pi * basis_.indices()[i][0];
        cplx v = std::exp(I * k1 * s);
        for (int d = 0; d < deriv; ++d) v *= I * k1;
        T(slot_[i], i) = v;
    }
    return T;
}

cplx GreenFunction::tail_point(Vec2 x, Vec2 y) const {
    const double d1 = x[0] - y[0], d2 = x[1] - y[1];
    cplx s = 0;
    for (double k2 : k2_) s += tail_value(d1, k2 * k2 - lambda_, K_) * std::exp(I * k2 * d2);
    if (d1 == 0) return s;
    // x2-modes outside the basis: -e^{-beta|d|}/(2 beta) in +-k2 pairs
    double kmax = 0;
    for (double k2 : k2_) kmax = std::max(kmax, std::abs(k2));
    for (double k2 = kmax + 2 * pi;; k2 += 2 * pi) {
        const double beta = std::sqrt(k2 * k2 - lambda_);
        const double term = std::exp(-beta * std::abs(d1)) / beta;
        s -= term * std::cos(k2 * d2);
        if (term < 1e-17) break;
    }
    return s;
}

cplx GreenFunction::raw(Vec2 x, Vec2 y, int which) const {
    cplx s = 0;
    for (const auto& nd : nodes_) {
        if (nd.group != 2 && nd.group != which) continue;
        const double sc = nd.group == 2 ? 1 : 1 / rich_[nd.group];
        s += sc * nd.weight * (point_row(nd.kappa1, x).transpose() * nd.F * point_row(nd.kappa1, y).conjugate())(0, 0);
    }
    const VecC ex = point_row(pi, x), ey = point_row(pi, y);
    for (const auto& r : rank_one_) {
        if (r.group != 2 && r.group != which) continue;
        const double sc = r.group == 2 ? 1 : 1 / rich_[r.group];
        s += sc * r.weight * (ex.transpose() * r.a)(0, 0) * r.b.dot(ey.conjugate());
    }
    if (opts_.tail) s += tail_point(x, y);
    return s;
}

cplx GreenFunction::operator()(Vec2 x, Vec2 y) const { return eval(x, y).value; }

GreenEval GreenFunction::eval(Vec2 x, Vec2 y) const {
    GreenEval r;
    r.x = x, r.y = y, r.lambda = lambda_;
    for (const auto& nd : nodes_) {
        const cplx v = nd.weight * (point_row(nd.kappa1, x).transpose() * nd.F * point_row(nd.kappa1, y).conjugate())(0, 0);
        (nd.pair ? r.pair : r.band_sum) += v;
    }
    const VecC ex = point_row(pi, x), ey = point_row(pi, y);
    for (const auto& o : rank_one_) r.pair += o.weight * (ex.transpose() * o.a)(0, 0) * o.b.dot(ey.conjugate());
    if (opts_.tail) r.tail = tail_point(x, y);
    r.value = r.band_sum + r.pair + r.tail;
    const VecC zero = VecC::Zero(basis_.dim());
    for (int n = 0; n < 2; ++n) {
        const cplx vx = field_value(basis_, v_.col(n), zero, x), vy = field_value(basis_, v_.col(n), zero, y);
        const cplx dx = field_value(basis_, dv_.col(n), v_.col(n), x), dy = field_value(basis_, dv_.col(n), v_.col(n), y);
        r.extended += (n == 0 ? 1.0 : -1.0) * I / gamma_[n] * (vx * std::conj(dy) + dx * std::conj(vy));
    }
    return r;
}

MatC GreenFunction::gamma_block(double tl, int dl, double tr, int dr) const {
    if (dl < 0 || dl > 1 || dr < 0 || dr > 1) throw std::invalid_argument("derivative order must be 0 or 1");
    const int m = static_cast<int>(k2_.size());
    MatC B = MatC::Zero(m, m);
    for (const auto& nd : nodes_) B += nd.weight * trace_rows(nd.kappa1, tl, dl) * nd.F * trace_rows(nd.kappa1, tr, dr).adjoint();
    const MatC Tl = trace_rows(pi, tl, dl), Tr = trace_rows(pi, tr, dr);
    for (const auto& r : rank_one_) B += r.weight * (Tl * r.a) * (Tr * r.b).adjoint();
    if (opts_.tail) {
        const double d = tl - tr;
        for (int j = 0; j < m; ++j) {
            const double b2 = k2_[j] * k2_[j] - lambda_;
            double v;
            if (dl == 0 && dr == 0) v = tail_value(d, b2, K_);
            else if (dl == 1 && dr == 0) v = tail_derivative(d, b2, K_);
            else if (dl == 0) v = -tail_derivative(d, b2, K_);
            else v = -tail_second(d, b2, K_);
            B(j, j) += v;
        }
    }
    return B;
}

// ---- checks ----------------------------------------------------------------

GreenSymmetry green_symmetry_check(const GreenFunction& G, const std::vector<std::array<Vec2, 2>>& pairs) {
    GreenSymmetry r;
    std::vector<std::array<double, 3>> out(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t i) {
        const Vec2 x = pairs[i][0], y = pairs[i][1];
        const cplx g = G(x, y);
        const cplx gs = G(y, x);
        const cplx gm = G({-x[0], x[1]}, {-y[0], y[1]});
        out[i] = {std::abs(g - std::conj(gs)), std::abs(g - gm), std::abs(g)};
    });
    for (const auto& o : out) {
        r.hermitian = std::max(r.hermitian, o[0]);
        r.reflection = std::max(r.reflection, o[1]);
        r.scale = std::max(r.scale, o[2]);
    }
    return r;
}

VecC gamma_modes_from_samples(const GreenFunction& G, const std::vector<cplx>& samples) {
    const int M = static_cast<int>(samples.size());
    const auto& k2 = G.gamma_modes();
    if (M < static_cast<int>(k2.size())) throw std::invalid_argument("fewer density samples than Gamma modes");
    VecC c = VecC::Zero(static_cast<int>(k2.size()));
    for (int j = 0; j < M; ++j) {
        const double y = -0.5 + (j + 0.5) / M;
        for (std::size_t k = 0; k < k2.size(); ++k) c[k] += samples[j] * std::exp(-I * k2[k] * y) / double(M);
    }
    return c;
}

JumpReport jump_check(const GreenFunction& G, const VecC& phi, double t1, double t2) {
    auto S = [&](double t, int d) -> VecC { return G.gamma_block(t, d, 0, 0) * phi; };
    auto extrap = [&](const VecC& f1, const VecC& f2) -> VecC { return (t1 * f2 - t2 * f1) / (t1 - t2); };
    const VecC Sp = extrap(S(t1, 0), S(t2, 0)), Sm = extrap(S(-t1, 0), S(-t2, 0));
    const VecC Dp = extrap(S(t1, 1), S(t2, 1)), Dm = extrap(S(-t1, 1), S(-t2, 1));
    const VecC D0 = S(0, 1);
    JumpReport r;
    r.continuity = (Sp - Sm).norm() / std::max(Sp.norm(), 1e-300);
    const double pn = phi.cwiseAbs().maxCoeff();
    for (int k = 0; k < phi.size(); ++k) {
        if (std::abs(phi[k]) < 1e-8 * pn) continue;
        r.jump_ratio_dev = std::max(r.jump_ratio_dev, std::abs((Dp[k] - Dm[k]) / phi[k] - 1.0));
    }
    r.half_dev = std::max((Dp - D0 - phi / 2).norm(), (Dm - D0 + phi / 2).norm()) / (phi.norm() / 2);
    return r;
}

VecC field_trace(const PlaneWaveBasis& basis, const VecC& c, const VecC& d, double s, int deriv) {
    std::vector<double> k2s;
    std::vector<int> slot;
    for (int i = 0; i < basis.dim(); ++i) {
        auto it = std::find_if(k2s.begin(), k2s.end(), [&](double v) { return std::abs(v - basis.k2(i)) < 1e-9; });
        if (it == k2s.end()) {
            slot.push_back(static_cast<int>(k2s.size()));
            k2s.push_back(basis.k2(i));
        } else {
            slot.push_back(static_cast<int>(it - k2s.begin()));
        }
    }
    VecC out = VecC::Zero(static_cast<int>(k2s.size()));
    for (int i = 0; i < basis.dim(); ++i) {
        const double k1 = basis.k1(i);
        const cplx e = std::exp(I * k1 * s);
        // (c + i s d) e^{i k1 s}, derivative adds i d + i k1 (c + i s d)
        const cplx val = c[i] + I * s * d[i];
        out[slot[i]] += deriv == 0 ? val * e : (I * d[i] + I * k1 * val) * e;
    }
    return out;
}

double kernel_property(const GreenFunction& G, const MatC& v) {
    const VecC zero = VecC::Zero(v.rows());
    const VecC phi = field_trace(G.basis(), v.col(0), zero, 0, 1);
    return (G.gamma_block(0, 0, 0, 0) * phi).norm() / phi.norm();
}

cplx field_value(const PlaneWaveBasis& basis, const VecC& c, const VecC& d, Vec2 x) {
    cplx s = 0;
    for (int i = 0; i < basis.dim(); ++i)
        s += (c[i] + I * x[0] * d[i]) * std::exp(I * (basis.k1(i) * x[0] + basis.k2(i) * x[1]));
    return s;
}

PdeResidual pde_residual(const GreenFunction& G, const std::vector<Vec2>& ys, double rho, int m) {
    double fact = 1;
    for (int j = 2; j <= m; ++j) fact *= j;
    auto phi_hat = [&](double k1, double k2) {
        const double k = std::hypot(k1, k2);
        const double z = k * rho;
        if (z < 1e-6) return pi * rho * rho / (m + 1);
        return 2 * pi * rho * rho * std::ldexp(fact, m) * std::cyl_bessel_j(m + 1.0, z) / std::pow(z, m + 1);
    };
    const double lam = G.lambda();
    auto psi_hat = [&](double k1, double k2) { return cplx((lam - k1 * k1 - k2 * k2) * phi_hat(k1, k2)); };
    // phi restricted to the represented band |k1| <= K, x2-modes of the basis
    std::vector<double> qx, qw;
    const double K = G.K();
    for (int s = 0; s < 16; ++s) gauss_legendre(-K + 2 * K * s / 16, -K + 2 * K * (s + 1) / 16, 32, qx, qw);
    PdeResidual r;
    std::vector<std::array<double, 2>> out(ys.size());
    parallel_for(ys.size(), [&](std::size_t i) {
        const Vec2 y = ys[i];
        cplx low = 0;
        for (std::size_t q = 0; q < qx.size(); ++q)
            for (double k2 : G.gamma_modes())
                low += qw[q] / (2 * pi) * phi_hat(qx[q], k2) * std::exp(I * (qx[q] * y[0] + k2 * y[1]));
        const cplx g = G.apply_source(y, psi_hat);
        const double r2 = (y[0] * y[0] + y[1] * y[1]) / (rho * rho);
        const double phi = r2 < 1 ? std::pow(1 - r2, m) : 0.0;
        out[i] = {std::abs(g - low), std::abs(phi)};
    });
    for (const auto& o : out) {
        r.max_residual = std::max(r.max_residual, o[0]);
        r.max_abs_phi = std::max(r.max_abs_phi, o[1]);
    }
    return r;
}

namespace {

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    if (n < 3) throw NumericalError("decay fit needs at least three samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double ly = std::log(std::max(y[i], 1e-300));
        sx += x[i], sy += ly, sxx += x[i] * x[i], sxy += x[i] * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

DecayFit decay_split_check(const GreenFunction& G, Vec2 y, double x2, double x_start, double x_max, double step) {
    DecayFit f;
    if (x_max - x_start < 2 * step) throw NumericalError("decay scan too short");
    for (double x1 = x_start; x1 <= x_max + 1e-9; x1 += step) f.x1.push_back(x1);
    f.abs_raw.resize(f.x1.size());
    f.abs_remainder.resize(f.x1.size());
    parallel_for(f.x1.size(), [&](std::size_t i) {
        const GreenEval e = G.eval({f.x1[i], x2}, y);
        f.abs_raw[i] = std::abs(e.value);
        f.abs_remainder[i] = std::abs(e.value - e.extended);
    });
    f.rate_raw = -log_slope(f.x1, f.abs_raw);
    f.rate_remainder = -log_slope(f.x1, f.abs_remainder);
    return f;
}

}  // namespace ql
