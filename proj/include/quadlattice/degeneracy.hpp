#pragma once

#include "quadlattice/bloch.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ql {

// eigenvalue clusters by relative gap; each entry is [first, last] (inclusive, 0-based)
std::vector<std::array<int, 2>> find_clusters(const VecR& values, double rel_tol = 1e-6);

struct IrrepResult {
    std::string label;  // rho1..rho5, accidental, unresolved, or a C2v label at X
    int dim = 0;
    MatC R;   // representation matrices on the cluster (R is empty at X)
    MatC M1;
    MatC M2;
    double unitarity_defect = 0;
    double relation_defect = 0;  // R^4 = M2^2 = I, M2 R^-1 = R M2
};

// representation of a spatial point operation on columns U: D_ab = <u_a, g u_b>
MatC representation(const PlaneWaveBasis& basis, PointOp op, const MatC& U);

IrrepResult classify_irrep(const BlochSolution& sol, std::array<int, 2> cluster);
IrrepResult classify_subspace(const PlaneWaveBasis& basis, const MatC& U);

// columns spanning the rho5 isotypic block of U (projector (I - D(R^2))/2), empty if none
MatC rho5_block(const PlaneWaveBasis& basis, const MatC& U);

struct NoDirac {
    double h1 = 0, h2 = 0;              // max-abs entries of <u_m, dM/dkappa_i u_n>
    double scale1 = 0, scale2 = 0;      // max-abs entries of dM/dkappa_i
    double scaled1() const { return h1 / scale1; }
    double scaled2() const { return h2 / scale2; }
};
NoDirac no_dirac_check(const BlochDerivatives& d, const MatC& U);

struct FitResult {
    double gamma = 0, eta = 0, residual = 0;
    double gamma1 = 0, gamma2 = 0, eta1 = 0, eta2 = 0;
    double consistency = 0;  // |gamma1 - gamma2| / gamma
    int npoints = 0;
    bool consistent() const { return consistency < 1e-3; }
};
// mu1 ~ lambda - gamma p^2/2 - eta p^4, mu2 ~ lambda + gamma p^2/2 + eta p^4 on |p| <= window
FitResult fit_dispersion(const std::vector<double>& p, const std::vector<double>& mu1, const std::vector<double>& mu2,
                         double lambda_star, double window = 0.2);
FitResult fit_dispersion(const AnalyticBranch& br, double window = 0.2);

// cached lowest eigenvalues over a Brillouin-zone sample
struct BzSample {
    std::vector<Vec2> kappas;
    std::vector<VecR> values;
    int nbands = 0;
};
// 32^2 grid (C4v and time reversal reduce the work to the irreducible wedge) plus a refined kappa2 = pi line
BzSample sample_bz(const FourierCoeffs& coeffs, int cutoff, int nbands, int grid = 32, int line_points = 257);

struct NoFold {
    double margin = 0;  // min distance from lambda* to every sorted band other than the pair
    Vec2 argmin{0, 0};
    int argmin_band = -1;
    bool lower_is_max = false;  // band n* never exceeds lambda*
    bool upper_is_min = false;  // band n*+1 never drops below lambda*
};
NoFold nofold_check(const BzSample& bz, int n_star, double lambda_star);

struct PairSelection {
    int n_star = -1;
    double lambda_star = 0;
    std::string irrep;
    NoFold nofold;
    double curvatures[2] = {0, 0};
    std::vector<std::string> log;  // one line per candidate
};
// lowest rho5 pair at M among `scan_bands` with positive no-fold margin and opposite curvature;
// throws AssumptionError otherwise
PairSelection select_pair(const FourierCoeffs& coeffs, int cutoff, int scan_bands = 16, const BzSample* bz = nullptr);

// u(x) = sum_k (c_k + i x1 d_k) e^{i k.x}; d = 0 for Bloch modes, d = mode for momentum derivatives
struct FluxField {
    const PlaneWaveBasis* basis;
    VecC c;
    VecC d;
};
cplx energy_flux(const FluxField& u, const FluxField& v, double s);

// A-weighted flux averaged over the period window x1 in [s0, s0 + 1]; equals the line flux for exact
// (generalized) eigenmodes at one energy and is the Galerkin-consistent evaluation. Lattice-frame disk
// at (1/2, 1/2); the window must contain it whole.
cplx energy_flux_cell(const FluxField& u, const FluxField& v, double contrast, double radius, double s0 = 0);

struct FluxReport {
    cplx q11, q22, q12, q1d1, q2d2, q1d2, q2d1, qd1d2;
    double max_cross() const;  // largest modulus among q11, q22, q12, q1d2, q2d1, qd1d2
};
FluxReport flux_report(const PlaneWaveBasis& basis, const MatC& v, const MatC& dv, double s);
FluxReport flux_report_cell(const PlaneWaveBasis& basis, const MatC& v, const MatC& dv, double contrast, double radius,
                            double s0 = 0);

// <M1 w, w>/<w, w> for w in {v1, v2, dv1, dv2}; throws if any modulus is below 0.99
std::array<double, 4> parity_check(const PlaneWaveBasis& basis, const MatC& v, const MatC& dv);

struct DegeneracyReport {
    double lambda_star = 0;
    std::array<int, 2> band_pair{0, 1};
    std::string irrep;
    double gamma_star = 0, eta_star = 0, fit_residual = 0;
    FitResult fit;
    NoFold nofold;
    NoDirac nodirac;
    std::array<double, 4> parity_flags{};
    bool v2_flipped = false;
};

}  // namespace ql
