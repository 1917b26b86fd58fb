#pragma once

#include "quadlattice/basis.hpp"
#include "quadlattice/crystal.hpp"
#include "quadlattice/linalg.hpp"

#include <vector>

namespace ql {

// M(kappa, delta) = A + delta * B on a plane-wave basis
struct BlochParts {
    MatC A;  // |k|^2 delta_GG' + a_hat(G-G') k.k'
    MatC B;  // b_hat(G-G') k^T sigma2 k'
    MatC combined(double delta) const { return A + delta * B; }
};

// momentum derivatives of the parts; A2 = (1/2) d^2 A / d kappa1^2
struct BlochDerivatives {
    MatC A1[2];
    MatC B1[2];
    MatC A2;
};

BlochParts assemble_parts(Vec2 kappa, const FourierCoeffs& coeffs, const PlaneWaveBasis& basis);
BlochDerivatives assemble_derivatives(Vec2 kappa, const FourierCoeffs& coeffs, const PlaneWaveBasis& basis);
MatC assemble(Vec2 kappa, double delta, const FourierCoeffs& coeffs, const PlaneWaveBasis& basis);

struct BlochSolution {
    Vec2 kappa{0, 0};
    double delta = 0;
    VecR eigenvalues;
    MatC eigenvectors;
    PlaneWaveBasis basis;
    double residual = 0;     // max_j ||M u_j - lambda_j u_j||
    double matrix_norm = 0;  // max-abs entry scale used for the residual bound
};

BlochSolution solve_bloch(Vec2 kappa, double delta, int nbands, const FourierCoeffs& coeffs, const PlaneWaveBasis& basis);
// lattice-frame coefficients, anchored basis at the config cutoff
BlochSolution solve_bloch(Vec2 kappa, double delta, int nbands, const CrystalConfig& cfg);

struct BandRow {
    Vec2 kappa;
    VecR lambda;
};
std::vector<BandRow> band_path(const std::vector<Vec2>& path, double delta, int nbands, const CrystalConfig& cfg);
// Gamma -> X -> M -> Gamma with `per_leg` points on each leg (endpoint M included once)
std::vector<Vec2> high_symmetry_path(int per_leg);

// Degenerate pair at M with the gauge fixed: v1 is the descending branch made real under
// time reversal, v2 = -i R v1, then v2 -> -v2 if needed so that t* >= 0.
struct MPointPair {
    int n_star = 0;  // 0-based index of the lower band of the pair
    double lambda_star = 0;
    PlaneWaveBasis basis;
    Eig eig;  // full decomposition of M(pi, pi) at delta = 0
    BlochParts parts;
    BlochDerivatives derivs;
    MatC v;   // dim x 2
    MatC dv;  // dim x 2, d/dkappa1 v_n at pi
    bool v2_flipped = false;
    double time_reversal_defect = 0;
    double rotation_defect = 0;  // ||P v2 - v2|| for v2 = -i R v1
    double curvatures[2] = {0, 0};  // second-order coefficients from the degenerate perturbation matrix

    // sum over k outside the pair of u_k u_k^H x / (mu_k - lambda*)
    MatC reduced_resolvent(const MatC& x) const;
    // -R+ Q op applied to x
    MatC projected_solve(const MatC& op, const MatC& x) const { return -reduced_resolvent(op * x); }
    double t_star_raw() const;  // -v2^H B v1, real part
};

MPointPair build_mpoint_pair(const FourierCoeffs& coeffs, int cutoff, int n_star);

struct AnalyticBranch {
    std::array<int, 2> band_pair{0, 1};
    double lambda_star = 0;
    std::vector<double> kgrid;                 // kappa1 values, kappa2 = pi
    std::vector<std::array<double, 2>> values;  // mu_1, mu_2 per grid point
    std::vector<MatC> modes;                    // dim x 2 per grid point, index-compatible with the M basis
    MatC v;                                     // modes at pi
    MatC dv;                                    // momentum derivatives at pi
    double min_match_overlap = 1;
    double min_phase_overlap = 1;
    double gauge_defect = 0;  // max_n |Im <dv_n, v_n>|
    bool v2_flipped = false;
};

AnalyticBranch analytic_branches(const MPointPair& pair, const FourierCoeffs& coeffs, double halfwidth, int npts);

// T_p v_n, the in-kernel component vanishes by M2 symmetry and the gauge condition
MatC momentum_derivative(const MPointPair& pair);

}  // namespace ql
