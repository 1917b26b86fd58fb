#pragma once

#include "quadlattice/bloch.hpp"

#include <vector>

namespace ql {

struct TStar {
    double t_star = 0;
    double im_t_star = 0;
};
// -<B grad v1, grad v2> = -v2^H B v1 at kappa = (pi, pi)
TStar compute_t_star(const MatC& v, const MatC& B);
TStar compute_t_star(const MPointPair& pair);

// -[<L^{B,1} v2, v1> + <L^{A,1} T_delta v2, v1> + <L^{B,0} T_p v2, v1>]
cplx compute_r_star(const MPointPair& pair);
cplx compute_r_star(const MPointPair& pair, const MatC& v);

struct GapRow {
    double delta = 0;
    double gap_lo = 0;  // max over kappa1 of the lower band of the pair
    double gap_hi = 0;  // min over kappa1 of the upper band
    double gap_ratio = 0;  // (gap_hi - gap_lo) / (2 |t*| delta)
    double argmax_lo = 0, argmin_hi = 0;
    bool interval_free = false;  // (lambda* - c0 |t* delta|, lambda* + c0 |t* delta|) free of every sampled band
};
// kappa2 = pi, kappa1 over [0, 2pi] (coarse) and around pi (dense), Brent refinement of the extremes
std::vector<GapRow> verify_gap(const MPointPair& pair, const FourierCoeffs& coeffs, double t_star,
                               const std::vector<double>& deltas, double gap_fraction);

struct PerturbedCheck {
    double max_rel_dev = 0;
    double split_dev_at_pi = 0;  // | |mu2 - mu1|(pi) - 2 |t*| delta | / (2 |t*| delta)
};
PerturbedCheck perturbed_eigenvalue_check(const MPointPair& pair, const FourierCoeffs& coeffs, double delta,
                                          const std::vector<double>& pgrid, double gamma, double eta, double t_star,
                                          cplx r_star);

struct InversionOverlap {
    double cross12 = 0;  // |<v_{1,delta}, v_{2,-delta}>|
    double cross21 = 0;  // |<v_{2,delta}, v_{1,-delta}>|
    double same11 = 0;
    double same22 = 0;
};
InversionOverlap band_inversion_overlap(const MPointPair& pair, double delta);

double eval_f_star(double kappa1, double delta, double t_star, double gamma_star);

// ||d v_n||^2, n = 1, 2
std::array<double, 2> normalization_factors(const MPointPair& pair);

}  // namespace ql
