#pragma once

#include "quadlattice/crystal.hpp"
#include "quadlattice/linalg.hpp"

#include <string>
#include <vector>

namespace ql {

// Two-junction periodic supercell of 2N cells along x1 at kappa2 = pi. Plane waves
// k1 = pi m / N with m in [-cutoff1, cutoff1), k2 = pi (2n + 1) with n in [-cutoff2 - 1, cutoff2],
// which is exactly the fold of the (pi, pi)-anchored bulk basis.
struct SupercellSpec {
    int N = 12;
    double delta = 1e-2;
    int cutoff1 = 0;  // 0: 2 (cutoff2 + 1) N
    int cutoff2 = 6;
    bool flip = true;  // false: uniform +delta (no junctions)
    int dim_cap = 8000;
    // optional reduction: bulk Bloch modes of bands band_lo..band_hi (0-based) at each folded kappa1
    int band_lo = -1, band_hi = -1;

    bool projected() const { return band_lo >= 0; }
    int m_half() const { return cutoff1 > 0 ? cutoff1 : 2 * (cutoff2 + 1) * N; }
    int n_count() const { return 2 * cutoff2 + 2; }
    int pw_dim() const { return 2 * m_half() * n_count(); }
    int dim() const { return projected() ? 2 * N * (band_hi - band_lo + 1) : pw_dim(); }
    void validate() const;
};

// s(x1) b(x) sigma2 with s = +1 on (0, N), -1 on (-N, 0); lattice-frame coefficients expected
MatC assemble_supercell(const SupercellSpec& spec, const FourierCoeffs& coeffs);

// band-projected form: H in the Bloch-mode basis and the map back to plane waves (pw_dim x dim)
struct ProjectedSupercell {
    MatC H;
    std::vector<MatC> modes;  // per folded kappa1 = pi r / N, bulk basis x bands
    std::vector<std::vector<int>> pw_index;  // per r, bulk basis index -> supercell plane-wave index
    VecC to_plane_waves(const VecC& y) const;
};
ProjectedSupercell assemble_projected(const SupercellSpec& spec, const FourierCoeffs& coeffs);

struct InterfaceMode {
    double lambda = 0;
    double h = 0;       // (lambda - lambda*) / delta
    double center = 0;  // circular mean of the cellwise mass, cells, in (-N, N]
    double concentration = 0;  // resultant length of that mean, 0 for a uniform profile
    std::string junction;  // "interface" (x1 = 0), "wrap" (x1 = +-N) or "delocalized"
    double decay_rate = 0;  // amplitude rate per cell away from the junction
    bool in_gap = false;
    double splitting = 0;  // eigenvalue spread of the near-degenerate cluster it was rotated out of
    std::vector<double> cell_mass;  // cells -N .. N-1, normalized to sum 1
};

struct InterfaceSpectrum {
    int N = 0;
    double delta = 0;
    double lambda_star = 0;
    double t_star = 0;
    double gap_lo = 0, gap_hi = 0;  // lambda* -+ c0 |t* delta|
    int dim = 0;
    std::vector<InterfaceMode> modes;  // every eigenvalue in the solve window
    std::vector<const InterfaceMode*> in_gap() const;
    int count(const std::string& junction) const;  // in-gap only
    bool finite_size_warning = false;              // fewer than 4 in-gap states or any delocalized one
};

// a uniform profile has no center; below this resultant length a mode is delocalized
inline constexpr double min_concentration = 0.5;

// in-gap eigenvalues closer than this many |t* delta| are one cluster
inline constexpr double cluster_fraction = 0.25;

// rotates each in-gap cluster onto states diagonal in the x1 = 0 half-space projector;
// values become Rayleigh quotients, returns the raw spread per column
std::vector<double> localize_clusters(const SupercellSpec& spec, Eig& e, double lo, double hi, double tol);

// window: eigenpairs in lambda* +- window_factor |t* delta| are returned, in-gap ones flagged
InterfaceSpectrum find_interface_modes(const SupercellSpec& spec, const FourierCoeffs& coeffs, double lambda_star,
                                       double t_star, double gap_fraction, double window_factor = 1.5);

// cellwise |u|^2 for a supercell coefficient vector
std::vector<double> cell_profile(const SupercellSpec& spec, const VecC& u, int samples_per_cell = 16);

struct BifurcationRow {
    double delta = 0;
    int N = 0;
    std::vector<double> h_interface;  // sorted h of the in-gap x1 = 0 modes
    std::vector<double> h_wrap;
    double rel_dev = 0;    // max | |h| / (|t*|/sqrt2) - 1 | over the x1 = 0 pair
    double asymmetry = 0;  // |h+ + h-| / (|h+| + |h-|)
    double junction_match = 0;  // max |h_interface - h_wrap| (sorted), relative to delta units
    int in_gap = 0;
    double min_rate = 0;
};

BifurcationRow bifurcation_row(const InterfaceSpectrum& s);
std::vector<BifurcationRow> verify_bifurcation(const std::vector<double>& deltas, int N, const FourierCoeffs& coeffs,
                                               int cutoff, double lambda_star, double t_star, double gap_fraction);

// lowest `levels` supercell eigenvalues at delta = 0 against the bulk values at kappa1 = pi m / N
double folded_bulk_defect(int N, int cutoff, const FourierCoeffs& coeffs, int levels = 10);

}  // namespace ql
