#pragma once

#include "quadlattice/common.hpp"

#include <cstdint>
#include <vector>

namespace ql {

struct CrystalConfig {
    double contrast = 16.6;
    double radius = 0.420455;
    Vec2 center{0.0, 0.0};
    double delta = 1e-3;
    int cutoff = 6;
    double gap_fraction = 0.9;
    double contour_offset = 0.05;
    double reg_epsilon = 1e-6;

    // throws ConfigError naming the offending key
    void validate() const;
};

// Fourier coefficients of a(x) = c * 1_D(x) and b(x) = 1_D(x) on the unit lattice,
// with D a disk of radius r0 centered at `center` (coordinates of the frame in use)
class FourierCoeffs {
public:
    FourierCoeffs() = default;
    FourierCoeffs(double contrast, double radius, Vec2 center, int table_half);

    // coefficient at G = 2*pi*(n1, n2); cached inside the table, computed on the fly outside
    cplx a_hat(int n1, int n2) const;
    cplx b_hat(int n1, int n2) const;

    int table_half() const { return half_; }
    double contrast() const { return contrast_; }
    double radius() const { return radius_; }
    Vec2 center() const { return center_; }

    // sum of |a_hat|^2 over the table (Parseval partial sum)
    double parseval_sum(int half) const;

private:
    cplx shape(int n1, int n2) const;  // transform of the indicator

    double contrast_ = 0;
    double radius_ = 0;
    Vec2 center_{0, 0};
    int half_ = 0;
    std::vector<cplx> table_;
};

// coefficients in the cell frame: inclusion at config.center, |n| <= 2*cutoff + 2
FourierCoeffs build_coefficients(const CrystalConfig& cfg);

// coefficients in the lattice frame used by every mode-level computation: origin at the
// C4v point between inclusions, so the line x1 = 0 (the interface) avoids the inclusions
FourierCoeffs lattice_coefficients(const CrystalConfig& cfg);

struct FieldValue {
    Eigen::Matrix2cd A;
    Eigen::Matrix2cd B;
};

// A, B at x (cell frame, periodized); the disk is open
FieldValue eval_field(const CrystalConfig& cfg, Vec2 x);

// max over random x of |a(Rx)-a(x)| + |a(M2 x)-a(x)|, rotation and reflection about the cell origin
double symmetry_check(const CrystalConfig& cfg, int samples, std::uint64_t seed = 12345);

}  // namespace ql
