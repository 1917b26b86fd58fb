#pragma once

#include "quadlattice/common.hpp"

#include <optional>
#include <vector>

namespace ql {

// 2x2 integer point operations acting on momenta
enum class PointOp { R, M1, M2, Inversion };

Eigen::Matrix2d point_matrix(PointOp op);

// Plane waves e^{i(kappa+G).x}, G = 2pi(n1,n2), kept when |kappa_a + G|_inf <= (2*cutoff+1)*pi,
// kappa_a = anchor (default pi*round(kappa/pi)). The anchored box is C4v-symmetric at the
// high-symmetry points and fixes the index set along a kappa sweep.
class PlaneWaveBasis {
public:
    PlaneWaveBasis() = default;
    PlaneWaveBasis(Vec2 kappa, int cutoff, std::optional<Vec2> anchor = std::nullopt);

    int dim() const { return static_cast<int>(n_.size()); }
    int cutoff() const { return cutoff_; }
    Vec2 kappa() const { return kappa_; }
    Vec2 anchor() const { return anchor_; }

    const std::vector<std::array<int, 2>>& indices() const { return n_; }
    double k1(int i) const { return kappa_[0] + 2 * pi * n_[i][0]; }
    double k2(int i) const { return kappa_[1] + 2 * pi * n_[i][1]; }
    const VecR& k1s() const { return k1_; }
    const VecR& k2s() const { return k2_; }

    // index of (n1, n2) or -1
    int find(int n1, int n2) const;

    // same index set, different momentum (index-wise comparable coefficient vectors)
    PlaneWaveBasis shifted(Vec2 kappa) const;

    // perm[i] = index of O k_i; (O u)(x) = u(O x) has coefficients c'_i = c_{perm[i]}.
    // throws if kappa is not fixed by O modulo the lattice or the set is not closed
    std::vector<int> symmetry_map(PointOp op) const;

    int max_index_difference() const;

private:
    Vec2 kappa_{0, 0};
    Vec2 anchor_{0, 0};
    int cutoff_ = 0;
    int lo1_ = 0, lo2_ = 0, w1_ = 0, w2_ = 0;
    std::vector<std::array<int, 2>> n_;
    std::vector<int> lookup_;
    VecR k1_, k2_;
};

VecC apply_map(const std::vector<int>& perm, const VecC& c);
// time reversal: c'_k = conj(c_{-k})
VecC apply_time_reversal(const std::vector<int>& inv_perm, const VecC& c);

}  // namespace ql
