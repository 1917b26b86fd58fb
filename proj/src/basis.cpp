#include "quadlattice/basis.hpp"

#include <cmath>
#include <sstream>

namespace ql {

Eigen::Matrix2d point_matrix(PointOp op) {
    Eigen::Matrix2d m;
    switch (op) {
        case PointOp::R: m << 0, -1, 1, 0; break;
        case PointOp::M1: m << -1, 0, 0, 1; break;
        case PointOp::M2: m << 1, 0, 0, -1; break;
        case PointOp::Inversion: m << -1, 0, 0, -1; break;
    }
    return m;
}

PlaneWaveBasis::PlaneWaveBasis(Vec2 kappa, int cutoff, std::optional<Vec2> anchor)
    : kappa_(kappa), cutoff_(cutoff) {
    if (cutoff < 0) throw std::invalid_argument("negative cutoff");
    anchor_ = anchor ? *anchor : Vec2{pi * std::round(kappa[0] / pi), pi * std::round(kappa[1] / pi)};
    const double kmax = (2 * cutoff + 1) * pi + 1e-9;
    std::vector<int> ok1, ok2;
    for (int n = -cutoff - 3; n <= cutoff + 3; ++n) {
        if (std::abs(anchor_[0] + 2 * pi * n) <= kmax) ok1.push_back(n);
        if (std::abs(anchor_[1] + 2 * pi * n) <= kmax) ok2.push_back(n);
    }
    for (int a : ok1)
        for (int b : ok2) n_.push_back({a, b});
    lo1_ = ok1.front();
    lo2_ = ok2.front();
    w1_ = static_cast<int>(ok1.size());
    w2_ = static_cast<int>(ok2.size());
    lookup_.assign(static_cast<size_t>(w1_) * w2_, -1);
    for (int i = 0; i < dim(); ++i) lookup_[(n_[i][0] - lo1_) * w2_ + (n_[i][1] - lo2_)] = i;
    k1_.resize(dim());
    k2_.resize(dim());
    for (int i = 0; i < dim(); ++i) {
        k1_[i] = k1(i);
        k2_[i] = k2(i);
    }
}

int PlaneWaveBasis::find(int n1, int n2) const {
    const int a = n1 - lo1_, b = n2 - lo2_;
    if (a < 0 || b < 0 || a >= w1_ || b >= w2_) return -1;
    return lookup_[a * w2_ + b];
}

PlaneWaveBasis PlaneWaveBasis::shifted(Vec2 kappa) const {
    PlaneWaveBasis b = *this;
    b.kappa_ = kappa;
    for (int i = 0; i < dim(); ++i) {
        b.k1_[i] = b.k1(i);
        b.k2_[i] = b.k2(i);
    }
    return b;
}

std::vector<int> PlaneWaveBasis::symmetry_map(PointOp op) const {
    const Eigen::Matrix2d O = point_matrix(op);
    const Eigen::Vector2d kap(kappa_[0], kappa_[1]);
    const Eigen::Vector2d shift = (O * kap - kap) / (2 * pi);
    if ((shift - shift.array().round().matrix()).norm() > 1e-9)
        throw std::invalid_argument("momentum not fixed by the point operation");
    std::vector<int> perm(dim());
    for (int i = 0; i < dim(); ++i) {
        const Eigen::Vector2d k(k1_[i], k2_[i]);
        const Eigen::Vector2d n = (O * k - kap) / (2 * pi);
        const int j = find(static_cast<int>(std::lround(n[0])), static_cast<int>(std::lround(n[1])));
        if (j < 0) throw std::invalid_argument("plane-wave set not closed under the point operation");
        perm[i] = j;
    }
    return perm;
}

int PlaneWaveBasis::max_index_difference() const {
    int m = 0;
    for (const auto& a : n_)
        for (const auto& b : n_) m = std::max({m, std::abs(a[0] - b[0]), std::abs(a[1] - b[1])});
    return m;
}

VecC apply_map(const std::vector<int>& perm, const VecC& c) {
    VecC out(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) out[i] = c[perm[i]];
    return out;
}

VecC apply_time_reversal(const std::vector<int>& inv_perm, const VecC& c) {
    VecC out(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) out[i] = std::conj(c[inv_perm[i]]);
    return out;
}

}  // namespace ql
