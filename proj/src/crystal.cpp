#include "quadlattice/crystal.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace ql {

void CrystalConfig::validate() const {
    auto bad = [](const char* key, const std::string& why) { throw ConfigError(key, std::string(key) + ": " + why); };
    if (!(contrast >= 0) || !std::isfinite(contrast)) bad("contrast", "must be a finite non-negative number");
    if (!(radius >= 0 && radius < 0.5)) bad("radius", "must lie in [0, 1/2)");
    if (!std::isfinite(center[0]) || !std::isfinite(center[1])) bad("center_x", "center must be finite");
    if (radius + std::max(std::abs(center[0]), std::abs(center[1])) >= 0.5) {
        const char* k = std::abs(center[0]) >= std::abs(center[1]) ? "center_x" : "center_y";
        bad(k, "inclusion must lie strictly inside the cell (radius + max|center| < 1/2)");
    }
    if (!std::isfinite(delta)) bad("delta", "must be finite");
    if (cutoff < 1 || cutoff > 24) bad("cutoff", "must be an integer in [1, 24]");
    if (!(gap_fraction > 0 && gap_fraction < 1)) bad("gap_fraction", "must lie in (0, 1)");
    if (!(contour_offset > 0) || !std::isfinite(contour_offset)) bad("contour_offset", "must be positive");
    if (!(reg_epsilon > 0 && reg_epsilon < 1)) bad("reg_epsilon", "must lie in (0, 1)");
}

FourierCoeffs::FourierCoeffs(double contrast, double radius, Vec2 center, int table_half)
    : contrast_(contrast), radius_(radius), center_(center), half_(table_half) {
    const int w = 2 * half_ + 1;
    table_.resize(static_cast<size_t>(w) * w);
    for (int i = -half_; i <= half_; ++i)
        for (int j = -half_; j <= half_; ++j) table_[static_cast<size_t>(i + half_) * w + (j + half_)] = shape(i, j);
}

cplx FourierCoeffs::shape(int n1, int n2) const {
    const double g1 = 2 * pi * n1, g2 = 2 * pi * n2;
    const double g = std::hypot(g1, g2);
    const double r = radius_;
    double mag;
    if (n1 == 0 && n2 == 0)
        mag = pi * r * r;
    else if (r == 0)
        mag = 0;
    else
        mag = 2 * pi * r * r * std::cyl_bessel_j(1.0, g * r) / (g * r);
    const double ph = -(g1 * center_[0] + g2 * center_[1]);
    return mag * cplx(std::cos(ph), std::sin(ph));
}

cplx FourierCoeffs::b_hat(int n1, int n2) const {
    if (std::abs(n1) <= half_ && std::abs(n2) <= half_)
        return table_[static_cast<size_t>(n1 + half_) * (2 * half_ + 1) + (n2 + half_)];
    return shape(n1, n2);
}

cplx FourierCoeffs::a_hat(int n1, int n2) const { return contrast_ * b_hat(n1, n2); }

double FourierCoeffs::parseval_sum(int half) const {
    double s = 0;
    for (int i = -half; i <= half; ++i)
        for (int j = -half; j <= half; ++j) s += std::norm(a_hat(i, j));
    return s;
}

FourierCoeffs build_coefficients(const CrystalConfig& cfg) {
    return FourierCoeffs(cfg.contrast, cfg.radius, cfg.center, 2 * cfg.cutoff + 2);
}

FourierCoeffs lattice_coefficients(const CrystalConfig& cfg) {
    return FourierCoeffs(cfg.contrast, cfg.radius, Vec2{0.5, 0.5}, 2 * cfg.cutoff + 2);
}

namespace {

bool inside(const CrystalConfig& cfg, Vec2 x) {
    double y1 = x[0] - cfg.center[0], y2 = x[1] - cfg.center[1];
    y1 -= std::round(y1);
    y2 -= std::round(y2);
    return y1 * y1 + y2 * y2 < cfg.radius * cfg.radius;
}

double a_of(const CrystalConfig& cfg, Vec2 x) { return inside(cfg, x) ? cfg.contrast : 0.0; }

}  // namespace

FieldValue eval_field(const CrystalConfig& cfg, Vec2 x) {
    FieldValue f;
    const bool in = inside(cfg, x);
    f.A = Eigen::Matrix2cd::Identity() * (in ? 1.0 + cfg.contrast : 1.0);
    f.B.setZero();
    if (in) {
        f.B(0, 1) = -I;
        f.B(1, 0) = I;
    }
    return f;
}

double symmetry_check(const CrystalConfig& cfg, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    double worst = 0;
    for (int s = 0; s < samples; ++s) {
        const Vec2 x{u(rng), u(rng)};
        const Vec2 rx{-x[1], x[0]};
        const Vec2 m2x{x[0], -x[1]};
        const double a = a_of(cfg, x);
        worst = std::max(worst, std::abs(a_of(cfg, rx) - a) + std::abs(a_of(cfg, m2x) - a));
    }
    return worst;
}

}  // namespace ql
