#include "catch_amalgamated.hpp"

#include "quadlattice/crystal.hpp"

#include <gsl/gsl_integration.h>

using namespace ql;
using Catch::Matchers::WithinAbs;

namespace {

// indicator transform by polar quadrature: Gauss-Legendre in rho, trapezoid in theta
cplx disk_transform(double r, Vec2 c, int n1, int n2) {
    const double g1 = 2 * pi * n1, g2 = 2 * pi * n2;
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(64);
    const int nt = 256;
    cplx s = 0;
    for (int i = 0; i < 64; ++i) {
        double rho, w;
        gsl_integration_glfixed_point(0, r, i, &rho, &w, t);
        for (int j = 0; j < nt; ++j) {
            const double th = 2 * pi * j / nt;
            const double x1 = c[0] + rho * std::cos(th), x2 = c[1] + rho * std::sin(th);
            s += w * rho * (2 * pi / nt) * std::exp(-I * (g1 * x1 + g2 * x2));
        }
    }
    gsl_integration_glfixed_table_free(t);
    return s;
}

}  // namespace

TEST_CASE("disk coefficients match polar quadrature") {
    const FourierCoeffs co(16.6, 0.420455, Vec2{0.1, -0.05}, 6);
    for (auto [n1, n2] : std::vector<std::array<int, 2>>{{0, 0}, {1, 0}, {1, 1}, {-2, 3}, {5, -1}, {7, 7}}) {
        const cplx ref = 16.6 * disk_transform(0.420455, {0.1, -0.05}, n1, n2);
        CHECK(std::abs(co.a_hat(n1, n2) - ref) < 1e-10);
    }
}

TEST_CASE("coefficients outside the table are computed on the fly") {
    const FourierCoeffs small(2.0, 0.3, Vec2{0, 0}, 2), big(2.0, 0.3, Vec2{0, 0}, 9);
    CHECK(std::abs(small.a_hat(8, -3) - big.a_hat(8, -3)) < 1e-15);
}

TEST_CASE("lattice frame shifts only phases") {
    CrystalConfig cfg;
    const FourierCoeffs a = build_coefficients(cfg), b = lattice_coefficients(cfg);
    for (int n1 = -3; n1 <= 3; ++n1)
        for (int n2 = -3; n2 <= 3; ++n2) {
            CHECK_THAT(std::abs(a.a_hat(n1, n2)), WithinAbs(std::abs(b.a_hat(n1, n2)), 1e-14));
            const double sign = (n1 + n2) % 2 == 0 ? 1 : -1;
            CHECK(std::abs(b.a_hat(n1, n2) - sign * a.a_hat(n1, n2)) < 1e-14);
        }
}

TEST_CASE("C4v invariance of the coefficient") {
    CrystalConfig cfg;
    CHECK(symmetry_check(cfg, 2000) == 0.0);
    const FourierCoeffs co = build_coefficients(cfg);
    for (int n1 = -4; n1 <= 4; ++n1)
        for (int n2 = -4; n2 <= 4; ++n2) {
            CHECK(std::abs(co.a_hat(n1, n2) - co.a_hat(-n2, n1)) < 1e-14);
            CHECK(std::abs(co.a_hat(n1, n2) - co.a_hat(n1, -n2)) < 1e-14);
        }
}

TEST_CASE("field values inside and outside the inclusion") {
    CrystalConfig cfg;
    const FieldValue in = eval_field(cfg, {0.1, 0.1}), out = eval_field(cfg, {0.49, 0.49});
    CHECK(in.A(0, 0).real() == Catch::Approx(1 + cfg.contrast));
    CHECK(out.A(0, 0).real() == 1.0);
    CHECK(in.B(0, 1) == -I);
    CHECK(in.B(1, 0) == I);
    CHECK(out.B.norm() == 0.0);
    // periodized
    CHECK(eval_field(cfg, {1.1, -0.9}).A(0, 0).real() == Catch::Approx(1 + cfg.contrast));
}

TEST_CASE("Parseval partial sums approach the L2 norm") {
    const FourierCoeffs co(3.0, 0.3, Vec2{0, 0}, 40);
    const double l2 = 9.0 * pi * 0.09;
    const double s10 = co.parseval_sum(10), s40 = co.parseval_sum(40);
    CHECK(s10 < s40);
    CHECK(s40 <= l2);
    CHECK(std::abs(s40 - l2) / l2 < 0.01);
}

TEST_CASE("config validation names the key") {
    auto key_of = [](CrystalConfig c) {
        try {
            c.validate();
        } catch (const ConfigError& e) {
            return e.key;
        }
        return std::string();
    };
    CrystalConfig c;
    CHECK(key_of(c).empty());
    c.radius = 0.6;
    CHECK(key_of(c) == "radius");
    c = {};
    c.center = {0.2, 0};
    CHECK(key_of(c) == "center_x");
    c = {};
    c.cutoff = 0;
    CHECK(key_of(c) == "cutoff");
    c = {};
    c.gap_fraction = 1.5;
    CHECK(key_of(c) == "gap_fraction");
    c = {};
    c.contrast = -1;
    CHECK(key_of(c) == "contrast");
    c = {};
    c.reg_epsilon = 0;
    CHECK(key_of(c) == "reg_epsilon");
}
