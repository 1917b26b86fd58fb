#include "catch_amalgamated.hpp"

#include "quadlattice/greens.hpp"
#include "quadlattice/pipeline.hpp"

#include <gsl/gsl_integration.h>

using namespace ql;

namespace {

Context& ctx() {
    static Context c{CrystalConfig{}};
    return c;
}

const GreenFunction& green() {
    static GreenFunction g(ctx().pair(), ctx().coeffs(), GreenOptions{});
    return g;
}

}  // namespace

TEST_CASE("kernel closed forms: parity and identities") {
    const double t = 0.6946520735042072, g = 3.859471;
    for (double h : {0.0, 0.2, -0.45, 0.6}) {
        const Kernels a = scalar_kernels({t, g, h}), b = scalar_kernels({t, g, -h});
        CHECK(a.k1 == Catch::Approx(-b.k2).epsilon(1e-13));
        CHECK(a.k3 == Catch::Approx(b.k3).epsilon(1e-13));
        CHECK(a.e2 == Catch::Approx(-b.e1).epsilon(1e-13));
        const double D = sq(t / g) - sq(h / g);
        CHECK(a.k1 == Catch::Approx(a.e2 / (2 * std::sqrt(D))).epsilon(1e-13));
        CHECK(a.k2 == Catch::Approx(a.e1 / (2 * std::sqrt(D))).epsilon(1e-13));
        CHECK(a.k1 - a.k2 == Catch::Approx(1 / (g * std::pow(D, 0.25))).epsilon(1e-13));
    }
    CHECK(scalar_kernels({t, g, 0}).k1 == Catch::Approx(1 / (2 * std::sqrt(g * t))).epsilon(1e-13));
    CHECK_THROWS_AS(scalar_kernels({t, g, t}), NumericalError);
}

TEST_CASE("quadrature oracle: mixed combination and power laws") {
    const double t = 0.6946520735042072, g = 3.859471;
    for (double h : {0.0, 0.5 * t, -0.5 * t}) {
        const OracleComparison c = compare_oracle(1e-6, h, t, g);
        CHECK(c.prop3_rel < 1e-6);
        CHECK(c.prop2_edge_rel[0] < 1e-6);
        CHECK(c.prop2_edge_rel[1] < 1e-6);
        CHECK(c.k2_rel[0] < 0.05);
        CHECK(c.k4_rel[0] < 0.05);
    }
    // the finite-window deviation shrinks like delta^{7/18}
    const double e4 = compare_oracle(1e-4, 0, t, g).prop2_rel[0], e8 = compare_oracle(1e-8, 0, t, g).prop2_rel[0];
    CHECK(e4 / e8 == Catch::Approx(std::pow(1e4, 7.0 / 18)).epsilon(0.05));
}

TEST_CASE("free-tail integral against brute-force quadrature") {
    const double K = 2 * pi * 7;
    for (double b2 : {100.0, -300.0})
        for (double d : {0.0, 0.013, 0.37, 1.3}) {
            gsl_integration_glfixed_table* tb = gsl_integration_glfixed_table_alloc(40);
            const double L = K + 4000.0;
            double s = 0;
            const double w[2] = {d, b2};
            gsl_function F{[](double k, void* q) {
                               const double* x = static_cast<const double*>(q);
                               return std::cos(k * x[0]) / (k * k + x[1]);
                           },
                           const_cast<double*>(w)};
            for (int p = 0; p < 40000; ++p)
                s += gsl_integration_glfixed(&F, K + (L - K) * p / 40000, K + (L - K) * (p + 1) / 40000, tb);
            gsl_integration_glfixed_table_free(tb);
            // remainder beyond L: two terms of integration by parts
            const double q = L * L + b2;
            const double rest = d == 0 ? 1 / L - b2 / (3 * L * L * L)
                                       : -std::sin(L * d) / (d * q) + 2 * L * std::cos(L * d) / (d * d * q * q);
            const double ref = -(s + rest) / pi;
            CHECK(std::abs(tail_value(d, b2, K) - ref) < 1e-8);
        }
}

TEST_CASE("free-tail derivative matches a central difference") {
    const double K = 2 * pi * 7, b2 = 100;
    for (double d : {0.05, 0.4, 1.1}) {
        const double e = 1e-5;
        const double fd = (tail_value(d + e, b2, K) - tail_value(d - e, b2, K)) / (2 * e);
        CHECK(std::abs(tail_derivative(d, b2, K) - fd) < 1e-6);
    }
    // jump of the derivative across d = 0
    CHECK(tail_derivative(1e-9, b2, K) - tail_derivative(-1e-9, b2, K) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("Green function symmetries") {
    const std::vector<std::array<Vec2, 2>> prs = {{{{0.3, 0.1}, {-0.2, 0.25}}},
                                                   {{{1.3, -0.4}, {0.1, 0.2}}},
                                                   {{{2.7, 0.45}, {-0.6, -0.1}}}};
    const GreenSymmetry s = green_symmetry_check(green(), prs);
    CHECK(s.hermitian < 1e-10 * s.scale);
    CHECK(s.reflection < 1e-6);
}

TEST_CASE("single layer: continuity and the derivative jump") {
    const GreenFunction& G = green();
    for (double k2 : {pi, 3 * pi}) {
        VecC phi = VecC::Zero(G.gamma_modes().size());
        for (std::size_t k = 0; k < G.gamma_modes().size(); ++k)
            if (std::abs(G.gamma_modes()[k] - k2) < 1e-9) phi[k] = 1;
        const JumpReport j = jump_check(G, phi);
        CHECK(j.continuity < 1e-6);
        CHECK(j.jump_ratio_dev < 0.02);
        CHECK(j.half_dev < 0.02);
    }
}

TEST_CASE("remainder after the four extended terms decays") {
    const GreenFunction& G = green();
    const DecayFit a = decay_split_check(G, {0, 0.1}, 0.2, 3, 6, 1.0), b = decay_split_check(G, {0, 0.1}, 0.2, 3, 8, 1.0);
    CHECK(a.rate_remainder > 0.2);
    CHECK(std::abs(a.rate_remainder - b.rate_remainder) / b.rate_remainder < 0.05);
    CHECK(b.rate_raw < 0.05);  // the raw function does not decay
}

TEST_CASE("quadrature nodes do not matter") {
    GreenOptions o;
    o.n_outer = 48;
    const GreenFunction G2(ctx().pair(), ctx().coeffs(), o);
    const Vec2 x{0.3, 0.1}, y{-0.2, 0.25};
    CHECK(std::abs(G2(x, y) - green()(x, y)) < 1e-8);
}

TEST_CASE("fundamental solution: (div A grad + lambda) applied through G at cutoff 8") {
    CrystalConfig c;
    c.cutoff = 8;
    const FourierCoeffs co = lattice_coefficients(c);
    const MPointPair P = build_mpoint_pair(co, 8, 9);
    REQUIRE(P.lambda_star == Catch::Approx(366.2).margin(0.1));
    const GreenFunction G(P, co, GreenOptions{});
    const PdeResidual r = pde_residual(G, {{0, 0}, {0.1, 0.05}, {1.5, -0.2}}, 0.25, 5);
    CHECK(r.max_residual < 1e-3 * std::max(1.0, r.max_abs_phi));
}
