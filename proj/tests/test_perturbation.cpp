#include "catch_amalgamated.hpp"

#include "quadlattice/pipeline.hpp"

using namespace ql;

namespace {

Context& ctx() {
    static Context c{CrystalConfig{}};
    return c;
}

}  // namespace

TEST_CASE("t* is real and does not depend on the phase of the pair basis") {
    const MPointPair& P = ctx().pair();
    const TStar t = ctx().t_star();
    CHECK(std::abs(t.im_t_star) < 1e-8 * std::abs(t.t_star));
    CHECK(t.t_star > 0);
    MatC w = P.v;
    w.col(0) *= std::exp(I * 0.7);
    w.col(1) *= std::exp(I * 0.7);
    const TStar tw = compute_t_star(w, P.parts.B);
    CHECK(tw.t_star == Catch::Approx(t.t_star).epsilon(1e-12));
    // a relative phase rotates t* off the real axis
    w.col(1) *= std::exp(I * 0.3);
    CHECK(std::abs(compute_t_star(w, P.parts.B).im_t_star) > 0.1 * t.t_star);
}

TEST_CASE("splitting at M is 2 |t*| delta to first order") {
    const MPointPair& P = ctx().pair();
    const double t = ctx().t_star().t_star;
    for (double d : {1e-3, 1e-4}) {
        const VecR v = eigh_index(assemble({pi, pi}, d, ctx().coeffs(), P.basis), P.n_star, P.n_star + 1).values;
        CHECK(std::abs((v[1] - v[0]) - 2 * t * d) < 1e-3 * 2 * t * d);
    }
}

TEST_CASE("r* vanishes for the mirror-symmetric crystal") {
    CHECK(std::abs(ctx().r_star()) < 1e-9);
}

TEST_CASE("f* limits") {
    const double t = 0.7, g = 3.9;
    CHECK(eval_f_star(pi, 1e-3, t, g) == Catch::Approx(1));
    CHECK(std::abs(eval_f_star(pi + 0.5, 1e-3, t, g)) < 1e-3);
    CHECK(eval_f_star(pi + 0.01, 1e-3, t, g) == Catch::Approx(eval_f_star(pi - 0.01, 1e-3, t, g)));
    // f solves f^2 t d + f g p^2 - t d = 0
    const double p = 0.02, d = 1e-3, f = eval_f_star(pi + p, d, t, g);
    CHECK(std::abs(f * f * t * d + f * g * p * p - t * d) < 1e-15);
}

TEST_CASE("perturbed eigenvalues follow the two-band model") {
    std::vector<double> pg;
    for (int i = -5; i <= 5; ++i) pg.push_back(0.01 * i);
    const FitResult& f = ctx().fit();
    const PerturbedCheck c = perturbed_eigenvalue_check(ctx().pair(), ctx().coeffs(), 1e-4, pg, f.gamma, f.eta,
                                                        ctx().t_star().t_star, ctx().r_star());
    CHECK(c.split_dev_at_pi < 1e-3);
    CHECK(c.max_rel_dev < 1e-2);
}

TEST_CASE("gap opens at 2 |t*| delta and the interval is free") {
    const auto rows = verify_gap(ctx().pair(), ctx().coeffs(), ctx().t_star().t_star, {1e-3, 1e-4}, 0.9);
    for (const auto& r : rows) {
        CHECK(r.gap_ratio == Catch::Approx(1).margin(0.03));
        CHECK(r.interval_free);
    }
    const auto zero = verify_gap(ctx().pair(), ctx().coeffs(), ctx().t_star().t_star, {0.0}, 0.9);
    CHECK(std::abs(zero[0].gap_hi - zero[0].gap_lo) < 1e-8);
}

TEST_CASE("band inversion between +delta and -delta") {
    const InversionOverlap o = band_inversion_overlap(ctx().pair(), 1e-3);
    CHECK(o.cross12 > 0.99);
    CHECK(o.cross21 > 0.99);
    CHECK(o.same11 < 0.1);
    CHECK(o.same22 < 0.1);
}
