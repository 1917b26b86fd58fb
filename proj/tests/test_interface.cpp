#include "catch_amalgamated.hpp"

#include "quadlattice/interface.hpp"
#include "quadlattice/pipeline.hpp"

#include <algorithm>
#include <cmath>

using namespace ql;

namespace {

Context& ctx() {
    static Context c{CrystalConfig{}};
    return c;
}

SupercellSpec small(double delta, bool flip = true) {
    SupercellSpec s;
    s.N = 4;
    s.cutoff2 = 3;
    s.delta = delta;
    s.flip = flip;
    return s;
}

std::vector<double> bulk_levels(const FourierCoeffs& co, int N, int cutoff, double delta, int levels) {
    std::vector<double> out;
    for (int r = 0; r < 2 * N; ++r) {
        const PlaneWaveBasis b({pi * r / N, pi}, cutoff, Vec2{pi, pi});
        const VecR v = eigvalsh(assemble({pi * r / N, pi}, delta, co, b));
        out.insert(out.end(), v.data(), v.data() + std::min<int>(levels, v.size()));
    }
    std::sort(out.begin(), out.end());
    out.resize(levels);
    return out;
}

}  // namespace

TEST_CASE("supercell without perturbation is the folded bulk") {
    CHECK(folded_bulk_defect(4, 3, ctx().coeffs(), 10) < 1e-8);
}

TEST_CASE("supercell matrix is Hermitian") {
    const MatC H = assemble_supercell(small(0.05), ctx().coeffs());
    CHECK(H.rows() == small(0.05).dim());
    CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() < 1e-12 * H.cwiseAbs().maxCoeff());
}

TEST_CASE("no sign flip gives the folded bulk of the +delta crystal") {
    const double d = 0.3;
    const VecR e = eigvalsh(assemble_supercell(small(d, false), ctx().coeffs()));
    const auto bulk = bulk_levels(ctx().coeffs(), 4, 3, d, 10);
    for (int i = 0; i < 10; ++i) CHECK(std::abs(e[i] - bulk[i]) < 1e-8 * std::max(1.0, bulk[i]));
}

TEST_CASE("projection onto every bulk band reproduces the plane-wave supercell") {
    SupercellSpec s = small(0.2);
    const VecR full = eigvalsh(assemble_supercell(s, ctx().coeffs()));
    s.band_lo = 0;
    s.band_hi = PlaneWaveBasis({0, pi}, 3, Vec2{pi, pi}).dim() - 1;
    const ProjectedSupercell P = assemble_projected(s, ctx().coeffs());
    CHECK((P.H - P.H.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
    const VecR proj = eigvalsh(P.H);
    REQUIRE(proj.size() == full.size());
    CHECK((proj - full).cwiseAbs().maxCoeff() < 1e-8 * full.cwiseAbs().maxCoeff());
}

TEST_CASE("cell profile is normalized and follows a single plane wave") {
    const SupercellSpec s = small(0.1);
    VecC u = VecC::Zero(s.pw_dim());
    u[0] = 1;
    const auto m = cell_profile(s, u);
    double tot = 0;
    for (double x : m) tot += x;
    CHECK(tot == Catch::Approx(1));
    for (double x : m) CHECK(x == Catch::Approx(1.0 / (2 * s.N)));
}

TEST_CASE("interface modes on a large supercell: two per junction near |t*|/sqrt2") {
    SupercellSpec s;
    s.N = 100;
    s.delta = 1e-2;
    s.cutoff2 = 6;
    s.band_lo = 4;
    s.band_hi = 15;
    s.dim_cap = 20000;
    const double lam = ctx().pair().lambda_star, t = ctx().t_star().t_star;
    const InterfaceSpectrum sp = find_interface_modes(s, ctx().coeffs(), lam, t, 0.9);
    CHECK(sp.in_gap().size() == 4);
    CHECK(sp.count("interface") == 2);
    CHECK(sp.count("wrap") == 2);
    CHECK_FALSE(sp.finite_size_warning);
    const BifurcationRow r = bifurcation_row(sp);
    CHECK(r.rel_dev < 0.02);
    CHECK(r.asymmetry < 0.05);
    CHECK(r.min_rate > 0);
    // the two junctions carry the same pair up to the tunnel splitting ~ exp(-rate N)
    CHECK(r.junction_match < 3 * std::exp(-r.min_rate * s.N) * std::abs(t * s.delta));
    for (const auto* m : sp.in_gap()) {
        const double d = m->junction == "interface" ? 0 : s.N;
        CHECK(std::min(std::abs(m->center - d), 2 * s.N - std::abs(m->center - d)) < 1);
    }
}

TEST_CASE("small supercell at delta = 1e-2 cannot localize the modes") {
    SupercellSpec s;
    s.N = 40;
    s.delta = 1e-2;
    s.cutoff2 = 6;
    s.band_lo = 4;
    s.band_hi = 15;
    const InterfaceSpectrum sp = find_interface_modes(s, ctx().coeffs(), ctx().pair().lambda_star, ctx().t_star().t_star, 0.9);
    CHECK(sp.in_gap().size() == 2);
    CHECK(sp.count("delocalized") == 2);
    CHECK(sp.finite_size_warning);
}

TEST_CASE("supercell spec validation") {
    SupercellSpec s;
    s.N = 2;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = {};
    s.dim_cap = 100;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}
