#include "catch_amalgamated.hpp"

#include "quadlattice/pipeline.hpp"

using namespace ql;

namespace {

Context& ctx() {
    static Context c{CrystalConfig{}};
    return c;
}

}  // namespace

TEST_CASE("synthetic dispersion fit recovers gamma and eta") {
    std::vector<double> p, m1, m2;
    const double lam = 10, g = 3.2, e = 0.7;
    for (int i = -40; i <= 40; ++i) {
        const double x = 0.005 * i;
        p.push_back(x);
        m1.push_back(lam - g * x * x / 2 - e * x * x * x * x);
        m2.push_back(lam + g * x * x / 2 + e * x * x * x * x);
    }
    const FitResult f = fit_dispersion(p, m1, m2, lam);
    CHECK(std::abs(f.gamma - g) < 1e-10);
    CHECK(std::abs(f.eta - e) < 1e-8);
    CHECK(f.residual < 1e-12);
    CHECK(f.consistent());
    for (std::size_t i = 0; i < p.size(); ++i) m1[i] += 1e-3 * p[i] * p[i] * p[i];
    CHECK(fit_dispersion(p, m1, m2, lam).residual > 1e-4);
}

TEST_CASE("clusters by relative gap") {
    VecR v(6);
    v << 1.0, 1.0 + 1e-9, 2.0, 3.0, 3.0, 3.0 + 1e-12;
    const auto c = find_clusters(v);
    REQUIRE(c.size() == 3);
    CHECK(c[0] == std::array<int, 2>{0, 1});
    CHECK(c[1] == std::array<int, 2>{2, 2});
    CHECK(c[2] == std::array<int, 2>{3, 5});
}

TEST_CASE("detected pair of the default crystal") {
    const PairSelection& s = ctx().selection();
    CHECK(s.n_star == 9);
    CHECK(s.irrep == "rho5");
    CHECK(s.lambda_star == Catch::Approx(376.8741624694).epsilon(1e-10));
    CHECK(s.nofold.margin > 0);
    CHECK(s.nofold.lower_is_max);
    // upper band dips below lambda* away from M (about 348.2 near kappa=(pi/16,pi/16))
    CHECK_FALSE(s.nofold.upper_is_min);
    CHECK(s.curvatures[0] < 0);
    CHECK(s.curvatures[1] > 0);
}

TEST_CASE("empty lattice refuses: fourfold level, no margin") {
    CrystalConfig c;
    c.contrast = 0;
    bool thrown = false;
    try {
        select_pair(lattice_coefficients(c), 6);
    } catch (const AssumptionError& e) {
        thrown = true;
        CHECK(e.assumption == "no-fold");
        CHECK(std::string(e.what()).find("no-fold condition violated") != std::string::npos);
    }
    CHECK(thrown);
}

TEST_CASE("representation matrices are unitary and satisfy the group relations") {
    const MPointPair& P = ctx().pair();
    const IrrepResult r = classify_subspace(P.basis, P.v);
    CHECK(r.label == "rho5");
    CHECK(r.unitarity_defect < 1e-10);
    CHECK(r.relation_defect < 1e-10);
}

TEST_CASE("first-order matrices vanish on the pair") {
    const NoDirac n = no_dirac_check(ctx().pair().derivs, ctx().pair().v);
    CHECK(n.scaled1() < 1e-8);
    CHECK(n.scaled2() < 1e-8);
}

TEST_CASE("momentum derivative against finite differences of the analytic branch") {
    const AnalyticBranch& br = ctx().branch();
    const std::size_t mid = br.kgrid.size() / 2;
    const double h = br.kgrid[mid + 1] - br.kgrid[mid];
    const double h2 = br.kgrid[mid + 2] - br.kgrid[mid];
    const MatC d1 = (br.modes[mid + 1] - br.modes[mid - 1]) / (2 * h);
    const MatC d2 = (br.modes[mid + 2] - br.modes[mid - 2]) / (2 * h2);
    const double e1 = (d1 - ctx().pair().dv).norm(), e2 = (d2 - ctx().pair().dv).norm();
    CHECK(e1 < 1e-3 * ctx().pair().dv.norm());
    CHECK(e2 / e1 == Catch::Approx(4).epsilon(0.1));  // second order
}

TEST_CASE("gauge condition and parity flags") {
    const MPointPair& P = ctx().pair();
    CHECK(ctx().branch().gauge_defect < 1e-8);
    const auto f = parity_check(P.basis, P.v, P.dv);
    CHECK(f[0] == Catch::Approx(-1).margin(1e-6));
    CHECK(f[1] == Catch::Approx(1).margin(1e-6));
    CHECK(f[2] == Catch::Approx(1).margin(1e-6));
    CHECK(f[3] == Catch::Approx(-1).margin(1e-6));
}

TEST_CASE("fitted curvature agrees with the degenerate second-order matrix") {
    const FitResult& f = ctx().fit();
    const MPointPair& P = ctx().pair();
    CHECK(f.residual < 1e-4);
    CHECK(std::abs(f.gamma1 - 2 * std::abs(P.curvatures[0])) / f.gamma1 < 1e-4);
    CHECK(std::abs(f.gamma2 - 2 * std::abs(P.curvatures[1])) / f.gamma2 < 1e-4);
}

TEST_CASE("cell-averaged fluxes: group velocity zero and dual vectors") {
    const MPointPair& P = ctx().pair();
    const CrystalConfig& c = ctx().config();
    const double g = ctx().fit().gamma;
    const FluxReport q = flux_report_cell(P.basis, P.v, P.dv, c.contrast, c.radius);
    CHECK(std::abs(q.q11) < 1e-8);
    CHECK(std::abs(q.q22) < 1e-8);
    CHECK(std::abs(q.q1d1 + I * g / 2.0) < 0.01 * g);
    CHECK(std::abs(q.q2d2 - I * g / 2.0) < 0.01 * g);
    CHECK(q.max_cross() < 1e-6);
    const FluxReport q2 = flux_report_cell(P.basis, P.v, P.dv, c.contrast, c.radius, 0.05);
    CHECK(std::abs(q2.q1d1 - q.q1d1) < 1e-9);
}

TEST_CASE("line flux of a plane wave") {
    const PlaneWaveBasis b({pi, pi}, 1);
    VecC u = VecC::Zero(b.dim());
    const int i = b.find(0, 0);
    u[i] = 1;
    const FluxField f{&b, u, VecC()};
    // q(e, e) = 2 i k1 for e = exp(i k.x) on a unit segment
    CHECK(std::abs(energy_flux(f, f, 0.3) - 2.0 * I * b.k1(i)) < 1e-12);
}
