#include "quadlattice/pipeline.hpp"

#include "quadlattice/acceptance.hpp"
#include "quadlattice/greens.hpp"
#include "quadlattice/interface.hpp"

#include <ostream>

namespace ql {

using nlohmann::json;

Context::Context(CrystalConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

const FourierCoeffs& Context::coeffs() {
    if (!coeffs_) coeffs_ = lattice_coefficients(cfg_);
    return *coeffs_;
}

const BzSample& Context::bz() {
    if (!bz_) {
        const PlaneWaveBasis b({pi, pi}, cfg_.cutoff);
        bz_ = sample_bz(coeffs(), cfg_.cutoff, std::min(scan_bands + 2, b.dim()));
    }
    return *bz_;
}

const PairSelection& Context::selection() {
    if (!sel_) sel_ = select_pair(coeffs(), cfg_.cutoff, scan_bands, &bz());
    return *sel_;
}

const MPointPair& Context::pair() {
    if (!pair_) pair_ = build_mpoint_pair(coeffs(), cfg_.cutoff, selection().n_star);
    return *pair_;
}

const AnalyticBranch& Context::branch() {
    if (!branch_) branch_ = analytic_branches(pair(), coeffs(), branch_halfwidth, branch_points);
    return *branch_;
}

const FitResult& Context::fit() {
    if (!fit_) fit_ = fit_dispersion(branch());
    return *fit_;
}

const TStar& Context::t_star() {
    if (!t_) t_ = compute_t_star(pair());
    return *t_;
}

cplx Context::r_star() {
    if (!r_) r_ = compute_r_star(pair());
    return *r_;
}

DegeneracyReport Context::degeneracy() {
    DegeneracyReport r;
    const MPointPair& P = pair();
    r.lambda_star = P.lambda_star;
    r.band_pair = {P.n_star, P.n_star + 1};
    r.irrep = selection().irrep;
    r.fit = fit();
    r.gamma_star = r.fit.gamma;
    r.eta_star = r.fit.eta;
    r.fit_residual = r.fit.residual;
    r.nofold = selection().nofold;
    r.nodirac = no_dirac_check(P.derivs, P.v);
    r.parity_flags = parity_check(P.basis, P.v, P.dv);
    r.v2_flipped = P.v2_flipped;
    return r;
}

namespace {

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

int cmd_bands(Context& ctx, RunManifest& out, const RunOptions& opt, std::ostream& log) {
    const CrystalConfig& cfg = ctx.config();
    const auto path = high_symmetry_path(opt.per_leg);
    const auto rows = band_path(path, cfg.delta, opt.nbands, cfg);
    std::vector<std::string> cols{"index", "kappa1", "kappa2"};
    for (int b = 0; b < opt.nbands; ++b) cols.push_back("lambda_" + std::to_string(b));
    Csv csv(cols);
    csv.comment("basis: anchored plane waves, cutoff " + std::to_string(cfg.cutoff) + ", dim " +
                std::to_string(PlaneWaveBasis({0, 0}, cfg.cutoff).dim()) + " (Gamma) " +
                std::to_string(PlaneWaveBasis({pi, 0}, cfg.cutoff).dim()) + " (X) " +
                std::to_string(PlaneWaveBasis({pi, pi}, cfg.cutoff).dim()) + " (M)");
    csv.comment("path Gamma-X-M-Gamma, " + std::to_string(opt.per_leg) + " points per leg, delta " + fmt(cfg.delta));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        csv.row() << int(i) << rows[i].kappa[0] << rows[i].kappa[1];
        for (int b = 0; b < opt.nbands; ++b) csv << (b < rows[i].lambda.size() ? rows[i].lambda[b] : std::nan(""));
    }
    out.write("bands.csv", csv.str());
    log << "bands: " << rows.size() << " momenta, " << opt.nbands << " bands -> bands.csv\n";
    return 0;
}

int cmd_degeneracy(Context& ctx, RunManifest& out, std::ostream& log) {
    for (const auto& l : ctx.selection().log) log << "  " << l << '\n';
    const DegeneracyReport r = ctx.degeneracy();
    const FitResult& f = r.fit;
    json doc = {{"lambda_star", r.lambda_star},
                {"band_pair", r.band_pair},
                {"irrep", r.irrep},
                {"gamma_star", r.gamma_star},
                {"eta_star", r.eta_star},
                {"fit_residual", r.fit_residual},
                {"fit", {{"gamma1", f.gamma1}, {"gamma2", f.gamma2}, {"eta1", f.eta1}, {"eta2", f.eta2},
                         {"consistency", f.consistency}, {"npoints", f.npoints}}},
                {"curvatures", {ctx.pair().curvatures[0], ctx.pair().curvatures[1]}},
                {"nofold", {{"margin", r.nofold.margin}, {"argmin", r.nofold.argmin}, {"band", r.nofold.argmin_band},
                            {"lower_is_max", r.nofold.lower_is_max}, {"upper_is_min", r.nofold.upper_is_min}}},
                {"no_dirac", {{"h1_scaled", r.nodirac.scaled1()}, {"h2_scaled", r.nodirac.scaled2()}}},
                {"parity_flags", r.parity_flags},
                {"v2_flipped", r.v2_flipped},
                {"selection_log", ctx.selection().log}};
    out.write("degeneracy.json", doc.dump(2) + "\n");
    const AnalyticBranch& br = ctx.branch();
    Csv csv({"p", "mu1", "mu2", "fit_mu1", "fit_mu2"});
    for (std::size_t j = 0; j < br.kgrid.size(); ++j) {
        const double p = br.kgrid[j] - pi, p2 = p * p;
        csv.row() << p << br.values[j][0] << br.values[j][1] << r.lambda_star - f.gamma * p2 / 2 - f.eta * p2 * p2
                  << r.lambda_star + f.gamma * p2 / 2 + f.eta * p2 * p2;
    }
    out.write("dispersion.csv", csv.str());
    log << "degeneracy: bands " << r.band_pair[0] << "," << r.band_pair[1] << " lambda*=" << fmt(r.lambda_star)
        << " gamma*=" << fmt(r.gamma_star) << " eta*=" << fmt(r.eta_star) << " residual=" << fmt(r.fit_residual)
        << " no-fold margin=" << fmt(r.nofold.margin) << "\n";
    return 0;
}

int cmd_flux(Context& ctx, RunManifest& out, std::ostream& log) {
    const MPointPair& P = ctx.pair();
    const double g = ctx.fit().gamma;
    const CrystalConfig& cfg = ctx.config();
    const FluxReport cell = flux_report_cell(P.basis, P.v, P.dv, cfg.contrast, cfg.radius);
    const FluxReport line = flux_report(P.basis, P.v, P.dv, 0.0);
    Csv csv({"pair", "method", "re", "im", "expected_re", "expected_im"});
    auto put = [&](const char* name, cplx c, cplx l, cplx e) {
        csv.row() << std::string(name) << std::string("cell") << c.real() << c.imag() << e.real() << e.imag();
        csv.row() << std::string(name) << std::string("line") << l.real() << l.imag() << e.real() << e.imag();
    };
    put("v1,v1", cell.q11, line.q11, 0);
    put("v2,v2", cell.q22, line.q22, 0);
    put("v1,v2", cell.q12, line.q12, 0);
    put("v1,dv1", cell.q1d1, line.q1d1, -I * g / 2.0);
    put("v2,dv2", cell.q2d2, line.q2d2, I * g / 2.0);
    put("v1,dv2", cell.q1d2, line.q1d2, 0);
    put("v2,dv1", cell.q2d1, line.q2d1, 0);
    put("dv1,dv2", cell.qd1d2, line.qd1d2, 0);
    out.write("flux.csv", csv.str());
    log << "flux: q(v1,dv1)=" << fmt(cell.q1d1.real()) << (cell.q1d1.imag() < 0 ? "" : "+") << fmt(cell.q1d1.imag())
        << "i against -i gamma*/2=" << fmt(-g / 2) << "i, max cross " << fmt(cell.max_cross()) << "\n";
    return 0;
}

int cmd_perturb(Context& ctx, RunManifest& out, std::ostream& log) {
    const CrystalConfig& cfg = ctx.config();
    const MPointPair& P = ctx.pair();
    const TStar t = ctx.t_star();
    const cplx r = ctx.r_star();
    const FitResult& f = ctx.fit();
    std::vector<double> pg;
    for (int i = -20; i <= 20; ++i) pg.push_back(0.01 * i);
    const PerturbedCheck pc = perturbed_eigenvalue_check(P, ctx.coeffs(), cfg.delta, pg, f.gamma, f.eta, t.t_star, r);
    const InversionOverlap io = band_inversion_overlap(P, cfg.delta);
    const auto gaps = verify_gap(P, ctx.coeffs(), t.t_star, {cfg.delta}, cfg.gap_fraction);
    json doc = {{"delta", cfg.delta},
                {"t_star", t.t_star},
                {"im_t_star", t.im_t_star},
                {"r_star", cjson(r)},
                {"max_rel_dev", pc.max_rel_dev},
                {"split_dev_at_pi", pc.split_dev_at_pi},
                {"inversion", {{"cross12", io.cross12}, {"cross21", io.cross21}, {"same11", io.same11}, {"same22", io.same22}}}};
    out.write("perturb.json", doc.dump(2) + "\n");
    Csv g({"delta", "gap_lo", "gap_hi", "gap_ratio", "argmax_lo", "argmin_hi", "interval_free"});
    for (const auto& x : gaps)
        g.row() << x.delta << x.gap_lo << x.gap_hi << x.gap_ratio << x.argmax_lo << x.argmin_hi << int(x.interval_free);
    out.write("gap.csv", g.str());
    Csv b({"kappa1", "mu1", "mu2", "model_mu1", "model_mu2"});
    for (double p : pg) {
        const double k1 = pi + p;
        const PlaneWaveBasis bs = P.basis.shifted({k1, pi});
        const VecR v = eigh_index(assemble({k1, pi}, cfg.delta, ctx.coeffs(), bs), P.n_star, P.n_star + 1).values;
        const double p2 = p * p, s = std::sqrt(sq(f.gamma * p2 / 2 + f.eta * p2 * p2) + sq(t.t_star * cfg.delta));
        b.row() << k1 << v[0] << v[1] << P.lambda_star - s << P.lambda_star + s;
    }
    out.write("perturbed_bands.csv", b.str());
    log << "perturb: t*=" << fmt(t.t_star) << " Im t*=" << fmt(t.im_t_star) << " gap ratio at delta=" << fmt(cfg.delta)
        << ": " << fmt(gaps[0].gap_ratio) << " splitting deviation " << fmt(pc.split_dev_at_pi) << "\n";
    return 0;
}

int cmd_green(Context& ctx, RunManifest& out, std::ostream& log) {
    GreenOptions o;
    o.eps1 = ctx.config().reg_epsilon;
    const GreenFunction G(ctx.pair(), ctx.coeffs(), o);
    const std::vector<std::array<Vec2, 2>> prs = {{{{0.3, 0.1}, {-0.2, 0.25}}},
                                                   {{{1.3, -0.4}, {0.1, 0.2}}},
                                                   {{{0.05, 0.0}, {0.0, 0.3}}},
                                                   {{{2.7, 0.45}, {-0.6, -0.1}}}};
    const GreenSymmetry s = green_symmetry_check(G, prs);
    VecC phi = VecC::Zero(G.gamma_modes().size());
    for (std::size_t k = 0; k < G.gamma_modes().size(); ++k)
        if (std::abs(G.gamma_modes()[k] - pi) < 1e-9) phi[k] = 1;
    const JumpReport j = jump_check(G, phi);
    const double kp = kernel_property(G, ctx.pair().v);
    const PdeResidual pr = pde_residual(G, {{0, 0}, {0.1, 0.05}, {0.5, 0.3}, {1.5, -0.2}, {-0.7, 0.4}});
    const DecayFit d = decay_split_check(G, {0, 0.1}, 0.2, 3, 8, 1.0);
    const DecayFit prof = decay_split_check(G, {0, 0.1}, 0.2, 0.25, 8, 0.25);
    Csv c({"check", "value"});
    c.row() << std::string("hermitian") << s.hermitian;
    c.row() << std::string("reflection") << s.reflection;
    c.row() << std::string("scale") << s.scale;
    c.row() << std::string("continuity") << j.continuity;
    c.row() << std::string("jump_ratio_dev") << j.jump_ratio_dev;
    c.row() << std::string("half_dev") << j.half_dev;
    c.row() << std::string("kernel_property") << kp;
    c.row() << std::string("pde_residual") << pr.max_residual;
    c.row() << std::string("decay_rate_raw") << d.rate_raw;
    c.row() << std::string("decay_rate_remainder") << d.rate_remainder;
    out.write("green.csv", c.str());
    Csv p({"x1", "abs_raw", "abs_remainder"});
    for (std::size_t i = 0; i < prof.x1.size(); ++i) p.row() << prof.x1[i] << prof.abs_raw[i] << prof.abs_remainder[i];
    out.write("green_decay.csv", p.str());
    log << "green: hermitian " << fmt(s.hermitian) << ", reflection " << fmt(s.reflection) << ", jump dev "
        << fmt(std::max(j.jump_ratio_dev, j.half_dev)) << ", kernel " << fmt(kp) << ", remainder decay rate "
        << fmt(d.rate_remainder) << "\n";
    return 0;
}

int cmd_kernels(Context& ctx, RunManifest& out, std::ostream& log) {
    const double t = ctx.t_star().t_star, g = ctx.fit().gamma;
    Csv k({"h", "k1", "k2", "k3", "e1", "e2", "e3"});
    for (int i = -19; i <= 19; ++i) {
        const double h = 0.05 * i * t;
        const Kernels K = scalar_kernels({t, g, h});
        k.row() << h << K.k1 << K.k2 << K.k3 << K.e1 << K.e2 << K.e3;
    }
    out.write("kernels.csv", k.str());
    Csv o({"delta", "h", "pair_rel_plus", "pair_rel_minus", "pair_edge_rel_plus", "pair_edge_rel_minus", "mixed_rel",
           "p2_law_rel_plus", "p2_law_rel_minus", "p4_law_rel_plus", "p4_law_rel_minus"});
    double worst = 0;
    for (double d : {1e-4, 1e-6, 1e-8})
        for (double h : {0.0, 0.5 * t, -0.5 * t}) {
            const OracleComparison c = compare_oracle(d, h, t, g);
            o.row() << d << h << c.prop2_rel[0] << c.prop2_rel[1] << c.prop2_edge_rel[0] << c.prop2_edge_rel[1]
                    << c.prop3_rel << c.k2_rel[0] << c.k2_rel[1] << c.k4_rel[0] << c.k4_rel[1];
            if (d == 1e-6) worst = std::max({worst, c.prop2_rel[0], c.prop2_rel[1], c.prop3_rel});
        }
    out.write("kernel_oracle.csv", o.str());
    log << "kernels: closed forms on 39 h values; quadrature oracle worst relative deviation at delta=1e-6: "
        << fmt(worst) << "\n";
    return 0;
}

int cmd_interface(Context& ctx, RunManifest& out, const RunOptions& opt, std::ostream& log) {
    const CrystalConfig& cfg = ctx.config();
    SupercellSpec sp;
    sp.N = opt.supercell;
    sp.delta = cfg.delta;
    sp.cutoff2 = cfg.cutoff;
    sp.band_lo = opt.band_lo;
    sp.band_hi = opt.band_hi;
    if (sp.projected()) sp.dim_cap = 20000;
    sp.validate();
    const PairSelection& sel = ctx.selection();
    const InterfaceSpectrum s =
        find_interface_modes(sp, ctx.coeffs(), sel.lambda_star, ctx.t_star().t_star, cfg.gap_fraction);
    const BifurcationRow r = bifurcation_row(s);
    Csv m({"index", "lambda", "h", "in_gap", "junction", "center", "concentration", "decay_rate", "splitting"});
    json modes = json::array();
    int k = 0, pk = 0;
    for (const auto& x : s.modes) {
        m.row() << k << x.lambda << x.h << int(x.in_gap) << x.junction << x.center << x.concentration << x.decay_rate
                << x.splitting;
        modes.push_back({{"lambda", x.lambda}, {"h", x.h}, {"in_gap", x.in_gap}, {"junction", x.junction},
                         {"center", x.center}, {"concentration", x.concentration}, {"decay_rate", x.decay_rate},
                         {"splitting", x.splitting}});
        if (x.in_gap) {
            Csv p({"cell", "x1_center", "mass"});
            for (int c = 0; c < 2 * s.N; ++c) p.row() << c - s.N << c - s.N + 0.5 << x.cell_mass[c];
            out.write("profile_" + std::to_string(pk++) + ".csv", p.str());
        }
        ++k;
    }
    out.write("interface_modes.csv", m.str());
    json doc = {{"N", s.N},
                {"delta", s.delta},
                {"lambda_star", s.lambda_star},
                {"t_star", s.t_star},
                {"gap", {s.gap_lo, s.gap_hi}},
                {"dim", s.dim},
                {"projected_bands", sp.projected() ? json::array({sp.band_lo, sp.band_hi}) : json()},
                {"in_gap", int(s.in_gap().size())},
                {"interface", s.count("interface")},
                {"wrap", s.count("wrap")},
                {"delocalized", s.count("delocalized")},
                {"h_interface", r.h_interface},
                {"h_wrap", r.h_wrap},
                {"rel_dev", r.rel_dev},
                {"asymmetry", r.asymmetry},
                {"junction_match", r.junction_match},
                {"finite_size_warning", s.finite_size_warning},
                {"modes", modes}};
    out.write("interface.json", doc.dump(2) + "\n");
    log << "interface: N=" << s.N << " delta=" << fmt(s.delta) << " dim=" << s.dim << ", " << s.in_gap().size()
        << " in-gap states (" << s.count("interface") << " at x1=0, " << s.count("wrap") << " at the wrap junction, "
        << s.count("delocalized") << " delocalized)\n";
    for (double h : r.h_interface) log << "  h=" << fmt(h) << "  |h|/(|t*|/sqrt2)=" << fmt(std::abs(h) / (std::abs(s.t_star) / std::sqrt(2.0))) << "\n";
    if (s.finite_size_warning)
        log << "warning: finite-size effects; the decay length exceeds the supercell, increase --supercell\n";
    return 0;
}

int cmd_verify(Context& ctx, RunManifest& out, std::ostream& log) {
    Csv c({"criterion", "title", "status", "blocking", "seconds", "budget_seconds", "summary"});
    bool ok = true;
    const auto res = run_acceptance(ctx.config(), {}, [&](const Criterion& x) { log << format_criterion(x) << std::flush; });
    for (const auto& x : res) {
        c.row() << x.id << x.title << std::string(x.pass ? "PASS" : "FAIL") << int(x.blocking) << x.seconds << x.budget
                << ('"' + x.summary + '"');
        if (x.blocking && !x.pass) ok = false;
    }
    out.write("acceptance.csv", c.str());
    return ok ? 0 : 1;
}

}  // namespace

int run_command(const std::string& command, Context& ctx, RunManifest& out, const RunOptions& opt, std::ostream& log) {
    if (command == "bands") return cmd_bands(ctx, out, opt, log);
    if (command == "degeneracy") return cmd_degeneracy(ctx, out, log);
    if (command == "flux") return cmd_flux(ctx, out, log);
    if (command == "perturb") return cmd_perturb(ctx, out, log);
    if (command == "green") return cmd_green(ctx, out, log);
    if (command == "kernels") return cmd_kernels(ctx, out, log);
    if (command == "interface") return cmd_interface(ctx, out, opt, log);
    if (command == "verify-all") return cmd_verify(ctx, out, log);
    if (command == "bie-scan") {
        log << "bie-scan: the boundary-integral scan is not available in this build\n";
        return 1;
    }
    throw ConfigError("command", "unknown command '" + command + "'");
}

}  // namespace ql
