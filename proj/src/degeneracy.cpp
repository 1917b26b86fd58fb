#include "quadlattice/degeneracy.hpp"

#include "quadlattice/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace ql {

std::vector<std::array<int, 2>> find_clusters(const VecR& values, double rel_tol) {
    std::vector<std::array<int, 2>> out;
    const int n = static_cast<int>(values.size());
    int start = 0;
    for (int i = 1; i <= n; ++i) {
        if (i == n || std::abs(values[i] - values[i - 1]) >= rel_tol * std::max(1.0, std::abs(values[i - 1]))) {
            out.push_back({start, i - 1});
            start = i;
        }
    }
    return out;
}

MatC representation(const PlaneWaveBasis& basis, PointOp op, const MatC& U) {
    const auto perm = basis.symmetry_map(op);
    MatC GU(U.rows(), U.cols());
    for (Eigen::Index b = 0; b < U.cols(); ++b) GU.col(b) = apply_map(perm, U.col(b));
    return U.adjoint() * GU;
}

namespace {

bool rotation_fixes(Vec2 k) {
    auto on = [](double x, double target) {
        const double r = (x - target) / (2 * pi);
        return std::abs(r - std::round(r)) < 1e-12;
    };
    return (on(k[0], 0) && on(k[1], 0)) || (on(k[0], pi) && on(k[1], pi));
}

double defect_identity(const MatC& D) { return (D - MatC::Identity(D.rows(), D.cols())).cwiseAbs().maxCoeff(); }

}  // namespace

IrrepResult classify_subspace(const PlaneWaveBasis& basis, const MatC& U) {
    IrrepResult r;
    r.dim = static_cast<int>(U.cols());
    r.M1 = representation(basis, PointOp::M1, U);
    r.M2 = representation(basis, PointOp::M2, U);
    const bool c4 = rotation_fixes(basis.kappa());
    if (c4) r.R = representation(basis, PointOp::R, U);

    for (const MatC* D : {&r.M1, &r.M2, &r.R})
        if (D->size() > 0) r.unitarity_defect = std::max(r.unitarity_defect, defect_identity(D->adjoint() * *D));
    r.relation_defect = defect_identity(r.M2 * r.M2);
    if (c4) {
        const MatC R2 = r.R * r.R;
        r.relation_defect = std::max({r.relation_defect, defect_identity(R2 * R2),
                                      (r.M2 * r.R.adjoint() - r.R * r.M2).cwiseAbs().maxCoeff()});
    }

    if (r.dim > 2) {
        r.label = "unresolved";
    } else if (!c4) {
        if (r.dim == 1) {
            const double a = r.M1(0, 0).real(), b = r.M2(0, 0).real();
            r.label = std::string("X(") + (a > 0 ? "+" : "-") + "," + (b > 0 ? "+" : "-") + ")";
        } else {
            r.label = "accidental";
        }
    } else if (r.dim == 1) {
        const double a = r.R(0, 0).real(), b = r.M2(0, 0).real();
        if (std::abs(std::abs(a) - 1) > 1e-6 || std::abs(std::abs(b) - 1) > 1e-6)
            r.label = "accidental";
        else if (a > 0)
            r.label = b > 0 ? "rho1" : "rho2";
        else
            r.label = b > 0 ? "rho3" : "rho4";
    } else {
        const MatC R2 = r.R * r.R;
        const bool rho5 = std::abs(r.R.trace()) < 1e-8 &&
                          (R2 + MatC::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8;
        r.label = rho5 ? "rho5" : "accidental";
    }
    return r;
}

IrrepResult classify_irrep(const BlochSolution& sol, std::array<int, 2> cluster) {
    const int n = cluster[1] - cluster[0] + 1;
    return classify_subspace(sol.basis, sol.eigenvectors.middleCols(cluster[0], n));
}

MatC rho5_block(const PlaneWaveBasis& basis, const MatC& U) {
    const MatC R = representation(basis, PointOp::R, U);
    MatC P = 0.5 * (MatC::Identity(U.cols(), U.cols()) - R * R);
    P = 0.5 * (P + P.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<MatC> es(P);
    std::vector<int> keep;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()[i] > 0.5) keep.push_back(i);
    MatC out(U.rows(), static_cast<Eigen::Index>(keep.size()));
    for (size_t j = 0; j < keep.size(); ++j) out.col(j) = U * es.eigenvectors().col(keep[j]);
    return out;
}

NoDirac no_dirac_check(const BlochDerivatives& d, const MatC& U) {
    NoDirac r;
    r.h1 = (U.adjoint() * d.A1[0] * U).cwiseAbs().maxCoeff();
    r.h2 = (U.adjoint() * d.A1[1] * U).cwiseAbs().maxCoeff();
    r.scale1 = d.A1[0].cwiseAbs().maxCoeff();
    r.scale2 = d.A1[1].cwiseAbs().maxCoeff();
    return r;
}

namespace {

// least squares y ~ sign * (g p^2 / 2 + e p^4); returns (g, e, max-norm relative residual)
std::array<double, 3> quartic_fit(const std::vector<double>& p, const std::vector<double>& y, double sign) {
    const int n = static_cast<int>(p.size());
    MatR X(n, 2);
    VecR Y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = sign * 0.5 * p[i] * p[i];
        X(i, 1) = sign * std::pow(p[i], 4);
        Y[i] = y[i];
    }
    const VecR c = X.colPivHouseholderQr().solve(Y);
    const double scale = Y.cwiseAbs().maxCoeff();
    const double res = scale > 0 ? (X * c - Y).cwiseAbs().maxCoeff() / scale : 0.0;
    return {c[0], c[1], res};
}

}  // namespace

FitResult fit_dispersion(const std::vector<double>& p, const std::vector<double>& mu1, const std::vector<double>& mu2,
                         double lambda_star, double window) {
    std::vector<double> pp, y1, y2;
    for (size_t i = 0; i < p.size(); ++i)
        if (std::abs(p[i]) <= window + 1e-12) {
            pp.push_back(p[i]);
            y1.push_back(mu1[i] - lambda_star);
            y2.push_back(mu2[i] - lambda_star);
        }
    if (pp.size() < 3) throw std::invalid_argument("fit window holds fewer than 3 grid points");
    const auto a = quartic_fit(pp, y1, -1.0);
    const auto b = quartic_fit(pp, y2, +1.0);
    FitResult r;
    r.gamma1 = a[0];
    r.eta1 = a[1];
    r.gamma2 = b[0];
    r.eta2 = b[1];
    r.gamma = 0.5 * (a[0] + b[0]);
    r.eta = 0.5 * (a[1] + b[1]);
    r.residual = std::max(a[2], b[2]);
    r.consistency = std::abs(a[0] - b[0]) / std::abs(r.gamma);
    r.npoints = static_cast<int>(pp.size());
    return r;
}

FitResult fit_dispersion(const AnalyticBranch& br, double window) {
    std::vector<double> p, m1, m2;
    for (size_t j = 0; j < br.kgrid.size(); ++j) {
        p.push_back(br.kgrid[j] - pi);
        m1.push_back(br.values[j][0]);
        m2.push_back(br.values[j][1]);
    }
    return fit_dispersion(p, m1, m2, br.lambda_star, window);
}

BzSample sample_bz(const FourierCoeffs& coeffs, int cutoff, int nbands, int grid, int line_points) {
    // momenta in units of 2*pi/den, den common to the grid and the line
    const int den = std::lcm(grid, 2 * (line_points - 1));
    std::vector<std::array<int, 2>> pts;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) pts.push_back({i * (den / grid), j * (den / grid)});
    for (int i = 0; i < line_points; ++i) pts.push_back({i * (den / (line_points - 1)), den / 2});

    auto fold = [den](int m) {
        m = ((m % den) + den) % den;
        return std::min(m, den - m);
    };
    std::map<std::array<int, 2>, int> reps;
    std::vector<int> rep_of(pts.size());
    std::vector<std::array<int, 2>> uniq;
    for (size_t p = 0; p < pts.size(); ++p) {
        int a = fold(pts[p][0]), b = fold(pts[p][1]);
        if (b > a) std::swap(a, b);
        auto [it, fresh] = reps.try_emplace({a, b}, static_cast<int>(uniq.size()));
        if (fresh) uniq.push_back({a, b});
        rep_of[p] = it->second;
    }
    std::vector<VecR> vals(uniq.size());
    parallel_for(uniq.size(), [&](std::size_t u) {
        const Vec2 k{2 * pi * uniq[u][0] / den, 2 * pi * uniq[u][1] / den};
        const PlaneWaveBasis b(k, cutoff);
        vals[u] = eigh_index(assemble_parts(k, coeffs, b).A, 0, std::min(nbands, b.dim()) - 1).values;
    });
    BzSample s;
    s.nbands = nbands;
    for (size_t p = 0; p < pts.size(); ++p) {
        s.kappas.push_back({2 * pi * pts[p][0] / den, 2 * pi * pts[p][1] / den});
        s.values.push_back(vals[rep_of[p]]);
    }
    return s;
}

NoFold nofold_check(const BzSample& bz, int n_star, double lambda_star) {
    if (n_star + 2 >= bz.nbands) throw std::invalid_argument("Brillouin-zone sample holds too few bands for the pair");
    NoFold r;
    r.margin = std::numeric_limits<double>::infinity();
    double max_lo = -std::numeric_limits<double>::infinity(), min_hi = std::numeric_limits<double>::infinity();
    for (size_t p = 0; p < bz.kappas.size(); ++p) {
        const VecR& v = bz.values[p];
        for (int b = 0; b < v.size(); ++b) {
            if (b == n_star || b == n_star + 1) continue;
            const double d = std::abs(v[b] - lambda_star);
            if (d < r.margin) {
                r.margin = d;
                r.argmin = bz.kappas[p];
                r.argmin_band = b;
            }
        }
        max_lo = std::max(max_lo, v[n_star]);
        min_hi = std::min(min_hi, v[n_star + 1]);
    }
    const double tol = 1e-9 * std::max(1.0, std::abs(lambda_star));
    r.lower_is_max = max_lo <= lambda_star + tol;
    r.upper_is_min = min_hi >= lambda_star - tol;
    return r;
}

PairSelection select_pair(const FourierCoeffs& coeffs, int cutoff, int scan_bands, const BzSample* bz_in) {
    const Vec2 M{pi, pi};
    const PlaneWaveBasis basis(M, cutoff);
    const int nb = std::min(scan_bands + 2, basis.dim());
    const Eig e = eigh_index(assemble_parts(M, coeffs, basis).A, 0, nb - 1);
    std::optional<BzSample> own;
    if (!bz_in) own = sample_bz(coeffs, cutoff, nb);
    const BzSample& bz = bz_in ? *bz_in : *own;

    PairSelection sel;
    double best_margin = -1;
    bool curvature_failure = false;
    for (const auto& cl : find_clusters(e.values.head(std::min(scan_bands, nb)))) {
        const int dim = cl[1] - cl[0] + 1;
        if (dim < 2 || cl[1] + 1 >= nb) continue;
        const MatC U = e.vectors.middleCols(cl[0], dim);
        std::string label;
        if (dim == 2) {
            label = classify_subspace(basis, U).label;
            if (label != "rho5") continue;
        } else {
            if (rho5_block(basis, U).cols() != 2) continue;
            label = "rho5 (inside a " + std::to_string(dim) + "-fold level)";
        }
        const double lam = e.values.segment(cl[0], dim).mean();
        const NoFold nf = nofold_check(bz, cl[0], lam);
        std::ostringstream os;
        os << "bands " << cl[0] << "," << cl[0] + 1 << " lambda=" << lam << " " << label << " margin=" << nf.margin;
        best_margin = std::max(best_margin, nf.margin);
        if (dim != 2 || nf.margin <= 0) {
            sel.log.push_back(os.str() + " rejected: no-fold");
            continue;
        }
        const MPointPair P = build_mpoint_pair(coeffs, cutoff, cl[0]);
        os << " curvatures=" << P.curvatures[0] << "," << P.curvatures[1];
        if (!(P.curvatures[0] < 0 && P.curvatures[1] > 0)) {
            curvature_failure = true;
            sel.log.push_back(os.str() + " rejected: curvature");
            continue;
        }
        sel.log.push_back(os.str() + " selected");
        sel.n_star = cl[0];
        sel.lambda_star = lam;
        sel.irrep = label;
        sel.nofold = nf;
        sel.curvatures[0] = P.curvatures[0];
        sel.curvatures[1] = P.curvatures[1];
        return sel;
    }
    std::ostringstream msg;
    if (curvature_failure) {
        msg << "quadratic degeneracy: no rho5 pair at M with opposite curvatures";
        throw AssumptionError("quadratic dispersion", msg.str());
    }
    msg << "no-fold condition violated: no rho5 pair at M among the lowest " << scan_bands
        << " bands has a positive no-fold margin (best margin " << std::max(best_margin, 0.0) << ")";
    throw AssumptionError("no-fold", msg.str());
}

cplx energy_flux(const FluxField& u, const FluxField& v, double s) {
    if (u.basis != v.basis) {
        const double dk = u.basis->kappa()[1] - v.basis->kappa()[1];
        if (std::abs(dk) > 1e-12) throw std::invalid_argument("flux between incompatible kappa2 quasi-momenta");
    }
    const PlaneWaveBasis& b = *u.basis;
    int lo = 0, hi = 0;
    for (const auto& n : b.indices()) {
        lo = std::min(lo, n[1]);
        hi = std::max(hi, n[1]);
    }
    const int w = hi - lo + 1;
    std::vector<cplx> U(w), dU(w), V(w), dV(w);
    auto accumulate = [&](const FluxField& f, std::vector<cplx>& T, std::vector<cplx>& dT) {
        for (int i = 0; i < b.dim(); ++i) {
            const double k1 = b.k1(i);
            const cplx e = std::exp(I * (k1 * s));
            const cplx d = f.d.size() ? f.d[i] : cplx(0);
            const cplx val = f.c[i] + I * s * d;
            const int slot = b.indices()[i][1] - lo;
            T[slot] += e * val;
            dT[slot] += e * (I * k1 * val + I * d);
        }
    };
    accumulate(u, U, dU);
    accumulate(v, V, dV);
    cplx q = 0;
    for (int j = 0; j < w; ++j) q += dU[j] * std::conj(V[j]) - U[j] * std::conj(dV[j]);
    return q;
}

FluxReport flux_report(const PlaneWaveBasis& basis, const MatC& v, const MatC& dv, double s) {
    const FluxField f1{&basis, v.col(0), VecC()}, f2{&basis, v.col(1), VecC()};
    const FluxField d1{&basis, dv.col(0), v.col(0)}, d2{&basis, dv.col(1), v.col(1)};
    FluxReport r;
    r.q11 = energy_flux(f1, f1, s);
    r.q22 = energy_flux(f2, f2, s);
    r.q12 = energy_flux(f1, f2, s);
    r.q1d1 = energy_flux(f1, d1, s);
    r.q2d2 = energy_flux(f2, d2, s);
    r.q1d2 = energy_flux(f1, d2, s);
    r.q2d1 = energy_flux(f2, d1, s);
    r.qd1d2 = energy_flux(d1, d2, s);
    return r;
}

std::array<double, 4> parity_check(const PlaneWaveBasis& basis, const MatC& v, const MatC& dv) {
    const auto m1 = basis.symmetry_map(PointOp::M1);
    std::array<double, 4> out{};
    const VecC ws[4] = {v.col(0), v.col(1), dv.col(0), dv.col(1)};
    for (int i = 0; i < 4; ++i) {
        const cplx o = ws[i].dot(apply_map(m1, ws[i])) / ws[i].squaredNorm();
        if (std::abs(o) < 0.99) {
            std::ostringstream os;
            os << "parity overlap modulus " << std::abs(o) << " below 0.99 for mode " << i;
            throw NumericalError(os.str());
        }
        out[i] = o.real();
    }
    return out;
}

}  // namespace ql

namespace ql {

namespace {

// int_{[s0,s0+1] x [0,1]} x1^m A(x) e^{i D.x} dx, m = 0, 1, 2, D = 2 pi (m1, m2)
std::array<cplx, 3> cell_moments(int m1, int m2, double contrast, double r, double s0) {
    std::array<cplx, 3> w{};
    if (m2 == 0) {
        if (m1 == 0) {
            for (int m = 0; m < 3; ++m) w[m] = (std::pow(s0 + 1, m + 1) - std::pow(s0, m + 1)) / (m + 1);
        } else {
            const double a = 2 * pi * m1;
            const cplx e = std::exp(I * (a * s0));
            w[1] = e / (I * a);
            w[2] = e * (2 * s0 + 1) / (I * a) - 2.0 * e / ((I * a) * (I * a));
        }
    }
    if (contrast == 0 || r == 0) return w;
    const double D1 = 2 * pi * m1, D2 = 2 * pi * m2, q = std::hypot(D1, D2);
    double F0, dF, F2;
    if (m1 == 0 && m2 == 0) {
        F0 = pi * r * r;
        dF = 0;
        F2 = pi * std::pow(r, 4) / 4;
    } else {
        const double z = q * r;
        const double j1 = std::cyl_bessel_j(1.0, z), j2 = std::cyl_bessel_j(2.0, z);
        F0 = 2 * pi * r * r * j1 / z;
        const double fp = -2 * pi * r * r * j2 / q;
        const double fpp = -2 * pi * r * r * (r * (j1 - 2 * j2 / z) / q - j2 / (q * q));
        dF = D1 / q * fp;
        F2 = -(fpp * (D1 / q) * (D1 / q) + fp * (1 / q - D1 * D1 / (q * q * q)));
    }
    const cplx F1 = -I * dF;
    const double sg = ((m1 + m2) % 2 == 0) ? 1.0 : -1.0;
    w[0] += contrast * sg * F0;
    w[1] += contrast * sg * (0.5 * F0 + F1);
    w[2] += contrast * sg * (0.25 * F0 + F1 + F2);
    return w;
}

}  // namespace

cplx energy_flux_cell(const FluxField& u, const FluxField& v, double contrast, double radius, double s0) {
    if (s0 > 0.5 - radius || s0 + 1 < 0.5 + radius)
        throw std::invalid_argument("flux window must contain the inclusion whole");
    const PlaneWaveBasis& b = *u.basis;
    const auto& n = b.indices();
    const int d = b.dim();
    VecC bu = u.d.size() ? VecC(I * u.d) : VecC::Zero(d);
    VecC bv = v.d.size() ? VecC(I * v.d) : VecC::Zero(d);
    std::map<std::array<int, 2>, std::array<cplx, 3>> cache;
    cplx s = 0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const std::array<int, 2> key{n[i][0] - n[j][0], n[i][1] - n[j][1]};
            auto it = cache.find(key);
            if (it == cache.end()) it = cache.emplace(key, cell_moments(key[0], key[1], contrast, radius, s0)).first;
            const auto& w = it->second;
            const cplx al = u.c[i], be = bu[i], alp = std::conj(v.c[j]), bep = std::conj(bv[j]);
            const double ks = b.k1(i) + v.basis->k1(j);
            s += I * ks * (al * alp * w[0] + (al * bep + be * alp) * w[1] + be * bep * w[2]) +
                 (be * alp - al * bep) * w[0];
        }
    return s;
}

double FluxReport::max_cross() const {
    return std::max({std::abs(q11), std::abs(q22), std::abs(q12), std::abs(q1d2), std::abs(q2d1), std::abs(qd1d2)});
}

FluxReport flux_report_cell(const PlaneWaveBasis& basis, const MatC& v, const MatC& dv, double contrast, double radius,
                            double s0) {
    const FluxField f1{&basis, v.col(0), VecC()}, f2{&basis, v.col(1), VecC()};
    const FluxField d1{&basis, dv.col(0), v.col(0)}, d2{&basis, dv.col(1), v.col(1)};
    auto q = [&](const FluxField& a, const FluxField& b) { return energy_flux_cell(a, b, contrast, radius, s0); };
    return {q(f1, f1), q(f2, f2), q(f1, f2), q(f1, d1), q(f2, d2), q(f1, d2), q(f2, d1), q(d1, d2)};
}

}  // namespace ql
