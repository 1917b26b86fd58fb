#include "quadlattice/perturbation.hpp"

#include "quadlattice/parallel.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <limits>

namespace ql {

TStar compute_t_star(const MatC& v, const MatC& B) {
    const cplx t = -v.col(1).dot(B * v.col(0));
    return {t.real(), t.imag()};
}

TStar compute_t_star(const MPointPair& pair) { return compute_t_star(pair.v, pair.parts.B); }

cplx compute_r_star(const MPointPair& pair, const MatC& v) {
    const VecC v1 = v.col(0), v2 = v.col(1);
    const MatC Td = pair.projected_solve(pair.parts.B, v2);
    const MatC Tp = pair.projected_solve(pair.derivs.A1[0], v2);
    const cplx a = v1.dot(pair.derivs.B1[0] * v2);
    const cplx b = v1.dot(pair.derivs.A1[0] * Td.col(0));
    const cplx c = v1.dot(pair.parts.B * Tp.col(0));
    return -(a + b + c);
}

cplx compute_r_star(const MPointPair& pair) { return compute_r_star(pair, pair.v); }

namespace {

std::array<double, 2> pair_values(const MPointPair& pair, const FourierCoeffs& coeffs, double kappa1, double delta) {
    const MatC M = assemble({kappa1, pi}, delta, coeffs, pair.basis);
    const VecR w = eigh_index(M, pair.n_star, pair.n_star + 1).values;
    return {w[0], w[1]};
}

}  // namespace

std::vector<GapRow> verify_gap(const MPointPair& pair, const FourierCoeffs& coeffs, double t_star,
                               const std::vector<double>& deltas, double gap_fraction) {
    std::vector<double> ks;
    const int coarse = 128, dense = 240;
    for (int i = 0; i <= coarse; ++i) ks.push_back(2 * pi * i / coarse);
    for (int i = -dense / 2; i <= dense / 2; ++i) ks.push_back(pi + 0.3 * i / (dense / 2));

    std::vector<GapRow> rows(deltas.size());
    for (size_t d = 0; d < deltas.size(); ++d) {
        const double delta = deltas[d];
        const double lam = pair.lambda_star;
        const double half = gap_fraction * std::abs(t_star * delta);
        std::vector<VecR> vals(ks.size());
        parallel_for(ks.size(), [&](std::size_t i) {
            const MatC M = assemble({ks[i], pi}, delta, coeffs, pair.basis);
            vals[i] = eigh_index(M, std::max(0, pair.n_star - 1), pair.n_star + 2).values;
        });
        const int off = pair.n_star > 0 ? 1 : 0;
        GapRow r;
        r.delta = delta;
        r.gap_lo = -std::numeric_limits<double>::infinity();
        r.gap_hi = std::numeric_limits<double>::infinity();
        r.interval_free = true;
        for (size_t i = 0; i < ks.size(); ++i) {
            if (vals[i][off] > r.gap_lo) {
                r.gap_lo = vals[i][off];
                r.argmax_lo = ks[i];
            }
            if (vals[i][off + 1] < r.gap_hi) {
                r.gap_hi = vals[i][off + 1];
                r.argmin_hi = ks[i];
            }
            for (int b = 0; b < vals[i].size(); ++b)
                if (std::abs(vals[i][b] - lam) < half) r.interval_free = false;
        }
        // refine both extremes on a bracket of the dense spacing
        const double step = 0.3 / (dense / 2);
        const int bits = std::numeric_limits<double>::digits / 2;
        {
            auto f = [&](double k) { return -pair_values(pair, coeffs, k, delta)[0]; };
            const auto res = boost::math::tools::brent_find_minima(f, r.argmax_lo - step, r.argmax_lo + step, bits);
            if (-res.second > r.gap_lo) {
                r.gap_lo = -res.second;
                r.argmax_lo = res.first;
            }
        }
        {
            auto f = [&](double k) { return pair_values(pair, coeffs, k, delta)[1]; };
            const auto res = boost::math::tools::brent_find_minima(f, r.argmin_hi - step, r.argmin_hi + step, bits);
            if (res.second < r.gap_hi) {
                r.gap_hi = res.second;
                r.argmin_hi = res.first;
            }
        }
        if (r.gap_lo > lam - half || r.gap_hi < lam + half) r.interval_free = false;
        r.gap_ratio = delta == 0 ? 0.0 : (r.gap_hi - r.gap_lo) / (2 * std::abs(t_star * delta));
        rows[d] = r;
    }
    return rows;
}

PerturbedCheck perturbed_eigenvalue_check(const MPointPair& pair, const FourierCoeffs& coeffs, double delta,
                                          const std::vector<double>& pgrid, double gamma, double eta, double t_star,
                                          cplx r_star) {
    std::vector<std::array<double, 2>> vals(pgrid.size());
    parallel_for(pgrid.size(), [&](std::size_t i) { vals[i] = pair_values(pair, coeffs, pi + pgrid[i], delta); });
    PerturbedCheck out;
    for (size_t i = 0; i < pgrid.size(); ++i) {
        const double p = pgrid[i];
        const double q = gamma * p * p / 2 + eta * std::pow(p, 4);
        const double root = std::sqrt(q * q + delta * delta * std::norm(t_star + r_star * p));
        if (root == 0) continue;
        const double d1 = std::abs((pair.lambda_star - vals[i][0]) - root) / root;
        const double d2 = std::abs((vals[i][1] - pair.lambda_star) - root) / root;
        out.max_rel_dev = std::max({out.max_rel_dev, d1, d2});
    }
    if (delta != 0) {
        const auto v0 = pair_values(pair, coeffs, pi, delta);
        out.split_dev_at_pi = std::abs((v0[1] - v0[0]) - 2 * std::abs(t_star * delta)) / (2 * std::abs(t_star * delta));
    }
    return out;
}

InversionOverlap band_inversion_overlap(const MPointPair& pair, double delta) {
    if (std::abs(delta) < 1e-5) throw std::invalid_argument("band inversion overlaps need |delta| >= 1e-5");
    const Eig p = eigh_index(pair.parts.combined(delta), pair.n_star, pair.n_star + 1);
    const Eig m = eigh_index(pair.parts.combined(-delta), pair.n_star, pair.n_star + 1);
    InversionOverlap r;
    r.cross12 = std::abs(p.vectors.col(0).dot(m.vectors.col(1)));
    r.cross21 = std::abs(p.vectors.col(1).dot(m.vectors.col(0)));
    r.same11 = std::abs(p.vectors.col(0).dot(m.vectors.col(0)));
    r.same22 = std::abs(p.vectors.col(1).dot(m.vectors.col(1)));
    return r;
}

double eval_f_star(double kappa1, double delta, double t_star, double gamma_star) {
    const double p2 = (kappa1 - pi) * (kappa1 - pi);
    const double td = t_star * delta;
    const double den = gamma_star * p2 / 2 + std::sqrt(gamma_star * gamma_star * p2 * p2 / 4 + td * td);
    if (den == 0) return 0;
    return td / den;
}

std::array<double, 2> normalization_factors(const MPointPair& pair) {
    return {pair.dv.col(0).squaredNorm(), pair.dv.col(1).squaredNorm()};
}

}  // namespace ql
