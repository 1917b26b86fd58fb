#include "quadlattice/bloch.hpp"

#include "quadlattice/parallel.hpp"

#include <cmath>
#include <sstream>

namespace ql {

namespace {

void check_table(const FourierCoeffs& coeffs, const PlaneWaveBasis& basis) {
    if (basis.max_index_difference() > coeffs.table_half()) {
        std::ostringstream os;
        os << "coefficient table half-width " << coeffs.table_half() << " below basis index spread "
           << basis.max_index_difference();
        throw std::invalid_argument(os.str());
    }
}

template <class F>
MatC fill_hermitian(int n, F&& entry) {
    MatC M(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = j; i < n; ++i) {
            const cplx v = entry(i, j);
            M(i, j) = v;
            M(j, i) = std::conj(v);
        }
        M(j, j) = M(j, j).real();
    }
    return M;
}

}  // namespace

BlochParts assemble_parts(Vec2 kappa, const FourierCoeffs& coeffs, const PlaneWaveBasis& basis) {
    check_table(coeffs, basis);
    const PlaneWaveBasis b = basis.shifted(kappa);
    const auto& n = b.indices();
    const VecR& k1 = b.k1s();
    const VecR& k2 = b.k2s();
    BlochParts p;
    p.A = fill_hermitian(b.dim(), [&](int i, int j) {
        const cplx a = coeffs.a_hat(n[i][0] - n[j][0], n[i][1] - n[j][1]);
        cplx v = a * (k1[i] * k1[j] + k2[i] * k2[j]);
        if (i == j) v += k1[i] * k1[i] + k2[i] * k2[i];
        return v;
    });
    p.B = fill_hermitian(b.dim(), [&](int i, int j) {
        const cplx bb = coeffs.b_hat(n[i][0] - n[j][0], n[i][1] - n[j][1]);
        return bb * (-I * k1[i] * k2[j] + I * k2[i] * k1[j]);
    });
    return p;
}

BlochDerivatives assemble_derivatives(Vec2 kappa, const FourierCoeffs& coeffs, const PlaneWaveBasis& basis) {
    check_table(coeffs, basis);
    const PlaneWaveBasis b = basis.shifted(kappa);
    const auto& n = b.indices();
    const VecR& k1 = b.k1s();
    const VecR& k2 = b.k2s();
    const int d = b.dim();
    BlochDerivatives D;
    D.A1[0] = fill_hermitian(d, [&](int i, int j) {
        cplx v = coeffs.a_hat(n[i][0] - n[j][0], n[i][1] - n[j][1]) * (k1[i] + k1[j]);
        if (i == j) v += 2 * k1[i];
        return v;
    });
    D.A1[1] = fill_hermitian(d, [&](int i, int j) {
        cplx v = coeffs.a_hat(n[i][0] - n[j][0], n[i][1] - n[j][1]) * (k2[i] + k2[j]);
        if (i == j) v += 2 * k2[i];
        return v;
    });
    D.B1[0] = fill_hermitian(d, [&](int i, int j) {
        return coeffs.b_hat(n[i][0] - n[j][0], n[i][1] - n[j][1]) * (-I * k2[j] + I * k2[i]);
    });
    D.B1[1] = fill_hermitian(d, [&](int i, int j) {
        return coeffs.b_hat(n[i][0] - n[j][0], n[i][1] - n[j][1]) * (-I * k1[i] + I * k1[j]);
    });
    D.A2 = fill_hermitian(d, [&](int i, int j) {
        cplx v = coeffs.a_hat(n[i][0] - n[j][0], n[i][1] - n[j][1]);
        if (i == j) v += 1.0;
        return v;
    });
    return D;
}

MatC assemble(Vec2 kappa, double delta, const FourierCoeffs& coeffs, const PlaneWaveBasis& basis) {
    return assemble_parts(kappa, coeffs, basis).combined(delta);
}

BlochSolution solve_bloch(Vec2 kappa, double delta, int nbands, const FourierCoeffs& coeffs,
                          const PlaneWaveBasis& basis) {
    if (nbands < 1 || nbands > basis.dim()) throw std::invalid_argument("nbands outside [1, basis dim]");
    const MatC M = assemble(kappa, delta, coeffs, basis);
    Eig e = eigh_index(M, 0, nbands - 1);
    BlochSolution s;
    s.kappa = kappa;
    s.delta = delta;
    s.basis = basis.shifted(kappa);
    s.residual = eig_residual(M, e);
    s.matrix_norm = M.cwiseAbs().rowwise().sum().maxCoeff();
    s.eigenvalues = std::move(e.values);
    s.eigenvectors = std::move(e.vectors);
    if (s.residual > 1e-10 * s.matrix_norm) {
        std::ostringstream os;
        os << "eigen-residual " << s.residual << " exceeds 1e-10 * ||M|| = " << 1e-10 * s.matrix_norm;
        throw NumericalError(os.str());
    }
    return s;
}

BlochSolution solve_bloch(Vec2 kappa, double delta, int nbands, const CrystalConfig& cfg) {
    const FourierCoeffs c = lattice_coefficients(cfg);
    return solve_bloch(kappa, delta, nbands, c, PlaneWaveBasis(kappa, cfg.cutoff));
}

std::vector<BandRow> band_path(const std::vector<Vec2>& path, double delta, int nbands, const CrystalConfig& cfg) {
    if (path.empty()) throw std::invalid_argument("empty momentum path");
    const FourierCoeffs c = lattice_coefficients(cfg);
    std::vector<BandRow> rows(path.size());
    parallel_for(path.size(), [&](std::size_t i) {
        const PlaneWaveBasis b(path[i], cfg.cutoff);
        const MatC M = assemble(path[i], delta, c, b);
        rows[i] = {path[i], eigh_index(M, 0, std::min(nbands, b.dim()) - 1).values};
    });
    return rows;
}

std::vector<Vec2> high_symmetry_path(int per_leg) {
    const Vec2 G{0, 0}, X{pi, 0}, M{pi, pi};
    const Vec2 legs[3][2] = {{G, X}, {X, M}, {M, G}};
    std::vector<Vec2> out;
    for (int l = 0; l < 3; ++l)
        for (int i = 0; i < per_leg; ++i) {
            const double t = static_cast<double>(i) / per_leg;
            out.push_back({legs[l][0][0] + t * (legs[l][1][0] - legs[l][0][0]),
                           legs[l][0][1] + t * (legs[l][1][1] - legs[l][0][1])});
        }
    out.push_back(G);
    return out;
}

MatC MPointPair::reduced_resolvent(const MatC& x) const {
    MatC y = eig.vectors.adjoint() * x;
    for (Eigen::Index k = 0; k < y.rows(); ++k) {
        if (k == n_star || k == n_star + 1)
            y.row(k).setZero();
        else
            y.row(k) /= (eig.values[k] - lambda_star);
    }
    return eig.vectors * y;
}

double MPointPair::t_star_raw() const { return -(v.col(1).adjoint() * parts.B * v.col(0))(0, 0).real(); }

MPointPair build_mpoint_pair(const FourierCoeffs& coeffs, int cutoff, int n_star) {
    MPointPair P;
    const Vec2 M{pi, pi};
    P.n_star = n_star;
    P.basis = PlaneWaveBasis(M, cutoff);
    if (n_star < 0 || n_star + 1 >= P.basis.dim()) throw std::invalid_argument("pair index outside basis");
    P.parts = assemble_parts(M, coeffs, P.basis);
    P.derivs = assemble_derivatives(M, coeffs, P.basis);
    P.eig = eigh(P.parts.A);
    P.lambda_star = 0.5 * (P.eig.values[n_star] + P.eig.values[n_star + 1]);
    const MatC Pk = P.eig.vectors.middleCols(n_star, 2);

    // second-order degenerate perturbation matrix along kappa1
    const MatC Tp = P.projected_solve(P.derivs.A1[0], Pk);
    MatC H2 = Pk.adjoint() * (P.derivs.A2 * Pk + P.derivs.A1[0] * Tp);
    H2 = 0.5 * (H2 + H2.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<MatC> es(H2);
    P.curvatures[0] = es.eigenvalues()[0];
    P.curvatures[1] = es.eigenvalues()[1];

    VecC v1 = Pk * es.eigenvectors().col(0);
    const auto inv = P.basis.symmetry_map(PointOp::Inversion);
    const cplx ph = v1.dot(apply_time_reversal(inv, v1));
    v1 *= std::exp(I * (std::arg(ph) / 2));
    v1.normalize();
    P.time_reversal_defect = (apply_time_reversal(inv, v1) - v1).norm();

    const auto rot = P.basis.symmetry_map(PointOp::R);
    VecC v2 = -I * apply_map(rot, v1);
    P.rotation_defect = (Pk * (Pk.adjoint() * v2) - v2).norm();

    P.v.resize(P.basis.dim(), 2);
    P.v.col(0) = v1;
    P.v.col(1) = v2;
    if (P.t_star_raw() < 0) {
        P.v.col(1) = -v2;
        P.v2_flipped = true;
    }
    P.dv = P.projected_solve(P.derivs.A1[0], P.v);
    return P;
}

MatC momentum_derivative(const MPointPair& pair) { return pair.projected_solve(pair.derivs.A1[0], pair.v); }

AnalyticBranch analytic_branches(const MPointPair& pair, const FourierCoeffs& coeffs, double halfwidth, int npts) {
    if (npts < 3 || npts % 2 == 0) throw std::invalid_argument("branch grid needs an odd number (>= 3) of points");
    AnalyticBranch br;
    br.band_pair = {pair.n_star, pair.n_star + 1};
    br.lambda_star = pair.lambda_star;
    br.v = pair.v;
    br.dv = pair.dv;
    br.v2_flipped = pair.v2_flipped;
    const int c = npts / 2;
    br.kgrid.resize(npts);
    for (int j = 0; j < npts; ++j) br.kgrid[j] = pi + halfwidth * (j - c) / c;
    br.kgrid[c] = pi;
    br.values.assign(npts, {pair.lambda_star, pair.lambda_star});
    br.modes.assign(npts, MatC());
    br.modes[c] = pair.v;

    std::vector<Eig> sols(npts);
    parallel_for(static_cast<std::size_t>(npts), [&](std::size_t j) {
        if (static_cast<int>(j) == c) return;
        const Vec2 kap{br.kgrid[j], pi};
        const MatC M = assemble_parts(kap, coeffs, pair.basis).A;
        sols[j] = eigh_index(M, pair.n_star, pair.n_star + 1);
    });

    for (int dir : {+1, -1}) {
        MatC prev = pair.v;
        for (int j = c + dir; j >= 0 && j < npts; j += dir) {
            const MatC& E = sols[j].vectors;
            const MatC O = prev.adjoint() * E;
            const bool swap = std::abs(O(0, 1)) + std::abs(O(1, 0)) > std::abs(O(0, 0)) + std::abs(O(1, 1));
            MatC cur(E.rows(), 2);
            std::array<double, 2> vals{};
            for (int a = 0; a < 2; ++a) {
                const int b = swap ? 1 - a : a;
                const cplx ov = O(a, b);
                if (std::abs(ov) < 0.5) {
                    std::ostringstream os;
                    os << "ambiguous branch matching at kappa1 = " << br.kgrid[j] << " (overlap " << std::abs(ov)
                       << ")";
                    throw NumericalError(os.str());
                }
                br.min_match_overlap = std::min(br.min_match_overlap, std::abs(ov));
                cur.col(a) = E.col(b) * std::conj(ov / std::abs(ov));
                vals[a] = sols[j].values[b];
            }
            for (int a = 0; a < 2; ++a)
                br.min_phase_overlap = std::min(br.min_phase_overlap, prev.col(a).dot(cur.col(a)).real());
            br.modes[j] = cur;
            br.values[j] = vals;
            prev = cur;
        }
    }
    for (int a = 0; a < 2; ++a) br.gauge_defect = std::max(br.gauge_defect, std::abs(br.dv.col(a).dot(br.v.col(a)).imag()));
    return br;
}

}  // namespace ql
