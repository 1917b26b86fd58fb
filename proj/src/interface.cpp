#include "quadlattice/interface.hpp"

#include "quadlattice/basis.hpp"
#include "quadlattice/bloch.hpp"
#include "quadlattice/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

namespace ql {

void SupercellSpec::validate() const {
    if (N < 4) throw ConfigError("supercell", "supercell half-width N must be at least 4");
    if (projected() && (band_hi < band_lo)) throw ConfigError("supercell", "empty projection band window");
    if (cutoff2 < 1) throw ConfigError("cutoff", "supercell cutoff2 must be positive");
    if (cutoff1 < 0) throw ConfigError("cutoff", "supercell cutoff1 must be non-negative");
    if (!std::isfinite(delta)) throw ConfigError("delta", "delta must be finite");
    if (dim() > dim_cap) {
        std::ostringstream os;
        os << "supercell dimension " << dim() << " exceeds the cap " << dim_cap;
        throw ConfigError("supercell", os.str());
    }
}

namespace {

// a_hat and (s b)_hat on the supercell reciprocal grid, index differences up to the plane-wave box
struct SupercellTables {
    int dmax = 0, dnmax = 0, w = 0;
    std::vector<cplx> a, sb;
    std::size_t at(int dm, int dn) const { return static_cast<std::size_t>(dm + dmax) * w + (dn + dnmax); }
};

SupercellTables supercell_tables(const SupercellSpec& spec, const FourierCoeffs& coeffs) {
    SupercellTables t;
    const int N = spec.N;
    t.dmax = 2 * spec.m_half() - 1;
    t.dnmax = spec.n_count() - 1;
    t.w = 2 * t.dnmax + 1;
    t.a.resize((2 * t.dmax + 1) * static_cast<std::size_t>(t.w));
    t.sb.resize(t.a.size());
    const int J = 4 * coeffs.table_half();
    std::vector<cplx> bj((2 * J + 1) * static_cast<std::size_t>(t.w));
    for (int j = -J; j <= J; ++j)
        for (int dn = -t.dnmax; dn <= t.dnmax; ++dn)
            bj[(j + J) * static_cast<std::size_t>(t.w) + dn + t.dnmax] = coeffs.b_hat(j, dn);
    for (int dm = -t.dmax; dm <= t.dmax; ++dm) {
        const bool on_lattice = dm % (2 * N) == 0;
        for (int dn = -t.dnmax; dn <= t.dnmax; ++dn) {
            t.a[t.at(dm, dn)] = on_lattice ? coeffs.a_hat(dm / (2 * N), dn) : 0.0;
            if (!spec.flip) {
                t.sb[t.at(dm, dn)] = on_lattice ? coeffs.b_hat(dm / (2 * N), dn) : 0.0;
                continue;
            }
            // odd harmonics 2/(i pi m) of the sign function, convolved with b
            cplx v = 0;
            if (dm % 2 != 0)
                for (int j = -J; j <= J; ++j)
                    v += 2.0 / (I * (pi * (dm - 2 * N * j))) * bj[(j + J) * static_cast<std::size_t>(t.w) + dn + t.dnmax];
            t.sb[t.at(dm, dn)] = v;
        }
    }
    return t;
}

}  // namespace

MatC assemble_supercell(const SupercellSpec& spec, const FourierCoeffs& coeffs) {
    spec.validate();
    if (spec.projected()) return assemble_projected(spec, coeffs).H;
    const int mh = spec.m_half(), nn = spec.n_count(), N = spec.N, c2 = spec.cutoff2;
    const int dim = spec.pw_dim();
    const SupercellTables tb = supercell_tables(spec, coeffs);
    VecR k1(dim), k2(dim);
    std::vector<int> mi(dim), ni(dim);
    for (int m = -mh; m < mh; ++m)
        for (int n = -c2 - 1; n <= c2; ++n) {
            const int i = (m + mh) * nn + (n + c2 + 1);
            mi[i] = m, ni[i] = n;
            k1[i] = pi * m / N;
            k2[i] = pi * (2 * n + 1);
        }
    MatC H(dim, dim);
    const double d = spec.delta;
    parallel_for(static_cast<std::size_t>(dim), [&](std::size_t jj) {
        const int j = static_cast<int>(jj);
        for (int i = 0; i < dim; ++i) {
            const std::size_t t = tb.at(mi[i] - mi[j], ni[i] - ni[j]);
            cplx v = tb.a[t] * (k1[i] * k1[j] + k2[i] * k2[j]) + d * tb.sb[t] * (-I * k1[i] * k2[j] + I * k2[i] * k1[j]);
            if (i == j) v += k1[i] * k1[i] + k2[i] * k2[i];
            H(i, j) = v;
        }
    });
    return H;
}

VecC ProjectedSupercell::to_plane_waves(const VecC& y) const {
    int pw = 0;
    for (const auto& idx : pw_index)
        for (int i : idx) pw = std::max(pw, i + 1);
    VecC c = VecC::Zero(pw);
    const int nb = static_cast<int>(modes.front().cols());
    for (std::size_t r = 0; r < modes.size(); ++r) {
        const VecC part = modes[r] * y.segment(static_cast<int>(r) * nb, nb);
        for (std::size_t i = 0; i < pw_index[r].size(); ++i) c[pw_index[r][i]] = part[i];
    }
    return c;
}

ProjectedSupercell assemble_projected(const SupercellSpec& spec, const FourierCoeffs& coeffs) {
    spec.validate();
    if (!spec.projected()) throw std::invalid_argument("projection window not set");
    if (spec.cutoff1 != 0) throw std::invalid_argument("the projected supercell uses the folded bulk box");
    const int N = spec.N, R = 2 * N, nb = spec.band_hi - spec.band_lo + 1;
    const int mh = spec.m_half(), nn = spec.n_count(), c2 = spec.cutoff2;
    ProjectedSupercell P;
    P.modes.resize(R);
    P.pw_index.resize(R);
    std::vector<VecR> mu(R);
    std::vector<PlaneWaveBasis> bases(R);
    parallel_for(static_cast<std::size_t>(R), [&](std::size_t r) {
        const Vec2 kap{pi * double(r) / N, pi};
        bases[r] = PlaneWaveBasis(kap, c2, Vec2{pi, pi});
        const Eig e = eigh_index(assemble(kap, 0, coeffs, bases[r]), spec.band_lo, spec.band_hi);
        P.modes[r] = e.vectors;
        mu[r] = e.values;
        auto& idx = P.pw_index[r];
        for (const auto& n : bases[r].indices()) idx.push_back((static_cast<int>(r) + 2 * N * n[0] + mh) * nn + (n[1] + c2 + 1));
    });
    const SupercellTables tb = supercell_tables(spec, coeffs);
    P.H = MatC::Zero(R * nb, R * nb);
    for (int r = 0; r < R; ++r)
        for (int a = 0; a < nb; ++a) P.H(r * nb + a, r * nb + a) = mu[r][a];
    if (spec.delta == 0) return P;
    // s b couples only odd differences of the folded index when the sign flips
    std::vector<std::pair<int, int>> blocks;
    for (int r = 0; r < R; ++r)
        for (int q = r; q < R; ++q)
            if (!spec.flip ? r == q : (q - r) % 2 != 0) blocks.emplace_back(r, q);
    parallel_for(blocks.size(), [&](std::size_t bi) {
        const auto [r, q] = blocks[bi];
        const PlaneWaveBasis &br = bases[r], &bq = bases[q];
        const int dr = br.dim(), dq = bq.dim();
        MatC B(dr, dq);
        for (int j = 0; j < dq; ++j) {
            const int mj = q + 2 * N * bq.indices()[j][0], nj = bq.indices()[j][1];
            const double k1j = pi * mj / double(N), k2j = bq.k2(j);
            for (int i = 0; i < dr; ++i) {
                const int mi = r + 2 * N * br.indices()[i][0], ni = br.indices()[i][1];
                const double k1i = pi * mi / double(N), k2i = br.k2(i);
                B(i, j) = tb.sb[tb.at(mi - mj, ni - nj)] * (-I * k1i * k2j + I * k2i * k1j);
            }
        }
        const MatC blk = spec.delta * (P.modes[r].adjoint() * B * P.modes[q]);
        P.H.block(r * nb, q * nb, nb, nb) += blk;
        if (q != r) P.H.block(q * nb, r * nb, nb, nb) += blk.adjoint();
    });
    return P;
}

std::vector<double> cell_profile(const SupercellSpec& spec, const VecC& u, int S) {
    const int mh = spec.m_half(), nn = spec.n_count(), N = spec.N;
    const int ns = 2 * N * S;
    const MatC C = Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(u.data(), 2 * mh, nn);
    std::vector<double> cells(2 * N, 0.0);
    double tot = 0;
    Eigen::RowVectorXcd e(2 * mh);
    for (int s = 0; s < ns; ++s) {
        const double x = -N + (s + 0.5) / S;
        const cplx step = std::exp(I * (pi * x / N));
        cplx p = std::exp(I * (pi * -mh * x / N));
        for (int m = 0; m < 2 * mh; ++m, p *= step) e[m] = p;
        const double v = (e * C).squaredNorm() / S;
        cells[s / S] += v;
        tot += v;
    }
    for (double& c : cells) c /= tot;
    return cells;
}

namespace {

// circular mean and resultant length of the cell masses
std::pair<double, double> circular_center(const std::vector<double>& mass, int N) {
    cplx z = 0;
    for (int j = 0; j < 2 * N; ++j) z += mass[j] * std::exp(I * (pi * (-N + j + 0.5) / N));
    double c = std::arg(z) * N / pi;
    if (c <= -N) c += 2 * N;
    return {c, std::abs(z)};
}

double circular_distance(double a, double b, int N) {
    double d = std::fmod(std::abs(a - b), 2.0 * N);
    return std::min(d, 2.0 * N - d);
}

double decay_fit(const std::vector<double>& mass, int N, double xc) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int j = 0; j < 2 * N; ++j) {
        const double d = circular_distance(-N + j + 0.5, xc, N);
        if (d < 1 || d > N / 2.0) continue;
        const double ly = std::log(std::max(mass[j], 1e-300));
        sx += d, sy += ly, sxx += d * d, sxy += d * ly;
        ++n;
    }
    if (n < 3) return std::numeric_limits<double>::quiet_NaN();
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return -slope / 2;
}

}  // namespace

namespace {

// <u_a| chi |u_b> with chi the indicator of the half of the supercell around x1 = 0
MatC interface_overlap(const SupercellSpec& spec, const MatC& U, int S) {
    const int mh = spec.m_half(), nn = spec.n_count(), N = spec.N, k = U.cols();
    std::vector<MatC> C;
    for (int a = 0; a < k; ++a)
        C.push_back(Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            U.col(a).data(), 2 * mh, nn));
    MatC W = MatC::Zero(k, k);
    Eigen::RowVectorXcd e(2 * mh);
    MatC F(nn, k);
    for (int s = 0; s < 2 * N * S; ++s) {
        const double x = -N + (s + 0.5) / S;
        if (std::abs(x) > N / 2.0) continue;
        const cplx step = std::exp(I * (pi * x / N));
        cplx p = std::exp(I * (pi * -mh * x / N));
        for (int m = 0; m < 2 * mh; ++m, p *= step) e[m] = p;
        for (int a = 0; a < k; ++a) F.col(a) = (e * C[a]).transpose();
        W += F.adjoint() * F;
    }
    return W;
}

}  // namespace

std::vector<double> localize_clusters(const SupercellSpec& spec, Eig& e, double lo, double hi, double tol) {
    const Eigen::Index n = e.values.size();
    std::vector<double> split(n, 0.0);
    Eigen::Index a = 0;
    while (a < n) {
        Eigen::Index b = a + 1;
        while (b < n && e.values[b] - e.values[b - 1] < tol) ++b;
        const bool gap = e.values[a] > lo && e.values[b - 1] < hi;
        if (b - a > 1 && gap) {
            const Eigen::Index k = b - a;
            MatC U = e.vectors.middleCols(a, k);
            for (Eigen::Index j = 0; j < k; ++j) U.col(j) /= U.col(j).norm();
            const Eig w = eigh(interface_overlap(spec, U, 8));
            const VecR lam = e.values.segment(a, k);
            e.vectors.middleCols(a, k) = U * w.vectors;
            for (Eigen::Index j = 0; j < k; ++j) {
                e.values[a + j] = (w.vectors.col(j).array().abs2() * lam.array()).sum();
                split[a + j] = lam[k - 1] - lam[0];
            }
        }
        a = b;
    }
    return split;
}

std::vector<const InterfaceMode*> InterfaceSpectrum::in_gap() const {
    std::vector<const InterfaceMode*> out;
    for (const auto& m : modes)
        if (m.in_gap) out.push_back(&m);
    return out;
}

int InterfaceSpectrum::count(const std::string& junction) const {
    int c = 0;
    for (const auto& m : modes) c += m.in_gap && m.junction == junction;
    return c;
}

InterfaceSpectrum find_interface_modes(const SupercellSpec& spec, const FourierCoeffs& coeffs, double lambda_star,
                                       double t_star, double gap_fraction, double window_factor) {
    if (!(spec.delta != 0)) throw std::invalid_argument("interface modes need delta != 0");
    InterfaceSpectrum out;
    out.N = spec.N;
    out.delta = spec.delta;
    out.lambda_star = lambda_star;
    out.t_star = t_star;
    const double half = std::abs(t_star * spec.delta);
    out.gap_lo = lambda_star - gap_fraction * half;
    out.gap_hi = lambda_star + gap_fraction * half;
    out.dim = spec.dim();
    const double lo = lambda_star - window_factor * half, hi = lambda_star + window_factor * half;
    Eig e;
    if (spec.projected()) {
        ProjectedSupercell P = assemble_projected(spec, coeffs);
        e = eigh_range(std::move(P.H), lo, hi);
        MatC V(spec.pw_dim(), e.values.size());
        for (Eigen::Index k = 0; k < e.values.size(); ++k) V.col(k) = P.to_plane_waves(e.vectors.col(k));
        e.vectors = std::move(V);
    } else {
        e = eigh_range(assemble_supercell(spec, coeffs), lo, hi);
    }
    const std::vector<double> split = localize_clusters(spec, e, out.gap_lo, out.gap_hi, cluster_fraction * half);
    out.modes.resize(e.values.size());
    parallel_for(out.modes.size(), [&](std::size_t k) {
        InterfaceMode& m = out.modes[k];
        m.lambda = e.values[k];
        m.h = (m.lambda - lambda_star) / spec.delta;
        m.in_gap = m.lambda > out.gap_lo && m.lambda < out.gap_hi;
        m.cell_mass = cell_profile(spec, e.vectors.col(k));
        std::tie(m.center, m.concentration) = circular_center(m.cell_mass, spec.N);
        const double d0 = circular_distance(m.center, 0, spec.N), dN = circular_distance(m.center, spec.N, spec.N);
        if (m.concentration < min_concentration) m.junction = "delocalized";
        else if (d0 <= spec.N / 4.0) m.junction = "interface";
        else if (dN <= spec.N / 4.0) m.junction = "wrap";
        else m.junction = "delocalized";
        m.decay_rate = decay_fit(m.cell_mass, spec.N, d0 <= dN ? 0.0 : double(spec.N));
    });
    for (std::size_t k = 0; k < out.modes.size(); ++k) out.modes[k].splitting = split[k];
    int ng = 0;
    for (const auto& m : out.modes) {
        ng += m.in_gap;
        if (m.in_gap && m.junction == "delocalized") out.finite_size_warning = true;
    }
    if (ng < 4) out.finite_size_warning = true;
    return out;
}

BifurcationRow bifurcation_row(const InterfaceSpectrum& s) {
    BifurcationRow r;
    r.delta = s.delta;
    r.N = s.N;
    std::vector<double> li, lw;
    r.min_rate = std::numeric_limits<double>::infinity();
    for (const auto* m : s.in_gap()) {
        ++r.in_gap;
        r.min_rate = std::min(r.min_rate, m->decay_rate);
        if (m->junction == "interface") r.h_interface.push_back(m->h), li.push_back(m->lambda);
        if (m->junction == "wrap") r.h_wrap.push_back(m->h), lw.push_back(m->lambda);
    }
    std::sort(r.h_interface.begin(), r.h_interface.end());
    std::sort(r.h_wrap.begin(), r.h_wrap.end());
    std::sort(li.begin(), li.end());
    std::sort(lw.begin(), lw.end());
    const double ref = std::abs(s.t_star) / std::sqrt(2.0);
    if (r.h_interface.size() == 2) {
        r.rel_dev = 0;
        for (double h : r.h_interface) r.rel_dev = std::max(r.rel_dev, std::abs(std::abs(h) / ref - 1));
        const double a = r.h_interface[0], b = r.h_interface[1];
        r.asymmetry = std::abs(a + b) / (std::abs(a) + std::abs(b));
    } else {
        r.rel_dev = r.asymmetry = std::numeric_limits<double>::infinity();
    }
    if (li.size() == lw.size() && !li.empty()) {
        for (std::size_t i = 0; i < li.size(); ++i) r.junction_match = std::max(r.junction_match, std::abs(li[i] - lw[i]));
        for (const auto* m : s.in_gap()) r.junction_match = std::max(r.junction_match, m->splitting);
    } else {
        r.junction_match = std::numeric_limits<double>::infinity();
    }
    return r;
}

std::vector<BifurcationRow> verify_bifurcation(const std::vector<double>& deltas, int N, const FourierCoeffs& coeffs,
                                               int cutoff, double lambda_star, double t_star, double gap_fraction) {
    std::vector<BifurcationRow> rows;
    for (double d : deltas) {
        SupercellSpec sp;
        sp.N = N;
        sp.delta = d;
        sp.cutoff2 = cutoff;
        rows.push_back(bifurcation_row(find_interface_modes(sp, coeffs, lambda_star, t_star, gap_fraction)));
    }
    return rows;
}

double folded_bulk_defect(int N, int cutoff, const FourierCoeffs& coeffs, int levels) {
    SupercellSpec sp;
    sp.N = N;
    sp.delta = 0;
    sp.cutoff2 = cutoff;
    const Eig e = eigh_index(assemble_supercell(sp, coeffs), 0, levels - 1);
    std::vector<double> bulk;
    for (int r = 0; r < 2 * N; ++r) {
        const PlaneWaveBasis b({pi * r / N, pi}, cutoff, Vec2{pi, pi});
        const VecR v = eigvalsh(assemble({pi * r / N, pi}, 0, coeffs, b));
        for (int i = 0; i < std::min<int>(levels, v.size()); ++i) bulk.push_back(v[i]);
    }
    std::sort(bulk.begin(), bulk.end());
    double d = 0;
    for (int i = 0; i < levels; ++i) d = std::max(d, std::abs(e.values[i] - bulk[i]) / std::max(1.0, std::abs(bulk[i])));
    return d;
}

}  // namespace ql
