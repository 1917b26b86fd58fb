#include "catch_amalgamated.hpp"

#include "quadlattice/bloch.hpp"

#include <Eigen/Sparse>

#include <algorithm>

using namespace ql;

namespace {

// five-point finite differences with face-averaged coefficient, antiperiodic (kappa = (pi, pi)),
// lowest eigenvalue by inverse iteration
double fd_lowest_at_m(int n, double contrast, double r) {
    const double h = 1.0 / n;
    auto face = [&](double x1a, double x1b, double x2a, double x2b) {
        double s = 0;
        for (int k = 0; k < 32; ++k) {
            const double t = (k + 0.5) / 32, y1 = x1a + t * (x1b - x1a) - 0.5, y2 = x2a + t * (x2b - x2a) - 0.5;
            s += y1 * y1 + y2 * y2 < r * r ? 1 + contrast : 1;
        }
        return s / 32;
    };
    auto id = [&](int i, int j) { return ((i + n) % n) * n + (j + n) % n; };
    std::vector<Eigen::Triplet<double>> T;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double diag = 0;
            for (int s : {-1, 1}) {
                const double xf = (i + 0.5 + 0.5 * s) * h, a = face(xf, xf, j * h, (j + 1) * h);
                const double ph = (i + s < 0 || i + s >= n) ? -1 : 1;
                T.emplace_back(id(i, j), id(i + s, j), -a * ph / (h * h));
                diag += a / (h * h);
                const double yf = (j + 0.5 + 0.5 * s) * h, b = face(i * h, (i + 1) * h, yf, yf);
                const double pj = (j + s < 0 || j + s >= n) ? -1 : 1;
                T.emplace_back(id(i, j), id(i, j + s), -b * pj / (h * h));
                diag += b / (h * h);
            }
            T.emplace_back(id(i, j), id(i, j), diag);
        }
    Eigen::SparseMatrix<double> L(n * n, n * n);
    L.setFromTriplets(T.begin(), T.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(L);
    Eigen::VectorXd v(n * n);
    for (int k = 0; k < n * n; ++k) v[k] = 1 + 0.1 * std::sin(k);
    double lam = 0;
    for (int it = 0; it < 2000; ++it) {
        Eigen::VectorXd w = ldlt.solve(v);
        w.normalize();
        const double l = w.dot(L * w);
        v = w;
        if (std::abs(l - lam) < 1e-13 * l) return l;
        lam = l;
    }
    return lam;
}

}  // namespace

TEST_CASE("empty lattice reproduces |kappa + G|^2") {
    CrystalConfig c;
    c.contrast = 0;
    const Vec2 kappa{0.37, 1.21};
    const BlochSolution s = solve_bloch(kappa, 0, 12, c);
    std::vector<double> ref;
    for (int n1 = -4; n1 <= 4; ++n1)
        for (int n2 = -4; n2 <= 4; ++n2) ref.push_back(sq(kappa[0] + 2 * pi * n1) + sq(kappa[1] + 2 * pi * n2));
    std::sort(ref.begin(), ref.end());
    for (int i = 0; i < 12; ++i) CHECK(std::abs(s.eigenvalues[i] - ref[i]) < 1e-10 * ref[i]);
}

TEST_CASE("empty lattice at M is fourfold 2 pi^2") {
    CrystalConfig c;
    c.contrast = 0;
    const BlochSolution s = solve_bloch({pi, pi}, 0, 5, c);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(s.eigenvalues[i] - 2 * pi * pi) < 1e-10);
    CHECK(s.eigenvalues[4] > 2 * pi * pi + 1);
}

TEST_CASE("plane-wave eigenvalue against finite differences, weak contrast") {
    CrystalConfig c;
    c.contrast = 1;
    c.radius = 0.3;
    const double fd = fd_lowest_at_m(256, 1, 0.3);
    c.cutoff = 14;
    const double pw = solve_bloch({pi, pi}, 0, 1, c).eigenvalues[0];
    CHECK(std::abs(pw - fd) / fd < 3e-3);
}

TEST_CASE("plane-wave eigenvalues are decreasing upper bounds at high contrast") {
    const double fd = fd_lowest_at_m(256, 16.6, 0.420455);
    CrystalConfig c;
    double prev = 1e300;
    for (int cut : {4, 6, 8, 10}) {
        c.cutoff = cut;
        const double pw = solve_bloch({pi, pi}, 0, 1, c).eigenvalues[0];
        CHECK(pw < prev);
        CHECK(pw > fd - 0.1);  // fd scatter between grids is about 0.05
        prev = pw;
    }
}

TEST_CASE("assembled matrix is Hermitian and eigenpairs have small residuals") {
    CrystalConfig cfg;
    const FourierCoeffs co = lattice_coefficients(cfg);
    const Vec2 k{2.1, 0.4};
    const PlaneWaveBasis b(k, 6);
    const MatC M = assemble(k, 0.3, co, b);
    CHECK((M - M.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    const BlochSolution s = solve_bloch(k, 0.3, 10, co, b);
    CHECK(s.residual < 1e-9 * s.matrix_norm);
}

TEST_CASE("anchored basis sizes and symmetry maps") {
    CHECK(PlaneWaveBasis({0, 0}, 6).dim() == 169);
    CHECK(PlaneWaveBasis({pi, 0}, 6).dim() == 182);
    CHECK(PlaneWaveBasis({pi, pi}, 6).dim() == 196);
    const PlaneWaveBasis m({pi, pi}, 6);
    for (PointOp op : {PointOp::R, PointOp::M1, PointOp::M2, PointOp::Inversion}) {
        auto perm = m.symmetry_map(op);
        std::vector<int> sorted = perm;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < m.dim(); ++i) CHECK(sorted[i] == i);
    }
}

TEST_CASE("rotation commutes with the Bloch matrix at M") {
    CrystalConfig cfg;
    const FourierCoeffs co = lattice_coefficients(cfg);
    const PlaneWaveBasis b({pi, pi}, 6);
    const MatC A = assemble_parts({pi, pi}, co, b).A;
    const auto perm = b.symmetry_map(PointOp::R);
    const BlochSolution s = solve_bloch({pi, pi}, 0, 12, co, b);
    for (int j = 0; j < 12; ++j) {
        const VecC u = apply_map(perm, s.eigenvectors.col(j));
        CHECK((A * u - s.eigenvalues[j] * u).norm() < 1e-8 * s.eigenvalues[j]);
    }
}

TEST_CASE("spectrum at -kappa equals spectrum at kappa, with and without delta") {
    CrystalConfig cfg;
    const Vec2 k{2.1, 0.4}, mk{-2.1, -0.4};
    const auto a = solve_bloch(k, 0, 8, cfg).eigenvalues, b = solve_bloch(mk, 0, 8, cfg).eigenvalues;
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
    const auto c = solve_bloch(k, 0.5, 8, cfg).eigenvalues, d = solve_bloch(mk, 0.5, 8, cfg).eigenvalues;
    CHECK((c - d).cwiseAbs().maxCoeff() < 1e-9);  // inversion keeps k^T sigma2 k'
}

TEST_CASE("high-symmetry path layout") {
    const auto p = high_symmetry_path(10);
    CHECK(p.size() == 31);
    CHECK(p[10][0] == Catch::Approx(pi));
    CHECK(p[20][1] == Catch::Approx(pi));
    CHECK(p.back()[0] == 0.0);
}
