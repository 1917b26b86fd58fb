#include "quadlattice/linalg.hpp"

#include <lapacke.h>

#include <sstream>
#include <utility>
#include <vector>

extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace ql {

namespace {

Eig zheevr(MatC a, char jobz, char range, double vl, double vu, int il, int iu) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    if (a.cols() != a.rows()) throw std::invalid_argument("eigh: matrix not square");
    Eig out;
    if (n == 0) return out;
    lapack_int m = 0;
    std::vector<double> w(n);
    lapack_int ncol = (range == 'I') ? (iu - il + 1) : n;
    if (jobz == 'N') ncol = 1;
    MatC z(jobz == 'V' ? n : 1, ncol);
    std::vector<lapack_int> isuppz(2 * static_cast<size_t>(n));
    const lapack_int info = LAPACKE_zheevr(
        LAPACK_COL_MAJOR, jobz, range, 'L', n, reinterpret_cast<lapack_complex_double*>(a.data()), n, vl, vu,
        il + 1, iu + 1, 0.0, &m, w.data(), reinterpret_cast<lapack_complex_double*>(z.data()),
        jobz == 'V' ? n : 1, isuppz.data());
    if (info != 0) {
        std::ostringstream os;
        os << "zheevr failed, info=" << info << " (n=" << n << ")";
        throw NumericalError(os.str());
    }
    out.values = Eigen::Map<VecR>(w.data(), m);
    if (jobz == 'V') out.vectors = z.leftCols(m);
    return out;
}

}  // namespace

Eig eigh(const MatC& A) { return zheevr(A, 'V', 'A', 0, 0, 0, 0); }

Eig eigh_index(const MatC& A, int il, int iu) {
    if (il < 0 || iu >= A.rows() || il > iu) throw std::invalid_argument("eigh_index: bad index range");
    return zheevr(A, 'V', 'I', 0, 0, il, iu);
}

Eig eigh_range(const MatC& A, double vl, double vu) { return zheevr(A, 'V', 'V', vl, vu, 0, 0); }

Eig eigh_range(MatC&& A, double vl, double vu) { return zheevr(std::move(A), 'V', 'V', vl, vu, 0, 0); }

VecR eigvalsh(const MatC& A) { return zheevr(A, 'N', 'A', 0, 0, 0, 0).values; }

double eig_residual(const MatC& A, const Eig& e) {
    double r = 0;
    for (Eigen::Index j = 0; j < e.values.size(); ++j)
        r = std::max(r, (A * e.vectors.col(j) - e.values(j) * e.vectors.col(j)).norm());
    return r;
}

void single_threaded_blas() {
    if (openblas_set_num_threads) openblas_set_num_threads(1);
}

}  // namespace ql
