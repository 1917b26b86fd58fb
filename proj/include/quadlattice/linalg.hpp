#pragma once

#include "quadlattice/common.hpp"

namespace ql {

struct Eig {
    VecR values;   // ascending
    MatC vectors;  // columns, orthonormal
};

// full Hermitian decomposition
Eig eigh(const MatC& A);
// eigenpairs il..iu (0-based, inclusive)
Eig eigh_index(const MatC& A, int il, int iu);
// eigenpairs with values in (vl, vu]
Eig eigh_range(const MatC& A, double vl, double vu);
// consumes A (large supercell matrices)
Eig eigh_range(MatC&& A, double vl, double vu);
VecR eigvalsh(const MatC& A);

// max_j ||A v_j - lambda_j v_j||
double eig_residual(const MatC& A, const Eig& e);

// pins BLAS to one thread; parallelism lives above the dense kernels
void single_threaded_blas();

}  // namespace ql
