// Linear solvers backing the implicit steps: a banded direct solve for
// one-dimensional Jacobians (LAPACK dgbsv) and CSR + ILU(0) + restarted
// GMRES for the nonsymmetric two-dimensional systems.
#pragma once

#include <vector>

#include "crossdiff/grid.hpp"

namespace crossdiff {

// General band matrix in LAPACK band storage (column-major, with kl extra
// rows for the pivoting fill of the factorization).
class BandedMatrix {
 public:
  BandedMatrix(int n, int kl, int ku);

  void zero();
  void add(int i, int j, double value);

  // Solves A x = b in place (b becomes x). Destroys the stored factors;
  // refill before the next solve.
  void solve(std::vector<double>& b);

  int size() const { return n_; }

 private:
  int n_;
  int kl_;
  int ku_;
  int ldab_;
  std::vector<double> ab_;
  std::vector<int> ipiv_;
};

// Compressed sparse row matrix with a fixed, sorted sparsity pattern.
struct CsrMatrix {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col_idx;
  std::vector<double> vals;

  // Builds the pattern from per-row sorted column lists.
  static CsrMatrix from_pattern(const std::vector<std::vector<int>>& cols);

  void zero_values();
  // Adds into an existing entry; the (i, j) position must be in the pattern.
  void add(int i, int j, double value);
  void multiply(const double* x, double* y) const;
};

// Incomplete LU factorization with zero fill-in, on the pattern of A.
class Ilu0 {
 public:
  static Ilu0 factor(const CsrMatrix& a);
  void apply(const double* r, double* z) const;  // z = (LU)^{-1} r

 private:
  CsrMatrix lu_;
  std::vector<int> diag_ptr_;
};

// Right-preconditioned restarted GMRES. Iterates until the true residual
// satisfies ||b - A x|| <= rel_tol * ||b||; throws SolverFailure otherwise.
// Returns the total iteration count.
int gmres_solve(const CsrMatrix& a, const Ilu0& precond, const std::vector<double>& b,
                std::vector<double>& x, double rel_tol, int restart, int max_iter);

}  // namespace crossdiff
