#include "crossdiff/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace crossdiff {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
      ab_(static_cast<size_t>(ldab_) * n, 0.0), ipiv_(static_cast<size_t>(n), 0) {}

void BandedMatrix::zero() { std::fill(ab_.begin(), ab_.end(), 0.0); }

void BandedMatrix::add(int i, int j, double value) {
  // Column-major band storage: entry (i, j) lives at row kl + ku + i - j.
  ab_[static_cast<size_t>(j) * ldab_ + (kl_ + ku_ + i - j)] += value;
}

void BandedMatrix::solve(std::vector<double>& b) {
  const lapack_int info = LAPACKE_dgbsv(LAPACK_COL_MAJOR, n_, kl_, ku_, 1, ab_.data(),
                                        ldab_, ipiv_.data(), b.data(), n_);
  if (info != 0) {
    throw SolverFailure("banded solve failed, dgbsv info = " + std::to_string(info));
  }
}

CsrMatrix CsrMatrix::from_pattern(const std::vector<std::vector<int>>& cols) {
  CsrMatrix m;
  m.n = static_cast<int>(cols.size());
  m.row_ptr.resize(static_cast<size_t>(m.n) + 1, 0);
  for (int i = 0; i < m.n; ++i) {
    m.row_ptr[static_cast<size_t>(i) + 1] =
        m.row_ptr[static_cast<size_t>(i)] + static_cast<int>(cols[static_cast<size_t>(i)].size());
  }
  m.col_idx.reserve(static_cast<size_t>(m.row_ptr.back()));
  for (const auto& row : cols) {
    for (int j : row) m.col_idx.push_back(j);
  }
  m.vals.assign(m.col_idx.size(), 0.0);
  return m;
}

void CsrMatrix::zero_values() { std::fill(vals.begin(), vals.end(), 0.0); }

void CsrMatrix::add(int i, int j, double value) {
  const int begin = row_ptr[static_cast<size_t>(i)];
  const int end = row_ptr[static_cast<size_t>(i) + 1];
  const int* first = col_idx.data() + begin;
  const int* last = col_idx.data() + end;
  const int* pos = std::lower_bound(first, last, j);
  if (pos == last || *pos != j) {
    throw SolverFailure("CSR add outside pattern");
  }
  vals[static_cast<size_t>(begin + (pos - first))] += value;
}

void CsrMatrix::multiply(const double* x, double* y) const {
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = row_ptr[static_cast<size_t>(i)]; k < row_ptr[static_cast<size_t>(i) + 1]; ++k) {
      acc += vals[static_cast<size_t>(k)] * x[col_idx[static_cast<size_t>(k)]];
    }
    y[i] = acc;
  }
}

Ilu0 Ilu0::factor(const CsrMatrix& a) {
  Ilu0 f;
  f.lu_ = a;
  f.diag_ptr_.assign(static_cast<size_t>(a.n), -1);
  for (int i = 0; i < a.n; ++i) {
    for (int k = a.row_ptr[static_cast<size_t>(i)]; k < a.row_ptr[static_cast<size_t>(i) + 1]; ++k) {
      if (a.col_idx[static_cast<size_t>(k)] == i) {
        f.diag_ptr_[static_cast<size_t>(i)] = k;
        break;
      }
    }
    if (f.diag_ptr_[static_cast<size_t>(i)] < 0) {
      throw SolverFailure("ILU(0): missing diagonal entry");
    }
  }
  CsrMatrix& lu = f.lu_;
  for (int i = 1; i < lu.n; ++i) {
    const int row_begin = lu.row_ptr[static_cast<size_t>(i)];
    const int row_end = lu.row_ptr[static_cast<size_t>(i) + 1];
    for (int kk = row_begin; kk < row_end; ++kk) {
      const int k = lu.col_idx[static_cast<size_t>(kk)];
      if (k >= i) break;
      const double pivot = lu.vals[static_cast<size_t>(f.diag_ptr_[static_cast<size_t>(k)])];
      if (pivot == 0.0) throw SolverFailure("ILU(0): zero pivot");
      const double factor = lu.vals[static_cast<size_t>(kk)] / pivot;
      lu.vals[static_cast<size_t>(kk)] = factor;
      // Subtract factor * U(k, *) from row i, only where the pattern exists.
      for (int jj = f.diag_ptr_[static_cast<size_t>(k)] + 1;
           jj < lu.row_ptr[static_cast<size_t>(k) + 1]; ++jj) {
        const int j = lu.col_idx[static_cast<size_t>(jj)];
        const int* first = lu.col_idx.data() + row_begin;
        const int* last = lu.col_idx.data() + row_end;
        const int* pos = std::lower_bound(first, last, j);
        if (pos != last && *pos == j) {
          lu.vals[static_cast<size_t>(row_begin + (pos - first))] -=
              factor * lu.vals[static_cast<size_t>(jj)];
        }
      }
    }
    if (lu.vals[static_cast<size_t>(f.diag_ptr_[static_cast<size_t>(i)])] == 0.0) {
      throw SolverFailure("ILU(0): zero pivot");
    }
  }
  return f;
}

void Ilu0::apply(const double* r, double* z) const {
  const int n = lu_.n;
  // Forward solve L y = r (unit diagonal).
  for (int i = 0; i < n; ++i) {
    double acc = r[i];
    for (int k = lu_.row_ptr[static_cast<size_t>(i)]; k < diag_ptr_[static_cast<size_t>(i)]; ++k) {
      acc -= lu_.vals[static_cast<size_t>(k)] * z[lu_.col_idx[static_cast<size_t>(k)]];
    }
    z[i] = acc;
  }
  // Backward solve U z = y.
  for (int i = n - 1; i >= 0; --i) {
    double acc = z[i];
    for (int k = diag_ptr_[static_cast<size_t>(i)] + 1; k < lu_.row_ptr[static_cast<size_t>(i) + 1];
         ++k) {
      acc -= lu_.vals[static_cast<size_t>(k)] * z[lu_.col_idx[static_cast<size_t>(k)]];
    }
    z[i] = acc / lu_.vals[static_cast<size_t>(diag_ptr_[static_cast<size_t>(i)])];
  }
}

namespace {

double norm2(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

int gmres_solve(const CsrMatrix& a, const Ilu0& precond, const std::vector<double>& b,
                std::vector<double>& x, double rel_tol, int restart, int max_iter) {
  const int n = a.n;
  const double norm_b = norm2(b);
  if (norm_b == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return 0;
  }
  const double target = rel_tol * norm_b;

  std::vector<std::vector<double>> basis;
  std::vector<double> h(static_cast<size_t>((restart + 1) * restart), 0.0);
  std::vector<double> cs(static_cast<size_t>(restart), 0.0);
  std::vector<double> sn(static_cast<size_t>(restart), 0.0);
  std::vector<double> gamma(static_cast<size_t>(restart) + 1, 0.0);
  std::vector<double> tmp(static_cast<size_t>(n), 0.0);
  std::vector<double> w(static_cast<size_t>(n), 0.0);

  auto h_at = [&](int i, int j) -> double& {
    return h[static_cast<size_t>(j) * (restart + 1) + i];
  };

  int total_iters = 0;
  for (int outer = 0; total_iters < max_iter; ++outer) {
    // True residual for the restart.
    std::vector<double> r(static_cast<size_t>(n));
    a.multiply(x.data(), r.data());
    for (int i = 0; i < n; ++i) r[static_cast<size_t>(i)] = b[static_cast<size_t>(i)] - r[static_cast<size_t>(i)];
    double beta = norm2(r);
    if (beta <= target) return total_iters;

    basis.assign(1, r);
    for (double& v : basis[0]) v /= beta;
    std::fill(gamma.begin(), gamma.end(), 0.0);
    gamma[0] = beta;

    int j = 0;
    for (; j < restart && total_iters < max_iter; ++j, ++total_iters) {
      // w = A M^{-1} v_j
      precond.apply(basis[static_cast<size_t>(j)].data(), tmp.data());
      a.multiply(tmp.data(), w.data());
      // Modified Gram-Schmidt.
      for (int i = 0; i <= j; ++i) {
        double dot = 0.0;
        const std::vector<double>& vi = basis[static_cast<size_t>(i)];
        for (int k = 0; k < n; ++k) dot += w[static_cast<size_t>(k)] * vi[static_cast<size_t>(k)];
        h_at(i, j) = dot;
        for (int k = 0; k < n; ++k) w[static_cast<size_t>(k)] -= dot * vi[static_cast<size_t>(k)];
      }
      h_at(j + 1, j) = norm2(w);
      if (h_at(j + 1, j) > 0.0) {
        std::vector<double> next = w;
        for (double& v : next) v /= h_at(j + 1, j);
        basis.push_back(std::move(next));
      }
      // Apply accumulated Givens rotations, then form the new one.
      for (int i = 0; i < j; ++i) {
        const double t = cs[static_cast<size_t>(i)] * h_at(i, j) + sn[static_cast<size_t>(i)] * h_at(i + 1, j);
        h_at(i + 1, j) = -sn[static_cast<size_t>(i)] * h_at(i, j) + cs[static_cast<size_t>(i)] * h_at(i + 1, j);
        h_at(i, j) = t;
      }
      const double denom = std::hypot(h_at(j, j), h_at(j + 1, j));
      if (denom == 0.0) {
        throw SolverFailure("GMRES breakdown");
      }
      cs[static_cast<size_t>(j)] = h_at(j, j) / denom;
      sn[static_cast<size_t>(j)] = h_at(j + 1, j) / denom;
      h_at(j, j) = denom;
      h_at(j + 1, j) = 0.0;
      gamma[static_cast<size_t>(j) + 1] = -sn[static_cast<size_t>(j)] * gamma[static_cast<size_t>(j)];
      gamma[static_cast<size_t>(j)] = cs[static_cast<size_t>(j)] * gamma[static_cast<size_t>(j)];
      if (std::abs(gamma[static_cast<size_t>(j) + 1]) <= target) {
        ++j;
        ++total_iters;
        break;
      }
      if (static_cast<int>(basis.size()) == j + 1) {
        ++j;  // happy breakdown: exact solution in the current space
        ++total_iters;
        break;
      }
    }

    // Back-substitute y and update x += M^{-1} (V y).
    std::vector<double> y(static_cast<size_t>(j), 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double acc = gamma[static_cast<size_t>(i)];
      for (int k = i + 1; k < j; ++k) acc -= h_at(i, k) * y[static_cast<size_t>(k)];
      y[static_cast<size_t>(i)] = acc / h_at(i, i);
    }
    std::fill(tmp.begin(), tmp.end(), 0.0);
    for (int i = 0; i < j; ++i) {
      const std::vector<double>& vi = basis[static_cast<size_t>(i)];
      for (int k = 0; k < n; ++k) tmp[static_cast<size_t>(k)] += y[static_cast<size_t>(i)] * vi[static_cast<size_t>(k)];
    }
    precond.apply(tmp.data(), w.data());
    for (int k = 0; k < n; ++k) x[static_cast<size_t>(k)] += w[static_cast<size_t>(k)];

    // Convergence check on the true residual happens at the next restart.
  }

  std::vector<double> r(static_cast<size_t>(n));
  a.multiply(x.data(), r.data());
  for (int i = 0; i < n; ++i) r[static_cast<size_t>(i)] = b[static_cast<size_t>(i)] - r[static_cast<size_t>(i)];
  if (norm2(r) <= target) return total_iters;
  throw SolverFailure("GMRES did not converge in " + std::to_string(max_iter) + " iterations");
}

}  // namespace crossdiff
