#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "crossdiff/linalg.hpp"

using namespace crossdiff;

namespace {

// Random band matrix mirrored into a dense Eigen matrix for the oracle.
struct BandFixture {
  int n, kl, ku;
  Eigen::MatrixXd dense;
  BandedMatrix band;

  BandFixture(int n_, int kl_, int ku_, std::mt19937_64& rng)
      : n(n_), kl(kl_), ku(ku_), dense(Eigen::MatrixXd::Zero(n_, n_)), band(n_, kl_, ku_) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
      for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) {
        const double v = dist(rng) + (i == j ? 4.0 : 0.0);
        dense(i, j) = v;
        band.add(i, j, v);
      }
    }
  }
};

}  // namespace

TEST_CASE("banded solve matches dense LU") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 5; ++trial) {
    BandFixture fx(40, 3, 3, rng);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    Eigen::VectorXd rhs(fx.n);
    std::vector<double> b(static_cast<size_t>(fx.n));
    for (int i = 0; i < fx.n; ++i) {
      rhs(i) = dist(rng);
      b[static_cast<size_t>(i)] = rhs(i);
    }
    const Eigen::VectorXd x_ref = fx.dense.partialPivLu().solve(rhs);
    fx.band.solve(b);
    for (int i = 0; i < fx.n; ++i) {
      CHECK(b[static_cast<size_t>(i)] == doctest::Approx(x_ref(i)).epsilon(1e-10));
    }
  }
}

TEST_CASE("CSR multiply and pattern guards") {
  // 3x3: [[2, -1, 0], [-1, 2, -1], [0, -1, 2]]
  CsrMatrix m = CsrMatrix::from_pattern({{0, 1}, {0, 1, 2}, {1, 2}});
  m.add(0, 0, 2.0);
  m.add(0, 1, -1.0);
  m.add(1, 0, -1.0);
  m.add(1, 1, 2.0);
  m.add(1, 2, -1.0);
  m.add(2, 1, -1.0);
  m.add(2, 2, 2.0);
  const double x[3] = {1.0, 2.0, 3.0};
  double y[3];
  m.multiply(x, y);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 0.0);
  CHECK(y[2] == 4.0);
  CHECK_THROWS_AS(m.add(0, 2, 1.0), SolverFailure);
}

TEST_CASE("ILU0-preconditioned GMRES solves a nonsymmetric sparse system") {
  std::mt19937_64 rng(202);
  const int nx = 12, ny = 9;
  const int n = nx * ny;
  std::vector<std::vector<int>> pattern(static_cast<size_t>(n));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = j * nx + i;
      auto& cols = pattern[static_cast<size_t>(k)];
      cols.push_back(k);
      if (i > 0) cols.push_back(k - 1);
      if (i + 1 < nx) cols.push_back(k + 1);
      if (j > 0) cols.push_back(k - nx);
      if (j + 1 < ny) cols.push_back(k + nx);
      std::sort(cols.begin(), cols.end());
    }
  }
  CsrMatrix m = CsrMatrix::from_pattern(pattern);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int k = m.row_ptr[static_cast<size_t>(i)]; k < m.row_ptr[static_cast<size_t>(i) + 1]; ++k) {
      const int j = m.col_idx[static_cast<size_t>(k)];
      const double v = dist(rng) + (i == j ? 6.0 : 0.0);  // nonsymmetric, dominant
      m.vals[static_cast<size_t>(k)] = v;
      dense(i, j) = v;
    }
  }
  Eigen::VectorXd rhs(n);
  std::vector<double> b(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    rhs(i) = dist(rng);
    b[static_cast<size_t>(i)] = rhs(i);
  }
  const Eigen::VectorXd x_ref = dense.partialPivLu().solve(rhs);
  const Ilu0 precond = Ilu0::factor(m);
  std::vector<double> x(static_cast<size_t>(n), 0.0);
  gmres_solve(m, precond, b, x, 1e-12, 30, 2000);
  for (int i = 0; i < n; ++i) {
    CHECK(x[static_cast<size_t>(i)] == doctest::Approx(x_ref(i)).epsilon(1e-9));
  }
}

TEST_CASE("GMRES and the banded path agree on a tridiagonal system") {
  const int n = 30;
  CsrMatrix m = [&] {
    std::vector<std::vector<int>> pattern(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      auto& cols = pattern[static_cast<size_t>(i)];
      if (i > 0) cols.push_back(i - 1);
      cols.push_back(i);
      if (i + 1 < n) cols.push_back(i + 1);
    }
    return CsrMatrix::from_pattern(pattern);
  }();
  BandedMatrix band(n, 1, 1);
  for (int i = 0; i < n; ++i) {
    const double diag = 3.0 + 0.1 * i;
    m.add(i, i, diag);
    band.add(i, i, diag);
    if (i > 0) {
      m.add(i, i - 1, -1.0);
      band.add(i, i - 1, -1.0);
    }
    if (i + 1 < n) {
      m.add(i, i + 1, -1.3);
      band.add(i, i + 1, -1.3);
    }
  }
  std::vector<double> b(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) b[static_cast<size_t>(i)] = std::sin(0.7 * i);
  std::vector<double> x(static_cast<size_t>(n), 0.0);
  const Ilu0 precond = Ilu0::factor(m);
  gmres_solve(m, precond, b, x, 1e-13, 30, 1000);
  band.solve(b);
  for (int i = 0; i < n; ++i) {
    CHECK(x[static_cast<size_t>(i)] == doctest::Approx(b[static_cast<size_t>(i)]).epsilon(1e-10));
  }
}
