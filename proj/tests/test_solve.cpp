#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "agfem/solve.hpp"

using namespace agfem;

namespace {

CsrMatrix from_dense(const std::vector<std::vector<double>>& D) {
  CsrMatrix A;
  A.n = static_cast<std::int64_t>(D.size());
  A.row_ptr.push_back(0);
  for (std::int64_t r = 0; r < A.n; ++r) {
    for (std::int64_t c = 0; c < A.n; ++c)
      if (D[r][c] != 0) {
        A.col_idx.push_back(c);
        A.vals.push_back(D[r][c]);
      }
    A.row_ptr.push_back(static_cast<std::int64_t>(A.col_idx.size()));
  }
  return A;
}

// plain Gaussian elimination with partial pivoting
std::vector<double> dense_solve(std::vector<std::vector<double>> D, std::vector<double> b) {
  const std::int64_t n = static_cast<std::int64_t>(b.size());
  for (std::int64_t k = 0; k < n; ++k) {
    std::int64_t piv = k;
    for (std::int64_t r = k + 1; r < n; ++r)
      if (std::abs(D[r][k]) > std::abs(D[piv][k])) piv = r;
    std::swap(D[k], D[piv]);
    std::swap(b[k], b[piv]);
    for (std::int64_t r = k + 1; r < n; ++r) {
      double m = D[r][k] / D[k][k];
      for (std::int64_t c = k; c < n; ++c) D[r][c] -= m * D[k][c];
      b[r] -= m * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::int64_t r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (std::int64_t c = r + 1; c < n; ++c) s -= D[r][c] * x[c];
    x[r] = s / D[r][r];
  }
  return x;
}

std::vector<std::vector<double>> dense_inverse(const std::vector<std::vector<double>>& D) {
  const std::int64_t n = static_cast<std::int64_t>(D.size());
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::int64_t c = 0; c < n; ++c) {
    std::vector<double> e(n, 0.0);
    e[c] = 1.0;
    auto col = dense_solve(D, e);
    for (std::int64_t r = 0; r < n; ++r) inv[r][c] = col[r];
  }
  return inv;
}

double norm1(const std::vector<std::vector<double>>& D) {
  double m = 0;
  for (std::size_t c = 0; c < D.size(); ++c) {
    double s = 0;
    for (std::size_t r = 0; r < D.size(); ++r) s += std::abs(D[r][c]);
    m = std::max(m, s);
  }
  return m;
}

std::vector<std::vector<double>> random_spd(std::int64_t n, unsigned seed, double shift) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1, 1);
  std::vector<std::vector<double>> B(n, std::vector<double>(n, 0.0));
  for (auto& row : B)
    for (auto& v : row)
      if (dist(rng) > 0.3) v = dist(rng);  // keep it sparse-ish
  std::vector<std::vector<double>> D(n, std::vector<double>(n, 0.0));
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j) {
      for (std::int64_t k = 0; k < n; ++k) D[i][j] += B[k][i] * B[k][j];
      if (i == j) D[i][j] += shift;
    }
  return D;
}

}  // namespace

TEST_CASE("identity and permutation systems solve exactly") {
  CsrMatrix I = from_dense({{1, 0}, {0, 1}});
  auto x = factorize_and_solve(I, {3.0, -4.0});
  CHECK(x[0] == 3.0);
  CHECK(x[1] == -4.0);

  // zero diagonal: requires pivoting
  CsrMatrix P = from_dense({{0, 2}, {3, 0}});
  auto y = factorize_and_solve(P, {4.0, 9.0});
  CHECK(y[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(y[1] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("sparse solve matches dense Gaussian elimination") {
  auto D = random_spd(50, 11, 0.5);
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> dist(-1, 1);
  std::vector<double> b(50);
  for (auto& v : b) v = dist(rng);
  auto x = factorize_and_solve(from_dense(D), b);
  auto xref = dense_solve(D, b);
  for (std::size_t i = 0; i < b.size(); ++i)
    CHECK(std::abs(x[i] - xref[i]) < 1e-10);
}

TEST_CASE("singular systems are reported") {
  CsrMatrix S = from_dense({{1, 2}, {2, 4}});
  CHECK_THROWS_AS(factorize_and_solve(S, {1.0, 1.0}), std::runtime_error);
  CHECK_THROWS_AS(factorize_and_solve(S, {1.0}), std::invalid_argument);
}

TEST_CASE("condition estimate brackets the exact kappa_1") {
  for (auto [seed, shift] : {std::pair<unsigned, double>{1, 0.05},
                             {2, 0.5}, {3, 5.0}}) {
    auto D = random_spd(40, seed, shift);
    auto rep = estimate_condition_1norm(from_dense(D));
    double exact = norm1(D) * norm1(dense_inverse(D));
    CHECK(rep.norm1 == doctest::Approx(norm1(D)).epsilon(1e-14));
    CHECK(rep.kappa1_estimate <= exact * (1 + 1e-10));
    CHECK(rep.kappa1_estimate >= exact / 3.0);
  }
}

TEST_CASE("condition estimate is invariant under scaling") {
  auto D = random_spd(30, 4, 0.2);
  auto rep1 = estimate_condition_1norm(from_dense(D));
  for (auto& row : D)
    for (auto& v : row) v *= 37.5;
  auto rep2 = estimate_condition_1norm(from_dense(D));
  CHECK(rep2.kappa1_estimate == doctest::Approx(rep1.kappa1_estimate).epsilon(1e-10));
}
