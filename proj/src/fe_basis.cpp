#include "agfem/fe_basis.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace agfem {

namespace {

double ipow(double x, int e) {
  double r = 1;
  for (int k = 0; k < e; ++k) r *= x;
  return r;
}

// 1D quadratic Lagrange shapes on {0, 1/2, 1} in the monomial basis {1,t,t^2}.
constexpr double kLag1d[3][3] = {{1, -3, 2}, {0, 4, -4}, {0, -1, 2}};

ScalarFeBasis build_q2(int dim) {
  ScalarFeBasis b;
  b.dim = dim;
  b.order = 2;
  const int n1 = 3, nz = dim == 3 ? 3 : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < n1; ++j)
      for (int i = 0; i < n1; ++i)
        b.nodes.push_back({0.5 * i, 0.5 * j, dim == 3 ? 0.5 * k : 0.0});
  for (int c = 0; c < (dim == 3 ? 3 : 1); ++c)
    for (int bb = 0; bb < 3; ++bb)
      for (int a = 0; a < 3; ++a) b.monomials.push_back({a, bb, dim == 3 ? c : 0});
  // tensor products of the 1D coefficient rows
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < n1; ++j)
      for (int i = 0; i < n1; ++i) {
        std::vector<double> row;
        for (int mc = 0; mc < (dim == 3 ? 3 : 1); ++mc)
          for (int mb = 0; mb < 3; ++mb)
            for (int ma = 0; ma < 3; ++ma) {
              double v = kLag1d[i][ma] * kLag1d[j][mb];
              if (dim == 3) v *= kLag1d[k][mc];
              row.push_back(v);
            }
        b.coef.push_back(std::move(row));
      }
  return b;
}

// Superlinear degree: total degree ignoring variables that enter linearly.
int superlinear_degree(const std::array<int, 3>& e) {
  int d = 0;
  for (int a = 0; a < 3; ++a) d += e[a] >= 2 ? e[a] : 0;
  return d;
}

void solve_dense(std::vector<std::vector<double>>& A, std::vector<std::vector<double>>& B) {
  // Gaussian elimination with partial pivoting; B holds multiple RHS rows.
  const int n = static_cast<int>(A.size());
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int r = k + 1; r < n; ++r)
      if (std::abs(A[r][k]) > std::abs(A[piv][k])) piv = r;
    std::swap(A[k], A[piv]);
    std::swap(B[k], B[piv]);
    if (A[k][k] == 0) throw std::runtime_error("singular node/monomial pairing");
    for (int r = k + 1; r < n; ++r) {
      double m = A[r][k] / A[k][k];
      for (int c = k; c < n; ++c) A[r][c] -= m * A[k][c];
      for (std::size_t c = 0; c < B[r].size(); ++c) B[r][c] -= m * B[k][c];
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    for (int r = k + 1; r < n; ++r)
      for (std::size_t c = 0; c < B[k].size(); ++c) B[k][c] -= A[k][r] * B[r][c];
    for (std::size_t c = 0; c < B[k].size(); ++c) B[k][c] /= A[k][k];
  }
}

ScalarFeBasis build_serendipity_q2(int dim) {
  ScalarFeBasis b;
  b.dim = dim;
  b.order = 2;
  // nodes: cell corners plus edge midpoints (all on the cell boundary)
  if (dim == 2) {
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i)
        if (!(i == 1 && j == 1)) b.nodes.push_back({0.5 * i, 0.5 * j, 0.0});
  } else {
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
          int odd = (i == 1) + (j == 1) + (k == 1);
          if (odd <= 1) b.nodes.push_back({0.5 * i, 0.5 * j, 0.5 * k});
        }
  }
  for (int c = 0; c <= (dim == 3 ? 2 : 0); ++c)
    for (int bb = 0; bb <= 2; ++bb)
      for (int a = 0; a <= 2; ++a) {
        std::array<int, 3> e{a, bb, c};
        if (superlinear_degree(e) <= 2) b.monomials.push_back(e);
      }
  const int n = b.size();
  if (static_cast<int>(b.monomials.size()) != n)
    throw std::logic_error("serendipity span/node count mismatch");
  // Vandermonde solve: coef rows are the columns of V^{-1}
  std::vector<std::vector<double>> V(n, std::vector<double>(n));
  std::vector<std::vector<double>> I(n, std::vector<double>(n, 0.0));
  for (int r = 0; r < n; ++r) {
    I[r][r] = 1.0;
    for (int c = 0; c < n; ++c) {
      const auto& e = b.monomials[c];
      V[r][c] = ipow(b.nodes[r][0], e[0]) * ipow(b.nodes[r][1], e[1]) *
                ipow(b.nodes[r][2], e[2]);
    }
  }
  solve_dense(V, I);  // I now holds V^{-1}
  b.coef.assign(n, std::vector<double>(n));
  for (int shape = 0; shape < n; ++shape)
    for (int m = 0; m < n; ++m) b.coef[shape][m] = I[m][shape];
  return b;
}

}  // namespace

double ScalarFeBasis::value(int shape, const Point& ref) const {
  double s = 0;
  const auto& row = coef[shape];
  for (std::size_t m = 0; m < monomials.size(); ++m) {
    if (row[m] == 0) continue;
    const auto& e = monomials[m];
    s += row[m] * ipow(ref[0], e[0]) * ipow(ref[1], e[1]) * ipow(ref[2], e[2]);
  }
  return s;
}

Point ScalarFeBasis::gradient(int shape, const Point& ref) const {
  Point g{0, 0, 0};
  const auto& row = coef[shape];
  for (std::size_t m = 0; m < monomials.size(); ++m) {
    if (row[m] == 0) continue;
    const auto& e = monomials[m];
    for (int a = 0; a < dim; ++a) {
      if (e[a] == 0) continue;
      double t = row[m] * e[a] * ipow(ref[a], e[a] - 1);
      for (int o = 0; o < dim; ++o)
        if (o != a) t *= ipow(ref[o], e[o]);
      g[a] += t;
    }
  }
  return g;
}

double ScalarFeBasis::laplacian(int shape, const Point& ref) const {
  double s = 0;
  const auto& row = coef[shape];
  for (std::size_t m = 0; m < monomials.size(); ++m) {
    if (row[m] == 0) continue;
    const auto& e = monomials[m];
    for (int a = 0; a < dim; ++a) {
      if (e[a] < 2) continue;
      double t = row[m] * e[a] * (e[a] - 1) * ipow(ref[a], e[a] - 2);
      for (int o = 0; o < dim; ++o)
        if (o != a) t *= ipow(ref[o], e[o]);
      s += t;
    }
  }
  return s;
}

const ScalarFeBasis& q2_basis(int dim) {
  static const ScalarFeBasis b2 = build_q2(2);
  static const ScalarFeBasis b3 = build_q2(3);
  if (dim == 2) return b2;
  if (dim == 3) return b3;
  throw std::invalid_argument("q2_basis: dim must be 2 or 3");
}

const ScalarFeBasis& serendipity_q2_basis(int dim) {
  static const ScalarFeBasis b2 = build_serendipity_q2(2);
  static const ScalarFeBasis b3 = build_serendipity_q2(3);
  if (dim == 2) return b2;
  if (dim == 3) return b3;
  throw std::invalid_argument("serendipity_q2_basis: dim must be 2 or 3");
}

}  // namespace agfem
