#include "agfem/solve.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include <cmath>
#include <stdexcept>
#include <string>

namespace agfem {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Solver = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

SpMat to_eigen(const CsrMatrix& A) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(A.nnz());
  for (std::int64_t r = 0; r < A.n; ++r)
    for (std::int64_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k)
      trip.emplace_back(static_cast<int>(r), static_cast<int>(A.col_idx[k]), A.vals[k]);
  SpMat M(A.n, A.n);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

void factorize(Solver& solver, const SpMat& M) {
  solver.analyzePattern(M);
  solver.factorize(M);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("sparse LU factorization failed (" +
                             solver.lastErrorMessage() + ")");
}

// MINRES preconditioner: incomplete Cholesky on the leading (velocity) block
// of the symmetrically scaled system, identity on the pressure tail.
struct VelocityBlockPreconditioner {
  Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::AMDOrdering<int>> ic;
  std::int64_t nv = 0;
  bool use_ic = false;

  VelocityBlockPreconditioner& analyzePattern(const SpMat&) { return *this; }
  VelocityBlockPreconditioner& factorize(const SpMat&) { return *this; }
  VelocityBlockPreconditioner& compute(const SpMat&) { return *this; }
  template <class Rhs>
  Eigen::VectorXd solve(const Rhs& b) const {
    Eigen::VectorXd y = b;
    if (use_ic) y.head(nv) = ic.solve(b.head(nv).eval());
    return y;
  }
  Eigen::ComputationInfo info() const { return Eigen::Success; }
};

std::vector<double> solve_iterative(const MixedSystem& system) {
  const CsrMatrix& A = system.matrix;
  SpMat M = to_eigen(A);
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(system.rhs.data(), A.n);
  // symmetric diagonal scaling keeps the system symmetric for MINRES
  Eigen::VectorXd scale(A.n);
  for (std::int64_t r = 0; r < A.n; ++r) {
    double diag = 0, rmax = 0;
    for (std::int64_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) {
      if (A.col_idx[k] == r) diag = std::abs(A.vals[k]);
      rmax = std::max(rmax, std::abs(A.vals[k]));
    }
    scale[r] = std::max(diag, std::max(1e-3 * rmax, 1e-300));
  }
  Eigen::VectorXd s = scale.cwiseSqrt().cwiseInverse();
  SpMat Ms = s.asDiagonal() * M * s.asDiagonal();
  Eigen::VectorXd bs = s.asDiagonal() * b;

  Eigen::MINRES<SpMat, Eigen::Lower | Eigen::Upper, VelocityBlockPreconditioner> minres;
  auto& pre = minres.preconditioner();
  pre.nv = system.n_velocity;
  if (pre.nv > 0 && pre.nv < A.n) {
    SpMat Avv = Ms.topLeftCorner(pre.nv, pre.nv);
    pre.ic.compute(Avv);
    pre.use_ic = pre.ic.info() == Eigen::Success;
  }
  minres.setMaxIterations(60000);
  minres.setTolerance(1e-10);
  minres.compute(Ms);
  Eigen::VectorXd ys = minres.solve(bs);
  Eigen::VectorXd x = s.asDiagonal() * ys;
  double res = (M * x - b).norm() / std::max(1.0, b.norm());
  if (!(res <= 1e-8))
    throw std::runtime_error("iterative solve stalled at relative residual " +
                             std::to_string(res) + " after " +
                             std::to_string(minres.iterations()) + " iterations");
  return {x.data(), x.data() + A.n};
}

}  // namespace

std::vector<double> solve_system(const MixedSystem& system) {
  if (system.matrix.n <= kDirectSolveLimit)
    return factorize_and_solve(system.matrix, system.rhs);
  return solve_iterative(system);
}

std::vector<double> factorize_and_solve(const CsrMatrix& A, const std::vector<double>& b) {
  if (static_cast<std::int64_t>(b.size()) != A.n)
    throw std::invalid_argument("factorize_and_solve: size mismatch");
  SpMat M = to_eigen(A);
  Solver solver;
  factorize(solver, M);
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), A.n);
  Eigen::VectorXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("sparse LU back substitution failed");
  double res = (M * x - rhs).norm() / std::max(1.0, rhs.norm());
  if (!(res <= 1e-8))
    throw std::runtime_error("sparse solve residual " + std::to_string(res) +
                             " exceeds 1e-8; system is singular or ill conditioned");
  return {x.data(), x.data() + A.n};
}

ConditionReport estimate_condition_1norm(const CsrMatrix& A) {
  ConditionReport rep;
  rep.n = A.n;
  SpMat M = to_eigen(A);
  for (int c = 0; c < M.outerSize(); ++c) {
    double s = 0;
    for (SpMat::InnerIterator it(M, c); it; ++it) s += std::abs(it.value());
    rep.norm1 = std::max(rep.norm1, s);
  }
  Solver solver;
  factorize(solver, M);
  SpMat Mt = SpMat(M.transpose());
  Solver solver_t;
  factorize(solver_t, Mt);

  const std::int64_t n = A.n;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  double est = 0;
  for (int iter = 0; iter < 5; ++iter) {
    Eigen::VectorXd y = solver.solve(x);
    est = y.lpNorm<1>();
    Eigen::VectorXd xi(n);
    for (std::int64_t i = 0; i < n; ++i) xi[i] = y[i] >= 0 ? 1.0 : -1.0;
    Eigen::VectorXd z = solver_t.solve(xi);
    std::int64_t j = 0;
    double zmax = z.cwiseAbs().maxCoeff(&j);
    if (zmax <= z.dot(x)) break;
    x.setZero();
    x[j] = 1.0;
  }
  // Higham's extra vector guards against underestimation on structured inputs
  Eigen::VectorXd v(n);
  for (std::int64_t i = 0; i < n; ++i)
    v[i] = (i % 2 ? -1.0 : 1.0) *
           (1.0 + (n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0));
  double est2 = 2.0 * solver.solve(v).lpNorm<1>() / (3.0 * static_cast<double>(n));
  rep.inv_norm1_estimate = std::max(est, est2);
  rep.kappa1_estimate = rep.norm1 * rep.inv_norm1_estimate;
  return rep;
}

}  // namespace agfem
