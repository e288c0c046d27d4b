#pragma once

#include "agfem/assembly.hpp"

namespace agfem {

/// Sparse LU solve of A x = b. Throws on a singular or numerically broken
/// factorization (naming the failure), and if the final true residual
/// ||Ax - b||_2 / max(1, ||b||_2) exceeds 1e-8.
std::vector<double> factorize_and_solve(const CsrMatrix& A, const std::vector<double>& b);

/// Systems at or below this size go through the sparse direct solver; larger
/// ones (3D refinements) would exceed memory in the LU fill and use a
/// diagonally scaled MINRES with an incomplete-Cholesky velocity block
/// preconditioner instead.
inline constexpr std::int64_t kDirectSolveLimit = 40000;

/// Solve a mixed system, choosing the method by size (see kDirectSolveLimit).
/// The final true residual is verified to <= 1e-8 either way.
std::vector<double> solve_system(const MixedSystem& system);

struct ConditionReport {
  double kappa1_estimate = 0;   // norm1 * inv_norm1_estimate
  double norm1 = 0;             // exact ||A||_1 (max column sum)
  double inv_norm1_estimate = 0;  // Hager-Higham lower bound on ||A^-1||_1
  std::int64_t n = 0;
};

/// 1-norm condition estimate from one sparse LU factorization and a few
/// solves (Hager's method with Higham's extra vector). The estimate never
/// exceeds the true kappa_1.
ConditionReport estimate_condition_1norm(const CsrMatrix& A);

}  // namespace agfem
