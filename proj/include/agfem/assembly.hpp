#pragma once

#include <functional>

#include "agfem/aggregation.hpp"
#include "agfem/classify.hpp"
#include "agfem/cut.hpp"
#include "agfem/mesh.hpp"
#include "agfem/spaces.hpp"

namespace agfem {

enum class Stabilization { None, Alg2, Alg3 };

struct FormParameters {
  double tau_nitsche = 40.0;  // 10 q^2 for q = 2
  double tau_j1 = 0.01;
  double tau_j2 = 0.01;
  Stabilization stabilization = Stabilization::Alg3;
  int quadrature_degree = 6;  // 2q + 2
};

enum class BcType { Dirichlet, Neumann };

/// Data of one Stokes boundary-value problem: body force, Dirichlet velocity
/// on the immersed boundary (and any box face marked Dirichlet), and the
/// traction t = grad(u) n - p n on Neumann box faces.
struct ProblemData {
  std::function<Point(const Point&)> body_force;
  std::function<Point(const Point&)> dirichlet;
  std::function<Point(const Point&, const Point&)> neumann_traction;  // (x, n)
  std::array<BcType, 6> box_faces{BcType::Neumann, BcType::Neumann, BcType::Neumann,
                                  BcType::Neumann, BcType::Neumann, BcType::Neumann};

  bool has_neumann_face(int dim) const {
    for (int s = 0; s < 2 * dim; ++s)
      if (box_faces[s] == BcType::Neumann) return true;
    return false;
  }
};

/// Where the discrete inf-sup may fail: facets between distinct aggregates of
/// which at least one is a proper (multi-cell) aggregate, and (jump+residual
/// variant) the proper aggregates themselves.
struct ImproperSets {
  std::vector<std::int64_t> stabilized_facets;
  std::vector<std::int64_t> stabilized_aggregates;  // residual variant only
};

ImproperSets identify_improper_sets(const BackgroundMesh& mesh, const AggregateMap& agg,
                                    Stabilization stabilization, int q = 2);

/// Symmetric sparse matrix in CSR, full (both triangles) storage.
struct CsrMatrix {
  std::int64_t n = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<std::int64_t> col_idx;
  std::vector<double> vals;

  std::int64_t nnz() const { return static_cast<std::int64_t>(vals.size()); }
  std::vector<double> multiply(const std::vector<double>& x) const;
};

struct MixedSystem {
  CsrMatrix matrix;
  std::vector<double> rhs;
  std::int64_t n_velocity = 0;
  std::int64_t n_pressure = 0;
  bool has_multiplier = false;
};

/// Assemble the constrained Stokes system over the free DOFs:
///   a_h(u,v) + b_h(v,p) + b_h(u,q) - j_h(u,p;v,q) = L(v,q)
/// with symmetric Nitsche boundary terms on the Dirichlet surface (penalty
/// tau/h), the clipped-facet pressure-jump stabilization on the improper
/// facets, and (Alg2) the strong-residual stabilization on improper
/// aggregates with the matching f term on the right-hand side. Constraints
/// are eliminated element-wise through the table.
MixedSystem assemble(const BackgroundMesh& mesh, const Classification& cls,
                     const CutDecomposition& decomp, const AggregateMap& agg,
                     const DofHandler& dofs, const ConstraintTable& constraints,
                     const ImproperSets& improper, const FormParameters& params,
                     const ProblemData& problem, bool parallel = false);

enum class MeanConstraintMode { None, LagrangeMultiplier };

/// Optionally append one Lagrange-multiplier row/column enforcing
/// int_Omega p = 0 (pure-Dirichlet setups only; with a Neumann face present
/// the request is refused with a warning and the system returned unchanged).
MixedSystem apply_mean_constraint(MixedSystem system, MeanConstraintMode mode,
                                  const BackgroundMesh& mesh, const Classification& cls,
                                  const CutDecomposition& decomp, const DofHandler& dofs,
                                  const ProblemData& problem);

}  // namespace agfem
