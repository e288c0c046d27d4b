#pragma once

#include "agfem/classify.hpp"
#include "agfem/cut.hpp"
#include "agfem/mesh.hpp"

namespace agfem {

/// Partition of the active cells into facet-connected aggregates, each holding
/// exactly one interior cell (its root), plus the ownership map sending every
/// outer VEF to one containing aggregate.
struct AggregateMap {
  std::vector<std::int64_t> root_of_cell;   // per cell, -1 for external cells
  std::vector<std::int64_t> aggregate_id;   // per cell, -1 for external cells
  std::vector<std::int64_t> aggregate_root;            // per aggregate
  std::vector<std::vector<std::int64_t>> members;      // per aggregate, ascending
  std::vector<std::int64_t> aggregate_diameter_cells;  // Chebyshev distance to root
  /// owner_of_outer_vef[d][i] = owning aggregate for an outer VEF, -1 otherwise.
  std::vector<std::vector<std::int64_t>> owner_of_outer_vef;

  std::int64_t num_aggregates() const {
    return static_cast<std::int64_t>(aggregate_root.size());
  }
};

/// Wavefront aggregation. Interior cells start touched as singleton
/// aggregates; each round attaches every untouched cut cell that sees a
/// touched neighbor through a facet with |F cap Omega| > 0 to the candidate
/// whose aggregate root center is closest (Euclidean), ties to the smaller
/// neighbor cell index. Assignments commit at the end of each round, so the
/// result does not depend on traversal order.
/// eta0 > 0 additionally pre-touches cut cells with inside volume fraction
/// >= eta0 as their own aggregates (those roots are then not interior).
/// A cut cell that no round can reach raises an error naming the cell.
AggregateMap aggregate_cells(const BackgroundMesh& mesh, const Classification& cls,
                             const CutDecomposition& decomp, double eta0 = 0.0,
                             bool parallel = false);

/// Fill owner_of_outer_vef: each outer VEF goes to the incident aggregate with
/// the fewest cells, ties to the smaller root cell index.
void assign_outer_vef_owners(const BackgroundMesh& mesh, const Classification& cls,
                             AggregateMap& agg);

struct AggregateStats {
  std::int64_t max_size = 0;
  double mean_size = 0;
  std::int64_t max_root_distance = 0;  // in cell units (Chebyshev)
};

AggregateStats aggregate_statistics(const AggregateMap& agg);

}  // namespace agfem
