#pragma once

#include "agfem/aggregation.hpp"
#include "agfem/classify.hpp"
#include "agfem/fe_basis.hpp"
#include "agfem/mesh.hpp"

namespace agfem {

enum class SpaceVariant { Standard, Aggregated };
enum class ExtensionType { Standard, Serendipity };

/// Degrees of freedom of the mixed space: nodal Q2 velocities on the
/// (2n+1)^d lattice of the active cells, discontinuous P1 pressures per
/// aggregate (Aggregated) or per active cell (Standard). Velocity DOFs are
/// d components per free node; outer nodes are constrained in the
/// Aggregated variant. Global layout: [free velocity | pressure].
struct DofHandler {
  int dim = 2;
  double h = 1;
  SpaceVariant variant = SpaceVariant::Aggregated;
  std::array<std::int64_t, 3> nodes_per_axis{1, 1, 1};  // 2n+1 per axis

  std::vector<VefFlag> node_flag;              // per lattice node
  std::vector<std::int64_t> free_rank;         // per node, -1 unless free
  std::vector<std::int64_t> constrained_rank;  // per node, -1 unless constrained
  std::vector<std::int64_t> constrained_nodes; // rank -> lattice node
  std::vector<std::int64_t> node_owner_aggregate;  // per node, outer nodes only
  std::int64_t n_free_nodes = 0;
  std::int64_t n_constrained_nodes = 0;

  std::vector<std::int64_t> pressure_block_of_cell;  // per cell, -1 external
  std::vector<Point> pressure_center;                // per block
  std::int64_t n_pressure_blocks = 0;

  std::int64_t num_lattice_nodes() const {
    std::int64_t n = 1;
    for (int a = 0; a < dim; ++a) n *= nodes_per_axis[a];
    return n;
  }
  std::int64_t node_index(std::array<std::int64_t, 3> g) const {
    return g[0] + nodes_per_axis[0] * (g[1] + nodes_per_axis[1] * g[2]);
  }
  std::array<std::int64_t, 3> node_coords(std::int64_t node) const {
    std::array<std::int64_t, 3> g{0, 0, 0};
    g[0] = node % nodes_per_axis[0];
    g[1] = (node / nodes_per_axis[0]) % nodes_per_axis[1];
    if (dim == 3) g[2] = node / (nodes_per_axis[0] * nodes_per_axis[1]);
    return g;
  }
  Point node_point(const BackgroundMesh& mesh, std::int64_t node) const {
    auto g = node_coords(node);
    Point p{0, 0, 0};
    for (int a = 0; a < dim; ++a)
      p[a] = mesh.origin()[a] + 0.5 * h * static_cast<double>(g[a]);
    return p;
  }
  /// Lattice nodes of a cell in q2_basis ordering (x fastest over {0,1,2}).
  std::vector<std::int64_t> cell_nodes(const BackgroundMesh& mesh, std::int64_t cell) const;

  int pressure_size() const { return dim + 1; }
  std::int64_t n_free_velocity() const { return n_free_nodes * dim; }
  std::int64_t n_pressure() const { return n_pressure_blocks * pressure_size(); }
  std::int64_t total_dofs() const { return n_free_velocity() + n_pressure(); }
  std::int64_t velocity_dof(std::int64_t free_node_rank, int comp) const {
    return free_node_rank * dim + comp;
  }
  std::int64_t pressure_dof(std::int64_t block, int basis) const {
    return n_free_velocity() + block * pressure_size() + basis;
  }
  /// P1 pressure monomial (1, (x-c)/h, ...) of a block and its gradient.
  double pressure_basis(std::int64_t block, int basis, const Point& x) const;
  Point pressure_basis_grad(int basis) const;
};

DofHandler build_dof_handler(const BackgroundMesh& mesh, const Classification& cls,
                             const AggregateMap& agg, SpaceVariant variant);

/// One row per constrained node: masters are free-node ranks on the owner
/// aggregate's root cell, coefficients are root shape values at the node.
/// The same scalar row applies to each velocity component.
struct ConstraintTable {
  std::vector<std::vector<std::pair<std::int64_t, double>>> rows;
};

ConstraintTable build_constraints(const BackgroundMesh& mesh, const Classification& cls,
                                  const AggregateMap& agg, const DofHandler& dofs,
                                  ExtensionType extension);

/// Extension operator: scatter free-node values to the full lattice,
/// filling constrained nodes through the table (inactive nodes read 0).
std::vector<double> expand_node_values(const DofHandler& dofs,
                                       const ConstraintTable& constraints,
                                       const std::vector<double>& free_values);

/// Q2 nodal interpolant evaluation on a cell from full lattice node values.
double eval_scalar(const BackgroundMesh& mesh, const DofHandler& dofs,
                   const std::vector<double>& node_values, std::int64_t cell,
                   const Point& x);
Point eval_scalar_grad(const BackgroundMesh& mesh, const DofHandler& dofs,
                       const std::vector<double>& node_values, std::int64_t cell,
                       const Point& x);

/// Pressure evaluation from the global DOF vector (reads the block of `cell`).
double eval_pressure(const DofHandler& dofs, const std::vector<double>& dof_values,
                     std::int64_t cell, const Point& x);

}  // namespace agfem
