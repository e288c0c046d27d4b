#include "agfem/spaces.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace agfem {

namespace {

// Lattice parity identifies the owning VEF of a node: odd coordinates span
// the entity's directions. Resolved through a containing cell by matching
// entity midpoints, so flags and aggregate owners come straight from the
// classification and aggregation tables.
VefId node_owner_vef(const BackgroundMesh& mesh, const DofHandler& dofs,
                     std::int64_t node) {
  auto g = dofs.node_coords(node);
  int d = 0;
  std::array<std::int64_t, 3> cell{0, 0, 0};
  for (int a = 0; a < mesh.dim(); ++a) {
    if (g[a] % 2 == 1) {
      ++d;
      cell[a] = g[a] / 2;
    } else {
      // even plane: clamp to an adjacent cell
      cell[a] = std::min(g[a] / 2, mesh.cells_per_axis(a) - 1);
    }
  }
  if (d == mesh.dim()) return {d, mesh.cell_index(cell)};
  Point p{0, 0, 0};
  for (int a = 0; a < mesh.dim(); ++a)
    p[a] = mesh.origin()[a] + 0.5 * mesh.h() * static_cast<double>(g[a]);
  const double tol = 1e-9 * mesh.h();
  std::int64_t c = mesh.cell_index(cell);
  auto vefs = mesh.vefs_of_cell(c);
  for (const auto& vef : vefs[d]) {
    Point q = mesh.vef_center(vef);
    bool match = true;
    for (int a = 0; a < mesh.dim(); ++a)
      if (std::abs(q[a] - p[a]) > tol) match = false;
    if (match) return vef;
  }
  throw std::logic_error("node " + std::to_string(node) + " has no owner VEF");
}

}  // namespace

std::vector<std::int64_t> DofHandler::cell_nodes(const BackgroundMesh& mesh,
                                                 std::int64_t cell) const {
  auto c = mesh.cell_coords(cell);
  std::vector<std::int64_t> out;
  const int nz = dim == 3 ? 3 : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i)
        out.push_back(node_index({2 * c[0] + i, 2 * c[1] + j, dim == 3 ? 2 * c[2] + k : 0}));
  return out;
}

double DofHandler::pressure_basis(std::int64_t block, int basis, const Point& x) const {
  if (basis == 0) return 1.0;
  return (x[basis - 1] - pressure_center[block][basis - 1]) / h;
}

Point DofHandler::pressure_basis_grad(int basis) const {
  Point g{0, 0, 0};
  if (basis > 0) g[basis - 1] = 1.0 / h;
  return g;
}

DofHandler build_dof_handler(const BackgroundMesh& mesh, const Classification& cls,
                             const AggregateMap& agg, SpaceVariant variant) {
  DofHandler dofs;
  dofs.dim = mesh.dim();
  dofs.h = mesh.h();
  dofs.variant = variant;
  for (int a = 0; a < 3; ++a)
    dofs.nodes_per_axis[a] = a < mesh.dim() ? 2 * mesh.cells_per_axis(a) + 1 : 1;

  const std::int64_t nn = dofs.num_lattice_nodes();
  dofs.node_flag.assign(nn, VefFlag::External);
  dofs.free_rank.assign(nn, -1);
  dofs.constrained_rank.assign(nn, -1);
  dofs.node_owner_aggregate.assign(nn, -1);

  for (std::int64_t node = 0; node < nn; ++node) {
    auto vef = node_owner_vef(mesh, dofs, node);
    dofs.node_flag[node] = cls.vef_flags[vef.dimension][vef.index];
    if (dofs.node_flag[node] == VefFlag::Outer)
      dofs.node_owner_aggregate[node] = agg.owner_of_outer_vef[vef.dimension][vef.index];
  }
  for (std::int64_t node = 0; node < nn; ++node) {
    switch (dofs.node_flag[node]) {
      case VefFlag::Interior:
        dofs.free_rank[node] = dofs.n_free_nodes++;
        break;
      case VefFlag::Outer:
        if (variant == SpaceVariant::Standard) {
          dofs.free_rank[node] = dofs.n_free_nodes++;
        } else {
          dofs.constrained_rank[node] = dofs.n_constrained_nodes++;
          dofs.constrained_nodes.push_back(node);
        }
        break;
      case VefFlag::External:
        break;
    }
  }

  dofs.pressure_block_of_cell.assign(mesh.num_cells(), -1);
  if (variant == SpaceVariant::Aggregated) {
    dofs.n_pressure_blocks = agg.num_aggregates();
    dofs.pressure_center.resize(dofs.n_pressure_blocks);
    for (std::int64_t a = 0; a < agg.num_aggregates(); ++a)
      dofs.pressure_center[a] = mesh.cell_center(agg.aggregate_root[a]);
    for (std::int64_t c = 0; c < mesh.num_cells(); ++c)
      dofs.pressure_block_of_cell[c] = agg.aggregate_id[c];
  } else {
    for (std::int64_t c = 0; c < mesh.num_cells(); ++c)
      if (cls.is_active(c)) {
        dofs.pressure_block_of_cell[c] = dofs.n_pressure_blocks++;
        dofs.pressure_center.push_back(mesh.cell_center(c));
      }
  }
  return dofs;
}

ConstraintTable build_constraints(const BackgroundMesh& mesh, const Classification& cls,
                                  const AggregateMap& agg, const DofHandler& dofs,
                                  ExtensionType extension) {
  ConstraintTable table;
  table.rows.resize(dofs.n_constrained_nodes);
  if (dofs.variant == SpaceVariant::Standard) return table;
  const ScalarFeBasis& basis = extension == ExtensionType::Standard
                                   ? q2_basis(mesh.dim())
                                   : serendipity_q2_basis(mesh.dim());
  for (std::int64_t rank = 0; rank < dofs.n_constrained_nodes; ++rank) {
    std::int64_t node = dofs.constrained_nodes[rank];
    std::int64_t a = dofs.node_owner_aggregate[node];
    if (a < 0) throw std::logic_error("constrained node without owner aggregate");
    std::int64_t root = agg.aggregate_root[a];
    if (cls.cell_class[root] != CellClass::Internal)
      throw std::logic_error("owner aggregate root is not an interior cell");
    CellBasis cb{&basis, mesh.cell_min_corner(root), mesh.h()};
    Point x = dofs.node_point(mesh, node);
    auto rc = mesh.cell_coords(root);
    auto& row = table.rows[rank];
    for (int shape = 0; shape < basis.size(); ++shape) {
      // lattice node of this shape's reference node on the root cell
      std::array<std::int64_t, 3> g{0, 0, 0};
      for (int ax = 0; ax < mesh.dim(); ++ax)
        g[ax] = 2 * rc[ax] + static_cast<std::int64_t>(std::lround(2 * basis.nodes[shape][ax]));
      std::int64_t master = dofs.node_index(g);
      std::int64_t mrank = dofs.free_rank[master];
      if (mrank < 0) throw std::logic_error("constraint master is not a free node");
      row.push_back({mrank, cb.value(shape, x)});
    }
  }
  return table;
}

std::vector<double> expand_node_values(const DofHandler& dofs,
                                       const ConstraintTable& constraints,
                                       const std::vector<double>& free_values) {
  if (static_cast<std::int64_t>(free_values.size()) != dofs.n_free_nodes)
    throw std::invalid_argument("expand_node_values: free vector size mismatch");
  std::vector<double> full(dofs.num_lattice_nodes(), 0.0);
  for (std::int64_t node = 0; node < dofs.num_lattice_nodes(); ++node)
    if (dofs.free_rank[node] >= 0) full[node] = free_values[dofs.free_rank[node]];
  for (std::int64_t rank = 0; rank < dofs.n_constrained_nodes; ++rank) {
    double v = 0;
    for (const auto& [master, c] : constraints.rows[rank]) v += c * free_values[master];
    full[dofs.constrained_nodes[rank]] = v;
  }
  return full;
}

double eval_scalar(const BackgroundMesh& mesh, const DofHandler& dofs,
                   const std::vector<double>& node_values, std::int64_t cell,
                   const Point& x) {
  const ScalarFeBasis& basis = q2_basis(mesh.dim());
  CellBasis cb{&basis, mesh.cell_min_corner(cell), mesh.h()};
  auto nodes = dofs.cell_nodes(mesh, cell);
  double s = 0;
  for (int shape = 0; shape < basis.size(); ++shape)
    s += node_values[nodes[shape]] * cb.value(shape, x);
  return s;
}

Point eval_scalar_grad(const BackgroundMesh& mesh, const DofHandler& dofs,
                       const std::vector<double>& node_values, std::int64_t cell,
                       const Point& x) {
  const ScalarFeBasis& basis = q2_basis(mesh.dim());
  CellBasis cb{&basis, mesh.cell_min_corner(cell), mesh.h()};
  auto nodes = dofs.cell_nodes(mesh, cell);
  Point g{0, 0, 0};
  for (int shape = 0; shape < basis.size(); ++shape) {
    Point gs = cb.gradient(shape, x);
    for (int a = 0; a < mesh.dim(); ++a) g[a] += node_values[nodes[shape]] * gs[a];
  }
  return g;
}

double eval_pressure(const DofHandler& dofs, const std::vector<double>& dof_values,
                     std::int64_t cell, const Point& x) {
  std::int64_t block = dofs.pressure_block_of_cell[cell];
  if (block < 0) throw std::invalid_argument("eval_pressure: external cell");
  double s = 0;
  for (int b = 0; b < dofs.pressure_size(); ++b)
    s += dof_values[dofs.pressure_dof(block, b)] * dofs.pressure_basis(block, b, x);
  return s;
}

}  // namespace agfem
