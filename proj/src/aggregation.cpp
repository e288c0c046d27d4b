#include "agfem/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace agfem {

namespace {

double center_distance(const BackgroundMesh& mesh, std::int64_t a, std::int64_t b) {
  Point pa = mesh.cell_center(a), pb = mesh.cell_center(b);
  double d2 = 0;
  for (int ax = 0; ax < mesh.dim(); ++ax) d2 += (pa[ax] - pb[ax]) * (pa[ax] - pb[ax]);
  return std::sqrt(d2);
}

}  // namespace

AggregateMap aggregate_cells(const BackgroundMesh& mesh, const Classification& cls,
                             const CutDecomposition& decomp, double eta0, bool parallel) {
  const std::int64_t nc = mesh.num_cells();
  AggregateMap agg;
  agg.root_of_cell.assign(nc, -1);
  agg.aggregate_id.assign(nc, -1);

  // Seed: interior cells (and, with eta0 > 0, well-covered cut cells) become
  // singleton aggregates in ascending cell order.
  for (std::int64_t c = 0; c < nc; ++c) {
    bool seed = cls.cell_class[c] == CellClass::Internal;
    if (!seed && eta0 > 0 && cls.cell_class[c] == CellClass::Cut)
      seed = cell_inside_fraction(mesh, decomp, cls, c) >= eta0;
    if (seed) {
      agg.root_of_cell[c] = c;
      agg.aggregate_id[c] = agg.num_aggregates();
      agg.aggregate_root.push_back(c);
    }
  }

  // Facet eligibility |F cap Omega| > 0, cached per cell side.
  std::vector<std::int64_t> untouched;
  for (std::int64_t c = 0; c < nc; ++c)
    if (cls.cell_class[c] == CellClass::Cut && agg.aggregate_id[c] < 0)
      untouched.push_back(c);

  while (!untouched.empty()) {
    const std::int64_t n = static_cast<std::int64_t>(untouched.size());
    std::vector<std::int64_t> attach_to(n, -1);  // chosen touched neighbor
#ifdef _OPENMP
#pragma omp parallel for if (parallel) schedule(static)
#endif
    for (std::int64_t k = 0; k < n; ++k) {
      const std::int64_t c = untouched[k];
      std::int64_t best = -1;
      double best_dist = 0;
      for (const auto& fn : mesh.cell_neighbors_through_facets(c)) {
        if (fn.neighbor < 0 || agg.aggregate_id[fn.neighbor] < 0) continue;
        if (facet_inside_measure(mesh, decomp, cls, fn.facet) <= 0) continue;
        double dist = center_distance(mesh, c, agg.root_of_cell[fn.neighbor]);
        if (best < 0 || dist < best_dist - 1e-14 ||
            (std::abs(dist - best_dist) <= 1e-14 && fn.neighbor < best)) {
          best = fn.neighbor;
          best_dist = dist;
        }
      }
      attach_to[k] = best;
    }
    // Commit at round end so the wavefront advances one layer per round.
    std::vector<std::int64_t> next;
    bool progress = false;
    for (std::int64_t k = 0; k < n; ++k) {
      const std::int64_t c = untouched[k];
      if (attach_to[k] < 0) {
        next.push_back(c);
        continue;
      }
      agg.root_of_cell[c] = agg.root_of_cell[attach_to[k]];
      agg.aggregate_id[c] = agg.aggregate_id[attach_to[k]];
      progress = true;
    }
    if (!progress)
      throw std::runtime_error(
          "cut cell " + std::to_string(next.front()) +
          " is unreachable from any interior cell through facets intersecting the "
          "domain; the geometry is under-resolved");
    untouched = std::move(next);
  }

  agg.members.assign(agg.num_aggregates(), {});
  for (std::int64_t c = 0; c < nc; ++c)
    if (agg.aggregate_id[c] >= 0) agg.members[agg.aggregate_id[c]].push_back(c);

  agg.aggregate_diameter_cells.assign(agg.num_aggregates(), 0);
  for (std::int64_t a = 0; a < agg.num_aggregates(); ++a) {
    auto rc = mesh.cell_coords(agg.aggregate_root[a]);
    for (auto c : agg.members[a]) {
      auto cc = mesh.cell_coords(c);
      std::int64_t d = 0;
      for (int ax = 0; ax < mesh.dim(); ++ax)
        d = std::max(d, std::abs(cc[ax] - rc[ax]));
      agg.aggregate_diameter_cells[a] = std::max(agg.aggregate_diameter_cells[a], d);
    }
  }

  assign_outer_vef_owners(mesh, cls, agg);
  return agg;
}

void assign_outer_vef_owners(const BackgroundMesh& mesh, const Classification& cls,
                             AggregateMap& agg) {
  agg.owner_of_outer_vef.assign(mesh.dim() + 1, {});
  for (int d = 0; d <= mesh.dim(); ++d) {
    const std::int64_t n = mesh.num_vefs(d);
    agg.owner_of_outer_vef[d].assign(n, -1);
    for (std::int64_t i = 0; i < n; ++i) {
      if (cls.vef_flags[d][i] != VefFlag::Outer) continue;
      std::int64_t best = -1;
      for (auto c : mesh.cells_of_vef({d, i})) {
        std::int64_t a = agg.aggregate_id[c];
        if (a < 0) continue;
        if (best < 0) {
          best = a;
          continue;
        }
        auto sz = [&](std::int64_t x) { return agg.members[x].size(); };
        if (sz(a) < sz(best) ||
            (sz(a) == sz(best) && agg.aggregate_root[a] < agg.aggregate_root[best]))
          best = a;
      }
      if (best < 0)
        throw std::logic_error("outer VEF not contained in any aggregate");
      agg.owner_of_outer_vef[d][i] = best;
    }
  }
}

AggregateStats aggregate_statistics(const AggregateMap& agg) {
  AggregateStats s;
  if (agg.num_aggregates() == 0) return s;
  double total = 0;
  for (std::int64_t a = 0; a < agg.num_aggregates(); ++a) {
    auto sz = static_cast<std::int64_t>(agg.members[a].size());
    s.max_size = std::max(s.max_size, sz);
    total += static_cast<double>(sz);
    s.max_root_distance = std::max(s.max_root_distance, agg.aggregate_diameter_cells[a]);
  }
  s.mean_size = total / static_cast<double>(agg.num_aggregates());
  return s;
}

}  // namespace agfem
