#include "agfem/classify.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace agfem {

namespace {

constexpr double kNudge = 1e-12;

double nudged(double v) { return std::abs(v) < kNudge ? -kNudge : v; }

CellClass classify_cell(const BackgroundMesh& mesh, const LevelSet& ls,
                        const std::vector<double>& vals, std::int64_t cell) {
  auto verts = mesh.cell_vertices(cell);
  int neg = 0, pos = 0;
  for (auto v : verts) (vals[v] < 0 ? neg : pos)++;
  const int nv = static_cast<int>(verts.size());
  if (neg > 0 && pos > 0) return CellClass::Cut;
  // Same-sign cell: screen cell edges for a double cut the vertex signs miss.
  const int dim = mesh.dim();
  for (int l = 0; l < nv; ++l)
    for (int a = 0; a < dim; ++a) {
      if ((l >> a) & 1) continue;
      int m = l | (1 << a);
      Point pa = mesh.vertex_point(verts[l]);
      Point pb = mesh.vertex_point(verts[m]);
      Point mid{0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1]), 0.5 * (pa[2] + pb[2])};
      double vm = nudged(ls.value(mid));
      if ((vm < 0) != (vals[verts[l]] < 0))
        throw std::runtime_error(
            "level set crosses an edge of cell " + std::to_string(cell) +
            " twice; refine the mesh");
    }
  return neg == nv ? CellClass::Internal : CellClass::External;
}

}  // namespace

std::int64_t Classification::count(CellClass c) const {
  std::int64_t n = 0;
  for (auto cc : cell_class)
    if (cc == c) ++n;
  return n;
}

Classification classify(const BackgroundMesh& mesh, const LevelSet& level_set,
                        bool parallel) {
  Classification out;
  const std::int64_t nv = mesh.num_vertices();
  const std::int64_t nc = mesh.num_cells();
  out.vertex_values.resize(nv);

  std::int64_t bad_vertex = -1;
#ifdef _OPENMP
#pragma omp parallel for if (parallel) schedule(static)
#endif
  for (std::int64_t v = 0; v < nv; ++v) {
    double val = level_set.value(mesh.vertex_point(v));
    if (std::isnan(val)) {
#ifdef _OPENMP
#pragma omp critical
#endif
      bad_vertex = v;
      val = 0.0;
    }
    out.vertex_values[v] = nudged(val);
  }
  if (bad_vertex >= 0)
    throw std::runtime_error("level set is NaN at vertex " + std::to_string(bad_vertex));

  out.cell_class.resize(nc);
  std::string deferred_error;
#ifdef _OPENMP
#pragma omp parallel for if (parallel) schedule(static)
#endif
  for (std::int64_t c = 0; c < nc; ++c) {
    try {
      out.cell_class[c] = classify_cell(mesh, level_set, out.vertex_values, c);
    } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
      deferred_error = e.what();
      out.cell_class[c] = CellClass::Cut;
    }
  }
  if (!deferred_error.empty()) throw std::runtime_error(deferred_error);

  // VEF flags: reduction over cell incidence.
  out.vef_flags.resize(mesh.dim() + 1);
  for (int d = 0; d <= mesh.dim(); ++d) {
    const std::int64_t n = mesh.num_vefs(d);
    out.vef_flags[d].assign(n, VefFlag::External);
    if (d == mesh.dim()) {
      for (std::int64_t c = 0; c < nc; ++c)
        out.vef_flags[d][c] = out.cell_class[c] == CellClass::Internal ? VefFlag::Interior
                              : out.cell_class[c] == CellClass::Cut    ? VefFlag::Outer
                                                                       : VefFlag::External;
      continue;
    }
#ifdef _OPENMP
#pragma omp parallel for if (parallel) schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
      bool touches_cut = false, touches_internal = false;
      for (auto c : mesh.cells_of_vef({d, i})) {
        if (out.cell_class[c] == CellClass::Cut) touches_cut = true;
        if (out.cell_class[c] == CellClass::Internal) touches_internal = true;
      }
      out.vef_flags[d][i] = touches_internal ? VefFlag::Interior
                            : touches_cut    ? VefFlag::Outer
                                             : VefFlag::External;
    }
  }
  return out;
}

Classification classify_serial(const BackgroundMesh& mesh, const LevelSet& level_set) {
  return classify(mesh, level_set, false);
}

}  // namespace agfem
