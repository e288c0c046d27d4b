#pragma once

#include <unordered_map>

#include "agfem/classify.hpp"
#include "agfem/level_set.hpp"
#include "agfem/mesh.hpp"
#include "agfem/quadrature.hpp"

namespace agfem {

/// Piecewise-linear interface element inside one cut cell: a segment (2D) or
/// triangle (3D) with its outward unit normal (pointing towards psi > 0).
struct InterfaceElement {
  std::vector<Point> verts;
  Point normal;
};

/// Body-fitted subdivision of one cut cell: simplices tiling the inside part
/// K cap Omega_h, the interface elements on Gamma_h cap K, and the clipped
/// pieces of the 2d background facets (indexed by local side, -x,+x,-y,+y[,-z,+z]).
struct CutCellDecomposition {
  std::vector<std::vector<Point>> interior_simplices;  // d+1 points each
  std::vector<InterfaceElement> interface_elements;
  std::array<std::vector<std::vector<Point>>, 6> facet_pieces;  // d points each
  double inside_volume = 0.0;
};

struct CutDecomposition {
  int dim = 2;
  std::vector<std::int64_t> cut_cells;  // ascending cell ids
  std::vector<CutCellDecomposition> entries;
  std::unordered_map<std::int64_t, std::size_t> rank;

  const CutCellDecomposition* find(std::int64_t cell) const {
    auto it = rank.find(cell);
    return it == rank.end() ? nullptr : &entries[it->second];
  }
};

/// Subdivide one cut cell given its (nudged) corner level-set values in
/// lexicographic local order. `lo` is the min corner, `h` the cell size.
/// The level set supplies the gradient used to orient interface normals.
CutCellDecomposition decompose_cut_cell(int dim, const Point& lo, double h,
                                        const std::array<double, 8>& vertex_values,
                                        const LevelSet& level_set);

CutDecomposition decompose_all(const BackgroundMesh& mesh, const LevelSet& level_set,
                               const Classification& cls, bool parallel = false);

/// Interface reconstruction over all cut cells (cell id -> elements).
std::unordered_map<std::int64_t, std::vector<InterfaceElement>> reconstruct_interface(
    const BackgroundMesh& mesh, const LevelSet& level_set, const Classification& cls);

/// Volume rule over K cap Omega: tensor Gauss on internal cells, mapped
/// simplex rules on cut cells. Exact for polynomials of total degree <= degree
/// on each piece.
QuadratureRule volume_rule(const BackgroundMesh& mesh, const CutDecomposition& decomp,
                           const Classification& cls, std::int64_t cell, int degree);

/// Rule over Gamma_h cap K with outward unit normals per point.
QuadratureRule boundary_rule(const BackgroundMesh& mesh, const CutDecomposition& decomp,
                             std::int64_t cell, int degree);

/// Rule over F cap Omega for a background facet incident to an active cell;
/// full-facet tensor rule when no incident cell is cut.
QuadratureRule facet_rule(const BackgroundMesh& mesh, const CutDecomposition& decomp,
                          const Classification& cls, std::int64_t facet, int degree);

/// Measure of F cap Omega (used by the aggregation eligibility test).
double facet_inside_measure(const BackgroundMesh& mesh, const CutDecomposition& decomp,
                            const Classification& cls, std::int64_t facet);

/// Inside volume fraction eta_K = |K cap Omega| / |K| of an active cell.
double cell_inside_fraction(const BackgroundMesh& mesh, const CutDecomposition& decomp,
                            const Classification& cls, std::int64_t cell);

}  // namespace agfem
