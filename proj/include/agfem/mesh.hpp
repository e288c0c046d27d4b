#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace agfem {

using Point = std::array<double, 3>;

/// Sub-entity of a cell: vertex (0), edge (1), face (2), cell (d).
/// Indices are lexicographic within each dimension; for edges/faces in 3D
/// the index space is partitioned into axis groups (x group first).
struct VefId {
  int dimension = 0;
  std::int64_t index = -1;

  friend bool operator==(const VefId&, const VefId&) = default;
};

/// Uniform Cartesian background mesh of a box artificial domain.
///
/// Lexicographic indexing, x fastest:
///   cell (i,j,k)    -> i + nx*(j + ny*k)
///   vertex (i,j,k)  -> i + (nx+1)*(j + (ny+1)*k)
/// Facets are grouped by normal axis (x group, then y, then z); within the
/// x group, a facet at vertex-plane i and cell coords (j,k) has index
/// i + (nx+1)*(j + ny*k). Edges (3D) are grouped by direction axis; an
/// x-directed edge at (i cell-range, j,k vertex-range) has index
/// i + nx*(j + (ny+1)*k).
/// Immutable after construction; all queries are pure index arithmetic.
class BackgroundMesh {
public:
  BackgroundMesh(int dim, std::array<std::int64_t, 3> cells_per_axis,
                 Point origin, std::array<double, 3> box_lengths);

  int dim() const { return dim_; }
  std::int64_t cells_per_axis(int axis) const { return n_[axis]; }
  const Point& origin() const { return origin_; }
  double box_length(int axis) const { return len_[axis]; }
  double h(int axis) const { return h_[axis]; }
  /// Isotropic cell size; construction requires equal h per axis.
  double h() const { return h_[0]; }

  std::int64_t num_cells() const;
  std::int64_t num_vertices() const;
  std::int64_t num_facets() const;
  std::int64_t num_edges() const;  // 3D only
  std::int64_t num_vefs(int dimension) const;

  std::array<std::int64_t, 3> cell_coords(std::int64_t cell) const;
  std::int64_t cell_index(std::array<std::int64_t, 3> c) const;
  Point cell_center(std::int64_t cell) const;
  Point cell_min_corner(std::int64_t cell) const;
  double cell_volume() const;

  std::array<std::int64_t, 3> vertex_coords(std::int64_t vertex) const;
  std::int64_t vertex_index(std::array<std::int64_t, 3> v) const;
  Point vertex_point(std::int64_t vertex) const;

  /// The 2^d vertices of a cell, lexicographic (bit b of the local id selects
  /// the high side of axis b).
  std::vector<std::int64_t> cell_vertices(std::int64_t cell) const;

  struct FacetNeighbor {
    std::int64_t facet;
    std::int64_t neighbor;  // -1 at the box boundary
  };
  /// 2d entries in fixed axis order: -x,+x,-y,+y[,-z,+z].
  std::vector<FacetNeighbor> cell_neighbors_through_facets(std::int64_t cell) const;

  /// Facet id of cell `cell` on side `side` (side in [0,2d), order as above).
  std::int64_t cell_facet(std::int64_t cell, int side) const;
  /// Normal axis of a facet and its lattice coords (plane position first).
  int facet_axis(std::int64_t facet) const;
  /// The one or two cells sharing a facet (second = -1 on the boundary).
  std::array<std::int64_t, 2> facet_cells(std::int64_t facet) const;
  /// Center point of a (d-1)-facet.
  Point facet_center(std::int64_t facet) const;
  double facet_measure() const;

  /// All sub-VEFs of a cell per dimension: [0]=vertices, [1]=edges/facets,
  /// ([2]=faces in 3D). Deterministic lexicographic-within-group order.
  std::vector<std::vector<VefId>> vefs_of_cell(std::int64_t cell) const;

  /// Active-cell incidence of a VEF: the cells containing it.
  std::vector<std::int64_t> cells_of_vef(const VefId& vef) const;

  /// Geometric location of a VEF's lattice point set, for node ownership:
  /// returns the mid-point of the entity.
  Point vef_center(const VefId& vef) const;

private:
  void check_cell(std::int64_t cell) const;

  int dim_;
  std::array<std::int64_t, 3> n_;
  Point origin_;
  std::array<double, 3> len_;
  std::array<double, 3> h_;
};

BackgroundMesh build_mesh(int dim, std::array<std::int64_t, 3> cells_per_axis,
                          Point origin, std::array<double, 3> box_lengths);

/// Convenience: unit box with n cells per axis.
BackgroundMesh unit_box_mesh(int dim, std::int64_t n);

}  // namespace agfem
