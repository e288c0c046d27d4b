#include "agfem/mesh.hpp"

#include <cmath>

namespace agfem {

BackgroundMesh::BackgroundMesh(int dim, std::array<std::int64_t, 3> cells_per_axis,
                               Point origin, std::array<double, 3> box_lengths)
    : dim_(dim), n_(cells_per_axis), origin_(origin), len_(box_lengths) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("mesh dimension must be 2 or 3");
  for (int a = 0; a < dim_; ++a) {
    if (n_[a] < 1) throw std::invalid_argument("cells_per_axis must be >= 1");
    if (!(len_[a] > 0.0)) throw std::invalid_argument("box_lengths must be positive");
    h_[a] = len_[a] / static_cast<double>(n_[a]);
  }
  for (int a = dim_; a < 3; ++a) {
    n_[a] = 1;
    len_[a] = 0.0;
    h_[a] = 0.0;
  }
  for (int a = 1; a < dim_; ++a)
    if (std::abs(h_[a] - h_[0]) > 1e-14 * h_[0])
      throw std::invalid_argument("only isotropic cell sizes are supported");
}

std::int64_t BackgroundMesh::num_cells() const {
  std::int64_t c = 1;
  for (int a = 0; a < dim_; ++a) c *= n_[a];
  return c;
}

std::int64_t BackgroundMesh::num_vertices() const {
  std::int64_t c = 1;
  for (int a = 0; a < dim_; ++a) c *= n_[a] + 1;
  return c;
}

std::int64_t BackgroundMesh::num_facets() const {
  std::int64_t total = 0;
  for (int a = 0; a < dim_; ++a) {
    std::int64_t g = 1;
    for (int b = 0; b < dim_; ++b) g *= (b == a) ? n_[b] + 1 : n_[b];
    total += g;
  }
  return total;
}

std::int64_t BackgroundMesh::num_edges() const {
  if (dim_ == 2) return num_facets();
  std::int64_t total = 0;
  for (int a = 0; a < 3; ++a) {
    std::int64_t g = 1;
    for (int b = 0; b < 3; ++b) g *= (b == a) ? n_[b] : n_[b] + 1;
    total += g;
  }
  return total;
}

std::int64_t BackgroundMesh::num_vefs(int dimension) const {
  if (dimension == 0) return num_vertices();
  if (dimension == dim_) return num_cells();
  if (dimension == 1) return num_edges();
  if (dimension == 2 && dim_ == 3) return num_facets();
  throw std::invalid_argument("invalid VEF dimension");
}

std::array<std::int64_t, 3> BackgroundMesh::cell_coords(std::int64_t cell) const {
  check_cell(cell);
  std::array<std::int64_t, 3> c{0, 0, 0};
  c[0] = cell % n_[0];
  c[1] = (cell / n_[0]) % n_[1];
  if (dim_ == 3) c[2] = cell / (n_[0] * n_[1]);
  return c;
}

std::int64_t BackgroundMesh::cell_index(std::array<std::int64_t, 3> c) const {
  return c[0] + n_[0] * (c[1] + n_[1] * c[2]);
}

Point BackgroundMesh::cell_center(std::int64_t cell) const {
  auto c = cell_coords(cell);
  Point p{0, 0, 0};
  for (int a = 0; a < dim_; ++a) p[a] = origin_[a] + (static_cast<double>(c[a]) + 0.5) * h_[a];
  return p;
}

Point BackgroundMesh::cell_min_corner(std::int64_t cell) const {
  auto c = cell_coords(cell);
  Point p{0, 0, 0};
  for (int a = 0; a < dim_; ++a) p[a] = origin_[a] + static_cast<double>(c[a]) * h_[a];
  return p;
}

double BackgroundMesh::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= h_[a];
  return v;
}

std::array<std::int64_t, 3> BackgroundMesh::vertex_coords(std::int64_t vertex) const {
  std::array<std::int64_t, 3> v{0, 0, 0};
  v[0] = vertex % (n_[0] + 1);
  v[1] = (vertex / (n_[0] + 1)) % (n_[1] + 1);
  if (dim_ == 3) v[2] = vertex / ((n_[0] + 1) * (n_[1] + 1));
  return v;
}

std::int64_t BackgroundMesh::vertex_index(std::array<std::int64_t, 3> v) const {
  return v[0] + (n_[0] + 1) * (v[1] + (n_[1] + 1) * v[2]);
}

Point BackgroundMesh::vertex_point(std::int64_t vertex) const {
  auto v = vertex_coords(vertex);
  Point p{0, 0, 0};
  for (int a = 0; a < dim_; ++a) p[a] = origin_[a] + static_cast<double>(v[a]) * h_[a];
  return p;
}

std::vector<std::int64_t> BackgroundMesh::cell_vertices(std::int64_t cell) const {
  auto c = cell_coords(cell);
  const int nv = 1 << dim_;
  std::vector<std::int64_t> verts(nv);
  for (int l = 0; l < nv; ++l) {
    std::array<std::int64_t, 3> v = c;
    for (int a = 0; a < dim_; ++a) v[a] += (l >> a) & 1;
    verts[l] = vertex_index(v);
  }
  return verts;
}

std::int64_t BackgroundMesh::cell_facet(std::int64_t cell, int side) const {
  auto c = cell_coords(cell);
  const int axis = side / 2;
  const int high = side % 2;
  // Offset of the facet group for `axis`.
  std::int64_t offset = 0;
  for (int a = 0; a < axis; ++a) {
    std::int64_t g = 1;
    for (int b = 0; b < dim_; ++b) g *= (b == a) ? n_[b] + 1 : n_[b];
    offset += g;
  }
  std::array<std::int64_t, 3> f = c;
  f[axis] += high;
  std::int64_t idx = 0, stride = 1;
  for (int b = 0; b < dim_; ++b) {
    idx += f[b] * stride;
    stride *= (b == axis) ? n_[b] + 1 : n_[b];
  }
  return offset + idx;
}

int BackgroundMesh::facet_axis(std::int64_t facet) const {
  for (int a = 0; a < dim_; ++a) {
    std::int64_t g = 1;
    for (int b = 0; b < dim_; ++b) g *= (b == a) ? n_[b] + 1 : n_[b];
    if (facet < g) return a;
    facet -= g;
  }
  throw std::out_of_range("facet index out of range");
}

std::array<std::int64_t, 2> BackgroundMesh::facet_cells(std::int64_t facet) const {
  std::int64_t rem = facet;
  int axis = 0;
  for (; axis < dim_; ++axis) {
    std::int64_t g = 1;
    for (int b = 0; b < dim_; ++b) g *= (b == axis) ? n_[b] + 1 : n_[b];
    if (rem < g) break;
    rem -= g;
  }
  std::array<std::int64_t, 3> f{0, 0, 0};
  for (int b = 0; b < dim_; ++b) {
    std::int64_t extent = (b == axis) ? n_[b] + 1 : n_[b];
    f[b] = rem % extent;
    rem /= extent;
  }
  std::array<std::int64_t, 2> cells{-1, -1};
  if (f[axis] > 0) {
    auto c = f;
    c[axis] -= 1;
    cells[0] = cell_index(c);
  }
  if (f[axis] < n_[axis]) {
    auto c = f;
    cells[cells[0] < 0 ? 0 : 1] = cell_index(c);
  }
  if (f[axis] > 0 && f[axis] < n_[axis]) {
    // order: low cell then high cell
    auto lo = f;
    lo[axis] -= 1;
    cells[0] = cell_index(lo);
    cells[1] = cell_index(f);
  }
  return cells;
}

Point BackgroundMesh::facet_center(std::int64_t facet) const {
  std::int64_t rem = facet;
  int axis = 0;
  for (; axis < dim_; ++axis) {
    std::int64_t g = 1;
    for (int b = 0; b < dim_; ++b) g *= (b == axis) ? n_[b] + 1 : n_[b];
    if (rem < g) break;
    rem -= g;
  }
  std::array<std::int64_t, 3> f{0, 0, 0};
  for (int b = 0; b < dim_; ++b) {
    std::int64_t extent = (b == axis) ? n_[b] + 1 : n_[b];
    f[b] = rem % extent;
    rem /= extent;
  }
  Point p{0, 0, 0};
  for (int b = 0; b < dim_; ++b) {
    double mid = (b == axis) ? 0.0 : 0.5;
    p[b] = origin_[b] + (static_cast<double>(f[b]) + mid) * h_[b];
  }
  return p;
}

double BackgroundMesh::facet_measure() const {
  return dim_ == 2 ? h_[0] : h_[0] * h_[1];
}

std::vector<BackgroundMesh::FacetNeighbor>
BackgroundMesh::cell_neighbors_through_facets(std::int64_t cell) const {
  auto c = cell_coords(cell);
  std::vector<FacetNeighbor> out;
  out.reserve(2 * dim_);
  for (int side = 0; side < 2 * dim_; ++side) {
    const int axis = side / 2;
    const int dir = (side % 2) ? +1 : -1;
    auto nb = c;
    nb[axis] += dir;
    std::int64_t neighbor = -1;
    if (nb[axis] >= 0 && nb[axis] < n_[axis]) neighbor = cell_index(nb);
    out.push_back({cell_facet(cell, side), neighbor});
  }
  return out;
}

std::vector<std::vector<VefId>> BackgroundMesh::vefs_of_cell(std::int64_t cell) const {
  auto c = cell_coords(cell);
  std::vector<std::vector<VefId>> out(dim_);  // dims 0..d-1; the cell itself is implicit
  // vertices
  for (std::int64_t v : cell_vertices(cell)) out[0].push_back({0, v});
  if (dim_ == 2) {
    for (int side = 0; side < 4; ++side) out[1].push_back({1, cell_facet(cell, side)});
  } else {
    // edges: grouped by direction axis; offsets of groups
    std::array<std::int64_t, 3> goff{0, 0, 0};
    {
      std::int64_t acc = 0;
      for (int a = 0; a < 3; ++a) {
        goff[a] = acc;
        std::int64_t g = 1;
        for (int b = 0; b < 3; ++b) g *= (b == a) ? n_[b] : n_[b] + 1;
        acc += g;
      }
    }
    for (int a = 0; a < 3; ++a) {
      const int u = (a + 1) % 3, w = (a + 2) % 3;
      int lo_u = u < w ? u : w, hi_u = u < w ? w : u;
      for (int dv = 0; dv < 2; ++dv)
        for (int du = 0; du < 2; ++du) {
          std::array<std::int64_t, 3> e = c;
          e[lo_u] += du;
          e[hi_u] += dv;
          std::int64_t idx = 0, stride = 1;
          for (int b = 0; b < 3; ++b) {
            idx += e[b] * stride;
            stride *= (b == a) ? n_[b] : n_[b] + 1;
          }
          out[1].push_back({1, goff[a] + idx});
        }
    }
    for (int side = 0; side < 6; ++side) out[2].push_back({2, cell_facet(cell, side)});
  }
  return out;
}

std::vector<std::int64_t> BackgroundMesh::cells_of_vef(const VefId& vef) const {
  std::vector<std::int64_t> cells;
  auto push_if_valid = [&](std::array<std::int64_t, 3> c) {
    for (int a = 0; a < dim_; ++a)
      if (c[a] < 0 || c[a] >= n_[a]) return;
    cells.push_back(cell_index(c));
  };
  if (vef.dimension == 0) {
    auto v = vertex_coords(vef.index);
    const int nc = 1 << dim_;
    for (int l = 0; l < nc; ++l) {
      auto c = v;
      for (int a = 0; a < dim_; ++a) c[a] -= (l >> a) & 1;
      push_if_valid(c);
    }
  } else if (vef.dimension == dim_) {
    check_cell(vef.index);
    cells.push_back(vef.index);
  } else if (vef.dimension == dim_ - 1) {
    auto fc = facet_cells(vef.index);
    for (auto c : fc)
      if (c >= 0) cells.push_back(c);
  } else {
    // 3D edge: direction axis a, coords (cell range along a, vertex range else)
    std::int64_t rem = vef.index;
    int a = 0;
    for (; a < 3; ++a) {
      std::int64_t g = 1;
      for (int b = 0; b < 3; ++b) g *= (b == a) ? n_[b] : n_[b] + 1;
      if (rem < g) break;
      rem -= g;
    }
    std::array<std::int64_t, 3> e{0, 0, 0};
    for (int b = 0; b < 3; ++b) {
      std::int64_t extent = (b == a) ? n_[b] : n_[b] + 1;
      e[b] = rem % extent;
      rem /= extent;
    }
    const int u = (a + 1) % 3, w = (a + 2) % 3;
    for (int dv = 0; dv < 2; ++dv)
      for (int du = 0; du < 2; ++du) {
        auto c = e;
        c[u] -= du;
        c[w] -= dv;
        push_if_valid(c);
      }
  }
  return cells;
}

Point BackgroundMesh::vef_center(const VefId& vef) const {
  if (vef.dimension == 0) return vertex_point(vef.index);
  if (vef.dimension == dim_) return cell_center(vef.index);
  if (vef.dimension == dim_ - 1) return facet_center(vef.index);
  // 3D edge midpoint
  std::int64_t rem = vef.index;
  int a = 0;
  for (; a < 3; ++a) {
    std::int64_t g = 1;
    for (int b = 0; b < 3; ++b) g *= (b == a) ? n_[b] : n_[b] + 1;
    if (rem < g) break;
    rem -= g;
  }
  std::array<std::int64_t, 3> e{0, 0, 0};
  for (int b = 0; b < 3; ++b) {
    std::int64_t extent = (b == a) ? n_[b] : n_[b] + 1;
    e[b] = rem % extent;
    rem /= extent;
  }
  Point p{0, 0, 0};
  for (int b = 0; b < 3; ++b) {
    double mid = (b == a) ? 0.5 : 0.0;
    p[b] = origin_[b] + (static_cast<double>(e[b]) + mid) * h_[b];
  }
  return p;
}

void BackgroundMesh::check_cell(std::int64_t cell) const {
  if (cell < 0 || cell >= num_cells()) throw std::out_of_range("cell index out of range");
}

BackgroundMesh build_mesh(int dim, std::array<std::int64_t, 3> cells_per_axis,
                          Point origin, std::array<double, 3> box_lengths) {
  return BackgroundMesh(dim, cells_per_axis, origin, box_lengths);
}

BackgroundMesh unit_box_mesh(int dim, std::int64_t n) {
  return BackgroundMesh(dim, {n, n, n}, {0, 0, 0}, {1, 1, 1});
}

}  // namespace agfem
