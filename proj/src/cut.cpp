#include "agfem/cut.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace agfem {

namespace {

Point corner_point(const Point& lo, double h, int local, int dim) {
  Point p = lo;
  for (int a = 0; a < dim; ++a)
    if ((local >> a) & 1) p[a] += h;
  return p;
}

Point edge_crossing(const Point& pa, double va, const Point& pb, double vb) {
  double t = va / (va - vb);
  return {pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]),
          pa[2] + t * (pb[2] - pa[2])};
}

Point oriented_normal(const std::vector<Point>& verts, int dim, const LevelSet& ls) {
  Point n{0, 0, 0};
  if (dim == 2) {
    double dx = verts[1][0] - verts[0][0], dy = verts[1][1] - verts[0][1];
    double len = std::sqrt(dx * dx + dy * dy);
    n = {dy / len, -dx / len, 0.0};
  } else {
    Point u{verts[1][0] - verts[0][0], verts[1][1] - verts[0][1], verts[1][2] - verts[0][2]};
    Point v{verts[2][0] - verts[0][0], verts[2][1] - verts[0][1], verts[2][2] - verts[0][2]};
    n = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    n = {n[0] / len, n[1] / len, n[2] / len};
  }
  Point c{0, 0, 0};
  for (const auto& p : verts)
    for (int a = 0; a < 3; ++a) c[a] += p[a] / verts.size();
  Point g = ls.gradient(c);
  if (n[0] * g[0] + n[1] * g[1] + n[2] * g[2] < 0) n = {-n[0], -n[1], -n[2]};
  return n;
}

// Assign a boundary polygon to the cell side whose plane contains it, if any.
int side_of_polygon(const std::vector<Point>& poly, const Point& lo, double h, int dim) {
  const double tol = 1e-9 * h;
  for (int s = 0; s < 2 * dim; ++s) {
    int a = s / 2;
    double plane = lo[a] + (s % 2) * h;
    bool on = true;
    for (const auto& p : poly)
      if (std::abs(p[a] - plane) > tol) {
        on = false;
        break;
      }
    if (on) return s;
  }
  return -1;
}

CutCellDecomposition decompose_2d(const Point& lo, double h,
                                  const std::array<double, 8>& vals, const LevelSet& ls) {
  CutCellDecomposition out;
  // Corner local ids in boundary walk order and the side each walk edge lies on
  // (-x,+x,-y,+y = 0..3).
  constexpr int order[4] = {0, 1, 3, 2};
  constexpr int side[4] = {2, 1, 3, 0};
  std::vector<Point> poly;
  std::vector<Point> crossings;
  for (int k = 0; k < 4; ++k) {
    int la = order[k], lb = order[(k + 1) % 4];
    Point pa = corner_point(lo, h, la, 2), pb = corner_point(lo, h, lb, 2);
    double va = vals[la], vb = vals[lb];
    if (va < 0) poly.push_back(pa);
    if ((va < 0) != (vb < 0)) {
      Point c = edge_crossing(pa, va, pb, vb);
      poly.push_back(c);
      crossings.push_back(c);
      out.facet_pieces[side[k]].push_back(va < 0 ? std::vector<Point>{pa, c}
                                                 : std::vector<Point>{c, pb});
    } else if (va < 0) {
      out.facet_pieces[side[k]].push_back({pa, pb});
    }
  }
  if (crossings.size() != 2)
    throw std::runtime_error(
        "ambiguous cut (the interface crosses the cell boundary " +
        std::to_string(crossings.size()) + " times); refine the mesh");
  out.interface_elements.push_back(
      {crossings, oriented_normal({crossings[0], crossings[1]}, 2, ls)});
  Point centroid{0, 0, 0};
  for (const auto& p : poly)
    for (int a = 0; a < 2; ++a) centroid[a] += p[a] / poly.size();
  for (std::size_t k = 0; k < poly.size(); ++k) {
    std::vector<Point> tri{centroid, poly[k], poly[(k + 1) % poly.size()]};
    double v = std::abs(simplex_volume(tri, 2));
    if (v > 0) {
      out.inside_volume += v;
      out.interior_simplices.push_back(std::move(tri));
    }
  }
  return out;
}

// Clip one tetrahedron against {psi_lin < 0} where psi_lin interpolates the
// corner values. Appends interior sub-tets, interface triangles and the
// boundary face polygons of the kept region.
void clip_tet(const std::array<int, 4>& loc, const Point& lo, double h,
              const std::array<double, 8>& vals,
              std::vector<std::vector<Point>>& tets,
              std::vector<std::vector<Point>>& interface_tris,
              std::vector<std::vector<Point>>& boundary_polys) {
  std::array<Point, 4> P;
  std::array<double, 4> V;
  for (int i = 0; i < 4; ++i) {
    P[i] = corner_point(lo, h, loc[i], 3);
    V[i] = vals[loc[i]];
  }
  int neg = 0;
  for (double v : V)
    if (v < 0) ++neg;
  if (neg == 0) return;

  constexpr int faces[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
  if (neg == 4) {
    tets.push_back({P[0], P[1], P[2], P[3]});
    for (const auto& f : faces) boundary_polys.push_back({P[f[0]], P[f[1]], P[f[2]]});
    return;
  }

  // One crossing point per sign-changing tet edge, shared across faces so the
  // clipped pieces close up exactly.
  std::map<std::pair<int, int>, Point> cross;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if ((V[i] < 0) != (V[j] < 0))
        cross[{i, j}] = edge_crossing(P[i], V[i], P[j], V[j]);
  auto crossing = [&](int i, int j) { return cross.at({std::min(i, j), std::max(i, j)}); };

  // Sutherland-Hodgman per face; remember which crossing pairs each face
  // produced so the interface polygon can be chained from them.
  std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> iface_edges;
  std::vector<std::vector<Point>> region_faces;
  for (const auto& f : faces) {
    std::vector<Point> outp;
    std::vector<std::pair<int, int>> keys;
    for (int e = 0; e < 3; ++e) {
      int i = f[e], j = f[(e + 1) % 3];
      if (V[i] < 0) outp.push_back(P[i]);
      if ((V[i] < 0) != (V[j] < 0)) {
        outp.push_back(crossing(i, j));
        keys.push_back({std::min(i, j), std::max(i, j)});
      }
    }
    if (outp.size() >= 3) region_faces.push_back(outp);
    if (keys.size() == 2) iface_edges.push_back({keys[0], keys[1]});
  }

  // Chain the per-face crossing edges into the interface polygon (a triangle
  // or a planar quad) and fan-triangulate it.
  std::vector<std::pair<int, int>> cycle;
  cycle.push_back(iface_edges[0].first);
  cycle.push_back(iface_edges[0].second);
  std::vector<bool> used(iface_edges.size(), false);
  used[0] = true;
  while (cycle.size() < cross.size()) {
    for (std::size_t e = 1; e < iface_edges.size(); ++e) {
      if (used[e]) continue;
      if (iface_edges[e].first == cycle.back()) {
        cycle.push_back(iface_edges[e].second);
        used[e] = true;
      } else if (iface_edges[e].second == cycle.back()) {
        cycle.push_back(iface_edges[e].first);
        used[e] = true;
      }
    }
  }
  std::vector<Point> iface_poly;
  for (const auto& key : cycle) iface_poly.push_back(cross.at(key));
  for (std::size_t k = 1; k + 1 < iface_poly.size(); ++k)
    interface_tris.push_back({iface_poly[0], iface_poly[k], iface_poly[k + 1]});
  region_faces.push_back(iface_poly);

  // The kept region is convex (tet cap halfspace): fan tets from its centroid
  // over the triangulated boundary faces.
  Point centroid{0, 0, 0};
  std::size_t nv = 0;
  for (const auto& face : region_faces) nv += face.size();
  for (const auto& face : region_faces)
    for (const auto& p : face)
      for (int a = 0; a < 3; ++a) centroid[a] += p[a] / nv;
  for (const auto& face : region_faces)
    for (std::size_t k = 1; k + 1 < face.size(); ++k)
      tets.push_back({centroid, face[0], face[k], face[k + 1]});

  // Boundary polys exclude the interface face (last entry).
  region_faces.pop_back();
  for (auto& face : region_faces) boundary_polys.push_back(std::move(face));
}

CutCellDecomposition decompose_3d(const Point& lo, double h,
                                  const std::array<double, 8>& vals, const LevelSet& ls) {
  CutCellDecomposition out;
  // Kuhn template: six tets 0 -> e_{s0} -> e_{s0}+e_{s1} -> (1,1,1), one per
  // permutation (s0,s1,s2) of the axes. Face diagonals run from the
  // lexicographic min to max corner of each cell face, so neighboring cells
  // induce the same triangulation on a shared facet.
  constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                               {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::vector<std::vector<Point>> tets, iface_tris, boundary_polys;
  for (const auto& s : perms) {
    int l1 = 1 << s[0];
    int l2 = l1 | (1 << s[1]);
    clip_tet({0, l1, l2, 7}, lo, h, vals, tets, iface_tris, boundary_polys);
  }
  for (auto& t : tets) {
    double v = std::abs(simplex_volume(t, 3));
    if (v > 0) {
      out.inside_volume += v;
      out.interior_simplices.push_back(std::move(t));
    }
  }
  const double area_tol = 1e-14 * h * h;
  for (auto& tri : iface_tris) {
    if (surface_simplex_measure(tri, 3) <= area_tol) continue;
    Point n = oriented_normal(tri, 3, ls);
    out.interface_elements.push_back({std::move(tri), n});
  }
  for (auto& poly : boundary_polys) {
    int s = side_of_polygon(poly, lo, h, 3);
    if (s < 0) continue;  // internal face between template tets
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
      std::vector<Point> tri{poly[0], poly[k], poly[k + 1]};
      if (surface_simplex_measure(tri, 3) > area_tol)
        out.facet_pieces[s].push_back(std::move(tri));
    }
  }
  return out;
}

std::array<double, 8> cell_corner_values(const BackgroundMesh& mesh,
                                         const Classification& cls, std::int64_t cell) {
  std::array<double, 8> vals{};
  auto verts = mesh.cell_vertices(cell);
  for (std::size_t l = 0; l < verts.size(); ++l) vals[l] = cls.vertex_values[verts[l]];
  return vals;
}

// Local side of `cell` holding `facet`, or -1.
int side_of_facet(const BackgroundMesh& mesh, std::int64_t cell, std::int64_t facet) {
  for (int s = 0; s < 2 * mesh.dim(); ++s)
    if (mesh.cell_facet(cell, s) == facet) return s;
  return -1;
}

}  // namespace

CutCellDecomposition decompose_cut_cell(int dim, const Point& lo, double h,
                                        const std::array<double, 8>& vertex_values,
                                        const LevelSet& level_set) {
  return dim == 2 ? decompose_2d(lo, h, vertex_values, level_set)
                  : decompose_3d(lo, h, vertex_values, level_set);
}

CutDecomposition decompose_all(const BackgroundMesh& mesh, const LevelSet& level_set,
                               const Classification& cls, bool parallel) {
  CutDecomposition out;
  out.dim = mesh.dim();
  for (std::int64_t c = 0; c < mesh.num_cells(); ++c)
    if (cls.cell_class[c] == CellClass::Cut) out.cut_cells.push_back(c);
  const std::int64_t n = static_cast<std::int64_t>(out.cut_cells.size());
  out.entries.resize(n);
  std::string deferred_error;
#ifdef _OPENMP
#pragma omp parallel for if (parallel) schedule(static)
#endif
  for (std::int64_t k = 0; k < n; ++k) {
    std::int64_t c = out.cut_cells[k];
    try {
      out.entries[k] = decompose_cut_cell(mesh.dim(), mesh.cell_min_corner(c), mesh.h(),
                                          cell_corner_values(mesh, cls, c), level_set);
    } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical
#endif
      deferred_error = "cell " + std::to_string(c) + ": " + e.what();
    }
  }
  if (!deferred_error.empty()) throw std::runtime_error(deferred_error);
  for (std::int64_t k = 0; k < n; ++k) out.rank[out.cut_cells[k]] = static_cast<std::size_t>(k);
  return out;
}

std::unordered_map<std::int64_t, std::vector<InterfaceElement>> reconstruct_interface(
    const BackgroundMesh& mesh, const LevelSet& level_set, const Classification& cls) {
  std::unordered_map<std::int64_t, std::vector<InterfaceElement>> out;
  for (std::int64_t c = 0; c < mesh.num_cells(); ++c)
    if (cls.cell_class[c] == CellClass::Cut)
      out[c] = decompose_cut_cell(mesh.dim(), mesh.cell_min_corner(c), mesh.h(),
                                  cell_corner_values(mesh, cls, c), level_set)
                   .interface_elements;
  return out;
}

QuadratureRule volume_rule(const BackgroundMesh& mesh, const CutDecomposition& decomp,
                           const Classification& cls, std::int64_t cell, int degree) {
  if (cls.cell_class[cell] == CellClass::External)
    throw std::invalid_argument("volume_rule: cell " + std::to_string(cell) +
                                " is external");
  if (cls.cell_class[cell] == CellClass::Internal)
    return tensor_gauss_box(mesh.cell_min_corner(cell),
                            {mesh.h(), mesh.h(), mesh.h()}, mesh.dim(), degree);
  const auto* entry = decomp.find(cell);
  QuadratureRule rule;
  for (const auto& simplex : entry->interior_simplices)
    append_simplex_rule(rule, simplex, mesh.dim(), degree);
  return rule;
}

QuadratureRule boundary_rule(const BackgroundMesh& mesh, const CutDecomposition& decomp,
                             std::int64_t cell, int degree) {
  QuadratureRule rule;
  const auto* entry = decomp.find(cell);
  if (!entry) return rule;
  for (const auto& el : entry->interface_elements)
    append_surface_simplex_rule(rule, el.verts, mesh.dim(), degree, el.normal);
  return rule;
}

QuadratureRule facet_rule(const BackgroundMesh& mesh, const CutDecomposition& decomp,
                          const Classification& cls, std::int64_t facet, int degree) {
  auto cells = mesh.facet_cells(facet);
  bool any_active = false;
  for (auto c : cells)
    if (c >= 0 && cls.is_active(c)) any_active = true;
  if (!any_active)
    throw std::invalid_argument("facet_rule: facet " + std::to_string(facet) +
                                " has no active incident cell");
  const int dim = mesh.dim();
  const int axis = mesh.facet_axis(facet);
  for (auto c : cells) {
    if (c < 0 || cls.cell_class[c] != CellClass::Cut) continue;
    int s = side_of_facet(mesh, c, facet);
    Point n{0, 0, 0};
    n[axis] = (s % 2) ? 1.0 : -1.0;  // outward from the contributing cell
    QuadratureRule rule;
    for (const auto& piece : decomp.find(c)->facet_pieces[s])
      append_surface_simplex_rule(rule, piece, dim, degree, n);
    return rule;
  }
  // Uncut facet of an internal cell: the full rectangle (segment in 2D).
  Point center = mesh.facet_center(facet);
  double h = mesh.h();
  Point p0 = center, p1 = center;
  QuadratureRule rule;
  Point n{0, 0, 0};
  n[axis] = 1.0;
  if (dim == 2) {
    int t = 1 - axis;
    p0[t] -= 0.5 * h;
    p1[t] += 0.5 * h;
    append_surface_simplex_rule(rule, {p0, p1}, 2, degree, n);
  } else {
    int t0 = (axis + 1) % 3, t1 = (axis + 2) % 3;
    std::array<Point, 4> q;
    for (int k = 0; k < 4; ++k) {
      q[k] = center;
      q[k][t0] += (k & 1) ? 0.5 * h : -0.5 * h;
      q[k][t1] += (k & 2) ? 0.5 * h : -0.5 * h;
    }
    append_surface_simplex_rule(rule, {q[0], q[1], q[3]}, 3, degree, n);
    append_surface_simplex_rule(rule, {q[0], q[3], q[2]}, 3, degree, n);
  }
  return rule;
}

double facet_inside_measure(const BackgroundMesh& mesh, const CutDecomposition& decomp,
                            const Classification& cls, std::int64_t facet) {
  auto cells = mesh.facet_cells(facet);
  for (auto c : cells) {
    if (c < 0 || cls.cell_class[c] != CellClass::Cut) continue;
    int s = side_of_facet(mesh, c, facet);
    double meas = 0;
    for (const auto& piece : decomp.find(c)->facet_pieces[s])
      meas += surface_simplex_measure(piece, mesh.dim());
    return meas;
  }
  for (auto c : cells)
    if (c >= 0 && cls.cell_class[c] == CellClass::Internal) return mesh.facet_measure();
  return 0.0;
}

double cell_inside_fraction(const BackgroundMesh& mesh, const CutDecomposition& decomp,
                            const Classification& cls, std::int64_t cell) {
  switch (cls.cell_class[cell]) {
    case CellClass::Internal:
      return 1.0;
    case CellClass::External:
      return 0.0;
    default:
      return decomp.find(cell)->inside_volume / mesh.cell_volume();
  }
}

}  // namespace agfem
