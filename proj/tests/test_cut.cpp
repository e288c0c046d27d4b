#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "agfem/cut.hpp"

using namespace agfem;

namespace {

std::array<double, 8> corner_values(const LevelSet& ls, const Point& lo, double h, int dim) {
  std::array<double, 8> vals{};
  for (int l = 0; l < (1 << dim); ++l) {
    Point p = lo;
    for (int a = 0; a < dim; ++a)
      if ((l >> a) & 1) p[a] += h;
    double v = ls.value(p);
    vals[l] = std::abs(v) < 1e-12 ? -1e-12 : v;
  }
  return vals;
}

double piece_measure_sum(const std::vector<std::vector<Point>>& pieces, int dim) {
  double s = 0;
  for (const auto& p : pieces) s += surface_simplex_measure(p, dim);
  return s;
}

// Divergence-theorem closure for the field v = x - x0:
//   d * |K cap Omega| = sum over boundary pieces of int (x - x0) . n
double closure_defect(const CutCellDecomposition& d, int dim, const Point& lo, double h) {
  Point x0{lo[0] + 0.37 * h, lo[1] - 0.21 * h, lo[2] + 0.11 * h};
  double surf = 0;
  QuadratureRule rule;
  for (const auto& el : d.interface_elements)
    append_surface_simplex_rule(rule, el.verts, dim, 2, el.normal);
  for (int s = 0; s < 2 * dim; ++s) {
    Point n{0, 0, 0};
    n[s / 2] = (s % 2) ? 1.0 : -1.0;
    for (const auto& piece : d.facet_pieces[s])
      append_surface_simplex_rule(rule, piece, dim, 2, n);
  }
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    for (int a = 0; a < dim; ++a)
      surf += rule.weights[q] * (rule.points[q][a] - x0[a]) * rule.normals[q][a];
  return std::abs(surf - dim * d.inside_volume);
}

}  // namespace

TEST_CASE("2D halfspace cut: exact pieces") {
  auto ls = make_halfspace(0, 0.3);
  auto vals = corner_values(ls, {0, 0, 0}, 1.0, 2);
  auto d = decompose_cut_cell(2, {0, 0, 0}, 1.0, vals, ls);
  CHECK(d.inside_volume == doctest::Approx(0.3).epsilon(1e-14));
  REQUIRE(d.interface_elements.size() == 1);
  const auto& el = d.interface_elements[0];
  CHECK(surface_simplex_measure(el.verts, 2) == doctest::Approx(1.0));
  CHECK(el.normal[0] == doctest::Approx(1.0));
  CHECK(el.normal[1] == doctest::Approx(0.0));
  CHECK(el.verts[0][0] == doctest::Approx(0.3));
  CHECK(piece_measure_sum(d.facet_pieces[0], 2) == doctest::Approx(1.0));  // -x full
  CHECK(piece_measure_sum(d.facet_pieces[1], 2) == doctest::Approx(0.0));  // +x empty
  CHECK(piece_measure_sum(d.facet_pieces[2], 2) == doctest::Approx(0.3));
  CHECK(piece_measure_sum(d.facet_pieces[3], 2) == doctest::Approx(0.3));
}

TEST_CASE("2D diagonal cut: corner triangle") {
  LevelSet ls;
  ls.value = [](const Point& p) { return p[0] + p[1] - 0.5; };
  ls.gradient = [](const Point&) { return Point{1, 1, 0}; };
  auto vals = corner_values(ls, {0, 0, 0}, 1.0, 2);
  auto d = decompose_cut_cell(2, {0, 0, 0}, 1.0, vals, ls);
  CHECK(d.inside_volume == doctest::Approx(0.125).epsilon(1e-14));
  REQUIRE(d.interface_elements.size() == 1);
  CHECK(surface_simplex_measure(d.interface_elements[0].verts, 2) ==
        doctest::Approx(0.5 * std::sqrt(2.0)));
  CHECK(d.interface_elements[0].normal[0] == doctest::Approx(std::sqrt(0.5)));
  CHECK(d.interface_elements[0].normal[1] == doctest::Approx(std::sqrt(0.5)));
  CHECK(closure_defect(d, 2, {0, 0, 0}, 1.0) < 1e-13);
}

TEST_CASE("checkerboard vertex signs are refused") {
  LevelSet ls;
  ls.value = [](const Point& p) { return (p[0] - 0.5) * (p[1] - 0.5); };
  ls.gradient = [](const Point& p) { return Point{p[1] - 0.5, p[0] - 0.5, 0}; };
  auto vals = corner_values(ls, {0, 0, 0}, 1.0, 2);
  CHECK_THROWS_WITH_AS(decompose_cut_cell(2, {0, 0, 0}, 1.0, vals, ls),
                       doctest::Contains("refine the mesh"), std::runtime_error);
}

TEST_CASE("3D halfspace cut: exact pieces") {
  auto ls = make_halfspace(0, 0.3);
  auto vals = corner_values(ls, {0, 0, 0}, 1.0, 3);
  auto d = decompose_cut_cell(3, {0, 0, 0}, 1.0, vals, ls);
  CHECK(d.inside_volume == doctest::Approx(0.3).epsilon(1e-13));
  double iface_area = 0;
  for (const auto& el : d.interface_elements) {
    iface_area += surface_simplex_measure(el.verts, 3);
    CHECK(el.normal[0] == doctest::Approx(1.0));
  }
  CHECK(iface_area == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(piece_measure_sum(d.facet_pieces[0], 3) == doctest::Approx(1.0));
  CHECK(piece_measure_sum(d.facet_pieces[1], 3) == doctest::Approx(0.0));
  for (int s : {2, 3, 4, 5})
    CHECK(piece_measure_sum(d.facet_pieces[s], 3) == doctest::Approx(0.3).epsilon(1e-13));
  CHECK(closure_defect(d, 3, {0, 0, 0}, 1.0) < 1e-13);
}

TEST_CASE("3D corner cut: single tetrahedron") {
  LevelSet ls;
  ls.value = [](const Point& p) { return p[0] + p[1] + p[2] - 0.5; };
  ls.gradient = [](const Point&) { return Point{1, 1, 1}; };
  auto vals = corner_values(ls, {0, 0, 0}, 1.0, 3);
  auto d = decompose_cut_cell(3, {0, 0, 0}, 1.0, vals, ls);
  // tetrahedron with legs 0.5: volume 0.5^3/6
  CHECK(d.inside_volume == doctest::Approx(0.125 / 6.0).epsilon(1e-13));
  double iface_area = 0;
  for (const auto& el : d.interface_elements) iface_area += surface_simplex_measure(el.verts, 3);
  // equilateral triangle with side 0.5*sqrt(2)
  CHECK(iface_area == doctest::Approx(0.25 * 0.5 * std::sqrt(3.0)).epsilon(1e-13));
  CHECK(closure_defect(d, 3, {0, 0, 0}, 1.0) < 1e-13);
}

TEST_CASE("divergence closure holds on every cut cell of curved geometries") {
  for (int dim : {2, 3}) {
    auto mesh = unit_box_mesh(dim, dim == 2 ? 16 : 6);
    auto ls = dim == 2 ? make_circle_cavity() : make_sphere_cavity();
    auto cls = classify(mesh, ls);
    auto decomp = decompose_all(mesh, ls, cls);
    REQUIRE(!decomp.cut_cells.empty());
    for (std::size_t k = 0; k < decomp.cut_cells.size(); ++k) {
      auto c = decomp.cut_cells[k];
      CHECK(closure_defect(decomp.entries[k], dim, mesh.cell_min_corner(c), mesh.h()) <
            1e-12);
    }
  }
}

TEST_CASE("domain measure and interface area converge at second order") {
  // |Omega| = 1 - pi R^2, |Gamma| = 2 pi R for the circle cavity, R = 0.3
  const double exact_vol = 1.0 - M_PI * 0.09;
  const double exact_per = 0.6 * M_PI;
  double prev_vol_err = 0, prev_per_err = 0;
  for (int n : {8, 16, 32, 64}) {
    auto mesh = unit_box_mesh(2, n);
    auto ls = make_circle_cavity();
    auto cls = classify(mesh, ls);
    auto decomp = decompose_all(mesh, ls, cls);
    double vol = 0, per = 0;
    for (std::int64_t c = 0; c < mesh.num_cells(); ++c) {
      if (cls.cell_class[c] == CellClass::Internal) vol += mesh.cell_volume();
      if (cls.cell_class[c] == CellClass::Cut) {
        vol += decomp.find(c)->inside_volume;
        for (const auto& el : decomp.find(c)->interface_elements)
          per += surface_simplex_measure(el.verts, 2);
      }
    }
    double vol_err = std::abs(vol - exact_vol), per_err = std::abs(per - exact_per);
    if (prev_vol_err > 0) {
      CHECK(vol_err < 0.35 * prev_vol_err);  // at least order ~1.5 observed
      CHECK(per_err < 0.35 * prev_per_err);
    }
    prev_vol_err = vol_err;
    prev_per_err = per_err;
  }
}

TEST_CASE("volume rule splits exactly between internal and cut contributions") {
  auto mesh = unit_box_mesh(2, 8);
  auto ls = make_circle_cavity();
  auto cls = classify(mesh, ls);
  auto decomp = decompose_all(mesh, ls, cls);
  for (std::int64_t c = 0; c < mesh.num_cells(); ++c) {
    if (!cls.is_active(c)) {
      CHECK_THROWS_AS(volume_rule(mesh, decomp, cls, c, 4), std::invalid_argument);
      continue;
    }
    auto rule = volume_rule(mesh, decomp, cls, c, 4);
    double expect = cls.cell_class[c] == CellClass::Internal
                        ? mesh.cell_volume()
                        : decomp.find(c)->inside_volume;
    CHECK(rule.total_weight() == doctest::Approx(expect).epsilon(1e-13));
    CHECK(cell_inside_fraction(mesh, decomp, cls, c) ==
          doctest::Approx(expect / mesh.cell_volume()));
    for (double w : rule.weights) CHECK(w > 0);
  }
}

TEST_CASE("boundary rule normals are unit and outward") {
  for (int dim : {2, 3}) {
    auto mesh = unit_box_mesh(dim, dim == 2 ? 12 : 5);
    auto ls = dim == 2 ? make_circle_cavity() : make_sphere_cavity();
    auto cls = classify(mesh, ls);
    auto decomp = decompose_all(mesh, ls, cls);
    Point center{0.5, 0.5, dim == 3 ? 0.5 : 0.0};
    for (auto c : decomp.cut_cells) {
      auto rule = boundary_rule(mesh, decomp, c, 4);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const auto& n = rule.normals[q];
        double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
        CHECK(len == doctest::Approx(1.0));
        // the cavity interface normal points towards the ball center
        double dot = 0;
        for (int a = 0; a < dim; ++a) dot += n[a] * (center[a] - rule.points[q][a]);
        CHECK(dot > 0);
      }
    }
  }
}

TEST_CASE("facet rules agree between the two incident cut cells") {
  auto mesh = unit_box_mesh(3, 6);
  auto ls = make_sphere_cavity();
  auto cls = classify(mesh, ls);
  auto decomp = decompose_all(mesh, ls, cls);
  int tested = 0;
  for (std::int64_t f = 0; f < mesh.num_facets(); ++f) {
    auto cells = mesh.facet_cells(f);
    if (cells[1] < 0) continue;
    if (cls.cell_class[cells[0]] != CellClass::Cut ||
        cls.cell_class[cells[1]] != CellClass::Cut)
      continue;
    int dim = 3;
    double m0 = 0, m1 = 0;
    for (int side = 0; side < 6; ++side) {
      if (mesh.cell_facet(cells[0], side) == f)
        m0 = piece_measure_sum(decomp.find(cells[0])->facet_pieces[side], dim);
      if (mesh.cell_facet(cells[1], side) == f)
        m1 = piece_measure_sum(decomp.find(cells[1])->facet_pieces[side], dim);
    }
    CHECK(m0 == doctest::Approx(m1).epsilon(1e-12));
    CHECK(facet_inside_measure(mesh, decomp, cls, f) == doctest::Approx(m0));
    auto rule = facet_rule(mesh, decomp, cls, f, 3);
    CHECK(rule.total_weight() == doctest::Approx(m0).epsilon(1e-12));
    ++tested;
  }
  CHECK(tested > 0);
}

TEST_CASE("facet rule on uncut interior facets covers the whole facet") {
  auto mesh = unit_box_mesh(2, 8);
  auto ls = make_circle_cavity();
  auto cls = classify(mesh, ls);
  auto decomp = decompose_all(mesh, ls, cls);
  std::int64_t f = mesh.cell_facet(mesh.cell_index({0, 0, 0}), 1);  // deep inside Omega
  auto rule = facet_rule(mesh, decomp, cls, f, 3);
  CHECK(rule.total_weight() == doctest::Approx(mesh.facet_measure()).epsilon(1e-13));
  // a facet surrounded by external cells is rejected
  auto ext_mesh = unit_box_mesh(2, 8);
  auto ext_cls = classify(ext_mesh, make_halfspace(0, 0.2));
  auto ext_dec = decompose_all(ext_mesh, make_halfspace(0, 0.2), ext_cls);
  std::int64_t bad = ext_mesh.cell_facet(ext_mesh.cell_index({7, 0, 0}), 1);
  CHECK_THROWS_AS(facet_rule(ext_mesh, ext_dec, ext_cls, bad, 3), std::invalid_argument);
}

TEST_CASE("interface reconstruction covers exactly the cut cells") {
  auto mesh = unit_box_mesh(2, 10);
  auto ls = make_circle_cavity();
  auto cls = classify(mesh, ls);
  auto iface = reconstruct_interface(mesh, ls, cls);
  CHECK(static_cast<std::int64_t>(iface.size()) == cls.count(CellClass::Cut));
  for (const auto& [c, els] : iface) {
    CHECK(cls.cell_class[c] == CellClass::Cut);
    CHECK(!els.empty());
  }
}
