#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "agfem/assembly.hpp"
#include "agfem/level_set.hpp"

using namespace agfem;

namespace {

struct Pipeline {
  BackgroundMesh mesh;
  LevelSet ls;
  Classification cls;
  CutDecomposition decomp;
  AggregateMap agg;
  DofHandler dofs;
  ConstraintTable constraints;
};

Pipeline make_pipeline(int dim, std::int64_t n, LevelSet ls, SpaceVariant variant,
                       ExtensionType ext = ExtensionType::Standard) {
  BackgroundMesh mesh = unit_box_mesh(dim, n);
  Classification cls = classify(mesh, ls);
  CutDecomposition decomp = decompose_all(mesh, ls, cls);
  AggregateMap agg = aggregate_cells(mesh, cls, decomp);
  assign_outer_vef_owners(mesh, cls, agg);
  DofHandler dofs = build_dof_handler(mesh, cls, agg, variant);
  ConstraintTable constraints = build_constraints(mesh, cls, agg, dofs, ext);
  return {std::move(mesh), std::move(ls), std::move(cls), std::move(decomp),
          std::move(agg), std::move(dofs), std::move(constraints)};
}

std::vector<std::vector<double>> to_dense(const CsrMatrix& A) {
  std::vector<std::vector<double>> D(A.n, std::vector<double>(A.n, 0.0));
  for (std::int64_t r = 0; r < A.n; ++r)
    for (std::int64_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k)
      D[r][A.col_idx[k]] += A.vals[k];
  return D;
}

// Independent dense assembly on a fully inside mesh: plain loops over tensor
// Gauss points, no sparsity machinery, no cut quadrature.
void dense_oracle(const Pipeline& p, const FormParameters& fp, const ProblemData& pd,
                  std::vector<std::vector<double>>& M, std::vector<double>& L) {
  const BackgroundMesh& mesh = p.mesh;
  const DofHandler& dofs = p.dofs;
  const int dim = mesh.dim();
  const std::int64_t n = dofs.total_dofs();
  const ScalarFeBasis& basis = q2_basis(dim);
  const int ns = basis.size();
  const double h = mesh.h();
  M.assign(n, std::vector<double>(n, 0.0));
  L.assign(n, 0.0);

  auto vdof = [&](const std::vector<std::int64_t>& nodes, int shape, int c) {
    return dofs.velocity_dof(dofs.free_rank[nodes[shape]], c);
  };

  for (std::int64_t cell = 0; cell < mesh.num_cells(); ++cell) {
    CellBasis cb{&basis, mesh.cell_min_corner(cell), h};
    auto nodes = dofs.cell_nodes(mesh, cell);
    std::int64_t block = dofs.pressure_block_of_cell[cell];
    auto vol = tensor_gauss_box(mesh.cell_min_corner(cell), {h, h, h}, dim, 8);
    for (std::size_t q = 0; q < vol.points.size(); ++q) {
      Point x = vol.points[q];
      double w = vol.weights[q];
      for (int a = 0; a < ns; ++a)
        for (int b = 0; b < ns; ++b) {
          Point ga = cb.gradient(a, x), gb = cb.gradient(b, x);
          double gg = 0;
          for (int d = 0; d < dim; ++d) gg += ga[d] * gb[d];
          for (int c = 0; c < dim; ++c) M[vdof(nodes, a, c)][vdof(nodes, b, c)] += w * gg;
        }
      for (int k = 0; k <= dim; ++k)
        for (int a = 0; a < ns; ++a)
          for (int c = 0; c < dim; ++c) {
            double v = -w * cb.gradient(a, x)[c] * dofs.pressure_basis(block, k, x);
            M[vdof(nodes, a, c)][dofs.pressure_dof(block, k)] += v;
            M[dofs.pressure_dof(block, k)][vdof(nodes, a, c)] += v;
          }
    }
    // load with the same points the library uses (degree-6 tensor rule)
    auto load = tensor_gauss_box(mesh.cell_min_corner(cell), {h, h, h}, dim, 6);
    for (std::size_t q = 0; q < load.points.size(); ++q) {
      Point f = pd.body_force(load.points[q]);
      for (int a = 0; a < ns; ++a)
        for (int c = 0; c < dim; ++c)
          L[vdof(nodes, a, c)] += load.weights[q] * cb.value(a, load.points[q]) * f[c];
    }
    // boundary facets
    auto nbrs = mesh.cell_neighbors_through_facets(cell);
    for (int side = 0; side < 2 * dim; ++side) {
      if (nbrs[side].neighbor >= 0) continue;
      int ax = side / 2;
      Point nrm{0, 0, 0};
      nrm[ax] = side % 2 ? 1.0 : -1.0;
      Point lo = mesh.cell_min_corner(cell);
      // facet points: 1D Gauss along the tangent axis (2D meshes only here)
      std::vector<double> gx, gw;
      gauss_legendre_01(4, gx, gw);
      int tx = 1 - ax;
      for (std::size_t q = 0; q < gx.size(); ++q) {
        Point x = lo;
        x[ax] += side % 2 ? h : 0.0;
        x[tx] += h * gx[q];
        double w = h * gw[q];
        if (pd.box_faces[side] == BcType::Neumann) {
          Point t = pd.neumann_traction(x, nrm);
          for (int a = 0; a < ns; ++a)
            for (int c = 0; c < dim; ++c)
              L[vdof(nodes, a, c)] += w * cb.value(a, x) * t[c];
        } else {
          Point g = pd.dirichlet(x);
          double pen = fp.tau_nitsche / h;
          for (int a = 0; a < ns; ++a) {
            double dna = 0;
            for (int d = 0; d < dim; ++d) dna += cb.gradient(a, x)[d] * nrm[d];
            for (int b = 0; b < ns; ++b) {
              double dnb = 0;
              for (int d = 0; d < dim; ++d) dnb += cb.gradient(b, x)[d] * nrm[d];
              double v = w * (-dna * cb.value(b, x) - cb.value(a, x) * dnb +
                              pen * cb.value(a, x) * cb.value(b, x));
              for (int c = 0; c < dim; ++c) M[vdof(nodes, a, c)][vdof(nodes, b, c)] += v;
            }
            for (int c = 0; c < dim; ++c)
              L[vdof(nodes, a, c)] += w * g[c] * (-dna + pen * cb.value(a, x));
          }
          for (int k = 0; k <= dim; ++k) {
            double psi = dofs.pressure_basis(block, k, x);
            for (int a = 0; a < ns; ++a)
              for (int c = 0; c < dim; ++c) {
                double v = w * cb.value(a, x) * nrm[c] * psi;
                M[vdof(nodes, a, c)][dofs.pressure_dof(block, k)] += v;
                M[dofs.pressure_dof(block, k)][vdof(nodes, a, c)] += v;
              }
            double gn = 0;
            for (int d = 0; d < dim; ++d) gn += pd.dirichlet(x)[d] * nrm[d];
            L[dofs.pressure_dof(block, k)] += w * gn * psi;
          }
        }
      }
    }
  }
}

ProblemData smooth_problem() {
  ProblemData pd;
  pd.body_force = [](const Point& x) {
    return Point{std::sin(3 * x[0]) + x[1], std::cos(2 * x[1]) - x[0], 0.0};
  };
  pd.dirichlet = [](const Point& x) {
    return Point{std::exp(x[0] - x[1]), x[0] * x[1] + 0.25, 0.0};
  };
  pd.neumann_traction = [](const Point& x, const Point& n) {
    return Point{x[0] * n[0] + std::sin(x[1]), x[1] * n[1] - x[0] * n[0], 0.0};
  };
  return pd;
}

// Shear-flow patch solution u=(y,x), p=2x-1, f=(2,0).
ProblemData patch_problem() {
  ProblemData pd;
  pd.body_force = [](const Point&) { return Point{2.0, 0.0, 0.0}; };
  pd.dirichlet = [](const Point& x) { return Point{x[1], x[0], 0.0}; };
  pd.neumann_traction = [](const Point& x, const Point& n) {
    double p = 2 * x[0] - 1;
    return Point{n[1] - p * n[0], n[0] - p * n[1], 0.0};
  };
  return pd;
}

std::vector<double> patch_dof_vector(const Pipeline& p) {
  const DofHandler& dofs = p.dofs;
  std::vector<double> z(dofs.total_dofs(), 0.0);
  for (std::int64_t node = 0; node < dofs.num_lattice_nodes(); ++node) {
    if (dofs.free_rank[node] < 0) continue;
    Point x = dofs.node_point(p.mesh, node);
    z[dofs.velocity_dof(dofs.free_rank[node], 0)] = x[1];
    z[dofs.velocity_dof(dofs.free_rank[node], 1)] = x[0];
  }
  for (std::int64_t b = 0; b < dofs.n_pressure_blocks; ++b) {
    z[dofs.pressure_dof(b, 0)] = 2 * dofs.pressure_center[b][0] - 1;
    z[dofs.pressure_dof(b, 1)] = 2 * dofs.h;
  }
  return z;
}

double residual_inf(const MixedSystem& sys, const std::vector<double>& z) {
  auto Az = sys.matrix.multiply(z);
  double r = 0;
  for (std::size_t i = 0; i < Az.size(); ++i) r = std::max(r, std::abs(Az[i] - sys.rhs[i]));
  return r;
}

}  // namespace

TEST_CASE("assembly matches a dense direct-quadrature oracle on an uncut mesh") {
  auto p = make_pipeline(2, 2, make_all_inside(), SpaceVariant::Standard);
  FormParameters fp;
  ProblemData pd = smooth_problem();
  pd.box_faces[0] = BcType::Dirichlet;
  pd.box_faces[3] = BcType::Dirichlet;
  auto improper = identify_improper_sets(p.mesh, p.agg, fp.stabilization);
  CHECK(improper.stabilized_facets.empty());
  auto sys = assemble(p.mesh, p.cls, p.decomp, p.agg, p.dofs, p.constraints, improper,
                      fp, pd);
  auto D = to_dense(sys.matrix);
  std::vector<std::vector<double>> Mref;
  std::vector<double> Lref;
  dense_oracle(p, fp, pd, Mref, Lref);
  double dm = 0, dl = 0;
  for (std::int64_t i = 0; i < sys.matrix.n; ++i) {
    dl = std::max(dl, std::abs(sys.rhs[i] - Lref[i]));
    for (std::int64_t j = 0; j < sys.matrix.n; ++j)
      dm = std::max(dm, std::abs(D[i][j] - Mref[i][j]));
  }
  CHECK(dm < 1e-10);
  CHECK(dl < 1e-10);
}

TEST_CASE("assembled matrix is symmetric") {
  auto p = make_pipeline(2, 8, make_circle_cavity(), SpaceVariant::Aggregated);
  FormParameters fp;
  ProblemData pd = smooth_problem();
  pd.box_faces[0] = BcType::Dirichlet;
  pd.box_faces[1] = BcType::Dirichlet;
  auto improper = identify_improper_sets(p.mesh, p.agg, fp.stabilization);
  auto sys = assemble(p.mesh, p.cls, p.decomp, p.agg, p.dofs, p.constraints, improper,
                      fp, pd);
  auto D = to_dense(sys.matrix);
  double amax = 0, asym = 0;
  for (std::int64_t i = 0; i < sys.matrix.n; ++i)
    for (std::int64_t j = 0; j < sys.matrix.n; ++j) {
      amax = std::max(amax, std::abs(D[i][j]));
      asym = std::max(asym, std::abs(D[i][j] - D[j][i]));
    }
  CHECK(asym < 1e-12 * amax);
}

TEST_CASE("constant pressure is in the nullspace of b for pure Dirichlet data") {
  auto p = make_pipeline(2, 4, make_all_inside(), SpaceVariant::Standard);
  FormParameters fp;
  ProblemData pd = smooth_problem();
  for (int s = 0; s < 4; ++s) pd.box_faces[s] = BcType::Dirichlet;
  auto improper = identify_improper_sets(p.mesh, p.agg, fp.stabilization);
  auto sys = assemble(p.mesh, p.cls, p.decomp, p.agg, p.dofs, p.constraints, improper,
                      fp, pd);
  std::vector<double> z(sys.matrix.n, 0.0);
  for (std::int64_t b = 0; b < p.dofs.n_pressure_blocks; ++b)
    z[p.dofs.pressure_dof(b, 0)] = 1.0;
  auto Az = sys.matrix.multiply(z);
  double vmax = 0;
  for (std::int64_t i = 0; i < sys.n_velocity; ++i) vmax = std::max(vmax, std::abs(Az[i]));
  CHECK(vmax < 1e-10);
}

TEST_CASE("pressure jump block is negative semidefinite and kills linear pressures") {
  auto p = make_pipeline(2, 8, make_circle_cavity(), SpaceVariant::Aggregated);
  FormParameters fp;
  ProblemData pd = smooth_problem();
  auto improper = identify_improper_sets(p.mesh, p.agg, fp.stabilization);
  CHECK(!improper.stabilized_facets.empty());
  auto sys = assemble(p.mesh, p.cls, p.decomp, p.agg, p.dofs, p.constraints, improper,
                      fp, pd);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> z(sys.matrix.n, 0.0);
    for (std::int64_t i = sys.n_velocity; i < sys.matrix.n; ++i) z[i] = dist(rng);
    auto Az = sys.matrix.multiply(z);
    double quad = 0;
    for (std::int64_t i = sys.n_velocity; i < sys.matrix.n; ++i) quad += z[i] * Az[i];
    CHECK(quad <= 1e-12);
  }

  // globally linear pressure p = 3x - y + 0.5 has no jumps
  std::vector<double> z(sys.matrix.n, 0.0);
  for (std::int64_t b = 0; b < p.dofs.n_pressure_blocks; ++b) {
    const Point& c = p.dofs.pressure_center[b];
    z[p.dofs.pressure_dof(b, 0)] = 3 * c[0] - c[1] + 0.5;
    z[p.dofs.pressure_dof(b, 1)] = 3 * p.dofs.h;
    z[p.dofs.pressure_dof(b, 2)] = -p.dofs.h;
  }
  auto Az = sys.matrix.multiply(z);
  double jmax = 0;
  for (std::int64_t i = sys.n_velocity; i < sys.matrix.n; ++i)
    jmax = std::max(jmax, std::abs(Az[i]));
  CHECK(jmax < 1e-10);
}

TEST_CASE("improper sets match a hand enumeration on a cut half plane") {
  auto p = make_pipeline(2, 4, make_halfspace(0, 0.6), SpaceVariant::Aggregated);
  auto sets2 = identify_improper_sets(p.mesh, p.agg, Stabilization::Alg2);
  auto sets3 = identify_improper_sets(p.mesh, p.agg, Stabilization::Alg3);

  // column i=2 is cut, each of its cells joins the interior neighbor at i=1;
  // the proper aggregates are the four pairs {(1,j),(2,j)}
  CHECK(sets2.stabilized_aggregates.size() == 4);
  for (auto a : sets2.stabilized_aggregates) {
    CHECK(p.agg.members[a].size() == 2);
    CHECK(p.mesh.cell_coords(p.agg.aggregate_root[a])[0] == 1);
  }
  CHECK(sets3.stabilized_aggregates.empty());

  std::vector<std::int64_t> expected;
  for (std::int64_t j = 0; j < 4; ++j)
    expected.push_back(p.mesh.cell_facet(p.mesh.cell_index({0, j, 0}), 1));  // 0|1
  for (std::int64_t j = 0; j < 3; ++j)
    for (std::int64_t i : {std::int64_t{1}, std::int64_t{2}})
      expected.push_back(p.mesh.cell_facet(p.mesh.cell_index({i, j, 0}), 3));  // j|j+1
  std::sort(expected.begin(), expected.end());

  auto got = sets2.stabilized_facets;
  std::sort(got.begin(), got.end());
  CHECK(got == expected);

  // the 2D filter threshold is q <= 1, so Alg3 keeps the same facets for q=2
  auto got3 = sets3.stabilized_facets;
  std::sort(got3.begin(), got3.end());
  CHECK(got3 == expected);
}

TEST_CASE("shear-flow interpolant satisfies the assembled equations exactly") {
  for (auto stab : {Stabilization::Alg3, Stabilization::Alg2}) {
    for (auto ext : {ExtensionType::Standard, ExtensionType::Serendipity}) {
      auto p = make_pipeline(2, 8, make_circle_cavity(), SpaceVariant::Aggregated, ext);
      FormParameters fp;
      fp.stabilization = stab;
      ProblemData pd = patch_problem();
      for (int s = 0; s < 3; ++s) pd.box_faces[s] = BcType::Dirichlet;
      auto improper = identify_improper_sets(p.mesh, p.agg, stab);
      auto sys = assemble(p.mesh, p.cls, p.decomp, p.agg, p.dofs, p.constraints,
                          improper, fp, pd);
      auto z = patch_dof_vector(p);
      CHECK(residual_inf(sys, z) < 1e-8);
    }
  }
}

TEST_CASE("mean pressure multiplier applies only to pure Dirichlet setups") {
  auto p = make_pipeline(2, 4, make_circle_cavity(), SpaceVariant::Aggregated);
  FormParameters fp;
  ProblemData pd = patch_problem();
  auto improper = identify_improper_sets(p.mesh, p.agg, fp.stabilization);

  // Neumann face present: refused, system unchanged
  auto sys = assemble(p.mesh, p.cls, p.decomp, p.agg, p.dofs, p.constraints, improper,
                      fp, pd);
  std::int64_t n0 = sys.matrix.n;
  auto kept = apply_mean_constraint(std::move(sys), MeanConstraintMode::LagrangeMultiplier,
                                    p.mesh, p.cls, p.decomp, p.dofs, pd);
  CHECK(kept.matrix.n == n0);
  CHECK(!kept.has_multiplier);

  // pure Dirichlet: one extra symmetric row whose action on p=1 is |Omega|
  for (int s = 0; s < 4; ++s) pd.box_faces[s] = BcType::Dirichlet;
  auto sys2 = assemble(p.mesh, p.cls, p.decomp, p.agg, p.dofs, p.constraints, improper,
                       fp, pd);
  auto ext = apply_mean_constraint(std::move(sys2), MeanConstraintMode::LagrangeMultiplier,
                                   p.mesh, p.cls, p.decomp, p.dofs, pd);
  CHECK(ext.has_multiplier);
  CHECK(ext.matrix.n == n0 + 1);
  std::vector<double> z(ext.matrix.n, 0.0);
  for (std::int64_t b = 0; b < p.dofs.n_pressure_blocks; ++b)
    z[p.dofs.pressure_dof(b, 0)] = 1.0;
  auto Az = ext.matrix.multiply(z);
  double area = 0;
  for (std::int64_t c = 0; c < p.mesh.num_cells(); ++c) {
    if (p.cls.cell_class[c] == CellClass::Internal) area += p.mesh.cell_volume();
    if (p.cls.cell_class[c] == CellClass::Cut) area += p.decomp.find(c)->inside_volume;
  }
  CHECK(Az[n0] == doctest::Approx(area).epsilon(1e-12));
  auto D = to_dense(ext.matrix);
  for (std::int64_t i = 0; i < ext.matrix.n; ++i)
    CHECK(std::abs(D[i][n0] - D[n0][i]) < 1e-14);
}

TEST_CASE("assembly rejects a quadrature degree below the form degree") {
  auto p = make_pipeline(2, 2, make_all_inside(), SpaceVariant::Standard);
  FormParameters fp;
  fp.quadrature_degree = 3;
  ProblemData pd = smooth_problem();
  auto improper = identify_improper_sets(p.mesh, p.agg, fp.stabilization);
  CHECK_THROWS_AS(assemble(p.mesh, p.cls, p.decomp, p.agg, p.dofs, p.constraints,
                           improper, fp, pd),
                  std::invalid_argument);
}
