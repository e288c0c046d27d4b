#include "agfem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace agfem {

namespace {

// Local element layout: velocity dofs (shape-major, component-minor), then
// the d+1 pressure dofs of the cell's block.
struct LocalDofs {
  std::vector<std::vector<std::pair<std::int64_t, double>>> scatter;  // per local dof
  std::vector<std::int64_t> touched;  // sorted unique global targets
};

LocalDofs local_dofs(const BackgroundMesh& mesh, const DofHandler& dofs,
                     const ConstraintTable& constraints, std::int64_t cell) {
  const int dim = mesh.dim();
  const int ns = q2_basis(dim).size();
  LocalDofs out;
  out.scatter.resize(ns * dim + dofs.pressure_size());
  auto nodes = dofs.cell_nodes(mesh, cell);
  for (int shape = 0; shape < ns; ++shape) {
    std::int64_t node = nodes[shape];
    for (int c = 0; c < dim; ++c) {
      auto& s = out.scatter[shape * dim + c];
      if (dofs.free_rank[node] >= 0) {
        s.push_back({dofs.velocity_dof(dofs.free_rank[node], c), 1.0});
      } else if (dofs.constrained_rank[node] >= 0) {
        for (const auto& [master, coeff] : constraints.rows[dofs.constrained_rank[node]])
          s.push_back({dofs.velocity_dof(master, c), coeff});
      } else {
        throw std::logic_error("active cell references an external node");
      }
    }
  }
  std::int64_t block = dofs.pressure_block_of_cell[cell];
  for (int k = 0; k < dofs.pressure_size(); ++k)
    out.scatter[ns * dim + k].push_back({dofs.pressure_dof(block, k), 1.0});
  for (const auto& s : out.scatter)
    for (const auto& [g, c] : s) out.touched.push_back(g);
  std::sort(out.touched.begin(), out.touched.end());
  out.touched.erase(std::unique(out.touched.begin(), out.touched.end()),
                    out.touched.end());
  return out;
}

struct DenseLocal {
  int n = 0;
  std::vector<double> M;
  std::vector<double> L;
  void init(int size) {
    n = size;
    M.assign(static_cast<std::size_t>(n) * n, 0.0);
    L.assign(n, 0.0);
  }
  double& at(int i, int j) { return M[static_cast<std::size_t>(i) * n + j]; }
};

struct ShapeCache {
  std::vector<double> val;
  std::vector<Point> grad;
  std::vector<double> lap;
};

void fill_shapes(const CellBasis& cb, const Point& x, bool need_lap, ShapeCache& sc) {
  const int ns = cb.ref->size();
  sc.val.resize(ns);
  sc.grad.resize(ns);
  if (need_lap) sc.lap.resize(ns);
  for (int a = 0; a < ns; ++a) {
    sc.val[a] = cb.value(a, x);
    sc.grad[a] = cb.gradient(a, x);
    if (need_lap) sc.lap[a] = cb.laplacian(a, x);
  }
}

class Assembler {
 public:
  Assembler(const BackgroundMesh& mesh, const Classification& cls,
            const CutDecomposition& decomp, const AggregateMap& agg,
            const DofHandler& dofs, const ConstraintTable& constraints,
            const ImproperSets& improper, const FormParameters& params,
            const ProblemData& problem)
      : mesh_(mesh), cls_(cls), decomp_(decomp), agg_(agg), dofs_(dofs),
        constraints_(constraints), improper_(improper), params_(params),
        problem_(problem), dim_(mesh.dim()), ns_(q2_basis(mesh.dim()).size()),
        basis_(&q2_basis(mesh.dim())) {}

  MixedSystem run(bool parallel);

 private:
  void cell_matrix(std::int64_t cell, bool stabilize_residual, DenseLocal& loc);
  void facet_jump_matrix(std::int64_t facet, DenseLocal& loc,
                         std::array<std::int64_t, 2>& blocks);

  void add_local(const LocalDofs& ld, const DenseLocal& loc);
  double& entry(std::int64_t r, std::int64_t c);

  const BackgroundMesh& mesh_;
  const Classification& cls_;
  const CutDecomposition& decomp_;
  const AggregateMap& agg_;
  const DofHandler& dofs_;
  const ConstraintTable& constraints_;
  const ImproperSets& improper_;
  const FormParameters& params_;
  const ProblemData& problem_;
  const int dim_, ns_;
  const ScalarFeBasis* basis_;

  std::vector<std::int64_t> active_cells_;
  std::vector<char> residual_cell_;  // cells receiving residual stabilization
  CsrMatrix A_;
  std::vector<double> rhs_;
};

double& Assembler::entry(std::int64_t r, std::int64_t c) {
  auto lo = A_.col_idx.begin() + A_.row_ptr[r];
  auto hi = A_.col_idx.begin() + A_.row_ptr[r + 1];
  auto it = std::lower_bound(lo, hi, c);
  if (it == hi || *it != c) throw std::logic_error("entry outside sparsity pattern");
  return A_.vals[it - A_.col_idx.begin()];
}

void Assembler::add_local(const LocalDofs& ld, const DenseLocal& loc) {
  const int n = loc.n;
  for (int i = 0; i < n; ++i) {
    for (const auto& [gi, ci] : ld.scatter[i]) {
      rhs_[gi] += ci * loc.L[i];
      for (int j = 0; j < n; ++j) {
        double v = loc.M[static_cast<std::size_t>(i) * n + j];
        if (v == 0) continue;
        for (const auto& [gj, cj] : ld.scatter[j]) entry(gi, gj) += ci * v * cj;
      }
    }
  }
}

void Assembler::cell_matrix(std::int64_t cell, bool stabilize_residual, DenseLocal& loc) {
  const int np = dofs_.pressure_size();
  loc.init(ns_ * dim_ + np);
  CellBasis cb{basis_, mesh_.cell_min_corner(cell), mesh_.h()};
  const std::int64_t block = dofs_.pressure_block_of_cell[cell];
  const double h = mesh_.h();
  const int deg = params_.quadrature_degree;
  ShapeCache sc;

  // volume terms: a, b (volume part), f load, optional residual stabilization
  auto vol = volume_rule(mesh_, decomp_, cls_, cell, deg);
  std::vector<Point> pgrad(np);
  for (int k = 0; k < np; ++k) pgrad[k] = dofs_.pressure_basis_grad(k);
  for (std::size_t q = 0; q < vol.points.size(); ++q) {
    const Point& x = vol.points[q];
    const double w = vol.weights[q];
    fill_shapes(cb, x, stabilize_residual, sc);
    for (int a = 0; a < ns_; ++a)
      for (int b = 0; b < ns_; ++b) {
        double gg = 0;
        for (int d = 0; d < dim_; ++d) gg += sc.grad[a][d] * sc.grad[b][d];
        for (int c = 0; c < dim_; ++c) loc.at(a * dim_ + c, b * dim_ + c) += w * gg;
      }
    for (int k = 0; k < np; ++k) {
      double psi = dofs_.pressure_basis(block, k, x);
      for (int a = 0; a < ns_; ++a)
        for (int c = 0; c < dim_; ++c) {
          double v = -w * sc.grad[a][c] * psi;
          loc.at(a * dim_ + c, ns_ * dim_ + k) += v;
          loc.at(ns_ * dim_ + k, a * dim_ + c) += v;
        }
    }
    Point f = problem_.body_force(x);
    for (int a = 0; a < ns_; ++a)
      for (int c = 0; c < dim_; ++c) loc.L[a * dim_ + c] += w * sc.val[a] * f[c];
    if (stabilize_residual) {
      // -tau_j2 h^2 (R_i, R_j) with R = -lap(u) + grad(p), and the matching
      // -tau_j2 h^2 (f, R) load so exact solutions stay consistent
      const double s = params_.tau_j2 * h * h * w;
      for (int a = 0; a < ns_; ++a)
        for (int b = 0; b < ns_; ++b)
          for (int c = 0; c < dim_; ++c)
            loc.at(a * dim_ + c, b * dim_ + c) -= s * sc.lap[a] * sc.lap[b];
      for (int a = 0; a < ns_; ++a)
        for (int k = 0; k < np; ++k)
          for (int c = 0; c < dim_; ++c) {
            double v = -s * (-sc.lap[a]) * pgrad[k][c];
            loc.at(a * dim_ + c, ns_ * dim_ + k) += v;
            loc.at(ns_ * dim_ + k, a * dim_ + c) += v;
          }
      for (int k = 0; k < np; ++k)
        for (int l = 0; l < np; ++l) {
          double gg = 0;
          for (int d = 0; d < dim_; ++d) gg += pgrad[k][d] * pgrad[l][d];
          loc.at(ns_ * dim_ + k, ns_ * dim_ + l) -= s * gg;
        }
      for (int a = 0; a < ns_; ++a)
        for (int c = 0; c < dim_; ++c) loc.L[a * dim_ + c] -= s * f[c] * (-sc.lap[a]);
      for (int k = 0; k < np; ++k) {
        double fr = 0;
        for (int d = 0; d < dim_; ++d) fr += f[d] * pgrad[k][d];
        loc.L[ns_ * dim_ + k] -= s * fr;
      }
    }
  }

  // Dirichlet surface pieces seen by this cell: the immersed interface and
  // any box face marked Dirichlet; Neumann box faces load the RHS.
  auto add_dirichlet = [&](const QuadratureRule& rule) {
    const double pen = params_.tau_nitsche / h;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Point& x = rule.points[q];
      const Point& n = rule.normals[q];
      const double w = rule.weights[q];
      fill_shapes(cb, x, false, sc);
      Point g = problem_.dirichlet(x);
      std::vector<double> dn(ns_);
      for (int a = 0; a < ns_; ++a) {
        dn[a] = 0;
        for (int d = 0; d < dim_; ++d) dn[a] += sc.grad[a][d] * n[d];
      }
      for (int a = 0; a < ns_; ++a)
        for (int b = 0; b < ns_; ++b) {
          double v = w * (-dn[a] * sc.val[b] - sc.val[a] * dn[b] + pen * sc.val[a] * sc.val[b]);
          for (int c = 0; c < dim_; ++c) loc.at(a * dim_ + c, b * dim_ + c) += v;
        }
      for (int k = 0; k < np; ++k) {
        double psi = dofs_.pressure_basis(block, k, x);
        for (int a = 0; a < ns_; ++a)
          for (int c = 0; c < dim_; ++c) {
            double v = w * sc.val[a] * n[c] * psi;
            loc.at(a * dim_ + c, ns_ * dim_ + k) += v;
            loc.at(ns_ * dim_ + k, a * dim_ + c) += v;
          }
        double gn = 0;
        for (int d = 0; d < dim_; ++d) gn += g[d] * n[d];
        loc.L[ns_ * dim_ + k] += w * gn * psi;
      }
      for (int a = 0; a < ns_; ++a)
        for (int c = 0; c < dim_; ++c)
          loc.L[a * dim_ + c] += w * g[c] * (-dn[a] + pen * sc.val[a]);
    }
  };

  if (cls_.cell_class[cell] == CellClass::Cut)
    add_dirichlet(boundary_rule(mesh_, decomp_, cell, deg));

  auto nbrs = mesh_.cell_neighbors_through_facets(cell);
  for (int side = 0; side < 2 * dim_; ++side) {
    if (nbrs[side].neighbor >= 0) continue;  // interior facet
    auto rule = facet_rule(mesh_, decomp_, cls_, nbrs[side].facet, deg);
    if (rule.points.empty()) continue;
    Point n{0, 0, 0};
    n[side / 2] = (side % 2) ? 1.0 : -1.0;
    rule.normals.assign(rule.points.size(), n);
    if (problem_.box_faces[side] == BcType::Dirichlet) {
      add_dirichlet(rule);
    } else {
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        fill_shapes(cb, rule.points[q], false, sc);
        Point t = problem_.neumann_traction(rule.points[q], n);
        for (int a = 0; a < ns_; ++a)
          for (int c = 0; c < dim_; ++c)
            loc.L[a * dim_ + c] += rule.weights[q] * sc.val[a] * t[c];
      }
    }
  }
}

void Assembler::facet_jump_matrix(std::int64_t facet, DenseLocal& loc,
                                  std::array<std::int64_t, 2>& blocks) {
  const int np = dofs_.pressure_size();
  loc.init(2 * np);
  auto cells = mesh_.facet_cells(facet);
  blocks = {dofs_.pressure_block_of_cell[cells[0]], dofs_.pressure_block_of_cell[cells[1]]};
  auto rule = facet_rule(mesh_, decomp_, cls_, facet, params_.quadrature_degree);
  const double s = params_.tau_j1 * mesh_.h();
  std::vector<double> J(2 * np);
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Point& x = rule.points[q];
    for (int k = 0; k < np; ++k) {
      J[k] = dofs_.pressure_basis(blocks[0], k, x);
      J[np + k] = -dofs_.pressure_basis(blocks[1], k, x);
    }
    for (int i = 0; i < 2 * np; ++i)
      for (int j = 0; j < 2 * np; ++j)
        loc.at(i, j) -= s * rule.weights[q] * J[i] * J[j];  // -j_h
  }
}

MixedSystem Assembler::run(bool parallel) {
  if (dofs_.total_dofs() == 0 || dofs_.n_free_nodes == 0)
    throw std::invalid_argument("assemble: empty active mesh");
  if (params_.quadrature_degree < 2 * 2 + 1)
    throw std::invalid_argument("assemble: quadrature degree too low for Q2 forms");

  for (std::int64_t c = 0; c < mesh_.num_cells(); ++c)
    if (cls_.is_active(c)) active_cells_.push_back(c);

  residual_cell_.assign(mesh_.num_cells(), 0);
  if (params_.stabilization == Stabilization::Alg2)
    for (auto a : improper_.stabilized_aggregates)
      for (auto c : agg_.members[a]) residual_cell_[c] = 1;

  // sparsity pattern
  const std::int64_t n = dofs_.total_dofs();
  std::vector<std::vector<std::int64_t>> cols(n);
  std::vector<LocalDofs> cell_ld(active_cells_.size());
  for (std::size_t k = 0; k < active_cells_.size(); ++k) {
    cell_ld[k] = local_dofs(mesh_, dofs_, constraints_, active_cells_[k]);
    for (auto r : cell_ld[k].touched)
      cols[r].insert(cols[r].end(), cell_ld[k].touched.begin(), cell_ld[k].touched.end());
  }
  const int np = dofs_.pressure_size();
  for (auto f : improper_.stabilized_facets) {
    auto cells = mesh_.facet_cells(f);
    std::vector<std::int64_t> t;
    for (auto c : cells)
      for (int k = 0; k < np; ++k)
        t.push_back(dofs_.pressure_dof(dofs_.pressure_block_of_cell[c], k));
    for (auto r : t) cols[r].insert(cols[r].end(), t.begin(), t.end());
  }
  A_.n = n;
  A_.row_ptr.assign(n + 1, 0);
  for (std::int64_t r = 0; r < n; ++r) {
    auto& cr = cols[r];
    std::sort(cr.begin(), cr.end());
    cr.erase(std::unique(cr.begin(), cr.end()), cr.end());
    if (cr.empty()) cr.push_back(r);  // keep a diagonal for isolated dofs
    A_.row_ptr[r + 1] = A_.row_ptr[r] + static_cast<std::int64_t>(cr.size());
  }
  A_.col_idx.reserve(A_.row_ptr[n]);
  for (std::int64_t r = 0; r < n; ++r)
    A_.col_idx.insert(A_.col_idx.end(), cols[r].begin(), cols[r].end());
  cols.clear();
  cols.shrink_to_fit();
  A_.vals.assign(A_.col_idx.size(), 0.0);
  rhs_.assign(n, 0.0);

  // element loop: local matrices may be computed concurrently in chunks, the
  // scatter stays in ascending cell order so results match the serial path
  const std::size_t chunk = 256;
  std::vector<DenseLocal> buf(chunk);
  for (std::size_t base = 0; base < active_cells_.size(); base += chunk) {
    const std::size_t m = std::min(chunk, active_cells_.size() - base);
#ifdef _OPENMP
#pragma omp parallel for if (parallel) schedule(dynamic)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i)
      cell_matrix(active_cells_[base + i], residual_cell_[active_cells_[base + i]] != 0,
                  buf[i]);
    for (std::size_t i = 0; i < m; ++i) add_local(cell_ld[base + i], buf[i]);
  }

  if (params_.stabilization != Stabilization::None) {
    for (auto f : improper_.stabilized_facets) {
      DenseLocal loc;
      std::array<std::int64_t, 2> blocks;
      facet_jump_matrix(f, loc, blocks);
      LocalDofs ld;
      ld.scatter.resize(2 * np);
      for (int k = 0; k < np; ++k) {
        ld.scatter[k].push_back({dofs_.pressure_dof(blocks[0], k), 1.0});
        ld.scatter[np + k].push_back({dofs_.pressure_dof(blocks[1], k), 1.0});
      }
      add_local(ld, loc);
    }
  }

  MixedSystem sys;
  sys.matrix = std::move(A_);
  sys.rhs = std::move(rhs_);
  sys.n_velocity = dofs_.n_free_velocity();
  sys.n_pressure = dofs_.n_pressure();
  return sys;
}

}  // namespace

std::vector<double> CsrMatrix::multiply(const std::vector<double>& x) const {
  std::vector<double> y(n, 0.0);
  for (std::int64_t r = 0; r < n; ++r)
    for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
      y[r] += vals[k] * x[col_idx[k]];
  return y;
}

ImproperSets identify_improper_sets(const BackgroundMesh& mesh, const AggregateMap& agg,
                                    Stabilization stabilization, int q) {
  ImproperSets out;
  if (stabilization == Stabilization::None) return out;
  auto proper = [&](std::int64_t a) { return agg.members[a].size() > 1; };
  if (stabilization == Stabilization::Alg2)
    for (std::int64_t a = 0; a < agg.num_aggregates(); ++a)
      if (proper(a)) out.stabilized_aggregates.push_back(a);
  // 3D serendipity refinement applies for q <= 2d-3: drop facets whose
  // aggregate roots are themselves facet neighbors
  const bool filter_adjacent_roots =
      stabilization == Stabilization::Alg3 && q <= 2 * mesh.dim() - 3;
  for (std::int64_t f = 0; f < mesh.num_facets(); ++f) {
    auto cells = mesh.facet_cells(f);
    if (cells[0] < 0 || cells[1] < 0) continue;
    std::int64_t a0 = agg.aggregate_id[cells[0]], a1 = agg.aggregate_id[cells[1]];
    if (a0 < 0 || a1 < 0 || a0 == a1) continue;
    if (!proper(a0) && !proper(a1)) continue;
    if (filter_adjacent_roots) {
      auto r0 = mesh.cell_coords(agg.aggregate_root[a0]);
      auto r1 = mesh.cell_coords(agg.aggregate_root[a1]);
      std::int64_t manhattan = 0;
      for (int ax = 0; ax < mesh.dim(); ++ax) manhattan += std::abs(r0[ax] - r1[ax]);
      if (manhattan == 1) continue;
    }
    out.stabilized_facets.push_back(f);
  }
  return out;
}

MixedSystem assemble(const BackgroundMesh& mesh, const Classification& cls,
                     const CutDecomposition& decomp, const AggregateMap& agg,
                     const DofHandler& dofs, const ConstraintTable& constraints,
                     const ImproperSets& improper, const FormParameters& params,
                     const ProblemData& problem, bool parallel) {
  Assembler assembler(mesh, cls, decomp, agg, dofs, constraints, improper, params,
                      problem);
  return assembler.run(parallel);
}

MixedSystem apply_mean_constraint(MixedSystem system, MeanConstraintMode mode,
                                  const BackgroundMesh& mesh, const Classification& cls,
                                  const CutDecomposition& decomp, const DofHandler& dofs,
                                  const ProblemData& problem) {
  if (mode == MeanConstraintMode::None) return system;
  if (problem.has_neumann_face(mesh.dim())) {
    std::cerr << "warning: mean-pressure multiplier refused, a Neumann box face "
                 "already fixes the pressure level\n";
    return system;
  }
  // weights of int_Omega p for each pressure dof
  std::vector<double> w(system.matrix.n, 0.0);
  for (std::int64_t c = 0; c < mesh.num_cells(); ++c) {
    if (!cls.is_active(c)) continue;
    std::int64_t block = dofs.pressure_block_of_cell[c];
    auto rule = volume_rule(mesh, decomp, cls, c, 4);
    for (std::size_t q = 0; q < rule.points.size(); ++q)
      for (int k = 0; k < dofs.pressure_size(); ++k)
        w[dofs.pressure_dof(block, k)] +=
            rule.weights[q] * dofs.pressure_basis(block, k, rule.points[q]);
  }
  const std::int64_t n = system.matrix.n;
  CsrMatrix out;
  out.n = n + 1;
  out.row_ptr.assign(n + 2, 0);
  for (std::int64_t r = 0; r < n; ++r) {
    std::int64_t extra = w[r] != 0 ? 1 : 0;
    out.row_ptr[r + 1] =
        out.row_ptr[r] + (system.matrix.row_ptr[r + 1] - system.matrix.row_ptr[r]) + extra;
  }
  std::int64_t last_count = 0;
  for (std::int64_t r = 0; r < n; ++r)
    if (w[r] != 0) ++last_count;
  out.row_ptr[n + 1] = out.row_ptr[n] + last_count;
  out.col_idx.reserve(out.row_ptr[n + 1]);
  out.vals.reserve(out.row_ptr[n + 1]);
  for (std::int64_t r = 0; r < n; ++r) {
    for (std::int64_t k = system.matrix.row_ptr[r]; k < system.matrix.row_ptr[r + 1]; ++k) {
      out.col_idx.push_back(system.matrix.col_idx[k]);
      out.vals.push_back(system.matrix.vals[k]);
    }
    if (w[r] != 0) {
      out.col_idx.push_back(n);
      out.vals.push_back(w[r]);
    }
  }
  for (std::int64_t r = 0; r < n; ++r)
    if (w[r] != 0) {
      out.col_idx.push_back(r);
      out.vals.push_back(w[r]);
    }
  system.matrix = std::move(out);
  system.rhs.push_back(0.0);
  system.has_multiplier = true;
  return system;
}

}  // namespace agfem
