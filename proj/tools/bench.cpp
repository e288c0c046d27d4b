#include <chrono>
#include <cstdio>
#include <string>

#include "agfem/experiments.hpp"

using namespace agfem;

namespace {

double seconds(const std::function<void()>& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

void report(const char* stage, double serial, double parallel) {
  std::printf("%-12s serial %8.3fs   parallel %8.3fs   speedup %5.2fx\n", stage, serial,
              parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  int dim = argc > 1 ? std::atoi(argv[1]) : 2;
  int m = argc > 2 ? std::atoi(argv[2]) : (dim == 2 ? 7 : 4);
  const std::int64_t n = std::int64_t{1} << m;
  std::printf("stokes pipeline benchmark: dim=%d, %lld cells per axis\n", dim,
              static_cast<long long>(n));

  BackgroundMesh mesh = unit_box_mesh(dim, n);
  LevelSet ls = dim == 2 ? make_circle_cavity() : make_sphere_cavity();

  Classification cls;
  report("classify", seconds([&] { cls = classify(mesh, ls, false); }),
         seconds([&] { cls = classify(mesh, ls, true); }));

  CutDecomposition decomp;
  report("decompose", seconds([&] { decomp = decompose_all(mesh, ls, cls, false); }),
         seconds([&] { decomp = decompose_all(mesh, ls, cls, true); }));

  AggregateMap agg;
  report("aggregate",
         seconds([&] { agg = aggregate_cells(mesh, cls, decomp, 0.0, false); }),
         seconds([&] { agg = aggregate_cells(mesh, cls, decomp, 0.0, true); }));
  assign_outer_vef_owners(mesh, cls, agg);

  DofHandler dofs = build_dof_handler(mesh, cls, agg, SpaceVariant::Aggregated);
  ConstraintTable ct =
      build_constraints(mesh, cls, agg, dofs, ExtensionType::Standard);
  ManufacturedSolution exact = spinning_flow(dim);
  ImproperSets improper = identify_improper_sets(mesh, agg, Stabilization::Alg3);
  FormParameters fp;

  MixedSystem serial_sys, parallel_sys;
  report("assemble",
         seconds([&] {
           serial_sys = assemble(mesh, cls, decomp, agg, dofs, ct, improper, fp,
                                 exact.problem, false);
         }),
         seconds([&] {
           parallel_sys = assemble(mesh, cls, decomp, agg, dofs, ct, improper, fp,
                                   exact.problem, true);
         }));

  bool same = serial_sys.matrix.vals == parallel_sys.matrix.vals &&
              serial_sys.rhs == parallel_sys.rhs;
  std::printf("parallel assembly bitwise equal to serial: %s\n", same ? "yes" : "NO");
  return same ? 0 : 1;
}
