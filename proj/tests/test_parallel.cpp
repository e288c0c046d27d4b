#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "agfem/experiments.hpp"

using namespace agfem;

namespace {

void check_pipeline_equal(int dim, std::int64_t n, const LevelSet& ls) {
  BackgroundMesh mesh = unit_box_mesh(dim, n);

  Classification cs = classify(mesh, ls, false);
  Classification cp = classify(mesh, ls, true);
  CHECK(cs.cell_class == cp.cell_class);
  CHECK(cs.vertex_values == cp.vertex_values);
  for (int d = 0; d < dim; ++d) CHECK(cs.vef_flags[d] == cp.vef_flags[d]);

  CutDecomposition ds = decompose_all(mesh, ls, cs, false);
  CutDecomposition dp = decompose_all(mesh, ls, cs, true);
  REQUIRE(ds.cut_cells == dp.cut_cells);
  for (std::size_t i = 0; i < ds.entries.size(); ++i) {
    CHECK(ds.entries[i].inside_volume == dp.entries[i].inside_volume);
    CHECK(ds.entries[i].interior_simplices == dp.entries[i].interior_simplices);
    REQUIRE(ds.entries[i].interface_elements.size() ==
            dp.entries[i].interface_elements.size());
    for (std::size_t k = 0; k < ds.entries[i].interface_elements.size(); ++k) {
      CHECK(ds.entries[i].interface_elements[k].verts ==
            dp.entries[i].interface_elements[k].verts);
      CHECK(ds.entries[i].interface_elements[k].normal ==
            dp.entries[i].interface_elements[k].normal);
    }
    for (int s = 0; s < 2 * dim; ++s)
      CHECK(ds.entries[i].facet_pieces[s] == dp.entries[i].facet_pieces[s]);
  }

  AggregateMap as = aggregate_cells(mesh, cs, ds, 0.0, false);
  AggregateMap ap = aggregate_cells(mesh, cs, ds, 0.0, true);
  CHECK(as.root_of_cell == ap.root_of_cell);
  CHECK(as.aggregate_id == ap.aggregate_id);
  CHECK(as.members == ap.members);
  assign_outer_vef_owners(mesh, cs, as);

  DofHandler dofs = build_dof_handler(mesh, cs, as, SpaceVariant::Aggregated);
  ConstraintTable ct = build_constraints(mesh, cs, as, dofs, ExtensionType::Standard);
  ImproperSets improper = identify_improper_sets(mesh, as, Stabilization::Alg3);
  ManufacturedSolution exact = spinning_flow(dim);
  FormParameters fp;
  MixedSystem sys_s =
      assemble(mesh, cs, ds, as, dofs, ct, improper, fp, exact.problem, false);
  MixedSystem sys_p =
      assemble(mesh, cs, ds, as, dofs, ct, improper, fp, exact.problem, true);
  CHECK(sys_s.matrix.row_ptr == sys_p.matrix.row_ptr);
  CHECK(sys_s.matrix.col_idx == sys_p.matrix.col_idx);
  CHECK(sys_s.matrix.vals == sys_p.matrix.vals);  // bitwise
  CHECK(sys_s.rhs == sys_p.rhs);
}

}  // namespace

TEST_CASE("parallel pipeline is bitwise identical to serial (2D circle)") {
  check_pipeline_equal(2, 16, make_circle_cavity());
}

TEST_CASE("parallel pipeline is bitwise identical to serial (3D sphere)") {
  check_pipeline_equal(3, 6, make_sphere_cavity());
}
