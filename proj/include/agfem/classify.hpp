#pragma once

#include <vector>

#include "agfem/level_set.hpp"
#include "agfem/mesh.hpp"

namespace agfem {

enum class CellClass : unsigned char { Internal, External, Cut };

enum class VefFlag : unsigned char { Interior, Outer, External };

/// Per-cell classification against a level set plus outer/interior/external
/// flags for every VEF dimension (vef_flags[d] covers the cells themselves).
struct Classification {
  std::vector<CellClass> cell_class;
  std::vector<double> vertex_values;  // nudged: |psi| < 1e-12 becomes -1e-12
  std::vector<std::vector<VefFlag>> vef_flags;  // indexed [dimension][vef index]

  bool is_active(std::int64_t cell) const {
    return cell_class[cell] != CellClass::External;
  }
  std::int64_t count(CellClass c) const;
};

/// Classify cells by the sign of the nudged vertex values. A cell with mixed
/// vertex signs is Cut. Same-sign cells are additionally screened with edge
/// midpoint samples: a sign flip there means the mesh cannot resolve the
/// geometry (two zeros on one edge) and classification refuses with an error.
/// A VEF is Outer iff it touches at least one Cut cell and no Internal cell.
Classification classify(const BackgroundMesh& mesh, const LevelSet& level_set,
                        bool parallel = false);

/// Serial reference implementation (the parallel path must match it exactly).
Classification classify_serial(const BackgroundMesh& mesh, const LevelSet& level_set);

}  // namespace agfem
