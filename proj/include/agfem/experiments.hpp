#pragma once

#include <string>

#include "agfem/level_set.hpp"
#include "agfem/solve.hpp"

namespace agfem {

/// Closed-form exact Stokes fields with the matching problem data (body
/// force, Dirichlet trace, box-face tractions).
struct ManufacturedSolution {
  std::function<Point(const Point&)> velocity;
  /// gradient[i] = grad(u_i)
  std::function<std::array<Point, 3>(const Point&)> velocity_gradient;
  std::function<double(const Point&)> pressure;
  ProblemData problem;
  std::string name;
};

/// Unit-magnitude rotational field u = u*/|u*| around an exterior axis with
/// p = x^3 y^3; smooth on the unit box, not in any FE space.
ManufacturedSolution spinning_flow(int dim);

/// Shear flow u = (y, x[, 0]), p = 2x - 1: contained in the Q2/P1 spaces,
/// so the discrete solution reproduces it to roundoff.
ManufacturedSolution shear_flow(int dim);

struct ErrorReport {
  double errH1_u = 0;  // velocity H1 seminorm error
  double errL2_u = 0;
  double errL2_p = 0;
};

/// Cut-aware error norms of a solved DOF vector against exact fields.
ErrorReport compute_error_norms(const BackgroundMesh& mesh, const Classification& cls,
                                const CutDecomposition& decomp, const DofHandler& dofs,
                                const ConstraintTable& constraints,
                                const std::vector<double>& solution,
                                const ManufacturedSolution& exact, int degree = 6);

/// Least-squares slope of log(y) vs log(x).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct RunConfig {
  int dim = 2;
  int m_min = 3;
  int m_max = 6;
  SpaceVariant space = SpaceVariant::Aggregated;
  ExtensionType extension = ExtensionType::Standard;
  Stabilization stabilization = Stabilization::Alg3;
  double tau_nitsche = 40.0;
  double tau_j1 = 0.01;
  double tau_j2 = 0.01;
  double eta0 = 0.0;
  std::string geometry;  // empty = dimension default
  std::string out;
  std::string solution = "spinning";  // spinning | shear
  unsigned seed = 0;
  int samples = 200;  // moving-domain sweep
  int quadrature_degree = 6;

  FormParameters form_parameters() const;
};

/// Parse one key=value line into the config; throws on unknown keys/values.
void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value);
/// Flat key=value file ('#' comments); missing file throws.
RunConfig load_config(const std::string& path, RunConfig base = {});

struct LevelResult {
  int m = 0;
  double h = 0;
  bool ok = false;
  std::string reason;  // failure reason when !ok
  std::int64_t n_dofs = 0;
  ErrorReport errors;
  double kappa1 = 0;
  std::int64_t max_agg_dist = 0;
};

struct ConvergenceResult {
  std::vector<LevelResult> levels;
  std::string csv;  // header m,h,n_dofs,errH1_u,errL2_u,errL2_p,kappa1,max_agg_dist
};

ConvergenceResult run_convergence(const RunConfig& config);

struct SweepSample {
  double ell = 0;
  bool ok = false;
  std::string reason;
  double eta_min = 1;      // smallest cut-cell inside volume fraction
  double kappa1_std = 0;
  double kappa1_agg = 0;
};

struct MovingDomainResult {
  std::vector<SweepSample> samples;
  std::string csv;  // header ell,eta_min,kappa1_std,kappa1_agg
};

MovingDomainResult run_moving_domain(const RunConfig& config);

/// Lid-driven cavity flow demo; writes a legacy structured-grid ASCII file
/// with velocity magnitude and pressure point data to config.out.
void run_demo(const RunConfig& config, double lid_speed = 1.0);

/// Quick end-to-end health checks; returns a human-readable report and sets
/// `ok` false on any failed check.
std::string run_selftest(bool& ok);

void write_file(const std::string& path, const std::string& content);

}  // namespace agfem
