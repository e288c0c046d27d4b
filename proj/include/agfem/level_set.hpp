#pragma once

#include <functional>
#include <string>

#include "agfem/mesh.hpp"

namespace agfem {

/// Implicit geometry: the physical domain is { x : psi(x) < 0 }.
/// Evaluators must be safe to call concurrently.
struct LevelSet {
  std::function<double(const Point&)> value;
  std::function<Point(const Point&)> gradient;  // analytic
  std::string name;
};

/// Named shapes used by the experiments.
/// circle_cavity: psi = R - |x - c|  (unit square minus a disk), R=0.3,
///   c=(0.5,0.5) by default; sphere_cavity is the 3D analog.
/// moving_circle / moving_sphere: R=0.225 (2D) resp. 0.15 (3D), center at
///   parameter ell along the main diagonal, center = (ell/sqrt(d))*(1,..,1).
/// halfspace: psi = x[axis] - offset.
LevelSet make_circle_cavity(double radius = 0.3, Point center = {0.5, 0.5, 0.0});
LevelSet make_sphere_cavity(double radius = 0.3, Point center = {0.5, 0.5, 0.5});
LevelSet make_moving_circle(double ell, double radius = 0.225);
LevelSet make_moving_sphere(double ell, double radius = 0.15);
LevelSet make_halfspace(int axis, double offset);
/// Everything inside (all cells internal); for tests.
LevelSet make_all_inside();

struct GeometryParams {
  double radius = -1.0;  // <0 means shape default
  double ell = 0.0;
  int axis = 0;
  double offset = 0.5;
};

/// Lookup by name; throws listing the valid names on an unknown one.
LevelSet builtin_geometries(const std::string& name, const GeometryParams& params = {});

}  // namespace agfem
