#include "agfem/level_set.hpp"

#include <cmath>
#include <stdexcept>

namespace agfem {

namespace {

LevelSet make_ball(double radius, Point center, int dim, std::string name) {
  // Cavity sign convention: the fluid is outside the ball, so
  // psi = R - |x - c| is negative in the fluid.
  LevelSet ls;
  ls.name = std::move(name);
  ls.value = [radius, center, dim](const Point& x) {
    double r2 = 0;
    for (int a = 0; a < dim; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
    return radius - std::sqrt(r2);
  };
  ls.gradient = [center, dim](const Point& x) {
    double r2 = 0;
    for (int a = 0; a < dim; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
    double r = std::sqrt(r2);
    Point g{0, 0, 0};
    if (r > 0)
      for (int a = 0; a < dim; ++a) g[a] = -(x[a] - center[a]) / r;
    return g;
  };
  return ls;
}

}  // namespace

LevelSet make_circle_cavity(double radius, Point center) {
  return make_ball(radius, center, 2, "circle_cavity");
}

LevelSet make_sphere_cavity(double radius, Point center) {
  return make_ball(radius, center, 3, "sphere_cavity");
}

LevelSet make_moving_circle(double ell, double radius) {
  double c = ell / std::sqrt(2.0);
  return make_ball(radius, {c, c, 0.0}, 2, "moving_circle");
}

LevelSet make_moving_sphere(double ell, double radius) {
  double c = ell / std::sqrt(3.0);
  return make_ball(radius, {c, c, c}, 3, "moving_sphere");
}

LevelSet make_halfspace(int axis, double offset) {
  LevelSet ls;
  ls.name = "halfspace";
  ls.value = [axis, offset](const Point& x) { return x[axis] - offset; };
  ls.gradient = [axis](const Point&) {
    Point g{0, 0, 0};
    g[axis] = 1.0;
    return g;
  };
  return ls;
}

LevelSet make_all_inside() {
  LevelSet ls;
  ls.name = "all_inside";
  ls.value = [](const Point&) { return -1.0; };
  ls.gradient = [](const Point&) { return Point{1.0, 0.0, 0.0}; };
  return ls;
}

LevelSet builtin_geometries(const std::string& name, const GeometryParams& p) {
  auto r = [&](double def) { return p.radius > 0 ? p.radius : def; };
  if (name == "circle_cavity") return make_circle_cavity(r(0.3));
  if (name == "sphere_cavity") return make_sphere_cavity(r(0.3));
  if (name == "moving_circle") return make_moving_circle(p.ell, r(0.225));
  if (name == "moving_sphere") return make_moving_sphere(p.ell, r(0.15));
  if (name == "halfspace") return make_halfspace(p.axis, p.offset);
  if (name == "all_inside") return make_all_inside();
  throw std::invalid_argument(
      "unknown geometry '" + name +
      "'; valid names: circle_cavity, sphere_cavity, moving_circle, moving_sphere, "
      "halfspace, all_inside");
}

}  // namespace agfem
