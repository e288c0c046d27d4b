#pragma once

#include <array>
#include <vector>

#include "agfem/mesh.hpp"

namespace agfem {

/// Quadrature rule in physical coordinates. Weights carry the measure of the
/// integrated region (volume, area or length).
struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;
  /// Outward unit normals, one per point; filled for boundary rules only.
  std::vector<Point> normals;

  double total_weight() const {
    double s = 0;
    for (double w : weights) s += w;
    return s;
  }
};

/// Gauss-Legendre nodes/weights on [0,1]; exact for degree <= 2n-1.
void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w);

/// Tensor-product Gauss rule on an axis-aligned box, exact per-axis degree.
QuadratureRule tensor_gauss_box(const Point& lo, const std::array<double, 3>& len,
                                int dim, int degree);

/// Rule on the unit triangle {x,y>=0, x+y<=1} exact for total degree <= degree,
/// built by a collapsed (Duffy) map of tensor Gauss points; weights positive.
void duffy_triangle(int degree, std::vector<std::array<double, 2>>& pts,
                    std::vector<double>& wts);

/// Rule on the unit tetrahedron, same construction.
void duffy_tetrahedron(int degree, std::vector<std::array<double, 3>>& pts,
                       std::vector<double>& wts);

/// Map a unit-simplex rule affinely onto the simplex with the given vertices
/// (d+1 vertices for a volume simplex in R^d) and append to `rule`.
void append_simplex_rule(QuadratureRule& rule, const std::vector<Point>& verts,
                         int dim, int degree);

/// Rule over a (d-1)-simplex embedded in R^d (segment in 2D, triangle in 3D);
/// appends points/weights; the caller supplies the normal per element.
void append_surface_simplex_rule(QuadratureRule& rule, const std::vector<Point>& verts,
                                 int dim, int degree, const Point& normal);

/// Measure of a volume simplex (signed in 2D by vertex order; absolute in 3D
/// taken by the caller if needed).
double simplex_volume(const std::vector<Point>& verts, int dim);

/// Measure of a surface simplex (length of a segment / area of a triangle).
double surface_simplex_measure(const std::vector<Point>& verts, int dim);

}  // namespace agfem
