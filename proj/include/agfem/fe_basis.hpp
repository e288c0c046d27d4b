#pragma once

#include <vector>

#include "agfem/mesh.hpp"

namespace agfem {

/// Scalar shape-function family on the reference cell [0,1]^d with the nodal
/// delta property sigma^a(phi^b) = delta_ab. Shapes are polynomials, so they
/// evaluate anywhere, including outside the cell (used for extrapolation).
struct ScalarFeBasis {
  int dim = 2;
  int order = 2;
  std::vector<Point> nodes;                     // reference coordinates
  std::vector<std::array<int, 3>> monomials;    // exponents of the span
  std::vector<std::vector<double>> coef;        // coef[shape][monomial]

  int size() const { return static_cast<int>(nodes.size()); }
  double value(int shape, const Point& ref) const;
  Point gradient(int shape, const Point& ref) const;
  double laplacian(int shape, const Point& ref) const;
};

/// Tensor-product Q2 Lagrange basis: 9 nodes (2D) / 27 nodes (3D) on the
/// {0, 1/2, 1} lattice, lexicographic x-fastest.
const ScalarFeBasis& q2_basis(int dim);

/// Serendipity Q2 basis: boundary nodes only (8 in 2D, 20 in 3D), spanning
/// the monomials of superlinear degree <= 2.
const ScalarFeBasis& serendipity_q2_basis(int dim);

/// Basis bound to a physical cell (min corner `lo`, size h). Shapes stay
/// polynomials in physical coordinates; derivatives carry the 1/h scalings.
struct CellBasis {
  const ScalarFeBasis* ref = nullptr;
  Point lo{0, 0, 0};
  double h = 1;

  Point to_ref(const Point& x) const {
    Point r{0, 0, 0};
    for (int a = 0; a < ref->dim; ++a) r[a] = (x[a] - lo[a]) / h;
    return r;
  }
  double value(int shape, const Point& x) const { return ref->value(shape, to_ref(x)); }
  Point gradient(int shape, const Point& x) const {
    Point g = ref->gradient(shape, to_ref(x));
    for (int a = 0; a < ref->dim; ++a) g[a] /= h;
    return g;
  }
  double laplacian(int shape, const Point& x) const {
    return ref->laplacian(shape, to_ref(x)) / (h * h);
  }
};

}  // namespace agfem
