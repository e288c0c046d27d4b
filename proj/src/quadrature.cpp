#include "agfem/quadrature.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace agfem {

namespace {

// Legendre P_n and derivative on [-1,1] by recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

void gauss_legendre_m11(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, Newton refinement.
    double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = legendre(n, xi);
      double dx = p / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    auto [p, dp] = legendre(n, xi);
    (void)p;
    x[i] = xi;
    w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
}

const std::pair<std::vector<double>, std::vector<double>>& cached_gl01(int n) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<double> x, w;
    gauss_legendre_m11(n, x, w);
    std::vector<double> x01(n), w01(n);
    for (int i = 0; i < n; ++i) {
      x01[i] = 0.5 * (x[i] + 1.0);
      w01[i] = 0.5 * w[i];
    }
    it = cache.emplace(n, std::make_pair(std::move(x01), std::move(w01))).first;
  }
  return it->second;
}

constexpr int kMaxDegree = 20;

}  // namespace

void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_01: n >= 1 required");
  const auto& [cx, cw] = cached_gl01(n);
  x = cx;
  w = cw;
}

QuadratureRule tensor_gauss_box(const Point& lo, const std::array<double, 3>& len,
                                int dim, int degree) {
  if (degree < 1 || degree > kMaxDegree) throw std::invalid_argument("unsupported quadrature degree");
  const int n = degree / 2 + 1;
  const auto& [x, w] = cached_gl01(n);
  QuadratureRule rule;
  const int nz = (dim == 3) ? n : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        Point p{lo[0] + x[i] * len[0], lo[1] + x[j] * len[1], 0.0};
        double wt = w[i] * len[0] * w[j] * len[1];
        if (dim == 3) {
          p[2] = lo[2] + x[k] * len[2];
          wt *= w[k] * len[2];
        }
        rule.points.push_back(p);
        rule.weights.push_back(wt);
      }
  return rule;
}

void duffy_triangle(int degree, std::vector<std::array<double, 2>>& pts,
                    std::vector<double>& wts) {
  if (degree < 1 || degree > kMaxDegree) throw std::invalid_argument("unsupported quadrature degree");
  // Map (u,v) in [0,1]^2 to (x,y) = (u, v(1-u)); Jacobian (1-u) raises the
  // u-degree by one, hence n covers total degree `degree`.
  const int n = (degree + 2) / 2 + 1;
  const auto& [x, w] = cached_gl01(n);
  pts.clear();
  wts.clear();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double u = x[i], v = x[j];
      pts.push_back({u, v * (1.0 - u)});
      wts.push_back(w[i] * w[j] * (1.0 - u));
    }
}

void duffy_tetrahedron(int degree, std::vector<std::array<double, 3>>& pts,
                       std::vector<double>& wts) {
  if (degree < 1 || degree > kMaxDegree) throw std::invalid_argument("unsupported quadrature degree");
  const int n = (degree + 4) / 2 + 1;
  const auto& [x, w] = cached_gl01(n);
  pts.clear();
  wts.clear();
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double u = x[i], v = x[j], t = x[k];
        double X = u;
        double Y = v * (1.0 - u);
        double Z = t * (1.0 - u) * (1.0 - v);
        pts.push_back({X, Y, Z});
        wts.push_back(w[i] * w[j] * w[k] * (1.0 - u) * (1.0 - u) * (1.0 - v));
      }
}

double simplex_volume(const std::vector<Point>& verts, int dim) {
  if (dim == 2) {
    const auto &a = verts[0], &b = verts[1], &c = verts[2];
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
  }
  const auto &a = verts[0], &b = verts[1], &c = verts[2], &d = verts[3];
  double m[3][3];
  for (int i = 0; i < 3; ++i) {
    m[0][i] = b[i] - a[i];
    m[1][i] = c[i] - a[i];
    m[2][i] = d[i] - a[i];
  }
  double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  return det / 6.0;
}

double surface_simplex_measure(const std::vector<Point>& verts, int dim) {
  if (dim == 2) {
    double dx = verts[1][0] - verts[0][0], dy = verts[1][1] - verts[0][1];
    return std::sqrt(dx * dx + dy * dy);
  }
  Point u{verts[1][0] - verts[0][0], verts[1][1] - verts[0][1], verts[1][2] - verts[0][2]};
  Point v{verts[2][0] - verts[0][0], verts[2][1] - verts[0][1], verts[2][2] - verts[0][2]};
  Point c{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  return 0.5 * std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
}

void append_simplex_rule(QuadratureRule& rule, const std::vector<Point>& verts,
                         int dim, int degree) {
  double vol = std::abs(simplex_volume(verts, dim));
  if (vol <= 0.0) return;
  if (dim == 2) {
    std::vector<std::array<double, 2>> pts;
    std::vector<double> wts;
    duffy_triangle(degree, pts, wts);
    for (size_t q = 0; q < pts.size(); ++q) {
      double l1 = pts[q][0], l2 = pts[q][1], l0 = 1.0 - l1 - l2;
      Point p{l0 * verts[0][0] + l1 * verts[1][0] + l2 * verts[2][0],
              l0 * verts[0][1] + l1 * verts[1][1] + l2 * verts[2][1], 0.0};
      rule.points.push_back(p);
      rule.weights.push_back(wts[q] * 2.0 * vol);  // unit-triangle area = 1/2
    }
  } else {
    std::vector<std::array<double, 3>> pts;
    std::vector<double> wts;
    duffy_tetrahedron(degree, pts, wts);
    for (size_t q = 0; q < pts.size(); ++q) {
      double l1 = pts[q][0], l2 = pts[q][1], l3 = pts[q][2], l0 = 1.0 - l1 - l2 - l3;
      Point p;
      for (int a = 0; a < 3; ++a)
        p[a] = l0 * verts[0][a] + l1 * verts[1][a] + l2 * verts[2][a] + l3 * verts[3][a];
      rule.points.push_back(p);
      rule.weights.push_back(wts[q] * 6.0 * vol);  // unit-tet volume = 1/6
    }
  }
}

void append_surface_simplex_rule(QuadratureRule& rule, const std::vector<Point>& verts,
                                 int dim, int degree, const Point& normal) {
  double meas = surface_simplex_measure(verts, dim);
  if (meas <= 0.0) return;
  if (dim == 2) {
    const int n = degree / 2 + 1;
    std::vector<double> x, w;
    gauss_legendre_01(n, x, w);
    for (int i = 0; i < n; ++i) {
      Point p{verts[0][0] + x[i] * (verts[1][0] - verts[0][0]),
              verts[0][1] + x[i] * (verts[1][1] - verts[0][1]), 0.0};
      rule.points.push_back(p);
      rule.weights.push_back(w[i] * meas);
      rule.normals.push_back(normal);
    }
  } else {
    std::vector<std::array<double, 2>> pts;
    std::vector<double> wts;
    duffy_triangle(degree, pts, wts);
    for (size_t q = 0; q < pts.size(); ++q) {
      double l1 = pts[q][0], l2 = pts[q][1], l0 = 1.0 - l1 - l2;
      Point p;
      for (int a = 0; a < 3; ++a)
        p[a] = l0 * verts[0][a] + l1 * verts[1][a] + l2 * verts[2][a];
      rule.points.push_back(p);
      rule.weights.push_back(wts[q] * 2.0 * meas);
      rule.normals.push_back(normal);
    }
  }
}

}  // namespace agfem
