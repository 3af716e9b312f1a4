#ifndef SBFEM_QUADRATURE_HPP
#define SBFEM_QUADRATURE_HPP

// The vertex quadrature rule that drives the local elimination, plus
// standard Gauss rules on the reference triangle/segment for exact assembly
// and error integration.

#include <cmath>
#include <functional>
#include <vector>

#include "sbfem/common.hpp"
#include "sbfem/geometry.hpp"

namespace sbfem {

struct QuadRuleTri {
  std::vector<Vec2> pts;  // reference triangle (0,0)-(1,0)-(0,1)
  std::vector<double> w;  // sum to 1/2
  int degree = 0;
};

struct QuadRuleSeg {
  std::vector<double> pts;  // reference segment [0,1]
  std::vector<double> w;    // sum to 1
  int degree = 0;
};

// Gauss-Legendre nodes/weights on [-1,1], n = 1..6 (degree up to 11).
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  switch (n) {
    case 1:
      x = {0.0};
      w = {2.0};
      break;
    case 2:
      x = {-0.5773502691896258, 0.5773502691896258};
      w = {1.0, 1.0};
      break;
    case 3:
      x = {-0.7745966692414834, 0.0, 0.7745966692414834};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    case 4:
      x = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
      w = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
      break;
    case 5:
      x = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
           0.9061798459386640};
      w = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
           0.2369268850561891};
      break;
    case 6:
      x = {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969, 0.2386191860831969,
           0.6612093864662645, 0.9324695142031521};
      w = {0.1713244923791704, 0.3607615730481386, 0.4679139345726910, 0.4679139345726910,
           0.3607615730481386, 0.1713244923791704};
      break;
    default:
      throw ConfigError("gauss_legendre: unsupported point count");
  }
}

inline QuadRuleSeg gauss_seg(int degree) {
  if (degree < 0 || degree > 10) throw ConfigError("gauss_seg: degree must be in [0,10]");
  const int n = std::max(1, (degree + 2) / 2);
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadRuleSeg r;
  r.degree = degree;
  for (int i = 0; i < n; ++i) {
    r.pts.push_back(0.5 * (x[i] + 1.0));
    r.w.push_back(0.5 * w[i]);
  }
  return r;
}

// Triangle rules: centroid (degree 1), symmetric 3-point (degree 2), and a
// Duffy-collapsed tensor Gauss rule for degrees 3..10.  The Duffy map
// (u,v) -> (u(1-v), v) has Jacobian (1-v); a total-degree-d integrand becomes
// a polynomial of degree <= d in u and <= d+1 in v.
inline QuadRuleTri gauss_tri(int degree) {
  if (degree < 0 || degree > 10) throw ConfigError("gauss_tri: degree must be in [0,10]");
  QuadRuleTri r;
  r.degree = degree;
  if (degree <= 1) {
    r.pts = {Vec2(1.0 / 3.0, 1.0 / 3.0)};
    r.w = {0.5};
    return r;
  }
  if (degree == 2) {
    r.pts = {Vec2(1.0 / 6.0, 1.0 / 6.0), Vec2(2.0 / 3.0, 1.0 / 6.0), Vec2(1.0 / 6.0, 2.0 / 3.0)};
    r.w = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    return r;
  }
  const int nu = (degree + 2) / 2, nv = (degree + 3) / 2;
  std::vector<double> xu, wu, xv, wv;
  gauss_legendre(nu, xu, wu);
  gauss_legendre(nv, xv, wv);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      const double u = 0.5 * (xu[i] + 1.0), v = 0.5 * (xv[j] + 1.0);
      r.pts.push_back(Vec2(u * (1.0 - v), v));
      r.w.push_back(0.25 * wu[i] * wv[j] * (1.0 - v));
    }
  return r;
}

// Map a reference-triangle rule onto a physical triangle.
struct TriMap {
  Vec2 a;     // vertex 0
  Mat2 J;     // columns: v1-v0, v2-v0
  double detJ = 0.0;
  TriMap(const Mesh& m, int t) {
    const Vec2 p0 = m.vertices[m.tris[t][0]], p1 = m.vertices[m.tris[t][1]],
               p2 = m.vertices[m.tris[t][2]];
    a = p0;
    J.col(0) = p1 - p0;
    J.col(1) = p2 - p0;
    detJ = J.determinant();
  }
  Vec2 to_phys(const Vec2& xhat) const { return a + J * xhat; }
};

// (f, g)_Q = sum_E (|E|/3) sum_{vertices r_i} f(r_i) g(r_i), with fields
// evaluated from within each element (elementwise continuity suffices).
inline double vertex_quad_pairing(const Mesh& m,
                                  const std::function<double(int, const Vec2&)>& f,
                                  const std::function<double(int, const Vec2&)>& g) {
  double s = 0.0;
  for (int t = 0; t < m.n_tris(); ++t) {
    const double w = m.tri_area[t] / 3.0;
    for (int k = 0; k < 3; ++k) {
      const Vec2& p = m.vertices[m.tris[t][k]];
      s += w * f(t, p) * g(t, p);
    }
  }
  return s;
}

// Exact counterpart with a Gauss rule, for quadrature-error studies.
inline double gauss_pairing(const Mesh& m, int degree,
                            const std::function<double(int, const Vec2&)>& f,
                            const std::function<double(int, const Vec2&)>& g) {
  const QuadRuleTri rule = gauss_tri(degree);
  double s = 0.0;
  for (int t = 0; t < m.n_tris(); ++t) {
    const TriMap map(m, t);
    for (size_t q = 0; q < rule.pts.size(); ++q) {
      const Vec2 p = map.to_phys(rule.pts[q]);
      s += rule.w[q] * map.detJ * f(t, p) * g(t, p);
    }
  }
  return s;
}

}  // namespace sbfem

#endif  // SBFEM_QUADRATURE_HPP
