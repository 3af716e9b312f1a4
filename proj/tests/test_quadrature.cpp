#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sbfem/quadrature.hpp"

using namespace sbfem;

static double integrate_tri(const QuadRuleTri& r, int px, int py) {
  double s = 0;
  for (size_t q = 0; q < r.pts.size(); ++q)
    s += r.w[q] * std::pow(r.pts[q].x(), px) * std::pow(r.pts[q].y(), py);
  return s;
}

// Exact integral of x^p y^q over the reference triangle: p! q! / (p+q+2)!.
static double exact_tri(int p, int q) {
  auto fact = [](int n) {
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  return fact(p) * fact(q) / fact(p + q + 2);
}

TEST_CASE("gauss_tri(1) is the centroid rule") {
  QuadRuleTri r = gauss_tri(1);
  REQUIRE(r.pts.size() == 1);
  CHECK(r.w[0] == Catch::Approx(0.5).epsilon(1e-15));
  CHECK(r.pts[0].x() == Catch::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("gauss_tri(2) integrates x^2 exactly") {
  QuadRuleTri r = gauss_tri(2);
  REQUIRE(r.pts.size() == 3);
  CHECK(integrate_tri(r, 2, 0) == Catch::Approx(1.0 / 12.0).epsilon(1e-14));
}

TEST_CASE("triangle rules exact to declared degree") {
  for (int d = 1; d <= 10; ++d) {
    QuadRuleTri r = gauss_tri(d);
    double wsum = 0;
    for (double w : r.w) wsum += w;
    CHECK(wsum == Catch::Approx(0.5).epsilon(1e-13));
    for (int p = 0; p <= d; ++p)
      for (int q = 0; p + q <= d; ++q) {
        INFO("degree " << d << " monomial x^" << p << " y^" << q);
        CHECK(std::abs(integrate_tri(r, p, q) - exact_tri(p, q)) < 1e-13);
      }
  }
  CHECK_THROWS_AS(gauss_tri(11), ConfigError);
}

TEST_CASE("segment rules exact to declared degree") {
  QuadRuleSeg r3 = gauss_seg(3);
  REQUIRE(r3.pts.size() == 2);
  double s = 0;
  for (size_t q = 0; q < r3.pts.size(); ++q) s += r3.w[q] * std::pow(r3.pts[q], 3);
  CHECK(s == Catch::Approx(0.25).epsilon(1e-14));

  for (int d = 0; d <= 10; ++d) {
    QuadRuleSeg r = gauss_seg(d);
    for (int p = 0; p <= d; ++p) {
      double v = 0;
      for (size_t q = 0; q < r.pts.size(); ++q) v += r.w[q] * std::pow(r.pts[q], p);
      CHECK(std::abs(v - 1.0 / (p + 1)) < 1e-13);
    }
  }
  CHECK_THROWS_AS(gauss_seg(11), ConfigError);
}

TEST_CASE("vertex rule on reference triangle") {
  Mesh m;
  m.vertices = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  m.tris = {{0, 1, 2}};
  finalize_mesh(m);
  auto x = [](int, const Vec2& p) { return p.x(); };
  auto one = [](int, const Vec2&) { return 1.0; };
  // (x,x)_Q = (1/2)/3*(0+1+0) = 1/6 (inexact, vs 1/12); (x,1)_Q = 1/6 exact.
  CHECK(vertex_quad_pairing(m, x, x) == Catch::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(vertex_quad_pairing(m, x, one) == Catch::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(vertex_quad_pairing(m, one, one) == Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("vertex rule exact for elementwise-linear products") {
  Mesh m = build_rect_mesh(0, 0, 1, 1, 2, 2);
  auto lin = [](int, const Vec2& p) { return 2.0 * p.x() - 0.7 * p.y() + 0.3; };
  auto one = [](int, const Vec2&) { return 1.0; };
  const double vq = vertex_quad_pairing(m, lin, one);
  const double ex = gauss_pairing(m, 4, lin, one);
  CHECK(vq == Catch::Approx(ex).epsilon(1e-13));
  // f = g = 1 on a 2-triangle unit square gives exactly 1.
  Mesh m2 = build_rect_mesh(0, 0, 1, 1, 1, 1);
  CHECK(vertex_quad_pairing(m2, one, one) == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("quadrature error on quadratic products decays as O(h)") {
  auto f = [](int, const Vec2& p) { return std::sin(p.x() + 0.5 * p.y()); };
  auto g = [](int, const Vec2& p) { return std::cos(0.3 * p.x() - p.y()); };
  double prev = 0;
  for (int n : {4, 8, 16, 32}) {
    Mesh m = build_rect_mesh(0, 0, 1, 1, n, n);
    const double err = std::abs(vertex_quad_pairing(m, f, g) - gauss_pairing(m, 8, f, g));
    if (prev > 0) {
      const double rate = std::log2(prev / err);
      CHECK(rate > 0.9);
    }
    prev = err;
  }
}
