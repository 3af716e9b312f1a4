#ifndef SBFEM_MMS_HPP
#define SBFEM_MMS_HPP

// Manufactured solution for the convergence study (Example 1): closed forms
// for every field and the hand-derived loads.  All closures are templated on
// the scalar type so the test suite can differentiate them with complex-step
// (machine-precision first derivatives) and check the PDE residuals without
// reusing the hand-derived formulas.

#include <array>
#include <cmath>
#include <complex>

#include "sbfem/common.hpp"

namespace sbfem {

struct MmsParams {
  double mu = 1.0;       // fluid viscosity
  double mu_p = 1.0;     // Lame mu
  double lam_p = 1.0;    // Lame lambda
  double alpha_p = 1.0;  // Biot-Willis
  double s0 = 1.0;       // storativity
  double k = 1.0;        // isotropic permeability K = k I
};

struct Mms {
  MmsParams prm;

  // --- primary closures -------------------------------------------------
  template <class T>
  std::array<T, 2> u_f(T x, T y, T t) const {
    using std::cos;
    const double pi = M_PI;
    return {pi * cos(pi * t) * (-3.0 * x + cos(y)), pi * cos(pi * t) * (y + 1.0)};
  }
  template <class T>
  T p_f(T x, T y, T t) const {
    using std::cos;
    using std::exp;
    using std::sin;
    const double pi = M_PI;
    return exp(t) * sin(pi * x) * cos(pi * y / 2.0) + 2.0 * pi * cos(pi * t);
  }
  template <class T>
  T p_p(T x, T y, T t) const {
    using std::cos;
    using std::exp;
    using std::sin;
    const double pi = M_PI;
    return exp(t) * sin(pi * x) * cos(pi * y / 2.0);
  }
  template <class T>
  std::array<T, 2> eta_p(T x, T y, T t) const {
    using std::cos;
    using std::sin;
    const double pi = M_PI;
    return {sin(pi * t) * (-3.0 * x + cos(y)), sin(pi * t) * (y + 1.0)};
  }
  template <class T>
  std::array<T, 2> u_s(T x, T y, T t) const {
    using std::cos;
    const double pi = M_PI;
    return {pi * cos(pi * t) * (-3.0 * x + cos(y)), pi * cos(pi * t) * (y + 1.0)};
  }
  template <class T>
  std::array<T, 2> u_p(T x, T y, T t) const {
    using std::cos;
    using std::exp;
    using std::sin;
    const double pi = M_PI;
    // -(1/mu) K grad p_p
    return {-(prm.k / prm.mu) * pi * exp(t) * cos(pi * x) * cos(pi * y / 2.0),
            (prm.k / prm.mu) * (pi / 2.0) * exp(t) * sin(pi * x) * sin(pi * y / 2.0)};
  }

  // --- hand-derived stresses, vorticity/rotation ------------------------
  template <class T>
  std::array<std::array<T, 2>, 2> sigma_f(T x, T y, T t) const {
    using std::cos;
    using std::sin;
    const double pi = M_PI;
    const T c = pi * cos(pi * t);
    const T pf = p_f(x, y, t);
    // e(u_f) = pi cos(pi t) [[-3, -sin(y)/2], [-sin(y)/2, 1]]
    return {{{-pf + 2.0 * prm.mu * (-3.0 * c), 2.0 * prm.mu * (-0.5 * sin(y) * c)},
             {2.0 * prm.mu * (-0.5 * sin(y) * c), -pf + 2.0 * prm.mu * c}}};
  }
  template <class T>
  std::array<std::array<T, 2>, 2> sigma_p(T x, T y, T t) const {
    using std::cos;
    using std::sin;
    const double pi = M_PI;
    const T s = sin(pi * t);
    const T pp = p_p(x, y, t);
    const T divEta = -2.0 * s;
    const T diag = prm.lam_p * divEta - prm.alpha_p * pp;
    return {{{diag + 2.0 * prm.mu_p * (-3.0 * s), 2.0 * prm.mu_p * (-0.5 * sin(y) * s)},
             {2.0 * prm.mu_p * (-0.5 * sin(y) * s), diag + 2.0 * prm.mu_p * s}}};
  }
  template <class T>
  T gamma_f(T x, T y, T t) const {  // scalar vorticity: (d_y u1 - d_x u2)/2
    using std::cos;
    using std::sin;
    const double pi = M_PI;
    return -0.5 * pi * cos(pi * t) * sin(y);
  }
  template <class T>
  T gamma_p(T x, T y, T t) const {  // rotation of u_s
    return gamma_f(x, y, t);
  }

  // --- hand-derived loads ----------------------------------------------
  template <class T>
  T q_f(T x, T y, T t) const {
    using std::cos;
    const double pi = M_PI;
    return -2.0 * pi * cos(pi * t);
  }
  template <class T>
  std::array<T, 2> f_f(T x, T y, T t) const {
    using std::cos;
    using std::exp;
    using std::sin;
    const double pi = M_PI;
    const T dpdx = pi * exp(t) * cos(pi * x) * cos(pi * y / 2.0);
    const T dpdy = -(pi / 2.0) * exp(t) * sin(pi * x) * sin(pi * y / 2.0);
    return {dpdx + prm.mu * pi * cos(pi * t) * cos(y), dpdy};
  }
  template <class T>
  std::array<T, 2> f_p(T x, T y, T t) const {
    using std::cos;
    using std::exp;
    using std::sin;
    const double pi = M_PI;
    const T dpdx = pi * exp(t) * cos(pi * x) * cos(pi * y / 2.0);
    const T dpdy = -(pi / 2.0) * exp(t) * sin(pi * x) * sin(pi * y / 2.0);
    return {prm.mu_p * sin(pi * t) * cos(y) + prm.alpha_p * dpdx, prm.alpha_p * dpdy};
  }
  template <class T>
  T q_p(T x, T y, T t) const {
    using std::cos;
    const double pi = M_PI;
    const T pp = p_p(x, y, t);
    return prm.s0 * pp - 2.0 * pi * prm.alpha_p * cos(pi * t) +
           (5.0 * pi * pi * prm.k / (4.0 * prm.mu)) * pp;
  }

  // --- convenience real-valued evaluations ------------------------------
  Vec2 u_f_v(const Vec2& p, double t) const { auto a = u_f(p.x(), p.y(), t); return {a[0], a[1]}; }
  Vec2 u_s_v(const Vec2& p, double t) const { auto a = u_s(p.x(), p.y(), t); return {a[0], a[1]}; }
  Vec2 u_p_v(const Vec2& p, double t) const { auto a = u_p(p.x(), p.y(), t); return {a[0], a[1]}; }
  Vec2 eta_v(const Vec2& p, double t) const { auto a = eta_p(p.x(), p.y(), t); return {a[0], a[1]}; }
  Vec2 f_f_v(const Vec2& p, double t) const { auto a = f_f(p.x(), p.y(), t); return {a[0], a[1]}; }
  Vec2 f_p_v(const Vec2& p, double t) const { auto a = f_p(p.x(), p.y(), t); return {a[0], a[1]}; }
  Mat2 sigma_f_m(const Vec2& p, double t) const {
    auto a = sigma_f(p.x(), p.y(), t);
    Mat2 M;
    M << a[0][0], a[0][1], a[1][0], a[1][1];
    return M;
  }
  Mat2 sigma_p_m(const Vec2& p, double t) const {
    auto a = sigma_p(p.x(), p.y(), t);
    Mat2 M;
    M << a[0][0], a[0][1], a[1][0], a[1][1];
    return M;
  }
};

}  // namespace sbfem

#endif  // SBFEM_MMS_HPP
