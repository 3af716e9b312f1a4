#pragma once
// Verification harness: the reference manufactured-solution configuration,
// error norms in the natural spaces, convergence studies over nested
// non-matching mesh pairs, and an aggregated property-check suite.

#include <complex>
#include <random>
#include <sstream>

#include "sbfem/mms.hpp"
#include "sbfem/timeloop.hpp"

namespace sbfem {

// ---------------------------------------------------------------------------
// Reference manufactured-solution configuration
// ---------------------------------------------------------------------------
//
// Fluid (0,1)^2 over poroelastic (0,1)x(-1,0).  Exterior boundary layout:
// fluid velocity data on the sides (natural) and traction on top (essential);
// Darcy pressure data on the sides (natural) and flux on the bottom
// (essential); elastic displacement data on the sides (natural) and traction
// on the bottom (essential).
inline BcSpec example1_bc() {
  BcSpec bc;
  bc.fluid["left"] = FluidBc::velocity;
  bc.fluid["right"] = FluidBc::velocity;
  bc.fluid["top"] = FluidBc::traction;
  bc.darcy["left"] = DarcyBc::pressure;
  bc.darcy["right"] = DarcyBc::pressure;
  bc.darcy["bottom"] = DarcyBc::flux;
  bc.elas["left"] = ElasBc::displacement;
  bc.elas["right"] = ElasBc::displacement;
  bc.elas["bottom"] = ElasBc::traction;
  return bc;
}

inline ProblemData example1_problem(const Mms& mms) {
  ProblemData pd;
  pd.f_f = [mms](const Vec2& p, double t) { return mms.f_f_v(p, t); };
  pd.f_p = [mms](const Vec2& p, double t) { return mms.f_p_v(p, t); };
  pd.q_f = [mms](const Vec2& p, double t) { return mms.q_f(p.x(), p.y(), t); };
  pd.q_p = [mms](const Vec2& p, double t) { return mms.q_p(p.x(), p.y(), t); };
  auto uf = [mms](const Vec2& p, double t) { return mms.u_f_v(p, t); };
  auto us = [mms](const Vec2& p, double t) { return mms.u_s_v(p, t); };
  auto ppv = [mms](const Vec2& p, double t) { return mms.p_p(p.x(), p.y(), t); };
  pd.fluid_velocity["left"] = uf;
  pd.fluid_velocity["right"] = uf;
  pd.fluid_traction["top"] = [mms](const Vec2& p, double t) {
    return (mms.sigma_f_m(p, t) * Vec2(0, 1)).eval();
  };
  pd.darcy_pressure["left"] = ppv;
  pd.darcy_pressure["right"] = ppv;
  pd.darcy_flux["bottom"] = [mms](const Vec2& p, double t) {
    return mms.u_p_v(p, t).dot(Vec2(0, -1));
  };
  pd.elas_displacement["left"] = us;
  pd.elas_displacement["right"] = us;
  pd.elas_traction["bottom"] = [mms](const Vec2& p, double t) {
    return (mms.sigma_p_m(p, t) * Vec2(0, -1)).eval();
  };
  return pd;
}

inline ExactFields example1_fields(const Mms& mms) {
  ExactFields ex;
  ex.u_f = [mms](const Vec2& p, double t) { return mms.u_f_v(p, t); };
  ex.u_s = [mms](const Vec2& p, double t) { return mms.u_s_v(p, t); };
  ex.u_p = [mms](const Vec2& p, double t) { return mms.u_p_v(p, t); };
  ex.eta_p = [mms](const Vec2& p, double t) { return mms.eta_v(p, t); };
  ex.sigma_f = [mms](const Vec2& p, double t) { return mms.sigma_f_m(p, t); };
  ex.sigma_p = [mms](const Vec2& p, double t) { return mms.sigma_p_m(p, t); };
  ex.gamma_f = [mms](const Vec2& p, double t) { return mms.gamma_f(p.x(), p.y(), t); };
  ex.gamma_p = [mms](const Vec2& p, double t) { return mms.gamma_p(p.x(), p.y(), t); };
  ex.p_p = [mms](const Vec2& p, double t) { return mms.p_p(p.x(), p.y(), t); };
  ex.p_f = [mms](const Vec2& p, double t) { return mms.p_f(p.x(), p.y(), t); };
  return ex;
}

// Exact divergences (needed for the H(div) norms).
struct ExactDivs {
  VecFunT div_sigma_f, div_sigma_p;
  ScalFunT div_u_p;
};

inline ExactDivs example1_divs(const Mms& mms) {
  ExactDivs d;
  d.div_sigma_f = [mms](const Vec2& p, double t) { return (-mms.f_f_v(p, t)).eval(); };
  d.div_sigma_p = [mms](const Vec2& p, double t) { return (-mms.f_p_v(p, t)).eval(); };
  d.div_u_p = [mms](const Vec2& p, double t) {
    return mms.prm.k / mms.prm.mu * (5.0 * M_PI * M_PI / 4.0) * mms.p_p(p.x(), p.y(), t);
  };
  return d;
}

// ---------------------------------------------------------------------------
// Field evaluation of the discrete solution
// ---------------------------------------------------------------------------
namespace detail {

inline Mat2 eval_sigma_h(const Mesh& m, const ElementBasis& eb, const Vec& c, int t,
                         const Vec2& p) {
  Mat2 S = Mat2::Zero();
  for (int j = 0; j < 12; ++j)
    S.row(j / 6) += c[local_sdof(m, t, j)] * eb.eval(j % 6, p).transpose();
  return S;
}

inline Vec2 div_sigma_h(const Mesh& m, const ElementBasis& eb, const Vec& c, int t) {
  Vec2 d = Vec2::Zero();
  for (int j = 0; j < 12; ++j) d[j / 6] += c[local_sdof(m, t, j)] * eb.div[j % 6];
  return d;
}

inline Vec2 eval_bdm_h(const Mesh& m, const ElementBasis& eb, const Vec& c, int t,
                       const Vec2& p) {
  Vec2 v = Vec2::Zero();
  for (int j = 0; j < 6; ++j) v += c[local_vdof(m, t, j)] * eb.eval(j, p);
  return v;
}

inline double div_bdm_h(const Mesh& m, const ElementBasis& eb, const Vec& c, int t) {
  double d = 0.0;
  for (int j = 0; j < 6; ++j) d += c[local_vdof(m, t, j)] * eb.div[j];
  return d;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Spatial error norms (squared), gauss_tri(6) / gauss_seg(6)
// ---------------------------------------------------------------------------
namespace detail {

struct HdivErr {
  double l2 = 0.0, div = 0.0;  // squared
};

inline HdivErr err_sigma_sq(const Mesh& m, const Vec& c, const TensFun& ex,
                            const VecFun& exdiv) {
  const QuadRuleTri rule = gauss_tri(6);
  HdivErr e;
  for (int t = 0; t < m.n_tris(); ++t) {
    const TriMap map(m, t);
    const ElementBasis eb = build_element_basis(m, t);
    const Vec2 dh = div_sigma_h(m, eb, c, t);
    for (size_t q = 0; q < rule.pts.size(); ++q) {
      const Vec2 p = map.to_phys(rule.pts[q]);
      const double wq = rule.w[q] * map.detJ;
      e.l2 += wq * (eval_sigma_h(m, eb, c, t, p) - ex(p)).squaredNorm();
      e.div += wq * (dh - exdiv(p)).squaredNorm();
    }
  }
  return e;
}

inline HdivErr err_bdm_sq(const Mesh& m, const Vec& c, const VecFun& ex,
                          const ScalFun& exdiv) {
  const QuadRuleTri rule = gauss_tri(6);
  HdivErr e;
  for (int t = 0; t < m.n_tris(); ++t) {
    const TriMap map(m, t);
    const ElementBasis eb = build_element_basis(m, t);
    const double dh = div_bdm_h(m, eb, c, t);
    for (size_t q = 0; q < rule.pts.size(); ++q) {
      const Vec2 p = map.to_phys(rule.pts[q]);
      const double wq = rule.w[q] * map.detJ;
      e.l2 += wq * (eval_bdm_h(m, eb, c, t, p) - ex(p)).squaredNorm();
      const double dd = dh - exdiv(p);
      e.div += wq * dd * dd;
    }
  }
  return e;
}

inline double err_p0_vec_sq(const Mesh& m, const Vec& c, const VecFun& ex) {
  const QuadRuleTri rule = gauss_tri(6);
  double e = 0.0;
  for (int t = 0; t < m.n_tris(); ++t) {
    const TriMap map(m, t);
    const Vec2 ch(c[2 * t], c[2 * t + 1]);
    for (size_t q = 0; q < rule.pts.size(); ++q) {
      const Vec2 p = map.to_phys(rule.pts[q]);
      e += rule.w[q] * map.detJ * (ch - ex(p)).squaredNorm();
    }
  }
  return e;
}

inline double err_p0_sq(const Mesh& m, const Vec& c, const ScalFun& ex) {
  const QuadRuleTri rule = gauss_tri(6);
  double e = 0.0;
  for (int t = 0; t < m.n_tris(); ++t) {
    const TriMap map(m, t);
    for (size_t q = 0; q < rule.pts.size(); ++q) {
      const Vec2 p = map.to_phys(rule.pts[q]);
      const double d = c[t] - ex(p);
      e += rule.w[q] * map.detJ * d * d;
    }
  }
  return e;
}

inline double err_p1_sq(const Mesh& m, const Vec& c, const ScalFun& ex) {
  const QuadRuleTri rule = gauss_tri(6);
  double e = 0.0;
  for (int t = 0; t < m.n_tris(); ++t) {
    const TriMap map(m, t);
    const auto& tv = m.tris[t];
    for (size_t q = 0; q < rule.pts.size(); ++q) {
      const Vec2 r = rule.pts[q];
      const double l0 = 1.0 - r.x() - r.y();
      const double vh = l0 * c[tv[0]] + r.x() * c[tv[1]] + r.y() * c[tv[2]];
      const Vec2 p = map.to_phys(r);
      const double d = vh - ex(p);
      e += rule.w[q] * map.detJ * d * d;
    }
  }
  return e;
}

// L2(Gamma) error of a multiplier; `comps` = 1 (scalar) or 2 (vector).
inline double err_trace_sq(const FeSystem& fe, bool fluid_side, int comps, const Vec& c,
                           const std::function<Vec2(const Vec2&)>& ex) {
  const InterfaceMesh& im = *fe.iface;
  const QuadRuleSeg rule = gauss_seg(6);
  double e = 0.0;
  for (size_t si = 0; si < im.segments.size(); ++si) {
    const IfaceSegment& sg = im.segments[si];
    const int edge = fluid_side ? sg.fluid_edge : sg.poro_edge;
    const EdgeTrace& et = fluid_side ? fe.ftrace.at(edge) : fe.ptrace.at(edge);
    for (size_t q = 0; q < rule.pts.size(); ++q) {
      const double s = sg.a + sg.len() * rule.pts[q];
      const double w = sg.len() * rule.w[q];
      const Vec2 p = im.point(static_cast<int>(si), s);
      const TraceBasis tb = fe.trace_basis(et, fluid_side, s);
      const Vec2 exv = ex(p);
      for (int r = 0; r < comps; ++r) {
        double vh = 0.0;
        for (int a = 0; a < 2; ++a) vh += tb.val[a] * c[comps * tb.slot[a] + r];
        const double d = vh - exv[r];
        e += w * d * d;
      }
    }
  }
  return e;
}

// Trace nodes (running coordinate, slot), sorted along each group.  For the
// continuous variant these are the mesh nodes of the multiplier space.
inline std::vector<std::vector<std::pair<double, int>>> trace_nodes(const FeSystem& fe,
                                                                    bool fluid_side) {
  const auto& trmap = fluid_side ? fe.ftrace : fe.ptrace;
  std::vector<std::map<long long, std::pair<double, int>>> acc(fe.iface->groups.size());
  for (const auto& [e, et] : trmap) {
    for (int k = 0; k < 2; ++k) {
      const double s = k == 0 ? et.s0 : et.s1;
      const TraceBasis tb = fe.trace_basis(et, fluid_side, s);
      for (int a = 0; a < 2; ++a)
        if (std::abs(tb.val[a] - 1.0) < 1e-12)
          acc[et.group][std::llround(s * 1e9)] = {s, tb.slot[a]};
    }
  }
  std::vector<std::vector<std::pair<double, int>>> out;
  for (auto& g : acc) {
    std::vector<std::pair<double, int>> v;
    for (auto& [key, sv] : g) v.push_back(sv);
    out.push_back(std::move(v));
  }
  return out;
}

// First-difference seminorm of the nodal error (H^{1/2}-type surrogate used
// with the continuous multiplier variant).
inline double trace_diff_seminorm_sq(const FeSystem& fe, bool fluid_side, int comps,
                                     const Vec& c,
                                     const std::function<Vec2(const Vec2&)>& ex) {
  const InterfaceMesh& im = *fe.iface;
  double sn = 0.0;
  auto groups = trace_nodes(fe, fluid_side);
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    const IfaceGroup& g = im.groups[gi];
    std::vector<std::array<double, 2>> err;
    for (const auto& [s, slot] : groups[gi]) {
      const Vec2 p = g.axis == 0 ? Vec2(s, g.coord) : Vec2(g.coord, s);
      const Vec2 exv = ex(p);
      std::array<double, 2> e{};
      for (int r = 0; r < comps; ++r) e[r] = c[comps * slot + r] - exv[r];
      err.push_back(e);
    }
    for (size_t i = 0; i + 1 < err.size(); ++i)
      for (int r = 0; r < comps; ++r) {
        const double d = err[i + 1][r] - err[i][r];
        sn += d * d;
      }
  }
  return sn;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Error report
// ---------------------------------------------------------------------------
struct FieldErrors {
  // Order follows the convergence tables.
  double sigf = 0, uf = 0, gf = 0, pf = 0;        // fluid
  double sigp = 0, us = 0, gp = 0, up = 0, pp = 0;  // poroelastic
  double eta = 0, phi = 0, th = 0, lam = 0;       // derived + multipliers

  static const std::array<const char*, 13>& names() {
    static const std::array<const char*, 13> n = {"sigf", "uf", "gf", "pf", "sigp", "us", "gp",
                                                  "up", "pp", "eta", "phi", "th", "lam"};
    return n;
  }
  std::array<double, 13> values() const {
    return {sigf, uf, gf, pf, sigp, us, gp, up, pp, eta, phi, th, lam};
  }
  double& by_index(int i) {
    double* f[13] = {&sigf, &uf, &gf, &pf, &sigp, &us, &gp, &up, &pp, &eta, &phi, &th, &lam};
    return *f[i];
  }
};

struct ErrorRow {
  int level = 0;
  double h_f = 0, h_p = 0, h_tf = 0, h_tp = 0;
  FieldErrors err, rate;  // rate is NaN on the first level
};

inline double convergence_rate(double e_prev, double e_cur, double h_prev, double h_cur) {
  return std::log(e_prev / e_cur) / std::log(h_prev / h_cur);
}

// Per-time-step spatial errors for one state.
inline FieldErrors spatial_errors(const FeSystem& fe, const SolutionState& st,
                                  const ExactFields& ex, const ExactDivs& dv) {
  using namespace detail;
  const double t = st.t;
  const Mesh& mf = *fe.mf;
  const Mesh& mp = *fe.mp;
  FieldErrors e;
  const HdivErr esf = err_sigma_sq(mf, st.x.segment(fe.off_sigf, fe.n_sigf),
                                   at_time_m(ex.sigma_f, t), at_time(dv.div_sigma_f, t));
  e.sigf = esf.l2 + esf.div;
  const HdivErr esp = err_sigma_sq(mp, st.x.segment(fe.off_sigp, fe.n_sigp),
                                   at_time_m(ex.sigma_p, t), at_time(dv.div_sigma_p, t));
  e.sigp = esp.l2 + esp.div;
  const HdivErr eup = err_bdm_sq(mp, st.x.segment(fe.off_up, fe.n_up), at_time(ex.u_p, t),
                                 at_time_s(dv.div_u_p, t));
  e.up = eup.l2 + eup.div;
  e.uf = err_p0_vec_sq(mf, st.x.segment(fe.off_uf, fe.n_uf), at_time(ex.u_f, t));
  e.us = err_p0_vec_sq(mp, st.x.segment(fe.off_us, fe.n_us), at_time(ex.u_s, t));
  e.gf = err_p1_sq(mf, st.x.segment(fe.off_gf, fe.n_gf), at_time_s(ex.gamma_f, t));
  e.gp = err_p1_sq(mp, st.x.segment(fe.off_gp, fe.n_gp), at_time_s(ex.gamma_p, t));
  e.pp = err_p0_sq(mp, st.x.segment(fe.off_pp, fe.n_pp), at_time_s(ex.p_p, t));
  e.pf = err_p0_sq(mf, st.pf, at_time_s(ex.p_f, t));
  e.eta = err_p0_vec_sq(mp, st.eta, at_time(ex.eta_p, t));
  auto exphi = [&](const Vec2& p) { return ex.u_f(p, t); };
  auto exth = [&](const Vec2& p) { return ex.u_s(p, t); };
  auto exlam = [&](const Vec2& p) { return Vec2(ex.p_p(p, t), 0.0); };
  e.phi = err_trace_sq(fe, true, 2, st.x.segment(fe.off_phi, fe.n_phi), exphi);
  e.th = err_trace_sq(fe, false, 2, st.x.segment(fe.off_th, fe.n_th), exth);
  e.lam = err_trace_sq(fe, false, 1, st.x.segment(fe.off_lam, fe.n_lam), exlam);
  if (fe.variant == Variant::S1) {  // H^{1/2}-type surrogate for the multipliers
    e.phi +=
        trace_diff_seminorm_sq(fe, true, 2, st.x.segment(fe.off_phi, fe.n_phi), exphi);
    e.th += trace_diff_seminorm_sq(fe, false, 2, st.x.segment(fe.off_th, fe.n_th), exth);
    e.lam +=
        trace_diff_seminorm_sq(fe, false, 1, st.x.segment(fe.off_lam, fe.n_lam), exlam);
  }
  return e;  // all entries squared
}

// Composes the per-step spatial errors in time: discrete l2(0,T) for most
// fields, l-infinity for sigma_p and p_p (the table norms).
inline FieldErrors error_norms(const FeSystem& fe, const std::vector<SolutionState>& hist,
                               const ExactFields& ex, const ExactDivs& dv, double dt) {
  FieldErrors acc;  // l2 accumulators (squared) / linf maxima
  for (size_t m = 1; m < hist.size(); ++m) {
    const FieldErrors e = spatial_errors(fe, hist[m], ex, dv);
    acc.sigf += dt * e.sigf;
    acc.uf += dt * e.uf;
    acc.gf += dt * e.gf;
    acc.pf += dt * e.pf;
    acc.us += dt * e.us;
    acc.gp += dt * e.gp;
    acc.up += dt * e.up;
    acc.eta += dt * e.eta;
    acc.phi += dt * e.phi;
    acc.th += dt * e.th;
    acc.lam += dt * e.lam;
    acc.sigp = std::max(acc.sigp, e.sigp);
    acc.pp = std::max(acc.pp, e.pp);
  }
  FieldErrors out;
  for (int i = 0; i < 13; ++i) out.by_index(i) = std::sqrt(acc.by_index(i));
  return out;
}

// ---------------------------------------------------------------------------
// Convergence study
// ---------------------------------------------------------------------------
struct StudyOptions {
  int levels = 4;
  Variant variant = Variant::S2;
  Path path = Path::reduced;
  double T = 0.01, dt = 1e-3;
  int base_nf = 8, base_np = 5;  // per-side counts at the coarsest level
};

inline std::vector<ErrorRow> convergence_study(const StudyOptions& opt) {
  if (opt.levels < 2) throw ConfigError("convergence study: need at least 2 levels");
  const Mms mms;  // unit parameters
  const Coefficients co;
  const ProblemData pd = example1_problem(mms);
  const ExactFields ex = example1_fields(mms);
  const ExactDivs dv = example1_divs(mms);
  const TimeGrid grid(opt.T, opt.dt);

  std::vector<ErrorRow> rows;
  for (int l = 0; l < opt.levels; ++l) {
    const int nf = opt.base_nf << l, np = opt.base_np << l;
    Mesh mf = build_rect_mesh(0, 0, 1, 1, nf, nf, Diag::left);
    Mesh mp = build_rect_mesh(0, -1, 1, 0, np, np, Diag::left);
    mark_interface(mf, "bottom");
    mark_interface(mp, "top");
    const InterfaceMesh iface = build_interface(mf, mp);
    const FeSystem fe = build_fe_system(mf, mp, iface, opt.variant, example1_bc());

    Stepper st(fe, co, QuadMode::vertex, grid.dt, opt.path);
    const SolutionState init = interpolate_state(fe, ex, 0.0);
    const auto hist = run_transient(st, grid, pd, init);

    ErrorRow row;
    row.level = l;
    row.h_f = mf.hmax;
    row.h_p = mp.hmax;
    row.h_tf = 1.0 / nf;
    row.h_tp = 1.0 / np;
    row.err = error_norms(fe, hist, ex, dv, grid.dt);
    row.rate.by_index(0) = std::numeric_limits<double>::quiet_NaN();
    if (!rows.empty()) {
      const ErrorRow& prev = rows.back();
      auto hsel = [&](int i, const ErrorRow& r) {
        if (i <= 3) return r.h_f;          // fluid fields
        if (i <= 9) return r.h_p;          // poroelastic fields + eta
        if (i == 10) return r.h_tf;        // phi
        return r.h_tp;                     // theta, lambda
      };
      for (int i = 0; i < 13; ++i)
        row.rate.by_index(i) = convergence_rate(prev.err.values()[i], row.err.values()[i],
                                                hsel(i, prev), hsel(i, row));
    } else {
      for (int i = 0; i < 13; ++i) row.rate.by_index(i) = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// CSV: level, h_f, h_p, h_tf, h_tp, then (error, rate) pairs per field.
inline std::string errors_csv(const std::vector<ErrorRow>& rows) {
  std::ostringstream os;
  os << "level,h_f,h_p,h_tf,h_tp";
  for (const char* n : FieldErrors::names()) os << ',' << n << "_err," << n << "_rate";
  os << '\n';
  os.setf(std::ios::scientific);
  os.precision(6);
  for (const ErrorRow& r : rows) {
    os << r.level << ',' << r.h_f << ',' << r.h_p << ',' << r.h_tf << ',' << r.h_tp;
    const auto ev = r.err.values();
    const auto rv = r.rate.values();
    for (int i = 0; i < 13; ++i) {
      os << ',' << ev[i] << ',';
      if (std::isnan(rv[i]))
        os << "--";
      else
        os << rv[i];
    }
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Property suite
// ---------------------------------------------------------------------------
struct PropertyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct PropertyOptions {
  unsigned seed = 1;
  bool corrupt_cgamma = false;  // negative control: flips the c_Gamma sign
};

namespace detail {

using Cx = std::complex<double>;

template <class F>
double cstep(const F& f, double x, double y, double t, int var) {
  constexpr double h = 1e-20;
  Cx cx(x, var == 0 ? h : 0.0), cy(y, var == 1 ? h : 0.0), ct(t, var == 2 ? h : 0.0);
  return std::imag(f(cx, cy, ct)) / h;
}

struct SuiteSetup {
  Mesh mf, mp;
  InterfaceMesh iface;
  FeSystem fe;
};

inline std::unique_ptr<SuiteSetup> suite_setup(int nf, int np, Variant var, const BcSpec& bc) {
  auto s = std::make_unique<SuiteSetup>();
  s->mf = build_rect_mesh(0, 0, 1, 1, nf, nf, Diag::left);
  s->mp = build_rect_mesh(0, -1, 1, 0, np, np, Diag::left);
  mark_interface(s->mf, "bottom");
  mark_interface(s->mp, "top");
  s->iface = build_interface(s->mf, s->mp);
  s->fe = build_fe_system(s->mf, s->mp, s->iface, var, bc);
  return s;
}

}  // namespace detail

inline std::vector<PropertyResult> property_suite(const PropertyOptions& opt = {}) {
  std::vector<PropertyResult> out;
  auto record = [&](const std::string& name, bool pass, const std::string& detail) {
    out.push_back({name, pass, detail});
  };
  std::mt19937 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.05, 0.95);

  // 1. Manufactured-solution residual oracle (pointwise, complex-step).
  {
    Mms mms;
    mms.prm = {1.3, 0.8, 2.1, 0.9, 0.4, 1.7};
    const auto& pr = mms.prm;
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
      const double x = unit(rng), t = unit(rng);
      const double yf = unit(rng), yp = -unit(rng);
      using detail::cstep;
      // Fluid momentum and mass.
      for (int r = 0; r < 2; ++r) {
        auto s0 = [&](auto a, auto b, auto c) { return mms.sigma_f(a, b, c)[r][0]; };
        auto s1 = [&](auto a, auto b, auto c) { return mms.sigma_f(a, b, c)[r][1]; };
        worst = std::max(worst, std::abs(mms.f_f(x, yf, t)[r] + cstep(s0, x, yf, t, 0) +
                                         cstep(s1, x, yf, t, 1)));
      }
      auto ufx = [&](auto a, auto b, auto c) { return mms.u_f(a, b, c)[0]; };
      auto ufy = [&](auto a, auto b, auto c) { return mms.u_f(a, b, c)[1]; };
      worst = std::max(worst, std::abs(mms.q_f(x, yf, t) - cstep(ufx, x, yf, t, 0) -
                                       cstep(ufy, x, yf, t, 1)));
      // Poroelastic momentum, Darcy law, mass.
      for (int r = 0; r < 2; ++r) {
        auto s0 = [&](auto a, auto b, auto c) { return mms.sigma_p(a, b, c)[r][0]; };
        auto s1 = [&](auto a, auto b, auto c) { return mms.sigma_p(a, b, c)[r][1]; };
        worst = std::max(worst, std::abs(mms.f_p(x, yp, t)[r] + cstep(s0, x, yp, t, 0) +
                                         cstep(s1, x, yp, t, 1)));
      }
      auto ppf = [&](auto a, auto b, auto c) { return mms.p_p(a, b, c); };
      worst = std::max(worst, std::abs(mms.u_p(x, yp, t)[0] +
                                       pr.k / pr.mu * cstep(ppf, x, yp, t, 0)));
      worst = std::max(worst, std::abs(mms.u_p(x, yp, t)[1] +
                                       pr.k / pr.mu * cstep(ppf, x, yp, t, 1)));
      auto usx = [&](auto a, auto b, auto c) { return mms.u_s(a, b, c)[0]; };
      auto usy = [&](auto a, auto b, auto c) { return mms.u_s(a, b, c)[1]; };
      auto upx = [&](auto a, auto b, auto c) { return mms.u_p(a, b, c)[0]; };
      auto upy = [&](auto a, auto b, auto c) { return mms.u_p(a, b, c)[1]; };
      const double qp = pr.s0 * cstep(ppf, x, yp, t, 2) +
                        pr.alpha_p * (cstep(usx, x, yp, t, 0) + cstep(usy, x, yp, t, 1)) +
                        cstep(upx, x, yp, t, 0) + cstep(upy, x, yp, t, 1);
      worst = std::max(worst, std::abs(mms.q_p(x, yp, t) - qp));
    }
    // Interface conditions (unit parameters).
    Mms mu;  // defaults
    for (int i = 0; i < 500; ++i) {
      const double x = unit(rng), t = unit(rng);
      const Vec2 p(x, 0.0), n_f(0, -1), n_p(0, 1), tf(1, 0);
      const Mat2 sf = mu.sigma_f_m(p, t), sp = mu.sigma_p_m(p, t);
      worst = std::max(worst, std::abs(mu.u_f_v(p, t).dot(n_f) +
                                       (mu.u_s_v(p, t) + mu.u_p_v(p, t)).dot(n_p)));
      worst = std::max(worst, (sf * n_f + sp * n_p).norm());
      worst = std::max(worst, std::abs(-(sf * n_f).dot(n_f) - mu.p_p(x, 0.0, t)));
      worst = std::max(worst, std::abs((mu.u_f_v(p, t) - mu.u_s_v(p, t)).dot(tf)));
      worst = std::max(worst, std::abs((sf * n_f).dot(tf)));
    }
    record("mms-residual", worst < 1e-10, "max pointwise residual " + std::to_string(worst));
  }

  // Shared boundary layout for the remaining checks.
  const BcSpec bc = example1_bc();
  const Coefficients co;

  // 2. Antisymmetry of the c_Gamma couplings (negative control flips Cf).
  {
    auto s = detail::suite_setup(3, 2, Variant::S2, bc);
    const Blocks bl = assemble_blocks(s->fe, co, QuadMode::vertex);
    SpMat M = assemble_monolithic(s->fe, bl, 0.1);
    if (opt.corrupt_cgamma) {
      // Break the skew pairing in one of its two occurrences only.
      std::vector<Triplet> tr;
      for (int k = 0; k < bl.Cf.outerSize(); ++k)
        for (SpMat::InnerIterator it(bl.Cf, k); it; ++it)
          tr.emplace_back(s->fe.off_lam + static_cast<int>(it.col()),
                          s->fe.off_phi + static_cast<int>(it.row()), 2.0 * it.value());
      SpMat P(M.rows(), M.cols());
      P.setFromTriplets(tr.begin(), tr.end());
      M += P;
    }
    const FeSystem& fe = s->fe;
    const Eigen::MatrixXd D(M);
    const double a =
        (D.block(fe.off_phi, fe.off_lam, fe.n_phi, fe.n_lam) +
         D.block(fe.off_lam, fe.off_phi, fe.n_lam, fe.n_phi).transpose())
            .norm();
    const double b =
        (D.block(fe.off_th, fe.off_lam, fe.n_th, fe.n_lam) +
         D.block(fe.off_lam, fe.off_th, fe.n_lam, fe.n_th).transpose())
            .norm();
    record("cgamma-antisymmetry", a < 1e-12 && b < 1e-12,
           "block mismatch " + std::to_string(a + b));
  }

  // 3. Monolithic symmetric part positive semidefinite.
  {
    bool pass = true;
    std::string det;
    for (auto [nf, np] : {std::pair{2, 2}, std::pair{3, 2}, std::pair{2, 3}}) {
      auto s = detail::suite_setup(nf, np, Variant::S2, bc);
      Blocks bl = assemble_blocks(s->fe, co, QuadMode::vertex);
      const SpMat M = assemble_monolithic(s->fe, bl, 0.1);
      const Eigen::MatrixXd S = 0.5 * (Eigen::MatrixXd(M) + Eigen::MatrixXd(M).transpose());
      const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S)
                              .eigenvalues()
                              .minCoeff();
      if (lmin < -1e-8 * S.norm()) {
        pass = false;
        det = "min eigenvalue " + std::to_string(lmin);
      }
    }
    record("monolithic-psd", pass, det);
  }

  // 4. Full-vs-reduced equivalence, including near-degenerate storativity.
  {
    bool pass = true;
    std::string det;
    for (double s0 : {1.0, 1e-6}) {
      Coefficients c2 = co;
      c2.s0 = s0;
      auto s = detail::suite_setup(3, 2, Variant::S2, bc);
      Blocks bl = assemble_blocks(s->fe, c2, QuadMode::vertex);
      MonolithicSolver mono(s->fe, bl, 0.05);
      ReducedSolver red(s->fe, bl, 0.05);
      Rhs r = Rhs::zero(s->fe);
      r.pp = Vec::Random(s->fe.n_pp);
      r.uf = Vec::Random(s->fe.n_uf);
      r.us = Vec::Random(s->fe.n_us);
      r.phi = Vec::Random(s->fe.n_phi);
      EssentialValues ev = essential_values(s->fe, ProblemData{}, 0.0);
      const Vec xm = mono.solve(r.global(s->fe), ev, s->fe);
      const Vec xr = red.solve(r, ev);
      const double rel = (xm - xr).norm() / (1.0 + xm.norm());
      if (rel > 1e-8) {
        pass = false;
        det = "relative difference " + std::to_string(rel);
      }
    }
    record("reduced-equivalence", pass, det);
  }

  // 5. Rayleigh positivity of the reduced matrix (including locking regime).
  {
    bool pass = true;
    std::string det;
    struct Case {
      int nf, np;
      double s0, lam_p;
    };
    for (const Case cse : {Case{2, 2, 1.0, 1.0}, Case{4, 5, 1.0, 1.0},
                           Case{3, 3, 1e-6, 1e7}}) {
      Coefficients c2 = co;
      c2.s0 = cse.s0;
      c2.lam_p = cse.lam_p;
      auto s = detail::suite_setup(cse.nf, cse.np, Variant::S2, bc);
      Blocks bl = assemble_blocks(s->fe, c2, QuadMode::vertex);
      ReducedSolver red(s->fe, bl, 0.01);
      const Eigen::MatrixXd R(red.rs.R);
      for (int k = 0; k < 1000; ++k) {
        Vec q = Vec::Random(red.rs.total);
        if (q.dot(R * q) <= 0.0) {
          pass = false;
          det = "non-positive Rayleigh quotient";
        }
      }
    }
    record("rayleigh-positivity", pass, det);
  }

  // 6. Energy decay for zero data.
  {
    auto s = detail::suite_setup(2, 3, Variant::S2, bc);
    Stepper st(s->fe, co, QuadMode::vertex, 0.05, Path::reduced);
    SolutionState state = SolutionState::zero(s->fe);
    state.x.segment(s->fe.off_sigp, s->fe.n_sigp) = Vec::Random(s->fe.n_sigp);
    state.x.segment(s->fe.off_pp, s->fe.n_pp) = Vec::Random(s->fe.n_pp);
    state = st.step(state, ProblemData{}, 0.05);
    auto energy = [&](const SolutionState& q) {
      const Vec sp = q.x.segment(s->fe.off_sigp, s->fe.n_sigp);
      const Vec pp = q.x.segment(s->fe.off_pp, s->fe.n_pp);
      return sp.dot(st.bl.Ess * sp) + 2.0 * sp.dot(st.bl.Esp * pp) +
             pp.dot((st.bl.epp + st.bl.ms0).cwiseProduct(pp));
    };
    bool pass = true;
    double e_prev = energy(state);
    for (int m = 2; m <= 11; ++m) {
      state = st.step(state, ProblemData{}, m * 0.05);
      const double e = energy(state);
      if (e > e_prev * (1.0 + 1e-12)) pass = false;
      e_prev = e;
    }
    record("energy-decay", pass, "");
  }

  // 7. Conservation residuals along a manufactured-solution run.
  {
    Mms mms;
    auto s = detail::suite_setup(3, 2, Variant::S2, bc);
    const ProblemData pd = example1_problem(mms);
    Stepper st(s->fe, co, QuadMode::vertex, 1e-3, Path::reduced);
    SolutionState state = interpolate_state(s->fe, example1_fields(mms), 0.0);
    bool pass = true;
    std::string det;
    for (int m = 1; m <= 10; ++m) {
      state = st.step(state, pd, m * 1e-3);
      const double sc = 1.0 + state.x.norm();
      Rhs r = compute_rhs(s->fe, co, pd, state.t);
      const double rm = interface_mass_residual(s->fe, st.bl, state.x, r.lam);
      const double rp = interface_momentum_residual(s->fe, st.bl, state.x, r.phi, r.th);
      const Vec rdiv = st.bl.Bf * state.x.segment(s->fe.off_sigf, s->fe.n_sigf) + r.uf;
      if (rm > 1e-8 * sc || rp > 1e-8 * sc || rdiv.norm() > 1e-8 * sc) {
        pass = false;
        det = "step " + std::to_string(m);
      }
    }
    record("conservation", pass, det);
  }

  // 8. Vertex quadrature: exact on elementwise linears; energy error decays
  // at first order for smooth fields; norm equivalence constants bounded.
  {
    // Exactness on linears: integrate a random linear on random triangles.
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    bool pass = true;
    std::string det;
    for (int i = 0; i < 50; ++i) {
      Mesh m;
      m.vertices = {Vec2(unit(rng), unit(rng)), Vec2(1 + unit(rng), unit(rng)),
                    Vec2(unit(rng), 1 + unit(rng))};
      m.tris = {{0, 1, 2}};
      finalize_mesh(m);
      const TriMap map(m, 0);
      const double a = coef(rng), b = coef(rng), c0 = coef(rng);
      auto f = [&](const Vec2& p) { return a * p.x() + b * p.y() + c0; };
      double qv = 0.0;
      const detail::TriRule vr = detail::tri_rule(QuadMode::vertex);
      for (size_t q = 0; q < vr.ref.size(); ++q)
        qv += vr.w[q] * map.detJ * f(map.to_phys(vr.ref[q]));
      const Vec2 cen = (m.vertices[0] + m.vertices[1] + m.vertices[2]) / 3.0;
      const double exact = 0.5 * map.detJ * f(cen);
      if (std::abs(qv - exact) > 1e-13 * (1.0 + std::abs(exact))) {
        pass = false;
        det = "vertex rule not exact on a linear";
      }
    }
    // Energy comparison and norm equivalence on refined meshes.
    Mms mms;
    double prev_diff = 0.0;
    for (int l = 0; l < 3; ++l) {
      const int n = 4 << l;
      auto s = detail::suite_setup(n, n, Variant::S2, bc);
      Blocks bv = assemble_blocks(s->fe, co, QuadMode::vertex);
      Blocks be = assemble_blocks(s->fe, co, QuadMode::exact);
      const Vec c = interp_sigma(*s->fe.mf,
                                 [&](const Vec2& p) { return mms.sigma_f_m(p, 0.3); });
      const double ev2 = c.dot(bv.Af * c), ee = c.dot(be.Af * c);
      const double diff = std::abs(ev2 - ee);
      if (l > 0 && !(diff < prev_diff * std::pow(0.5, 0.9))) {
        pass = false;
        det = "quadrature error not decaying at first order";
      }
      prev_diff = diff;
      // Norm equivalence: vertex and exact energies comparable.
      for (int k = 0; k < 50; ++k) {
        Vec q = Vec::Random(s->fe.n_sigf);
        const double rv = q.dot(bv.Af * q), re = q.dot(be.Af * q);
        if (!(rv > 0.02 * re && rv < 50.0 * re)) {
          pass = false;
          det = "norm equivalence constants out of range";
        }
      }
    }
    record("quadrature", pass, det);
  }

  return out;
}

inline bool all_pass(const std::vector<PropertyResult>& r) {
  for (const auto& p : r)
    if (!p.pass) return false;
  return true;
}

}  // namespace sbfem
