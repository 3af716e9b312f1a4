#pragma once
// Backward-Euler time integration driver.
//
// A SolutionState carries the coefficient vector of all eleven fields in the
// monolithic layout plus two derived quantities: the accumulated structure
// displacement eta (eta^m = eta^{m-1} + dt * u_s^m) and the post-processed
// fluid pressure p_f = -(1/2)(tr sigma_f - 2 mu q_f), both piecewise data on
// the respective meshes.
//
// Initial data comes in two flavors: interpolation of analytic fields (used
// with manufactured solutions) and a discrete construction that solves three
// auxiliary problems -- an interface projection plus a coupled Stokes--Darcy
// solve for the fluid/Darcy variables, a mixed elasticity solve for the
// initial stress and displacement, and a second elasticity solve for the
// initial structure velocity -- so that the time-independent rows of the
// evolution system hold exactly at t = 0.

#include <optional>

#include "sbfem/reduction.hpp"

namespace sbfem {

using TensFunT = std::function<Mat2(const Vec2&, double)>;

// ---------------------------------------------------------------------------
// TimeGrid
// ---------------------------------------------------------------------------
struct TimeGrid {
  double T = 0.0;
  double dt = 0.0;
  int M = 0;  // number of steps, T = M * dt

  TimeGrid(double T_, double dt_) : T(T_), dt(dt_) {
    if (!(T > 0.0) || !(dt > 0.0)) throw ConfigError("time grid: T and dt must be positive");
    M = static_cast<int>(std::llround(T / dt));
    if (M < 1 || std::abs(M * dt - T) > 1e-10 * T)
      throw ConfigError("time grid: T must be an integer multiple of dt");
  }
};

// ---------------------------------------------------------------------------
// SolutionState
// ---------------------------------------------------------------------------
struct SolutionState {
  double t = 0.0;
  Vec x;    // all fields, monolithic layout
  Vec eta;  // accumulated displacement, same layout as u_s
  Vec pf;   // post-processed fluid pressure, one value per fluid triangle

  static SolutionState zero(const FeSystem& fe) {
    SolutionState s;
    s.x = Vec::Zero(fe.total);
    s.eta = Vec::Zero(fe.n_us);
    s.pf = Vec::Zero(fe.n_uf / 2);
    return s;
  }

  Vec seg(const FeSystem& fe, int off, int n) const { return x.segment(off, n); }
};

// ---------------------------------------------------------------------------
// Post-processing
// ---------------------------------------------------------------------------
//
// p_f = -(1/2)(tr sigma_f - 2 mu q_f), projected onto piecewise constants:
// the stress trace is integrated exactly (the basis is linear), q_f by
// quadrature.
inline Vec postprocess_pf(const FeSystem& fe, const Coefficients& co, const Vec& sigf,
                          const ScalFunT& q_f, double t) {
  const Mesh& mf = *fe.mf;
  const QuadRuleTri rule = gauss_tri(4);
  Vec pf = Vec::Zero(mf.n_tris());
  for (int tt = 0; tt < mf.n_tris(); ++tt) {
    const TriMap map(mf, tt);
    const ElementBasis eb = build_element_basis(mf, tt);
    double tr_int = 0.0, qf_int = 0.0, area = 0.0;
    for (size_t q = 0; q < rule.pts.size(); ++q) {
      const Vec2 p = map.to_phys(rule.pts[q]);
      const double wq = rule.w[q] * map.detJ;
      area += wq;
      qf_int += wq * q_f(p, t);
      for (int j = 0; j < 12; ++j) {
        const int rr = j / 6, b = j % 6;
        tr_int += wq * sigf[detail::local_sdof(mf, tt, j)] * eb.eval(b, p)[rr];
      }
    }
    pf[tt] = -0.5 * (tr_int - 2.0 * co.mu * qf_int) / area;
  }
  return pf;
}

// ---------------------------------------------------------------------------
// Conservation diagnostics
// ---------------------------------------------------------------------------
//
// Residuals of the interface rows of the solved system: mass conservation
// (the multiplier row) and momentum balance (the phi/theta rows).  For a
// converged step both must vanish to solver tolerance.
inline double interface_mass_residual(const FeSystem& fe, const Blocks& bl, const Vec& x,
                                      const Vec& f_lam) {
  const Vec up = x.segment(fe.off_up, fe.n_up);
  const Vec phi = x.segment(fe.off_phi, fe.n_phi);
  const Vec th = x.segment(fe.off_th, fe.n_th);
  return (-bl.Bgam * up - bl.Cf.transpose() * phi - bl.Cp.transpose() * th - f_lam).norm();
}

inline double interface_momentum_residual(const FeSystem& fe, const Blocks& bl, const Vec& x,
                                          const Vec& f_phi, const Vec& f_th) {
  const Vec sigf = x.segment(fe.off_sigf, fe.n_sigf);
  const Vec sigp = x.segment(fe.off_sigp, fe.n_sigp);
  const Vec phi = x.segment(fe.off_phi, fe.n_phi);
  const Vec th = x.segment(fe.off_th, fe.n_th);
  const Vec lam = x.segment(fe.off_lam, fe.n_lam);
  const Vec rphi =
      bl.Bnf * sigf + bl.Pff * phi - bl.Pft * th + bl.Cf * lam - f_phi;
  const Vec rth = bl.Bnp * sigp - bl.Pft.transpose() * phi + bl.Ptt * th + bl.Cp * lam - f_th;
  return std::sqrt(rphi.squaredNorm() + rth.squaredNorm());
}

// ---------------------------------------------------------------------------
// Analytic fields (for interpolated initial data and error evaluation)
// ---------------------------------------------------------------------------
struct ExactFields {
  VecFunT u_f, u_s, u_p, eta_p;
  TensFunT sigma_f, sigma_p;
  ScalFunT gamma_f, gamma_p, p_p, p_f;
};

namespace detail {

inline VecFun at_time(const VecFunT& f, double t) {
  return [f, t](const Vec2& p) { return f(p, t); };
}
inline ScalFun at_time_s(const ScalFunT& f, double t) {
  return [f, t](const Vec2& p) { return f(p, t); };
}
inline TensFun at_time_m(const TensFunT& f, double t) {
  return [f, t](const Vec2& p) { return f(p, t); };
}

}  // namespace detail

// Nodal/moment interpolation of analytic fields into every discrete space.
inline SolutionState interpolate_state(const FeSystem& fe, const ExactFields& ex, double t) {
  SolutionState s = SolutionState::zero(fe);
  s.t = t;
  s.x.segment(fe.off_sigf, fe.n_sigf) = interp_sigma(*fe.mf, detail::at_time_m(ex.sigma_f, t));
  s.x.segment(fe.off_up, fe.n_up) = interp_bdm1(*fe.mp, detail::at_time(ex.u_p, t));
  s.x.segment(fe.off_sigp, fe.n_sigp) = interp_sigma(*fe.mp, detail::at_time_m(ex.sigma_p, t));
  s.x.segment(fe.off_pp, fe.n_pp) = interp_p0(*fe.mp, detail::at_time_s(ex.p_p, t));
  s.x.segment(fe.off_phi, fe.n_phi) =
      interp_trace_vec(fe, true, detail::at_time(ex.u_f, t));
  s.x.segment(fe.off_th, fe.n_th) = interp_trace_vec(fe, false, detail::at_time(ex.u_s, t));
  s.x.segment(fe.off_lam, fe.n_lam) =
      interp_trace_scalar(fe, false, detail::at_time_s(ex.p_p, t));
  s.x.segment(fe.off_uf, fe.n_uf) = interp_p0_vec(*fe.mf, detail::at_time(ex.u_f, t));
  s.x.segment(fe.off_us, fe.n_us) = interp_p0_vec(*fe.mp, detail::at_time(ex.u_s, t));
  s.x.segment(fe.off_gf, fe.n_gf) = interp_p1(*fe.mf, detail::at_time_s(ex.gamma_f, t));
  s.x.segment(fe.off_gp, fe.n_gp) = interp_p1(*fe.mp, detail::at_time_s(ex.gamma_p, t));
  s.eta = interp_p0_vec(*fe.mp, detail::at_time(ex.eta_p, t));
  s.pf = interp_p0(*fe.mf, detail::at_time_s(ex.p_f, t));
  return s;
}

// ---------------------------------------------------------------------------
// Interface L2 projection (step 1 of the discrete initial-data construction)
// ---------------------------------------------------------------------------
inline Vec trace_l2_projection(const FeSystem& fe, bool fluid_side, const VecFunT& f,
                               double t) {
  const InterfaceMesh& im = *fe.iface;
  const int n = 2 * fe.n_slots_scalar(fluid_side);
  const QuadRuleSeg rule = gauss_seg(4);
  std::vector<Triplet> tm;
  Vec b = Vec::Zero(n);
  for (size_t si = 0; si < im.segments.size(); ++si) {
    const IfaceSegment& sg = im.segments[si];
    const int e = fluid_side ? sg.fluid_edge : sg.poro_edge;
    const EdgeTrace& et = fluid_side ? fe.ftrace.at(e) : fe.ptrace.at(e);
    for (size_t q = 0; q < rule.pts.size(); ++q) {
      const double s = sg.a + sg.len() * rule.pts[q];
      const double w = sg.len() * rule.w[q];
      const Vec2 p = im.point(static_cast<int>(si), s);
      const TraceBasis tb = fe.trace_basis(et, fluid_side, s);
      const Vec2 fv = f(p, t);
      for (int a = 0; a < 2; ++a)
        for (int r = 0; r < 2; ++r) {
          b[2 * tb.slot[a] + r] += w * tb.val[a] * fv[r];
          for (int c = 0; c < 2; ++c)
            tm.emplace_back(2 * tb.slot[a] + r, 2 * tb.slot[c] + r,
                            w * tb.val[a] * tb.val[c]);
        }
    }
  }
  SpMat M(n, n);
  M.setFromTriplets(tm.begin(), tm.end());
  Eigen::SimplicialLDLT<SpMat> ldlt(M);
  if (ldlt.info() != Eigen::Success) throw SolverError("trace mass factorization failed");
  return ldlt.solve(b);
}

// ---------------------------------------------------------------------------
// Discrete initial-data construction
// ---------------------------------------------------------------------------
namespace detail {

// Solve M y = rhs with the listed DOFs pinned to given values (symmetric
// constraint application, as in the monolithic solver).
inline Vec solve_pinned(const SpMat& M, const Vec& rhs, const std::vector<int>& cons,
                        const Vec& lift, const char* what) {
  const SpMat Mbc = apply_constraints(M, cons);
  const Vec b = constrain_rhs(M, cons, rhs, lift);
  Eigen::SparseLU<SpMat> lu(Mbc);
  if (lu.info() != Eigen::Success)
    throw SolverError(std::string("initial data: factorization failed in ") + what);
  Vec y = lu.solve(b);
  if (lu.info() != Eigen::Success)
    throw SolverError(std::string("initial data: solve failed in ") + what);
  return y;
}

// Poroelastic vertices where the interface meets an essential-traction outer
// boundary.  At such a junction the vertex-quadrature rotation row becomes
// linearly dependent on the interface-multiplier rows (the combination
// annihilates every free stress DOF), so the auxiliary elasticity systems of
// the initial-data construction are rank deficient.  Pinning the rotation
// multiplier there drops the redundant constraint.
inline std::vector<int> junction_rho_pins(const FeSystem& fe) {
  const Mesh& mp = *fe.mp;
  std::vector<char> on_iface(mp.n_vertices(), 0), on_ess(mp.n_vertices(), 0);
  for (int e = 0; e < mp.n_edges(); ++e) {
    if (mp.edge_tag[e] == "interface")
      for (int v : mp.edges[e]) on_iface[v] = 1;
    else if (mp.edge_tri[e][1] < 0 && fe.ess_sigp[FeSystem::sdof(e, 0, 0)])
      for (int v : mp.edges[e]) on_ess[v] = 1;
  }
  std::vector<int> out;
  for (int v = 0; v < mp.n_vertices(); ++v)
    if (on_iface[v] && on_ess[v]) out.push_back(v);
  return out;
}

}  // namespace detail

struct InitialData {
  ScalFunT p_p0 = [](const Vec2&, double) { return 0.0; };     // initial pore pressure
  VecFunT theta0 = [](const Vec2&, double) { return Vec2::Zero().eval(); };  // u_s(0) on Gamma
  ScalFunT div_up0 = [](const Vec2&, double) { return 0.0; };  // div u_p(0)
};

// Steps 1-4 of the construction.  The boundary data in `pd` is evaluated at
// t = 0 for both the natural terms and the essential DOF values.
inline SolutionState construct_initial_state(const FeSystem& fe, const Coefficients& co,
                                             const Blocks& bl, const ProblemData& pd,
                                             const InitialData& id) {
  const Rhs r0 = compute_rhs(fe, co, pd, 0.0);
  const EssentialValues ev = essential_values(fe, pd, 0.0);

  // Elasticity solve with a fallback for interface/boundary junction corners:
  // pin rotation-multiplier DOFs there one at a time until the system is
  // nonsingular (each pin drops one redundant constraint row).
  auto solve_elast = [&fe](const SpMat& M, const Vec& rhs, std::vector<int> cons, Vec lift,
                           int rho_off, const char* what) {
    try {
      return detail::solve_pinned(M, rhs, cons, lift, what);
    } catch (const SolverError&) {
      const std::vector<int> pins = detail::junction_rho_pins(fe);
      if (pins.empty()) throw;
      for (size_t k = 0; k < pins.size(); ++k) {
        cons.push_back(rho_off + pins[k]);
        try {
          return detail::solve_pinned(M, rhs, cons, lift, what);
        } catch (const SolverError&) {
          if (k + 1 == pins.size()) throw;
        }
      }
      throw;  // unreachable
    }
  };

  // Step 1: theta_0 = interface L2 projection of the initial structure
  // velocity.
  const Vec th0 = trace_l2_projection(fe, false, id.theta0, 0.0);

  // Step 2: coupled Stokes--Darcy problem over (sigf, up, phi, lam, uf, gf, pp)
  // with theta_0 as data.
  const int o_sf = 0, o_up = o_sf + fe.n_sigf, o_ph = o_up + fe.n_up,
            o_lm = o_ph + fe.n_phi, o_uf = o_lm + fe.n_lam, o_gf = o_uf + fe.n_uf,
            o_pp = o_gf + fe.n_gf;
  const int n_sd = o_pp + fe.n_pp;
  std::vector<Triplet> tr;
  detail::add_block(tr, bl.Af, o_sf, o_sf);
  detail::add_block(tr, bl.Bnf, o_ph, o_sf, -1.0, true);
  detail::add_block(tr, bl.Bf, o_uf, o_sf, 1.0, true);
  detail::add_block(tr, bl.Bskf, o_gf, o_sf, 1.0, true);
  detail::add_block(tr, bl.Ap, o_up, o_up);
  detail::add_block(tr, bl.Bgam, o_lm, o_up, 1.0, true);
  detail::add_block(tr, bl.Bp, o_pp, o_up, 1.0, true);
  detail::add_block(tr, bl.Bnf, o_ph, o_sf);
  detail::add_block(tr, bl.Pff, o_ph, o_ph);
  detail::add_block(tr, bl.Cf, o_ph, o_lm);
  detail::add_block(tr, bl.Bgam, o_lm, o_up, -1.0);
  detail::add_block(tr, bl.Cf, o_ph, o_lm, -1.0, true);
  detail::add_block(tr, bl.Bf, o_uf, o_sf, -1.0);
  detail::add_block(tr, bl.Bskf, o_gf, o_sf, -1.0);
  detail::add_block(tr, bl.Bp, o_pp, o_up, -1.0);
  SpMat Msd(n_sd, n_sd);
  Msd.setFromTriplets(tr.begin(), tr.end());

  Vec rhs = Vec::Zero(n_sd);
  rhs.segment(o_sf, fe.n_sigf) = r0.sigf;
  rhs.segment(o_up, fe.n_up) = r0.up;
  rhs.segment(o_ph, fe.n_phi) = r0.phi + bl.Pft * th0;
  rhs.segment(o_lm, fe.n_lam) = r0.lam + bl.Cp.transpose() * th0;
  rhs.segment(o_uf, fe.n_uf) = r0.uf;
  rhs.segment(o_gf, fe.n_gf) = r0.gf;
  {  // -b_p(u_p0, w) = (div u_p0, w)
    const QuadRuleTri rule = gauss_tri(4);
    for (int tt = 0; tt < fe.mp->n_tris(); ++tt) {
      const TriMap map(*fe.mp, tt);
      for (size_t q = 0; q < rule.pts.size(); ++q)
        rhs[o_pp + tt] += rule.w[q] * map.detJ * id.div_up0(map.to_phys(rule.pts[q]), 0.0);
    }
  }
  std::vector<int> cons;
  Vec lift = Vec::Zero(n_sd);
  for (int i = 0; i < fe.n_sigf; ++i)
    if (fe.ess_sigf[i]) {
      cons.push_back(o_sf + i);
      lift[o_sf + i] = ev.sigf[i];
    }
  for (int i = 0; i < fe.n_up; ++i)
    if (fe.ess_up[i]) {
      cons.push_back(o_up + i);
      lift[o_up + i] = ev.up[i];
    }
  const Vec y = detail::solve_pinned(Msd, rhs, cons, lift, "Stokes-Darcy");
  const Vec sigf0 = y.segment(o_sf, fe.n_sigf), up0 = y.segment(o_up, fe.n_up);
  const Vec phi0 = y.segment(o_ph, fe.n_phi), lam0 = y.segment(o_lm, fe.n_lam);
  const Vec uf0 = y.segment(o_uf, fe.n_uf), gf0 = y.segment(o_gf, fe.n_gf);
  const Vec pp0 = y.segment(o_pp, fe.n_pp);

  // Step 3: mixed elasticity for (sigp, omega, eta, rho); the pressure and
  // interface unknowns from step 2 enter as data.
  const int e_sp = 0, e_om = fe.n_sigp, e_et = e_om + fe.n_th, e_ro = e_et + fe.n_us;
  const int n_el = e_ro + fe.n_gp;
  tr.clear();
  detail::add_block(tr, bl.Ess, e_sp, e_sp);
  detail::add_block(tr, bl.Bnp, e_om, e_sp, -1.0, true);
  detail::add_block(tr, bl.Bs, e_et, e_sp, 1.0, true);
  detail::add_block(tr, bl.Bskp, e_ro, e_sp, 1.0, true);
  detail::add_block(tr, bl.Bnp, e_om, e_sp);
  detail::add_block(tr, bl.Bs, e_et, e_sp, -1.0);
  detail::add_block(tr, bl.Bskp, e_ro, e_sp, -1.0);
  SpMat Mel(n_el, n_el);
  Mel.setFromTriplets(tr.begin(), tr.end());
  Vec rel = Vec::Zero(n_el);
  rel.segment(e_sp, fe.n_sigp) = r0.sigp - bl.Esp * pp0;
  rel.segment(e_om, fe.n_th) = bl.Pft.transpose() * phi0 - bl.Ptt * th0 - bl.Cp * lam0;
  rel.segment(e_et, fe.n_us) = r0.us;
  std::vector<int> ec;
  Vec el = Vec::Zero(n_el);
  for (int i = 0; i < fe.n_sigp; ++i)
    if (fe.ess_sigp[i]) {
      ec.push_back(e_sp + i);
      el[e_sp + i] = ev.sigp[i];
    }
  const Vec z = solve_elast(Mel, rel, ec, el, e_ro, "initial elasticity");
  const Vec sigp0 = z.segment(e_sp, fe.n_sigp);
  const Vec eta0 = z.segment(e_et, fe.n_us);

  // Step 4: auxiliary elasticity solve for (u_s0, gamma_p0); the stress
  // unknown is discarded.
  const int a_sp = 0, a_us = fe.n_sigp, a_gp = a_us + fe.n_us;
  const int n_ax = a_gp + fe.n_gp;
  tr.clear();
  detail::add_block(tr, bl.Ess, a_sp, a_sp);
  detail::add_block(tr, bl.Bs, a_us, a_sp, 1.0, true);
  detail::add_block(tr, bl.Bskp, a_gp, a_sp, 1.0, true);
  detail::add_block(tr, bl.Bs, a_us, a_sp, -1.0);
  detail::add_block(tr, bl.Bskp, a_gp, a_sp, -1.0);
  SpMat Max(n_ax, n_ax);
  Max.setFromTriplets(tr.begin(), tr.end());
  Vec rax = Vec::Zero(n_ax);
  rax.segment(a_sp, fe.n_sigp) = bl.Bnp.transpose() * th0;
  std::vector<int> ac;
  for (int i = 0; i < fe.n_sigp; ++i)
    if (fe.ess_sigp[i]) ac.push_back(a_sp + i);
  const Vec w = solve_elast(Max, rax, ac, Vec::Zero(n_ax), a_gp, "auxiliary elasticity");
  const Vec us0 = w.segment(a_us, fe.n_us);
  const Vec gp0 = w.segment(a_gp, fe.n_gp);

  SolutionState s = SolutionState::zero(fe);
  s.t = 0.0;
  s.x.segment(fe.off_sigf, fe.n_sigf) = sigf0;
  s.x.segment(fe.off_up, fe.n_up) = up0;
  s.x.segment(fe.off_sigp, fe.n_sigp) = sigp0;
  s.x.segment(fe.off_pp, fe.n_pp) = pp0;
  s.x.segment(fe.off_phi, fe.n_phi) = phi0;
  s.x.segment(fe.off_th, fe.n_th) = th0;
  s.x.segment(fe.off_lam, fe.n_lam) = lam0;
  s.x.segment(fe.off_uf, fe.n_uf) = uf0;
  s.x.segment(fe.off_us, fe.n_us) = us0;
  s.x.segment(fe.off_gf, fe.n_gf) = gf0;
  s.x.segment(fe.off_gp, fe.n_gp) = gp0;
  s.eta = eta0;
  s.pf = postprocess_pf(fe, co, sigf0, pd.q_f, 0.0);
  return s;
}

// ---------------------------------------------------------------------------
// Stepper
// ---------------------------------------------------------------------------
enum class Path { monolithic, reduced };

struct Stepper {
  const FeSystem* fe = nullptr;
  Coefficients co;
  Blocks bl;
  double dt = 0.0;
  Path path = Path::reduced;
  int factorizations = 0;  // must stay at 1 for a constant-dt run

  std::optional<MonolithicSolver> mono;
  std::optional<ReducedSolver> red;

  Stepper(const FeSystem& fe_, const Coefficients& co_, QuadMode mode, double dt_, Path p)
      : fe(&fe_), co(co_), bl(assemble_blocks(fe_, co_, mode)), dt(dt_), path(p) {
    if (path == Path::monolithic)
      mono.emplace(*fe, bl, dt);
    else
      red.emplace(*fe, bl, dt);
    factorizations = 1;
  }

  // Adds the backward-Euler history terms of the previous state to the RHS.
  void add_history(Rhs& r, const SolutionState& prev) const {
    const Vec sigp = prev.x.segment(fe->off_sigp, fe->n_sigp);
    const Vec pp = prev.x.segment(fe->off_pp, fe->n_pp);
    r.sigp += (bl.Ess * sigp + bl.Esp * pp) / dt;
    r.pp += (bl.Esp.transpose() * sigp + (bl.epp + bl.ms0).cwiseProduct(pp)) / dt;
  }

  SolutionState step(const SolutionState& prev, const ProblemData& pd, double t_next) const {
    Rhs r = compute_rhs(*fe, co, pd, t_next);
    add_history(r, prev);
    const EssentialValues ev = essential_values(*fe, pd, t_next);
    SolutionState s;
    s.t = t_next;
    try {
      s.x = path == Path::monolithic ? mono->solve(r.global(*fe), ev, *fe) : red->solve(r, ev);
    } catch (const SolverError& err) {
      throw SolverError(std::string(err.what()) + " at t = " + std::to_string(t_next));
    }
    s.eta = prev.eta + dt * s.x.segment(fe->off_us, fe->n_us);
    s.pf = postprocess_pf(*fe, co, s.x.segment(fe->off_sigf, fe->n_sigf), pd.q_f, t_next);
    return s;
  }
};

// Runs the full transient and returns all states, initial state first.
inline std::vector<SolutionState> run_transient(Stepper& st, const TimeGrid& grid,
                                                const ProblemData& pd,
                                                const SolutionState& init) {
  std::vector<SolutionState> out;
  out.reserve(grid.M + 1);
  out.push_back(init);
  for (int m = 1; m <= grid.M; ++m) out.push_back(st.step(out.back(), pd, m * grid.dt));
  return out;
}

}  // namespace sbfem
