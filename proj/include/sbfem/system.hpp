#ifndef SBFEM_SYSTEM_HPP
#define SBFEM_SYSTEM_HPP

// Problem data (loads + boundary data closures), right-hand-side assembly,
// essential boundary values, and the monolithic eleven-field system with
// symmetric constraint application and a direct solver.
//
// Variational rows (block signs; see forms.hpp for the stored pairings):
//   sigf:  Af sigf - Bnf^T phi + Bf^T uf + Bskf^T gf            = F_sigf
//   up:    Ap up + Bp^T pp + Bgam^T lam                         = F_up
//   sigp:  (1/dt)(Ess sigp + Esp pp) - Bnp^T th + Bs^T us
//            + Bskp^T gp                                        = F_sigp + history
//   pp:    -Bp up + (1/dt)(Esp^T sigp + (Epp + Ms0) pp)         = F_pp + history
//   phi:   +Bnf sigf + Pff phi - Pft th + Cf lam                = 0
//   th:    +Bnp sigp - Pft^T phi + Ptt th + Cp lam              = 0
//   lam:   -Bgam up - Cf^T phi - Cp^T th                        = 0
//   uf:    -Bf sigf                                             = F_uf
//   us:    -Bs sigp                                             = F_us
//   gf:    -Bskf sigf                                           = 0
//   gp:    -Bskp sigp                                           = 0
//
// The symmetric part of the matrix is positive semidefinite (compliance and
// BJS terms), the rest is skew; this is what makes the scheme stable.

#include <Eigen/SparseLU>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sbfem/forms.hpp"

namespace sbfem {

using VecFunT = std::function<Vec2(const Vec2&, double)>;
using ScalFunT = std::function<double(const Vec2&, double)>;

// ---------------------------------------------------------------------------
// ProblemData
// ---------------------------------------------------------------------------
//
// Boundary maps are keyed by boundary label; every label must carry data
// matching the BC kind declared in BcSpec (missing entries mean zero data).
struct ProblemData {
  VecFunT f_f = [](const Vec2&, double) { return Vec2::Zero().eval(); };
  VecFunT f_p = [](const Vec2&, double) { return Vec2::Zero().eval(); };
  ScalFunT q_f = [](const Vec2&, double) { return 0.0; };
  ScalFunT q_p = [](const Vec2&, double) { return 0.0; };

  std::map<std::string, VecFunT> fluid_velocity;        // natural: u_f = data
  std::map<std::string, VecFunT> fluid_traction;        // essential: sigma_f n_out = data
  std::map<std::string, ScalFunT> fluid_traction_normal;  // essential: (sigma_f n).n = data
  std::map<std::string, ScalFunT> darcy_pressure;       // natural: p_p = data
  std::map<std::string, ScalFunT> darcy_flux;           // essential: u_p . n_out = data
  std::map<std::string, VecFunT> elas_displacement;     // natural: d/dt eta_p = data
  std::map<std::string, VecFunT> elas_traction;         // essential: sigma_p n_out = data
};

// ---------------------------------------------------------------------------
// Right-hand side
// ---------------------------------------------------------------------------
struct Rhs {
  Vec sigf, up, sigp, pp, phi, th, lam, uf, us, gf, gp;

  static Rhs zero(const FeSystem& fe) {
    Rhs r;
    r.sigf = Vec::Zero(fe.n_sigf);
    r.up = Vec::Zero(fe.n_up);
    r.sigp = Vec::Zero(fe.n_sigp);
    r.pp = Vec::Zero(fe.n_pp);
    r.phi = Vec::Zero(fe.n_phi);
    r.th = Vec::Zero(fe.n_th);
    r.lam = Vec::Zero(fe.n_lam);
    r.uf = Vec::Zero(fe.n_uf);
    r.us = Vec::Zero(fe.n_us);
    r.gf = Vec::Zero(fe.n_gf);
    r.gp = Vec::Zero(fe.n_gp);
    return r;
  }

  Vec global(const FeSystem& fe) const {
    Vec g(fe.total);
    g.segment(fe.off_sigf, fe.n_sigf) = sigf;
    g.segment(fe.off_up, fe.n_up) = up;
    g.segment(fe.off_sigp, fe.n_sigp) = sigp;
    g.segment(fe.off_pp, fe.n_pp) = pp;
    g.segment(fe.off_phi, fe.n_phi) = phi;
    g.segment(fe.off_th, fe.n_th) = th;
    g.segment(fe.off_lam, fe.n_lam) = lam;
    g.segment(fe.off_uf, fe.n_uf) = uf;
    g.segment(fe.off_us, fe.n_us) = us;
    g.segment(fe.off_gf, fe.n_gf) = gf;
    g.segment(fe.off_gp, fe.n_gp) = gp;
    return g;
  }
};

namespace detail {

// Integral over boundary edge e of the test DOF's normal-trace factor against
// data: for BDM1 DOF (e, k), (v . n_e)(s) = N_k(s)/|e| on the edge, so the
// boundary pairing <v . n_out, d> contributes (n_e . n_out) int N_k d ds.
template <class F>
inline double edge_moment(const Mesh& m, int e, int k, const F& data) {
  static const QuadRuleSeg rule = gauss_seg(6);
  const Vec2 a = m.vertices[m.edges[e][0]], b = m.vertices[m.edges[e][1]];
  double s = 0.0;
  for (size_t q = 0; q < rule.pts.size(); ++q) {
    const double xi = rule.pts[q];
    const double nk = (k == 0) ? 1.0 - xi : xi;
    s += rule.w[q] * nk * data(a + xi * (b - a));
  }
  return s;
}

}  // namespace detail

// Volume loads plus natural boundary terms at time t.  The history terms of
// the time discretization are added by the stepper.
inline Rhs compute_rhs(const FeSystem& fe, const Coefficients& co, const ProblemData& pd,
                       double t) {
  const Mesh& mf = *fe.mf;
  const Mesh& mp = *fe.mp;
  Rhs r = Rhs::zero(fe);
  const QuadRuleTri rule = gauss_tri(4);

  // (f_f, v), (f_p, v), (q_p, w) and the compressibility correction
  // -(1/2)(q_f, tr tau) in the fluid stress row.
  for (int tt = 0; tt < mf.n_tris(); ++tt) {
    const TriMap map(mf, tt);
    const ElementBasis eb = build_element_basis(mf, tt);
    for (size_t q = 0; q < rule.pts.size(); ++q) {
      const Vec2 p = map.to_phys(rule.pts[q]);
      const double wq = rule.w[q] * map.detJ;
      const Vec2 fv = pd.f_f(p, t);
      r.uf[2 * tt] += wq * fv.x();
      r.uf[2 * tt + 1] += wq * fv.y();
      const double qf = pd.q_f(p, t);
      if (qf != 0.0)
        for (int j = 0; j < 12; ++j) {
          const int rr = j / 6, b = j % 6;
          r.sigf[detail::local_sdof(mf, tt, j)] -= 0.5 * wq * qf * eb.eval(b, p)[rr];
        }
    }
  }
  for (int tt = 0; tt < mp.n_tris(); ++tt) {
    const TriMap map(mp, tt);
    for (size_t q = 0; q < rule.pts.size(); ++q) {
      const Vec2 p = map.to_phys(rule.pts[q]);
      const double wq = rule.w[q] * map.detJ;
      const Vec2 fv = pd.f_p(p, t);
      r.us[2 * tt] += wq * fv.x();
      r.us[2 * tt + 1] += wq * fv.y();
      r.pp[tt] += wq * pd.q_p(p, t);
    }
  }

  // Natural boundary terms.
  for (int e = 0; e < mf.n_edges(); ++e) {
    if (mf.edge_tri[e][1] >= 0 || mf.edge_tag[e] == "interface") continue;
    auto it = pd.fluid_velocity.find(mf.edge_tag[e]);
    if (it == pd.fluid_velocity.end()) continue;
    const Vec2 nout = mf.outward_normal(mf.edge_tri[e][0], e);
    const double sgn = mf.edge_normal[e].dot(nout);
    for (int k = 0; k < 2; ++k)
      for (int rr = 0; rr < 2; ++rr)
        r.sigf[FeSystem::sdof(e, rr, k)] += sgn * detail::edge_moment(
            mf, e, k, [&](const Vec2& p) { return it->second(p, t)[rr]; });
  }
  for (int e = 0; e < mp.n_edges(); ++e) {
    if (mp.edge_tri[e][1] >= 0 || mp.edge_tag[e] == "interface") continue;
    const Vec2 nout = mp.outward_normal(mp.edge_tri[e][0], e);
    const double sgn = mp.edge_normal[e].dot(nout);
    auto itp = pd.darcy_pressure.find(mp.edge_tag[e]);
    if (itp != pd.darcy_pressure.end())
      for (int k = 0; k < 2; ++k)
        r.up[FeSystem::vdof(e, k)] -= sgn * detail::edge_moment(
            mp, e, k, [&](const Vec2& p) { return itp->second(p, t); });
    auto itu = pd.elas_displacement.find(mp.edge_tag[e]);
    if (itu != pd.elas_displacement.end())
      for (int k = 0; k < 2; ++k)
        for (int rr = 0; rr < 2; ++rr)
          r.sigp[FeSystem::sdof(e, rr, k)] += sgn * detail::edge_moment(
              mp, e, k, [&](const Vec2& p) { return itu->second(p, t)[rr]; });
  }
  return r;
}

// ---------------------------------------------------------------------------
// Essential boundary values
// ---------------------------------------------------------------------------
//
// Full-length vectors holding the prescribed DOF values on constrained DOFs
// and zero elsewhere.  DOF values follow the interpolation functionals:
// |e| * row_r(sigma^D) . n_e at the edge endpoints.
struct EssentialValues {
  Vec sigf, up, sigp;

  Vec global(const FeSystem& fe) const {
    Vec g = Vec::Zero(fe.total);
    g.segment(fe.off_sigf, fe.n_sigf) = sigf;
    g.segment(fe.off_up, fe.n_up) = up;
    g.segment(fe.off_sigp, fe.n_sigp) = sigp;
    return g;
  }
};

inline EssentialValues essential_values(const FeSystem& fe, const ProblemData& pd, double t) {
  const Mesh& mf = *fe.mf;
  const Mesh& mp = *fe.mp;
  EssentialValues ev;
  ev.sigf = Vec::Zero(fe.n_sigf);
  ev.up = Vec::Zero(fe.n_up);
  ev.sigp = Vec::Zero(fe.n_sigp);

  for (int e = 0; e < mf.n_edges(); ++e) {
    if (mf.edge_tri[e][1] >= 0 || mf.edge_tag[e] == "interface") continue;
    const auto kind = fe.bc.fluid.at(mf.edge_tag[e]);
    const Vec2 nout = mf.outward_normal(mf.edge_tri[e][0], e);
    const double sgn = mf.edge_normal[e].dot(nout);
    if (kind == FluidBc::traction) {
      auto it = pd.fluid_traction.find(mf.edge_tag[e]);
      for (int k = 0; k < 2; ++k) {
        const Vec2 p = mf.vertices[mf.edges[e][k]];
        const Vec2 g = (it == pd.fluid_traction.end()) ? Vec2::Zero().eval() : it->second(p, t);
        for (int rr = 0; rr < 2; ++rr)
          ev.sigf[FeSystem::sdof(e, rr, k)] = mf.edge_len[e] * sgn * g[rr];
      }
    } else if (kind == FluidBc::traction_normal_noslip) {
      auto it = pd.fluid_traction_normal.find(mf.edge_tag[e]);
      const int a = std::abs(mf.edge_normal[e].x()) > 0.5 ? 0 : 1;
      for (int k = 0; k < 2; ++k) {
        const Vec2 p = mf.vertices[mf.edges[e][k]];
        const double g = (it == pd.fluid_traction_normal.end()) ? 0.0 : it->second(p, t);
        ev.sigf[FeSystem::sdof(e, a, k)] = mf.edge_len[e] * mf.edge_normal[e][a] * g;
      }
    }
  }
  for (int e = 0; e < mp.n_edges(); ++e) {
    if (mp.edge_tri[e][1] >= 0 || mp.edge_tag[e] == "interface") continue;
    const Vec2 nout = mp.outward_normal(mp.edge_tri[e][0], e);
    const double sgn = mp.edge_normal[e].dot(nout);
    if (fe.bc.darcy.at(mp.edge_tag[e]) == DarcyBc::flux) {
      auto it = pd.darcy_flux.find(mp.edge_tag[e]);
      for (int k = 0; k < 2; ++k) {
        const Vec2 p = mp.vertices[mp.edges[e][k]];
        const double g = (it == pd.darcy_flux.end()) ? 0.0 : it->second(p, t);
        ev.up[FeSystem::vdof(e, k)] = mp.edge_len[e] * sgn * g;
      }
    }
    if (fe.bc.elas.at(mp.edge_tag[e]) == ElasBc::traction) {
      auto it = pd.elas_traction.find(mp.edge_tag[e]);
      for (int k = 0; k < 2; ++k) {
        const Vec2 p = mp.vertices[mp.edges[e][k]];
        const Vec2 g = (it == pd.elas_traction.end()) ? Vec2::Zero().eval() : it->second(p, t);
        for (int rr = 0; rr < 2; ++rr)
          ev.sigp[FeSystem::sdof(e, rr, k)] = mp.edge_len[e] * sgn * g[rr];
      }
    }
  }
  return ev;
}

inline std::vector<int> constrained_dofs(const FeSystem& fe) {
  std::vector<int> cons;
  for (int i = 0; i < fe.n_sigf; ++i)
    if (fe.ess_sigf[i]) cons.push_back(fe.off_sigf + i);
  for (int i = 0; i < fe.n_up; ++i)
    if (fe.ess_up[i]) cons.push_back(fe.off_up + i);
  for (int i = 0; i < fe.n_sigp; ++i)
    if (fe.ess_sigp[i]) cons.push_back(fe.off_sigp + i);
  return cons;
}

// ---------------------------------------------------------------------------
// Monolithic assembly
// ---------------------------------------------------------------------------
namespace detail {

inline void add_block(std::vector<Triplet>& tr, const SpMat& M, int row_off, int col_off,
                      double scale = 1.0, bool transpose = false) {
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it) {
      if (transpose)
        tr.emplace_back(col_off + static_cast<int>(it.col()),
                        row_off + static_cast<int>(it.row()), scale * it.value());
      else
        tr.emplace_back(row_off + static_cast<int>(it.row()),
                        col_off + static_cast<int>(it.col()), scale * it.value());
    }
}

}  // namespace detail

// Unconstrained matrix of one backward-Euler step (time-independent, so it is
// assembled and factorized once).
inline SpMat assemble_monolithic(const FeSystem& fe, const Blocks& bl, double dt) {
  if (!(dt > 0.0)) throw ConfigError("assemble_monolithic: dt must be positive");
  std::vector<Triplet> tr;
  using detail::add_block;
  // sigf row
  add_block(tr, bl.Af, fe.off_sigf, fe.off_sigf);
  add_block(tr, bl.Bnf, fe.off_phi, fe.off_sigf, -1.0, true);
  add_block(tr, bl.Bf, fe.off_uf, fe.off_sigf, 1.0, true);
  add_block(tr, bl.Bskf, fe.off_gf, fe.off_sigf, 1.0, true);
  // up row
  add_block(tr, bl.Ap, fe.off_up, fe.off_up);
  add_block(tr, bl.Bp, fe.off_pp, fe.off_up, 1.0, true);
  add_block(tr, bl.Bgam, fe.off_lam, fe.off_up, 1.0, true);
  // sigp row
  add_block(tr, bl.Ess, fe.off_sigp, fe.off_sigp, 1.0 / dt);
  add_block(tr, bl.Esp, fe.off_sigp, fe.off_pp, 1.0 / dt);
  add_block(tr, bl.Bnp, fe.off_th, fe.off_sigp, -1.0, true);
  add_block(tr, bl.Bs, fe.off_us, fe.off_sigp, 1.0, true);
  add_block(tr, bl.Bskp, fe.off_gp, fe.off_sigp, 1.0, true);
  // pp row
  add_block(tr, bl.Bp, fe.off_pp, fe.off_up, -1.0);
  add_block(tr, bl.Esp, fe.off_sigp, fe.off_pp, 1.0 / dt, true);
  for (int i = 0; i < fe.n_pp; ++i)
    tr.emplace_back(fe.off_pp + i, fe.off_pp + i, (bl.epp[i] + bl.ms0[i]) / dt);
  // phi row
  add_block(tr, bl.Bnf, fe.off_phi, fe.off_sigf, 1.0);
  add_block(tr, bl.Pff, fe.off_phi, fe.off_phi);
  add_block(tr, bl.Pft, fe.off_phi, fe.off_th, -1.0);
  add_block(tr, bl.Cf, fe.off_phi, fe.off_lam);
  // th row
  add_block(tr, bl.Bnp, fe.off_th, fe.off_sigp, 1.0);
  add_block(tr, bl.Pft, fe.off_phi, fe.off_th, -1.0, true);
  add_block(tr, bl.Ptt, fe.off_th, fe.off_th);
  add_block(tr, bl.Cp, fe.off_th, fe.off_lam);
  // lam row
  add_block(tr, bl.Bgam, fe.off_lam, fe.off_up, -1.0);
  add_block(tr, bl.Cf, fe.off_phi, fe.off_lam, -1.0, true);
  add_block(tr, bl.Cp, fe.off_th, fe.off_lam, -1.0, true);
  // uf, us, gf, gp rows
  add_block(tr, bl.Bf, fe.off_uf, fe.off_sigf, -1.0);
  add_block(tr, bl.Bs, fe.off_us, fe.off_sigp, -1.0);
  add_block(tr, bl.Bskf, fe.off_gf, fe.off_sigf, -1.0);
  add_block(tr, bl.Bskp, fe.off_gp, fe.off_sigp, -1.0);

  SpMat M(fe.total, fe.total);
  M.setFromTriplets(tr.begin(), tr.end());
  return M;
}

// Symmetric constraint application: clear constrained rows and columns and
// put 1 on their diagonal.  The column contributions are moved to the
// right-hand side per step (see constrain_rhs), so the factorization of the
// constrained matrix is reused even with time-dependent boundary data.
inline SpMat apply_constraints(const SpMat& M0, const std::vector<int>& cons) {
  std::vector<unsigned char> is_cons(M0.rows(), 0);
  for (int c : cons) is_cons[c] = 1;
  std::vector<Triplet> tr;
  for (int k = 0; k < M0.outerSize(); ++k)
    for (SpMat::InnerIterator it(M0, k); it; ++it)
      if (!is_cons[it.row()] && !is_cons[it.col()])
        tr.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int c : cons) tr.emplace_back(c, c, 1.0);
  SpMat M(M0.rows(), M0.cols());
  M.setFromTriplets(tr.begin(), tr.end());
  return M;
}

// rhs_bc = rhs - M0 * lift on free rows; prescribed values on constrained rows.
inline Vec constrain_rhs(const SpMat& M0, const std::vector<int>& cons, const Vec& rhs,
                         const Vec& ess_global) {
  Vec out = rhs - M0 * ess_global;
  for (int c : cons) out[c] = ess_global[c];
  return out;
}

// ---------------------------------------------------------------------------
// Direct solver wrapper for one time-step matrix
// ---------------------------------------------------------------------------
struct MonolithicSolver {
  SpMat M0, Mbc;
  std::vector<int> cons;
  Eigen::SparseLU<SpMat> lu;

  MonolithicSolver(const FeSystem& fe, const Blocks& bl, double dt) {
    M0 = assemble_monolithic(fe, bl, dt);
    cons = constrained_dofs(fe);
    Mbc = apply_constraints(M0, cons);
    lu.compute(Mbc);
    if (lu.info() != Eigen::Success)
      throw SolverError("monolithic factorization failed");
  }

  // Solve with natural RHS `rhs` (global layout) and essential values `ess`.
  Vec solve(const Vec& rhs, const EssentialValues& ess, const FeSystem& fe) const {
    const Vec b = constrain_rhs(M0, cons, rhs, ess.global(fe));
    Vec x = lu.solve(b);
    if (lu.info() != Eigen::Success) throw SolverError("monolithic solve failed");
    return x;
  }
};

}  // namespace sbfem

#endif  // SBFEM_SYSTEM_HPP
