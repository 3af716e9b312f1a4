#ifndef SBFEM_FORMS_HPP
#define SBFEM_FORMS_HPP

// Bilinear-form assembly: the fluid/Darcy/elasticity volume forms (either
// exactly integrated or with the vertex quadrature rule that enables the
// cell-centered reduction), the weak-symmetry pairings, and all interface
// pairings on the 1D intersection mesh.
//
// Sign conventions: every block stores the *positive* pairing written in its
// comment; the system assembly applies the signs of the variational rows.

#include <vector>

#include "sbfem/elements.hpp"
#include "sbfem/geometry.hpp"
#include "sbfem/quadrature.hpp"

namespace sbfem {

enum class QuadMode { exact, vertex };

// ---------------------------------------------------------------------------
// Coefficients
// ---------------------------------------------------------------------------
struct Coefficients {
  double mu = 1.0;        // fluid viscosity
  double mu_p = 1.0;      // Lame shear modulus
  double lam_p = 1.0;     // Lame first parameter
  double alpha_p = 1.0;   // Biot-Willis constant
  double s0 = 1.0;        // mass storativity
  double alpha_bjs = 1.0; // Beavers-Joseph-Saffman friction
  TensFun K = [](const Vec2&) { return Mat2::Identity().eval(); };  // permeability

  void validate() const {
    if (!(mu > 0.0)) throw ConfigError("coefficients: mu must be positive");
    if (!(mu_p > 0.0)) throw ConfigError("coefficients: mu_p must be positive");
    if (!(lam_p >= 0.0)) throw ConfigError("coefficients: lam_p must be nonnegative");
    if (!(alpha_p > 0.0 && alpha_p <= 1.0)) throw ConfigError("coefficients: alpha_p in (0,1]");
    if (!(s0 > 0.0)) throw ConfigError("coefficients: s0 must be positive");
    if (!(alpha_bjs >= 0.0)) throw ConfigError("coefficients: alpha_bjs must be nonnegative");
  }
};

// Deviatoric part in 2D.
inline Mat2 dev(const Mat2& M) { return M - 0.5 * M.trace() * Mat2::Identity(); }

// Elasticity compliance A and its inverse (2D):
//   A(M)      = (1/2mu_p) (M - lam_p/(2mu_p + 2lam_p) tr(M) I)
//   A^{-1}(M) = 2mu_p M + lam_p tr(M) I
inline Mat2 compliance(const Mat2& M, double mu_p, double lam_p) {
  return (M - lam_p / (2.0 * mu_p + 2.0 * lam_p) * M.trace() * Mat2::Identity()) / (2.0 * mu_p);
}
inline Mat2 compliance_inv(const Mat2& M, double mu_p, double lam_p) {
  return 2.0 * mu_p * M + lam_p * M.trace() * Mat2::Identity();
}

// ---------------------------------------------------------------------------
// Blocks
// ---------------------------------------------------------------------------
//
// Stress spaces use row-tensors: DOF sdof(e,r,k) is the tensor whose row r is
// the BDM1 vector basis of (e,k) and whose other row vanishes.
struct Blocks {
  QuadMode mode = QuadMode::vertex;
  SpMat Af;    // n_sigf x n_sigf : (1/2mu)(sigma^d, tau^d)
  SpMat Ap;    // n_up   x n_up   : (mu K^{-1} u, v)
  SpMat Ess;   // n_sigp x n_sigp : (A sigma, tau)
  SpMat Esp;   // n_sigp x n_pp   : alpha_p (A(w I), tau)
  Vec epp;     // n_pp diagonal   : alpha_p^2 (A(w I), w' I) per element
  Vec ms0;     // n_pp diagonal   : s0 |E|
  SpMat Bf;    // n_uf x n_sigf   : (div tau, v)
  SpMat Bs;    // n_us x n_sigp   : (div tau, v)
  SpMat Bp;    // n_pp x n_up     : -(div v, w)
  SpMat Bskf;  // n_gf x n_sigf   : (tau, chi(g)) = int g (tau_12 - tau_21)
  SpMat Bskp;  // n_gp x n_sigp
  SpMat Bnf;   // n_phi x n_sigf  : <tau n_f, psi>
  SpMat Bnp;   // n_th  x n_sigp  : <tau n_p, psi>
  SpMat Bgam;  // n_lam x n_up    : <v . n_p, xi>
  SpMat Pff;   // n_phi x n_phi   : mu a_bjs <K1^{-1/2} psi.t, phi.t>
  SpMat Pft;   // n_phi x n_th
  SpMat Ptt;   // n_th  x n_th
  SpMat Cf;    // n_phi x n_lam   : <psi . n_f, xi>
  SpMat Cp;    // n_th  x n_lam   : <psi . n_p, xi>
};

namespace detail {

struct TriRule {
  std::vector<Vec2> ref;   // reference points
  std::vector<double> w;   // reference weights (sum 1/2)
};

inline TriRule tri_rule(QuadMode mode, int exact_degree = 4) {
  TriRule r;
  if (mode == QuadMode::vertex) {
    r.ref = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    r.w = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
  } else {
    QuadRuleTri g = gauss_tri(exact_degree);
    r.ref = g.pts;
    r.w = g.w;
  }
  return r;
}

// Local stress DOF -> (row, global sdof); j in [0,12).
inline int local_sdof(const Mesh& m, int t, int j) {
  const int r = j / 6, b = j % 6;
  const int e = m.tri_edge[t][b / 2];
  return FeSystem::sdof(e, r, b % 2);
}
inline int local_vdof(const Mesh& m, int t, int j) {
  const int e = m.tri_edge[t][j / 2];
  return FeSystem::vdof(e, j % 2);
}

// Zero out basis functions whose DOF vertex is not local vertex k.  They
// vanish there analytically; enforcing it exactly keeps the vertex-quadrature
// blocks free of ~1e-17 roundoff couplings that would break their structure.
inline void mask_nonvertex(const Mesh& m, int t, int k, std::array<Vec2, 6>& v) {
  for (int b = 0; b < 6; ++b)
    if (m.edges[m.tri_edge[t][b / 2]][b % 2] != m.tris[t][k]) v[b].setZero();
}

// Linear normal-trace factor of BDM1 DOF (e, k) at running coordinate s on an
// axis-aligned interface edge, with respect to a prescribed unit normal n:
//   (v . n)(s) = (n_e . n)/|e| * N_k(s).
inline double edge_trace(const Mesh& m, int e, int k, double s, const Vec2& n,
                         const InterfaceMesh& im, const IfaceGroup& g) {
  const double s0 = im.run_coord(g, m.vertices[m.edges[e][0]]);
  const double s1 = im.run_coord(g, m.vertices[m.edges[e][1]]);
  const double xi = (s - s0) / (s1 - s0);
  const double nk = (k == 0) ? 1.0 - xi : xi;
  return m.edge_normal[e].dot(n) / m.edge_len[e] * nk;
}

}  // namespace detail

inline Blocks assemble_blocks(const FeSystem& fe, const Coefficients& co,
                              QuadMode mode = QuadMode::vertex) {
  co.validate();
  const Mesh& mf = *fe.mf;
  const Mesh& mp = *fe.mp;
  Blocks bl;
  bl.mode = mode;
  const detail::TriRule rule = detail::tri_rule(mode);
  const double cdev = 0.5;                                      // tr coupling in sigma^d : tau^d
  const double cA = co.lam_p / (2.0 * co.mu_p + 2.0 * co.lam_p);  // tr coupling in A
  const double aii = 2.0 / (2.0 * co.mu_p + 2.0 * co.lam_p);      // (A I) : I in 2D

  std::vector<Triplet> t_af, t_ap, t_ess, t_esp, t_bf, t_bs, t_bp, t_bskf, t_bskp;
  bl.epp = Vec::Zero(fe.n_pp);
  bl.ms0 = Vec::Zero(fe.n_pp);

  // --- fluid volume forms -------------------------------------------------
  for (int t = 0; t < mf.n_tris(); ++t) {
    const Mesh& mloc = mf;
    const ElementBasis eb = build_element_basis(mf, t);
    const TriMap map(mf, t);
    // Divergence blocks are exact for any rule.
    for (int j = 0; j < 12; ++j) {
      const int r = j / 6, b = j % 6;
      t_bf.emplace_back(2 * t + r, detail::local_sdof(mf, t, j), mf.tri_area[t] * eb.div[b]);
    }
    for (size_t q = 0; q < rule.ref.size(); ++q) {
      const Vec2 p = map.to_phys(rule.ref[q]);
      const double wq = rule.w[q] * map.detJ;
      const double l0 = 1.0 - rule.ref[q].x() - rule.ref[q].y();
      const double lam[3] = {l0, rule.ref[q].x(), rule.ref[q].y()};
      std::array<Vec2, 6> v;
      for (int b = 0; b < 6; ++b) v[b] = eb.eval(b, p);
      if (mode == QuadMode::vertex) detail::mask_nonvertex(mloc, t, static_cast<int>(q), v);
      for (int i = 0; i < 12; ++i) {
        const int ri = i / 6, bi = i % 6;
        const int gi = detail::local_sdof(mf, t, i);
        for (int j = 0; j < 12; ++j) {
          const int rj = j / 6, bj = j % 6;
          const double dot = (ri == rj) ? v[bi].dot(v[bj]) : 0.0;
          const double val = (dot - cdev * v[bi][ri] * v[bj][rj]) / (2.0 * co.mu);
          if (val != 0.0) t_af.emplace_back(gi, detail::local_sdof(mf, t, j), wq * val);
        }
        // weak symmetry (tau, chi(g)): g is the P1 hat of each vertex.
        const double skew = (ri == 0) ? v[bi][1] : -v[bi][0];
        for (int k = 0; k < 3; ++k) {
          const double val = wq * lam[k] * skew;
          if (val != 0.0) t_bskf.emplace_back(mf.tris[t][k], gi, val);
        }
      }
    }
  }

  // --- poroelastic volume forms ------------------------------------------
  for (int t = 0; t < mp.n_tris(); ++t) {
    const Mesh& mloc = mp;
    const ElementBasis eb = build_element_basis(mp, t);
    const TriMap map(mp, t);
    bl.epp[t] = co.alpha_p * co.alpha_p * aii * mp.tri_area[t];
    bl.ms0[t] = co.s0 * mp.tri_area[t];
    for (int j = 0; j < 12; ++j) {
      const int r = j / 6, b = j % 6;
      t_bs.emplace_back(2 * t + r, detail::local_sdof(mp, t, j), mp.tri_area[t] * eb.div[b]);
    }
    for (int j = 0; j < 6; ++j)
      t_bp.emplace_back(t, detail::local_vdof(mp, t, j), -mp.tri_area[t] * eb.div[j]);
    for (size_t q = 0; q < rule.ref.size(); ++q) {
      const Vec2 p = map.to_phys(rule.ref[q]);
      const double wq = rule.w[q] * map.detJ;
      const double l0 = 1.0 - rule.ref[q].x() - rule.ref[q].y();
      const double lam[3] = {l0, rule.ref[q].x(), rule.ref[q].y()};
      std::array<Vec2, 6> v;
      for (int b = 0; b < 6; ++b) v[b] = eb.eval(b, p);
      if (mode == QuadMode::vertex) detail::mask_nonvertex(mloc, t, static_cast<int>(q), v);
      const Mat2 Kinv = co.K(p).inverse();
      // Darcy velocity mass matrix.
      for (int i = 0; i < 6; ++i) {
        const int gi = detail::local_vdof(mp, t, i);
        for (int j = 0; j < 6; ++j) {
          const double val = wq * co.mu * v[i].dot(Kinv * v[j]);
          if (val != 0.0) t_ap.emplace_back(gi, detail::local_vdof(mp, t, j), val);
        }
      }
      // Elasticity compliance blocks.
      for (int i = 0; i < 12; ++i) {
        const int ri = i / 6, bi = i % 6;
        const int gi = detail::local_sdof(mp, t, i);
        for (int j = 0; j < 12; ++j) {
          const int rj = j / 6, bj = j % 6;
          const double dot = (ri == rj) ? v[bi].dot(v[bj]) : 0.0;
          const double val = (dot - cA * v[bi][ri] * v[bj][rj]) / (2.0 * co.mu_p);
          if (val != 0.0) t_ess.emplace_back(gi, detail::local_sdof(mp, t, j), wq * val);
        }
        // alpha_p (A(I), tau) = alpha_p tr(tau) / (2mu_p + 2lam_p).
        const double val = wq * co.alpha_p * v[bi][ri] / (2.0 * co.mu_p + 2.0 * co.lam_p);
        if (val != 0.0) t_esp.emplace_back(gi, t, val);
        const double skew = (ri == 0) ? v[bi][1] : -v[bi][0];
        for (int k = 0; k < 3; ++k) {
          const double s = wq * lam[k] * skew;
          if (s != 0.0) t_bskp.emplace_back(mp.tris[t][k], gi, s);
        }
      }
    }
  }

  auto make = [](int rows, int cols, std::vector<Triplet>& tr) {
    SpMat M(rows, cols);
    M.setFromTriplets(tr.begin(), tr.end());
    M.prune([](int, int, double v) { return std::abs(v) > 1e-300; });
    return M;
  };
  bl.Af = make(fe.n_sigf, fe.n_sigf, t_af);
  bl.Ap = make(fe.n_up, fe.n_up, t_ap);
  bl.Ess = make(fe.n_sigp, fe.n_sigp, t_ess);
  bl.Esp = make(fe.n_sigp, fe.n_pp, t_esp);
  bl.Bf = make(fe.n_uf, fe.n_sigf, t_bf);
  bl.Bs = make(fe.n_us, fe.n_sigp, t_bs);
  bl.Bp = make(fe.n_pp, fe.n_up, t_bp);
  bl.Bskf = make(fe.n_gf, fe.n_sigf, t_bskf);
  bl.Bskp = make(fe.n_gp, fe.n_sigp, t_bskp);

  // --- interface forms ----------------------------------------------------
  const InterfaceMesh& im = *fe.iface;
  const QuadRuleSeg seg_rule = gauss_seg(4);
  std::vector<Triplet> t_bnf, t_bnp, t_bgam, t_pff, t_pft, t_ptt, t_cf, t_cp;
  for (size_t si = 0; si < im.segments.size(); ++si) {
    const IfaceSegment& sg = im.segments[si];
    const IfaceGroup& g = im.groups[sg.group];
    const int ef = sg.fluid_edge, ep = sg.poro_edge;
    const EdgeTrace& etf = fe.ftrace.at(ef);
    const EdgeTrace& etp = fe.ptrace.at(ep);
    for (size_t q = 0; q < seg_rule.pts.size(); ++q) {
      const double s = sg.a + sg.len() * seg_rule.pts[q];
      const double w = sg.len() * seg_rule.w[q];
      const Vec2 p = im.point(static_cast<int>(si), s);
      const TraceBasis tbf = fe.trace_basis(etf, true, s);
      const TraceBasis tbp = fe.trace_basis(etp, false, s);
      double trf[2], trp[2];
      for (int k = 0; k < 2; ++k) {
        trf[k] = detail::edge_trace(mf, ef, k, s, g.n_f, im, g);
        trp[k] = detail::edge_trace(mp, ep, k, s, g.n_p, im, g);
      }
      const double k1 = (co.K(p) * g.t_f).dot(g.t_f);
      if (!(k1 > 0.0)) throw ConfigError("coefficients: K must be positive along the interface");
      const double bjs = co.mu * co.alpha_bjs / std::sqrt(k1);

      for (int a = 0; a < 2; ++a) {      // multiplier nodal basis index
        const double pv = tbf.val[a];
        const double qv = tbp.val[a];
        // <tau n_f, psi>, <tau n_p, psi>, <v.n_p, xi>
        for (int k = 0; k < 2; ++k)
          for (int r = 0; r < 2; ++r) {
            t_bnf.emplace_back(fe.phi_dof(tbf.slot[a], r), FeSystem::sdof(ef, r, k),
                               w * pv * trf[k]);
            t_bnp.emplace_back(fe.th_dof(tbp.slot[a], r), FeSystem::sdof(ep, r, k),
                               w * qv * trp[k]);
          }
        for (int k = 0; k < 2; ++k)
          t_bgam.emplace_back(fe.lam_dof(tbp.slot[a]), FeSystem::vdof(ep, k), w * qv * trp[k]);
        // BJS friction and the mass-conservation pairings.
        for (int b = 0; b < 2; ++b) {
          for (int ci = 0; ci < 2; ++ci)
            for (int cj = 0; cj < 2; ++cj) {
              const double tt = g.t_f[ci] * g.t_f[cj];
              if (tt == 0.0) continue;
              t_pff.emplace_back(fe.phi_dof(tbf.slot[a], ci), fe.phi_dof(tbf.slot[b], cj),
                                 w * bjs * tbf.val[a] * tbf.val[b] * tt);
              t_pft.emplace_back(fe.phi_dof(tbf.slot[a], ci), fe.th_dof(tbp.slot[b], cj),
                                 w * bjs * tbf.val[a] * tbp.val[b] * tt);
              t_ptt.emplace_back(fe.th_dof(tbp.slot[a], ci), fe.th_dof(tbp.slot[b], cj),
                                 w * bjs * tbp.val[a] * tbp.val[b] * tt);
            }
          for (int c = 0; c < 2; ++c) {
            t_cf.emplace_back(fe.phi_dof(tbf.slot[a], c), fe.lam_dof(tbp.slot[b]),
                              w * pv * g.n_f[c] * tbp.val[b]);
            t_cp.emplace_back(fe.th_dof(tbp.slot[a], c), fe.lam_dof(tbp.slot[b]),
                              w * qv * g.n_p[c] * tbp.val[b]);
          }
        }
      }
    }
  }
  bl.Bnf = make(fe.n_phi, fe.n_sigf, t_bnf);
  bl.Bnp = make(fe.n_th, fe.n_sigp, t_bnp);
  bl.Bgam = make(fe.n_lam, fe.n_up, t_bgam);
  bl.Pff = make(fe.n_phi, fe.n_phi, t_pff);
  bl.Pft = make(fe.n_phi, fe.n_th, t_pft);
  bl.Ptt = make(fe.n_th, fe.n_th, t_ptt);
  bl.Cf = make(fe.n_phi, fe.n_lam, t_cf);
  bl.Cp = make(fe.n_th, fe.n_lam, t_cp);
  return bl;
}

}  // namespace sbfem

#endif  // SBFEM_FORMS_HPP
