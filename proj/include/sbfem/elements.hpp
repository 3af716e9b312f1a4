#ifndef SBFEM_ELEMENTS_HPP
#define SBFEM_ELEMENTS_HPP

// Reference and physical BDM1 bases, Piola transform, and global DOF
// numbering for the eleven fields:
//   fluid:   sigma_f (tensor BDM1), u_f (P0 vector), gamma_f (P1 scalar)
//   poro:    sigma_p, u_s, gamma_p, u_p (vector BDM1), p_p (P0)
//   traces:  phi, theta (vector), lambda (scalar), variant S1 or S2.
//
// BDM1 DOF functionals are endpoint values of the normal component scaled by
// the edge length, taken with the global edge normal and with the lower-index
// endpoint first.  This makes normal traces match across elements without
// per-element sign bookkeeping and associates each DOF with a mesh vertex,
// which is what the vertex quadrature rule exploits.

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sbfem/geometry.hpp"
#include "sbfem/quadrature.hpp"

namespace sbfem {

enum class Variant { S1, S2 };

// Boundary-condition kinds per boundary label.  "Natural" data enters the
// right-hand side; "essential" conditions constrain DOFs of the space.
enum class FluidBc {
  velocity,                // natural: u_f = data
  traction,                // essential: sigma_f n_f = data
  traction_normal_noslip,  // essential (sigma_f n)·n = g, natural u_f·t = 0 (Example 3)
};
enum class DarcyBc {
  pressure,  // natural: p_p = data
  flux,      // essential: u_p·n_p = data
};
enum class ElasBc {
  displacement,  // natural: u_s = data
  traction,      // essential: sigma_p n_p = data
};

struct BcSpec {
  std::map<std::string, FluidBc> fluid;
  std::map<std::string, DarcyBc> darcy;
  std::map<std::string, ElasBc> elas;
};

// ---------------------------------------------------------------------------
// BDM1 basis on one physical triangle
// ---------------------------------------------------------------------------
//
// Local DOF j = 2*local_edge + endpoint, endpoint 0 being the lower global
// vertex index of that edge.  Basis functions are full linear vector fields
// v(x) = (c0 + c1 x + c2 y, c3 + c4 x + c5 y).
struct ElementBasis {
  Eigen::Matrix<double, 6, 6> C;  // column j: coefficients of basis j
  std::array<double, 6> div{};

  Vec2 eval(int j, const Vec2& p) const {
    return Vec2(C(0, j) + C(1, j) * p.x() + C(2, j) * p.y(),
                C(3, j) + C(4, j) * p.x() + C(5, j) * p.y());
  }
};

inline ElementBasis build_element_basis(const Mesh& m, int t) {
  auto mono = [](int k, const Vec2& p) {
    switch (k) {
      case 0: return Vec2(1, 0);
      case 1: return Vec2(p.x(), 0);
      case 2: return Vec2(p.y(), 0);
      case 3: return Vec2(0, 1);
      case 4: return Vec2(0, p.x());
      default: return Vec2(0, p.y());
    }
  };
  Eigen::Matrix<double, 6, 6> F;
  for (int i = 0; i < 6; ++i) {
    const int e = m.tri_edge[t][i / 2];
    const Vec2 p = m.vertices[m.edges[e][i % 2]];
    for (int k = 0; k < 6; ++k)
      F(i, k) = m.edge_len[e] * mono(k, p).dot(m.edge_normal[e]);
  }
  ElementBasis b;
  b.C = F.inverse();
  for (int j = 0; j < 6; ++j) b.div[j] = b.C(1, j) + b.C(5, j);
  return b;
}

// Reference basis with the same functional convention, on the triangle
// (0,0)-(1,0)-(0,1); returns values and (constant) divergences.
inline const ElementBasis& ref_bdm1_basis() {
  static const ElementBasis basis = [] {
    Mesh m;
    m.vertices = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    m.tris = {{0, 1, 2}};
    finalize_mesh(m);
    return build_element_basis(m, 0);
  }();
  return basis;
}

inline void eval_bdm1(const Vec2& xhat, std::array<Vec2, 6>& vals, std::array<double, 6>& divs) {
  const ElementBasis& b = ref_bdm1_basis();
  for (int j = 0; j < 6; ++j) vals[j] = b.eval(j, xhat);
  divs = b.div;
}

// Contravariant Piola transform of a reference value/divergence.
inline std::pair<Vec2, double> piola(const TriMap& map, const Vec2& ref_val, double ref_div) {
  if (map.detJ <= 0.0) throw GeometryError("piola: degenerate triangle");
  return {map.J * ref_val / map.detJ, ref_div / map.detJ};
}

// ---------------------------------------------------------------------------
// FeSystem
// ---------------------------------------------------------------------------

// Trace bookkeeping for one interface edge: its group, its index within the
// group's sorted trace, the running coordinates of its two stored endpoints,
// and the trace-node indices of those endpoints.
struct EdgeTrace {
  int group = -1, segi = -1;
  double s0 = 0.0, s1 = 0.0;
  int node0 = -1, node1 = -1;
};

// Scalar nodal-basis contributions of one multiplier space at coordinate s on
// a parent edge: two (slot, value) pairs.
struct TraceBasis {
  int slot[2];
  double val[2];
};

struct FeSystem {
  const Mesh* mf = nullptr;
  const Mesh* mp = nullptr;
  const InterfaceMesh* iface = nullptr;
  Variant variant = Variant::S2;
  BcSpec bc;

  // Field dimensions.
  int n_sigf = 0, n_uf = 0, n_gf = 0;
  int n_sigp = 0, n_us = 0, n_gp = 0, n_up = 0, n_pp = 0;
  int n_phi = 0, n_th = 0, n_lam = 0;

  // Monolithic offsets in the order (sigf, up, sigp, pp | phi, th, lam | uf, us, gf, gp).
  int off_sigf = 0, off_up = 0, off_sigp = 0, off_pp = 0, off_phi = 0, off_th = 0, off_lam = 0,
      off_uf = 0, off_us = 0, off_gf = 0, off_gp = 0, total = 0;

  // Per-group scalar-slot offsets into the fluid/poro trace spaces.
  std::vector<int> fslot_off, pslot_off;  // per group
  int n_fslots = 0, n_pslots = 0;

  std::map<int, EdgeTrace> ftrace;  // fluid interface edge -> trace info
  std::map<int, EdgeTrace> ptrace;  // poro interface edge -> trace info

  // Essential DOF masks (1 = constrained).
  std::vector<unsigned char> ess_sigf, ess_up, ess_sigp;

  // --- DOF numbering helpers (within each field) ---
  static int sdof(int e, int row, int end) { return 4 * e + 2 * row + end; }
  static int vdof(int e, int end) { return 2 * e + end; }
  // Vertex owning a BDM1 edge DOF.
  static int sdof_vertex(const Mesh& m, int dof) { return m.edges[dof / 4][dof % 2]; }
  static int vdof_vertex(const Mesh& m, int dof) { return m.edges[dof / 2][dof % 2]; }

  int n_slots_scalar(bool fluid_side) const { return fluid_side ? n_fslots : n_pslots; }

  // Scalar nodal basis of the multiplier spaces at running coordinate s on a
  // parent interface edge.  S2: discontinuous P1 per segment; S1: continuous
  // P1 on the group's trace nodes.
  TraceBasis trace_basis(const EdgeTrace& et, bool fluid_side, double s) const {
    TraceBasis tb;
    const int off = fluid_side ? fslot_off[et.group] : pslot_off[et.group];
    const double d = et.s1 - et.s0;
    const double n1 = (s - et.s0) / d;  // hat of stored endpoint 1
    if (variant == Variant::S2) {
      tb.slot[0] = off + 2 * et.segi + 0;
      tb.slot[1] = off + 2 * et.segi + 1;
    } else {
      tb.slot[0] = off + et.node0;
      tb.slot[1] = off + et.node1;
    }
    tb.val[0] = 1.0 - n1;
    tb.val[1] = n1;
    return tb;
  }

  int phi_dof(int slot, int comp) const { return 2 * slot + comp; }
  int th_dof(int slot, int comp) const { return 2 * slot + comp; }
  int lam_dof(int slot) const { return slot; }
};

inline FeSystem build_fe_system(const Mesh& mf, const Mesh& mp, const InterfaceMesh& iface,
                                Variant variant, const BcSpec& bc) {
  FeSystem fe;
  fe.mf = &mf;
  fe.mp = &mp;
  fe.iface = &iface;
  fe.variant = variant;
  fe.bc = bc;

  fe.n_sigf = 4 * mf.n_edges();
  fe.n_uf = 2 * mf.n_tris();
  fe.n_gf = mf.n_vertices();
  fe.n_sigp = 4 * mp.n_edges();
  fe.n_us = 2 * mp.n_tris();
  fe.n_gp = mp.n_vertices();
  fe.n_up = 2 * mp.n_edges();
  fe.n_pp = mp.n_tris();

  // Trace scalar slots per group.
  for (const auto& g : iface.groups) {
    fe.fslot_off.push_back(fe.n_fslots);
    fe.pslot_off.push_back(fe.n_pslots);
    if (variant == Variant::S2) {
      fe.n_fslots += 2 * static_cast<int>(g.fluid_edges.size());
      fe.n_pslots += 2 * static_cast<int>(g.poro_edges.size());
    } else {
      fe.n_fslots += static_cast<int>(g.fluid_edges.size()) + 1;
      fe.n_pslots += static_cast<int>(g.poro_edges.size()) + 1;
    }
  }
  fe.n_phi = 2 * fe.n_fslots;
  fe.n_th = 2 * fe.n_pslots;
  fe.n_lam = fe.n_pslots;

  // Per-edge trace info.
  auto build_trace = [&](const Mesh& m, bool fluid_side) {
    std::map<int, EdgeTrace> out;
    for (int gi = 0; gi < static_cast<int>(iface.groups.size()); ++gi) {
      const IfaceGroup& g = iface.groups[gi];
      const auto& edges = fluid_side ? g.fluid_edges : g.poro_edges;
      const auto& cuts = fluid_side ? g.fluid_cuts : g.poro_cuts;
      for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
        const int e = edges[i];
        EdgeTrace et;
        et.group = gi;
        et.segi = i;
        et.s0 = iface.run_coord(g, m.vertices[m.edges[e][0]]);
        et.s1 = iface.run_coord(g, m.vertices[m.edges[e][1]]);
        et.node0 = std::abs(et.s0 - cuts[i]) < kGeomTol ? i : i + 1;
        et.node1 = et.node0 == i ? i + 1 : i;
        out[e] = et;
      }
    }
    return out;
  };
  fe.ftrace = build_trace(mf, true);
  fe.ptrace = build_trace(mp, false);

  // Monolithic offsets.
  int o = 0;
  fe.off_sigf = o; o += fe.n_sigf;
  fe.off_up = o;   o += fe.n_up;
  fe.off_sigp = o; o += fe.n_sigp;
  fe.off_pp = o;   o += fe.n_pp;
  fe.off_phi = o;  o += fe.n_phi;
  fe.off_th = o;   o += fe.n_th;
  fe.off_lam = o;  o += fe.n_lam;
  fe.off_uf = o;   o += fe.n_uf;
  fe.off_us = o;   o += fe.n_us;
  fe.off_gf = o;   o += fe.n_gf;
  fe.off_gp = o;   o += fe.n_gp;
  fe.total = o;

  // Essential masks from boundary tags.
  fe.ess_sigf.assign(fe.n_sigf, 0);
  fe.ess_up.assign(fe.n_up, 0);
  fe.ess_sigp.assign(fe.n_sigp, 0);
  for (int e = 0; e < mf.n_edges(); ++e) {
    if (mf.edge_tri[e][1] >= 0 || mf.edge_tag[e] == "interface") continue;
    auto it = bc.fluid.find(mf.edge_tag[e]);
    if (it == bc.fluid.end())
      throw ConfigError("no fluid BC for boundary label '" + mf.edge_tag[e] + "'");
    if (it->second == FluidBc::traction) {
      for (int r = 0; r < 2; ++r)
        for (int k = 0; k < 2; ++k) fe.ess_sigf[FeSystem::sdof(e, r, k)] = 1;
    } else if (it->second == FluidBc::traction_normal_noslip) {
      const Vec2 n = mf.edge_normal[e];
      if (std::abs(std::abs(n.x()) - 1.0) > 1e-9 && std::abs(std::abs(n.y()) - 1.0) > 1e-9)
        throw ConfigError("traction_normal_noslip requires an axis-aligned boundary");
      const int r = std::abs(n.x()) > 0.5 ? 0 : 1;
      for (int k = 0; k < 2; ++k) fe.ess_sigf[FeSystem::sdof(e, r, k)] = 1;
    }
  }
  for (int e = 0; e < mp.n_edges(); ++e) {
    if (mp.edge_tri[e][1] >= 0 || mp.edge_tag[e] == "interface") continue;
    auto itd = bc.darcy.find(mp.edge_tag[e]);
    auto ite = bc.elas.find(mp.edge_tag[e]);
    if (itd == bc.darcy.end() || ite == bc.elas.end())
      throw ConfigError("no Darcy/elasticity BC for boundary label '" + mp.edge_tag[e] + "'");
    if (itd->second == DarcyBc::flux)
      for (int k = 0; k < 2; ++k) fe.ess_up[FeSystem::vdof(e, k)] = 1;
    if (ite->second == ElasBc::traction)
      for (int r = 0; r < 2; ++r)
        for (int k = 0; k < 2; ++k) fe.ess_sigp[FeSystem::sdof(e, r, k)] = 1;
  }
  return fe;
}

// ---------------------------------------------------------------------------
// Interpolation into the discrete spaces
// ---------------------------------------------------------------------------

using VecFun = std::function<Vec2(const Vec2&)>;
using ScalFun = std::function<double(const Vec2&)>;
using TensFun = std::function<Mat2(const Vec2&)>;

inline Vec interp_bdm1(const Mesh& m, const VecFun& f) {
  Vec c(2 * m.n_edges());
  for (int e = 0; e < m.n_edges(); ++e)
    for (int k = 0; k < 2; ++k)
      c[FeSystem::vdof(e, k)] = m.edge_len[e] * f(m.vertices[m.edges[e][k]]).dot(m.edge_normal[e]);
  return c;
}

inline Vec interp_sigma(const Mesh& m, const TensFun& f) {
  Vec c(4 * m.n_edges());
  for (int e = 0; e < m.n_edges(); ++e)
    for (int k = 0; k < 2; ++k) {
      const Mat2 T = f(m.vertices[m.edges[e][k]]);
      for (int r = 0; r < 2; ++r)
        c[FeSystem::sdof(e, r, k)] = m.edge_len[e] * T.row(r).dot(m.edge_normal[e]);
    }
  return c;
}

// Elementwise mean values (exact L2 projection onto P0).
inline Vec interp_p0(const Mesh& m, const ScalFun& f, int degree = 5) {
  const QuadRuleTri rule = gauss_tri(degree);
  Vec c(m.n_tris());
  for (int t = 0; t < m.n_tris(); ++t) {
    const TriMap map(m, t);
    double s = 0;
    for (size_t q = 0; q < rule.pts.size(); ++q) s += rule.w[q] * f(map.to_phys(rule.pts[q]));
    c[t] = s * map.detJ / m.tri_area[t];
  }
  return c;
}

inline Vec interp_p0_vec(const Mesh& m, const VecFun& f, int degree = 5) {
  const QuadRuleTri rule = gauss_tri(degree);
  Vec c(2 * m.n_tris());
  for (int t = 0; t < m.n_tris(); ++t) {
    const TriMap map(m, t);
    Vec2 s = Vec2::Zero();
    for (size_t q = 0; q < rule.pts.size(); ++q) s += rule.w[q] * f(map.to_phys(rule.pts[q]));
    s *= map.detJ / m.tri_area[t];
    c[2 * t] = s.x();
    c[2 * t + 1] = s.y();
  }
  return c;
}

inline Vec interp_p1(const Mesh& m, const ScalFun& f) {
  Vec c(m.n_vertices());
  for (int v = 0; v < m.n_vertices(); ++v) c[v] = f(m.vertices[v]);
  return c;
}

// Nodal interpolation into a multiplier space (scalar-slot layout).
inline Vec interp_trace_scalar(const FeSystem& fe, bool fluid_side, const ScalFun& f) {
  Vec c = Vec::Zero(fe.n_slots_scalar(fluid_side));
  const auto& tr = fluid_side ? fe.ftrace : fe.ptrace;
  const Mesh& m = fluid_side ? *fe.mf : *fe.mp;
  for (const auto& [e, et] : tr) {
    for (int k = 0; k < 2; ++k) {
      const Vec2 p = m.vertices[m.edges[e][k]];
      const TraceBasis tb = fe.trace_basis(et, fluid_side, k == 0 ? et.s0 : et.s1);
      // At an endpoint, exactly one basis value is 1.
      c[tb.val[0] > 0.5 ? tb.slot[0] : tb.slot[1]] = f(p);
    }
  }
  return c;
}

inline Vec interp_trace_vec(const FeSystem& fe, bool fluid_side, const VecFun& f) {
  Vec cx = interp_trace_scalar(fe, fluid_side, [&](const Vec2& p) { return f(p).x(); });
  Vec cy = interp_trace_scalar(fe, fluid_side, [&](const Vec2& p) { return f(p).y(); });
  Vec c(2 * cx.size());
  for (int s = 0; s < cx.size(); ++s) {
    c[2 * s] = cx[s];
    c[2 * s + 1] = cy[s];
  }
  return c;
}

}  // namespace sbfem

#endif  // SBFEM_ELEMENTS_HPP
