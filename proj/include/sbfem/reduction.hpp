#ifndef SBFEM_REDUCTION_HPP
#define SBFEM_REDUCTION_HPP

// Local elimination to a positive cell-centered system.
//
// With the vertex quadrature rule, A_sigf, A_up, A_sigp couple only DOFs that
// share a mesh vertex, so sigma_f, u_p, sigma_p can be eliminated by inverting
// small per-vertex blocks; a second (diagonal) elimination removes gamma_f,
// gamma_p.  The remaining unknowns are (p_p, phi, theta, lambda, u_f, u_s).
//
// One wrinkle: the sigma_f vertex blocks are singular.  At each fluid vertex v
// whose incident edges carry no essential stress condition, the interpolant of
// q_v I (q_v the P1 hat at v) lies in the kernel of a_f and is supported
// exactly on the DOFs at v.  We therefore use a rank-revealing per-block
// pseudo-inverse and carry the kernel coefficients as extra scalar unknowns c
// (one per singular block) together with the corresponding compatibility rows;
// the augmented elimination is exact, and the (c, compatibility) coupling is
// skew, preserving positivity of the symmetric part.

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <memory>
#include <vector>

#include "sbfem/system.hpp"

namespace sbfem {

// ---------------------------------------------------------------------------
// VertexBlocks
// ---------------------------------------------------------------------------
//
// Global-size sparse matrices holding the per-vertex (pseudo-)inverses over
// free DOFs; rows/columns of constrained DOFs are identically zero.
struct VertexBlocks {
  SpMat Dsigf;  // pseudo-inverse of the A_sigf blocks
  SpMat E;      // orthonormal kernel basis of the A_sigf blocks, n_sigf x n_c
  SpMat Dup;    // inverse of the A_up blocks
  SpMat Dsigp;  // inverse of the (1/dt) A_sigp blocks
  int n_c = 0;
};

namespace detail {

// DOFs of a BDM1-based field stored at vertex v (one endpoint DOF per
// incident edge, times `rows` components).
inline std::vector<int> vertex_dofs(const Mesh& m, int v, int rows) {
  std::vector<int> dofs;
  for (int e : m.vertex_edges[v]) {
    const int k = (m.edges[e][0] == v) ? 0 : 1;
    for (int r = 0; r < rows; ++r)
      dofs.push_back(rows == 1 ? FeSystem::vdof(e, k) : FeSystem::sdof(e, r, k));
  }
  return dofs;
}

inline void check_vertex_local(const SpMat& M, const Mesh& m, int rows, const char* name) {
  const int per_edge = 2 * rows;
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it) {
      const int vr = m.edges[static_cast<int>(it.row()) / per_edge][it.row() % 2];
      const int vc = m.edges[static_cast<int>(it.col()) / per_edge][it.col() % 2];
      if (vr != vc && it.value() != 0.0)
        throw InternalError(std::string("vertex-block structure violated in ") + name +
                            " (was the system assembled with vertex quadrature?)");
    }
}

}  // namespace detail

inline VertexBlocks build_vertex_blocks(const FeSystem& fe, const Blocks& bl, double dt) {
  if (bl.mode != QuadMode::vertex)
    throw InternalError("build_vertex_blocks requires vertex-quadrature blocks");
  const Mesh& mf = *fe.mf;
  const Mesh& mp = *fe.mp;
  detail::check_vertex_local(bl.Af, mf, 2, "A_sigf");
  detail::check_vertex_local(bl.Ap, mp, 1, "A_up");
  detail::check_vertex_local(bl.Ess, mp, 2, "A_sigp");

  VertexBlocks vb;
  std::vector<Triplet> t_dsigf, t_dup, t_dsigp, t_e;

  // SPD blocks: plain dense inverse via Cholesky.
  auto invert_spd = [](const SpMat& A, const Mesh& m, int rows,
                       const std::vector<unsigned char>& mask, double scale,
                       std::vector<Triplet>& out) {
    for (int v = 0; v < m.n_vertices(); ++v) {
      std::vector<int> dofs;
      for (int d : detail::vertex_dofs(m, v, rows))
        if (!mask[d]) dofs.push_back(d);
      const int n = static_cast<int>(dofs.size());
      if (n == 0) continue;
      Eigen::MatrixXd B(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) = scale * A.coeff(dofs[i], dofs[j]);
      Eigen::LLT<Eigen::MatrixXd> llt(B);
      if (llt.info() != Eigen::Success)
        throw SolverError("vertex block is not positive definite");
      Eigen::MatrixXd Binv = llt.solve(Eigen::MatrixXd::Identity(n, n));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.emplace_back(dofs[i], dofs[j], Binv(i, j));
    }
  };
  invert_spd(bl.Ap, mp, 1, fe.ess_up, 1.0, t_dup);
  invert_spd(bl.Ess, mp, 2, fe.ess_sigp, 1.0 / dt, t_dsigp);

  // Fluid stress blocks: rank-revealing pseudo-inverse + kernel basis.
  for (int v = 0; v < mf.n_vertices(); ++v) {
    std::vector<int> dofs;
    for (int d : detail::vertex_dofs(mf, v, 2))
      if (!fe.ess_sigf[d]) dofs.push_back(d);
    const int n = static_cast<int>(dofs.size());
    if (n == 0) continue;
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) B(i, j) = bl.Af.coeff(dofs[i], dofs[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B);
    const double lmax = eig.eigenvalues().cwiseAbs().maxCoeff();
    const double tol = 1e-10 * std::max(lmax, 1e-300);
    Eigen::MatrixXd Binv = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
      const double lam = eig.eigenvalues()[k];
      if (lam > tol) {
        Binv += eig.eigenvectors().col(k) * eig.eigenvectors().col(k).transpose() / lam;
      } else {
        for (int i = 0; i < n; ++i)
          if (eig.eigenvectors()(i, k) != 0.0)
            t_e.emplace_back(dofs[i], vb.n_c, eig.eigenvectors()(i, k));
        ++vb.n_c;
      }
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (Binv(i, j) != 0.0) t_dsigf.emplace_back(dofs[i], dofs[j], Binv(i, j));
  }

  auto make = [](int rows, int cols, std::vector<Triplet>& tr) {
    SpMat M(rows, cols);
    M.setFromTriplets(tr.begin(), tr.end());
    return M;
  };
  vb.Dsigf = make(fe.n_sigf, fe.n_sigf, t_dsigf);
  vb.E = make(fe.n_sigf, vb.n_c, t_e);
  vb.Dup = make(fe.n_up, fe.n_up, t_dup);
  vb.Dsigp = make(fe.n_sigp, fe.n_sigp, t_dsigp);
  return vb;
}

// ---------------------------------------------------------------------------
// ReducedSystem
// ---------------------------------------------------------------------------
struct ReducedSystem {
  VertexBlocks vb;
  SpMat S;  // (1/dt) Esp^T, the (pp, sigp) coupling

  // First-stage Schur products.
  SpMat Xpp, Xpu, Xpg, Xuu, Xug, Xgg;          // fluid:   Bnf/Bf/Bskf x Dsigf
  SpMat Ypp, Ypl, Yll;                          // Darcy:   Bp/Bgam x Dup
  SpMat Zpp, Zpt, Zpu, Zpg, Ztt, Ztu, Ztg, Zuu, Zug, Zgg;  // elasticity
  SpMat BnfE, BfE, BskfE;                       // kernel couplings
  SpMat Dgf, Dgp;                               // diagonal inverses of Xgg, Zgg

  // Reduced unknown layout: (pp, phi, th, lam, uf, us, c).
  int off_pp = 0, off_phi = 0, off_th = 0, off_lam = 0, off_uf = 0, off_us = 0, off_c = 0,
      total = 0;
  SpMat R;
  std::shared_ptr<Eigen::SparseLU<SpMat>> lu;  // shared: SparseLU is not movable
};

namespace detail {

inline SpMat diag_inverse(const SpMat& D, const char* name) {
  std::vector<Triplet> tr;
  Eigen::VectorXd d = D.diagonal();
  for (int i = 0; i < D.rows(); ++i) {
    if (!(d[i] > 0.0))
      throw SolverError(std::string("singular diagonal block in ") + name);
    tr.emplace_back(i, i, 1.0 / d[i]);
  }
  SpMat M(D.rows(), D.cols());
  M.setFromTriplets(tr.begin(), tr.end());
  return M;
}

inline void check_diagonal(const SpMat& D, const char* name) {
  for (int k = 0; k < D.outerSize(); ++k)
    for (SpMat::InnerIterator it(D, k); it; ++it)
      if (it.row() != it.col() && std::abs(it.value()) > 1e-12)
        throw InternalError(std::string(name) + " is not diagonal");
}

}  // namespace detail

inline ReducedSystem build_reduced(const FeSystem& fe, const Blocks& bl, double dt) {
  ReducedSystem rs;
  rs.vb = build_vertex_blocks(fe, bl, dt);
  rs.S = (bl.Esp.transpose() / dt).eval();

  const SpMat& Df = rs.vb.Dsigf;
  const SpMat& Du = rs.vb.Dup;
  const SpMat& Dp = rs.vb.Dsigp;
  rs.Xpp = bl.Bnf * Df * bl.Bnf.transpose();
  rs.Xpu = bl.Bnf * Df * bl.Bf.transpose();
  rs.Xpg = bl.Bnf * Df * bl.Bskf.transpose();
  rs.Xuu = bl.Bf * Df * bl.Bf.transpose();
  rs.Xug = bl.Bf * Df * bl.Bskf.transpose();
  rs.Xgg = bl.Bskf * Df * bl.Bskf.transpose();
  rs.Ypp = bl.Bp * Du * bl.Bp.transpose();
  rs.Ypl = bl.Bp * Du * bl.Bgam.transpose();
  rs.Yll = bl.Bgam * Du * bl.Bgam.transpose();
  rs.Zpp = rs.S * Dp * rs.S.transpose();
  rs.Zpt = rs.S * Dp * bl.Bnp.transpose();
  rs.Zpu = rs.S * Dp * bl.Bs.transpose();
  rs.Zpg = rs.S * Dp * bl.Bskp.transpose();
  rs.Ztt = bl.Bnp * Dp * bl.Bnp.transpose();
  rs.Ztu = bl.Bnp * Dp * bl.Bs.transpose();
  rs.Ztg = bl.Bnp * Dp * bl.Bskp.transpose();
  rs.Zuu = bl.Bs * Dp * bl.Bs.transpose();
  rs.Zug = bl.Bs * Dp * bl.Bskp.transpose();
  rs.Zgg = bl.Bskp * Dp * bl.Bskp.transpose();
  rs.BnfE = bl.Bnf * rs.vb.E;
  rs.BfE = bl.Bf * rs.vb.E;
  rs.BskfE = bl.Bskf * rs.vb.E;

  detail::check_diagonal(rs.Xgg, "A_gf.sigf.gf");
  detail::check_diagonal(rs.Zgg, "A_gp.sigp.gp");
  rs.Dgf = detail::diag_inverse(rs.Xgg, "A_gf.sigf.gf");
  rs.Dgp = detail::diag_inverse(rs.Zgg, "A_gp.sigp.gp");

  int o = 0;
  rs.off_pp = o;  o += fe.n_pp;
  rs.off_phi = o; o += fe.n_phi;
  rs.off_th = o;  o += fe.n_th;
  rs.off_lam = o; o += fe.n_lam;
  rs.off_uf = o;  o += fe.n_uf;
  rs.off_us = o;  o += fe.n_us;
  rs.off_c = o;   o += rs.vb.n_c;
  rs.total = o;

  std::vector<Triplet> tr;
  using detail::add_block;
  // pp row
  for (int i = 0; i < fe.n_pp; ++i)
    tr.emplace_back(rs.off_pp + i, rs.off_pp + i, (bl.epp[i] + bl.ms0[i]) / dt);
  add_block(tr, rs.Zpp, rs.off_pp, rs.off_pp, -1.0);
  add_block(tr, rs.Ypp, rs.off_pp, rs.off_pp);
  add_block(tr, SpMat(rs.Zpg * rs.Dgp * rs.Zpg.transpose()), rs.off_pp, rs.off_pp);
  add_block(tr, rs.Zpt, rs.off_pp, rs.off_th);
  add_block(tr, SpMat(rs.Zpg * rs.Dgp * rs.Ztg.transpose()), rs.off_pp, rs.off_th, -1.0);
  add_block(tr, rs.Ypl, rs.off_pp, rs.off_lam);
  add_block(tr, rs.Zpu, rs.off_pp, rs.off_us, -1.0);
  add_block(tr, SpMat(rs.Zpg * rs.Dgp * rs.Zug.transpose()), rs.off_pp, rs.off_us);
  // phi row
  add_block(tr, bl.Pff, rs.off_phi, rs.off_phi);
  add_block(tr, rs.Xpp, rs.off_phi, rs.off_phi);
  add_block(tr, SpMat(rs.Xpg * rs.Dgf * rs.Xpg.transpose()), rs.off_phi, rs.off_phi, -1.0);
  add_block(tr, bl.Pft, rs.off_phi, rs.off_th, -1.0);
  add_block(tr, bl.Cf, rs.off_phi, rs.off_lam);
  add_block(tr, rs.Xpu, rs.off_phi, rs.off_uf, -1.0);
  add_block(tr, SpMat(rs.Xpg * rs.Dgf * rs.Xug.transpose()), rs.off_phi, rs.off_uf);
  add_block(tr, rs.BnfE, rs.off_phi, rs.off_c);
  add_block(tr, SpMat(rs.Xpg * rs.Dgf * rs.BskfE), rs.off_phi, rs.off_c, -1.0);
  // th row
  add_block(tr, rs.Zpt, rs.off_pp, rs.off_th, -1.0, true);
  add_block(tr, SpMat(rs.Ztg * rs.Dgp * rs.Zpg.transpose()), rs.off_th, rs.off_pp);
  add_block(tr, bl.Pft, rs.off_phi, rs.off_th, -1.0, true);
  add_block(tr, bl.Ptt, rs.off_th, rs.off_th);
  add_block(tr, rs.Ztt, rs.off_th, rs.off_th);
  add_block(tr, SpMat(rs.Ztg * rs.Dgp * rs.Ztg.transpose()), rs.off_th, rs.off_th, -1.0);
  add_block(tr, bl.Cp, rs.off_th, rs.off_lam);
  add_block(tr, rs.Ztu, rs.off_th, rs.off_us, -1.0);
  add_block(tr, SpMat(rs.Ztg * rs.Dgp * rs.Zug.transpose()), rs.off_th, rs.off_us);
  // lam row
  add_block(tr, rs.Ypl, rs.off_pp, rs.off_lam, 1.0, true);
  add_block(tr, bl.Cf, rs.off_phi, rs.off_lam, -1.0, true);
  add_block(tr, bl.Cp, rs.off_th, rs.off_lam, -1.0, true);
  add_block(tr, rs.Yll, rs.off_lam, rs.off_lam);
  // uf row
  add_block(tr, rs.Xpu, rs.off_phi, rs.off_uf, -1.0, true);
  add_block(tr, SpMat(rs.Xug * rs.Dgf * rs.Xpg.transpose()), rs.off_uf, rs.off_phi);
  add_block(tr, rs.Xuu, rs.off_uf, rs.off_uf);
  add_block(tr, SpMat(rs.Xug * rs.Dgf * rs.Xug.transpose()), rs.off_uf, rs.off_uf, -1.0);
  add_block(tr, rs.BfE, rs.off_uf, rs.off_c, -1.0);
  add_block(tr, SpMat(rs.Xug * rs.Dgf * rs.BskfE), rs.off_uf, rs.off_c);
  // us row
  add_block(tr, rs.Zpu, rs.off_pp, rs.off_us, 1.0, true);
  add_block(tr, SpMat(rs.Zug * rs.Dgp * rs.Zpg.transpose()), rs.off_us, rs.off_pp, -1.0);
  add_block(tr, rs.Ztu, rs.off_th, rs.off_us, -1.0, true);
  add_block(tr, SpMat(rs.Zug * rs.Dgp * rs.Ztg.transpose()), rs.off_us, rs.off_th);
  add_block(tr, rs.Zuu, rs.off_us, rs.off_us);
  add_block(tr, SpMat(rs.Zug * rs.Dgp * rs.Zug.transpose()), rs.off_us, rs.off_us, -1.0);
  // c row (compatibility of the singular sigma_f blocks)
  add_block(tr, rs.BnfE, rs.off_phi, rs.off_c, -1.0, true);
  add_block(tr, SpMat(rs.BskfE.transpose() * rs.Dgf * rs.Xpg.transpose()), rs.off_c,
            rs.off_phi);
  add_block(tr, rs.BfE, rs.off_uf, rs.off_c, 1.0, true);
  add_block(tr, SpMat(rs.BskfE.transpose() * rs.Dgf * rs.Xug.transpose()), rs.off_c, rs.off_uf,
            -1.0);
  add_block(tr, SpMat(rs.BskfE.transpose() * rs.Dgf * rs.BskfE), rs.off_c, rs.off_c);

  rs.R = SpMat(rs.total, rs.total);
  rs.R.setFromTriplets(tr.begin(), tr.end());
  rs.R.prune([](int, int, double v) { return v != 0.0; });
  rs.lu = std::make_shared<Eigen::SparseLU<SpMat>>();
  rs.lu->compute(rs.R);
  if (rs.lu->info() != Eigen::Success) throw SolverError("reduced factorization failed");
  return rs;
}

// The intermediate system before the gamma eliminations, over
// (pp, phi, th, lam, uf, us, gf, gp, c).  Debug / inspection only.
inline SpMat assemble_stage1(const FeSystem& fe, const Blocks& bl, const ReducedSystem& rs,
                             double dt) {
  int o = 0;
  const int opp = o;  o += fe.n_pp;
  const int oph = o;  o += fe.n_phi;
  const int oth = o;  o += fe.n_th;
  const int olm = o;  o += fe.n_lam;
  const int ouf = o;  o += fe.n_uf;
  const int ous = o;  o += fe.n_us;
  const int ogf = o;  o += fe.n_gf;
  const int ogp = o;  o += fe.n_gp;
  const int oc = o;   o += rs.vb.n_c;
  std::vector<Triplet> tr;
  using detail::add_block;
  for (int i = 0; i < fe.n_pp; ++i)
    tr.emplace_back(opp + i, opp + i, (bl.epp[i] + bl.ms0[i]) / dt);
  add_block(tr, rs.Zpp, opp, opp, -1.0);
  add_block(tr, rs.Ypp, opp, opp);
  add_block(tr, rs.Zpt, opp, oth);
  add_block(tr, rs.Ypl, opp, olm);
  add_block(tr, rs.Zpu, opp, ous, -1.0);
  add_block(tr, rs.Zpg, opp, ogp, -1.0);
  add_block(tr, bl.Pff, oph, oph);
  add_block(tr, rs.Xpp, oph, oph);
  add_block(tr, bl.Pft, oph, oth, -1.0);
  add_block(tr, bl.Cf, oph, olm);
  add_block(tr, rs.Xpu, oph, ouf, -1.0);
  add_block(tr, rs.Xpg, oph, ogf, -1.0);
  add_block(tr, rs.BnfE, oph, oc);
  add_block(tr, rs.Zpt, opp, oth, -1.0, true);
  add_block(tr, bl.Pft, oph, oth, -1.0, true);
  add_block(tr, bl.Ptt, oth, oth);
  add_block(tr, rs.Ztt, oth, oth);
  add_block(tr, bl.Cp, oth, olm);
  add_block(tr, rs.Ztu, oth, ous, -1.0);
  add_block(tr, rs.Ztg, oth, ogp, -1.0);
  add_block(tr, rs.Ypl, opp, olm, 1.0, true);
  add_block(tr, bl.Cf, oph, olm, -1.0, true);
  add_block(tr, bl.Cp, oth, olm, -1.0, true);
  add_block(tr, rs.Yll, olm, olm);
  add_block(tr, rs.Xpu, oph, ouf, -1.0, true);
  add_block(tr, rs.Xuu, ouf, ouf);
  add_block(tr, rs.Xug, ouf, ogf);
  add_block(tr, rs.BfE, ouf, oc, -1.0);
  add_block(tr, rs.Zpu, opp, ous, 1.0, true);
  add_block(tr, rs.Ztu, oth, ous, -1.0, true);
  add_block(tr, rs.Zuu, ous, ous);
  add_block(tr, rs.Zug, ous, ogp);
  add_block(tr, rs.Xpg, oph, ogf, -1.0, true);
  add_block(tr, rs.Xug, ouf, ogf, 1.0, true);
  add_block(tr, rs.Xgg, ogf, ogf);
  add_block(tr, rs.BskfE, ogf, oc, -1.0);
  add_block(tr, rs.Zpg, opp, ogp, 1.0, true);
  add_block(tr, rs.Ztg, oth, ogp, -1.0, true);
  add_block(tr, rs.Zug, ous, ogp, 1.0, true);
  add_block(tr, rs.Zgg, ogp, ogp);
  add_block(tr, rs.BnfE, oph, oc, -1.0, true);
  add_block(tr, rs.BfE, ouf, oc, 1.0, true);
  add_block(tr, rs.BskfE, ogf, oc, 1.0, true);
  SpMat M(o, o);
  M.setFromTriplets(tr.begin(), tr.end());
  return M;
}

// ---------------------------------------------------------------------------
// ReducedSolver: per-step RHS transformation, reduced solve, recovery
// ---------------------------------------------------------------------------
struct ReducedSolver {
  const FeSystem* fe;
  Blocks bl;  // vertex-quadrature blocks (owned copy)
  double dt;
  SpMat M0;   // unconstrained monolithic matrix, used for the essential lift
  std::vector<int> cons;
  ReducedSystem rs;

  ReducedSolver(const FeSystem& fe_, const Blocks& bl_, double dt_)
      : fe(&fe_), bl(bl_), dt(dt_) {
    if (bl.mode != QuadMode::vertex)
      throw InternalError("ReducedSolver requires vertex-quadrature blocks");
    M0 = assemble_monolithic(*fe, bl, dt);
    cons = constrained_dofs(*fe);
    rs = build_reduced(*fe, bl, dt);
  }

  // Returns the full solution in the monolithic global layout.
  Vec solve(const Rhs& r, const EssentialValues& ev) const {
    const FeSystem& f = *fe;
    const Vec lift = ev.global(f);
    Vec rhs = r.global(f) - M0 * lift;

    const Vec Fsf = rhs.segment(f.off_sigf, f.n_sigf);
    const Vec Fup = rhs.segment(f.off_up, f.n_up);
    const Vec Fsp = rhs.segment(f.off_sigp, f.n_sigp);
    const Vec Fpp = rhs.segment(f.off_pp, f.n_pp);
    const Vec Fph = rhs.segment(f.off_phi, f.n_phi);
    const Vec Fth = rhs.segment(f.off_th, f.n_th);
    const Vec Flm = rhs.segment(f.off_lam, f.n_lam);
    const Vec Fuf = rhs.segment(f.off_uf, f.n_uf);
    const Vec Fus = rhs.segment(f.off_us, f.n_us);
    const Vec Fgf = rhs.segment(f.off_gf, f.n_gf);
    const Vec Fgp = rhs.segment(f.off_gp, f.n_gp);

    const Vec DfF = rs.vb.Dsigf * Fsf;
    const Vec DuF = rs.vb.Dup * Fup;
    const Vec DpF = rs.vb.Dsigp * Fsp;

    const Vec Gph = Fph - bl.Bnf * DfF;
    const Vec Guf = Fuf + bl.Bf * DfF;
    const Vec Ggf = Fgf + bl.Bskf * DfF;
    const Vec Gc = rs.vb.E.transpose() * Fsf;
    const Vec Gpp = Fpp + bl.Bp * DuF - rs.S * DpF;
    const Vec Glm = Flm + bl.Bgam * DuF;
    const Vec Gth = Fth - bl.Bnp * DpF;
    const Vec Gus = Fus + bl.Bs * DpF;
    const Vec Ggp = Fgp + bl.Bskp * DpF;

    Vec G = Vec::Zero(rs.total);
    G.segment(rs.off_pp, f.n_pp) = Gpp + rs.Zpg * (rs.Dgp * Ggp);
    G.segment(rs.off_phi, f.n_phi) = Gph + rs.Xpg * (rs.Dgf * Ggf);
    G.segment(rs.off_th, f.n_th) = Gth + rs.Ztg * (rs.Dgp * Ggp);
    G.segment(rs.off_lam, f.n_lam) = Glm;
    G.segment(rs.off_uf, f.n_uf) = Guf - rs.Xug * (rs.Dgf * Ggf);
    G.segment(rs.off_us, f.n_us) = Gus - rs.Zug * (rs.Dgp * Ggp);
    G.segment(rs.off_c, rs.vb.n_c) = Gc - rs.BskfE.transpose() * (rs.Dgf * Ggf);

    Vec y = rs.lu->solve(G);
    if (rs.lu->info() != Eigen::Success) throw SolverError("reduced solve failed");

    const Vec pp = y.segment(rs.off_pp, f.n_pp);
    const Vec phi = y.segment(rs.off_phi, f.n_phi);
    const Vec th = y.segment(rs.off_th, f.n_th);
    const Vec lam = y.segment(rs.off_lam, f.n_lam);
    const Vec uf = y.segment(rs.off_uf, f.n_uf);
    const Vec us = y.segment(rs.off_us, f.n_us);
    const Vec c = y.segment(rs.off_c, rs.vb.n_c);

    // Recover the eliminated fields.
    const Vec gf = rs.Dgf * (Ggf + rs.Xpg.transpose() * phi - rs.Xug.transpose() * uf +
                             rs.BskfE * c);
    const Vec gp = rs.Dgp * (Ggp - rs.Zpg.transpose() * pp + rs.Ztg.transpose() * th -
                             rs.Zug.transpose() * us);
    const Vec sigf = rs.vb.Dsigf * (Fsf + bl.Bnf.transpose() * phi - bl.Bf.transpose() * uf -
                                    bl.Bskf.transpose() * gf) +
                     rs.vb.E * c;
    const Vec sigp = rs.vb.Dsigp * (Fsp - rs.S.transpose() * pp + bl.Bnp.transpose() * th -
                                    bl.Bs.transpose() * us - bl.Bskp.transpose() * gp);
    const Vec up = rs.vb.Dup * (Fup - bl.Bp.transpose() * pp - bl.Bgam.transpose() * lam);

    Vec x = lift;  // constrained DOFs keep their prescribed values
    x.segment(f.off_sigf, f.n_sigf) += sigf;
    x.segment(f.off_up, f.n_up) += up;
    x.segment(f.off_sigp, f.n_sigp) += sigp;
    x.segment(f.off_pp, f.n_pp) = pp;
    x.segment(f.off_phi, f.n_phi) = phi;
    x.segment(f.off_th, f.n_th) = th;
    x.segment(f.off_lam, f.n_lam) = lam;
    x.segment(f.off_uf, f.n_uf) = uf;
    x.segment(f.off_us, f.n_us) = us;
    x.segment(f.off_gf, f.n_gf) = gf;
    x.segment(f.off_gp, f.n_gp) = gp;
    return x;
  }
};

}  // namespace sbfem

#endif  // SBFEM_REDUCTION_HPP
