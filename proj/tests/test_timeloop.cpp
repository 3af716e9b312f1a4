#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sbfem/mms.hpp"
#include "sbfem/timeloop.hpp"

using namespace sbfem;

namespace {

struct Setup {
  Mesh mf, mp;
  InterfaceMesh iface;
  FeSystem fe;
};

// Fluid (0,1)^2 over poroelastic (0,1)x(-1,0); reference mixed BC layout:
// fluid velocity data left/right (natural) and traction on top (essential);
// Darcy pressure data left/right (natural) and flux on bottom (essential);
// elastic displacement data left/right (natural), traction on bottom.
BcSpec reference_bc() {
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

Setup make_setup(int nf, int np, const BcSpec& bc) {
  Setup s;
  s.mf = build_rect_mesh(0, 0, 1, 1, nf, nf, Diag::left);
  s.mp = build_rect_mesh(0, -1, 1, 0, np, np, Diag::left);
  mark_interface(s.mf, "bottom");
  mark_interface(s.mp, "top");
  s.iface = build_interface(s.mf, s.mp);
  s.fe = build_fe_system(s.mf, s.mp, s.iface, Variant::S2, bc);
  return s;
}

ProblemData mms_problem(const Mms& mms) {
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

ExactFields mms_fields(const Mms& mms) {
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

}  // namespace

TEST_CASE("time grid requires an integer number of steps") {
  TimeGrid g(0.01, 1e-3);
  CHECK(g.M == 10);
  CHECK_THROWS_AS(TimeGrid(1.0, 0.3), ConfigError);
  CHECK_THROWS_AS(TimeGrid(-1.0, 0.1), ConfigError);
}

TEST_CASE("both paths advance identically over several steps") {
  Setup s = make_setup(3, 2, reference_bc());
  Mms mms;  // unit parameters match the default coefficients
  Coefficients co;
  ProblemData pd = mms_problem(mms);
  ExactFields ex = mms_fields(mms);
  const TimeGrid grid(0.03, 0.01);

  Stepper sm(s.fe, co, QuadMode::vertex, grid.dt, Path::monolithic);
  Stepper sr(s.fe, co, QuadMode::vertex, grid.dt, Path::reduced);
  CHECK(sm.factorizations == 1);
  CHECK(sr.factorizations == 1);
  SolutionState init = interpolate_state(s.fe, ex, 0.0);
  auto hm = run_transient(sm, grid, pd, init);
  auto hr = run_transient(sr, grid, pd, init);
  REQUIRE(hm.size() == 4);
  for (size_t m = 1; m < hm.size(); ++m) {
    CAPTURE(m);
    const double sc = 1.0 + hm[m].x.norm();
    CHECK((hm[m].x - hr[m].x).norm() < 1e-8 * sc);
    CHECK((hm[m].eta - hr[m].eta).norm() < 1e-8 * sc);
    CHECK((hm[m].pf - hr[m].pf).norm() < 1e-8 * sc);
    // eta accumulation is exact (bitwise) by construction.
    const Vec expect = hm[m - 1].eta + grid.dt * hm[m].x.segment(s.fe.off_us, s.fe.n_us);
    CHECK((expect.array() == hm[m].eta.array()).all());
    // Interface conservation residuals (solved rows).
    Rhs r = compute_rhs(s.fe, co, pd, hm[m].t);
    CHECK(interface_mass_residual(s.fe, sm.bl, hm[m].x, r.lam) < 1e-9 * sc);
    CHECK(interface_momentum_residual(s.fe, sm.bl, hm[m].x, r.phi, r.th) < 1e-9 * sc);
  }
}

TEST_CASE("zero data and zero initial state stay zero") {
  Setup s = make_setup(2, 2, reference_bc());
  Coefficients co;
  Stepper st(s.fe, co, QuadMode::vertex, 0.1, Path::reduced);
  auto hist = run_transient(st, TimeGrid(0.5, 0.1), ProblemData{}, SolutionState::zero(s.fe));
  for (const auto& st_m : hist) {
    CHECK(st_m.x.norm() == 0.0);
    CHECK(st_m.eta.norm() == 0.0);
    CHECK(st_m.pf.norm() == 0.0);
  }
}

TEST_CASE("a steady solution is reproduced exactly and post-processed correctly") {
  // Constant-in-time solution: u_f = u_s = c, p_f = p_p = lambda = 1,
  // sigma_f = sigma_p = -I; backward Euler reproduces it exactly.
  Setup s = make_setup(3, 3, reference_bc());
  Coefficients co;
  co.mu = 0.7;
  co.mu_p = 1.5;
  co.lam_p = 0.3;
  const Vec2 c(0.4, -0.8);
  ProblemData pd;
  pd.fluid_velocity["left"] = pd.fluid_velocity["right"] =
      [c](const Vec2&, double) { return c; };
  pd.fluid_traction["top"] = [](const Vec2&, double) { return Vec2(0, -1); };
  pd.darcy_pressure["left"] = pd.darcy_pressure["right"] =
      [](const Vec2&, double) { return 1.0; };
  pd.darcy_flux["bottom"] = [](const Vec2&, double) { return 0.0; };
  pd.elas_displacement["left"] = pd.elas_displacement["right"] =
      [c](const Vec2&, double) { return c; };
  pd.elas_traction["bottom"] = [](const Vec2&, double) { return Vec2(0, 1); };

  SolutionState init = SolutionState::zero(s.fe);
  init.x.segment(s.fe.off_sigf, s.fe.n_sigf) =
      interp_sigma(s.mf, [](const Vec2&) { return (-Mat2::Identity()).eval(); });
  init.x.segment(s.fe.off_sigp, s.fe.n_sigp) =
      interp_sigma(s.mp, [](const Vec2&) { return (-Mat2::Identity()).eval(); });
  init.x.segment(s.fe.off_pp, s.fe.n_pp).setConstant(1.0);

  Stepper st(s.fe, co, QuadMode::vertex, 0.25, Path::reduced);
  auto hist = run_transient(st, TimeGrid(0.5, 0.25), pd, init);
  for (size_t m = 1; m < hist.size(); ++m) {
    CAPTURE(m);
    const Vec& x = hist[m].x;
    CHECK((x.segment(s.fe.off_pp, s.fe.n_pp).array() - 1.0).abs().maxCoeff() < 1e-10);
    CHECK((x.segment(s.fe.off_uf, s.fe.n_uf) -
           interp_p0_vec(s.mf, [c](const Vec2&) { return c; }))
              .norm() < 1e-10);
    // Post-processed pressure: p_f = -(1/2) tr(-I) = 1 (q_f = 0).
    CHECK((hist[m].pf.array() - 1.0).abs().maxCoeff() < 1e-10);
    // eta grows linearly: eta^m = m*dt*c on every cell.
    const double fac = m * 0.25;
    CHECK((hist[m].eta - fac * interp_p0_vec(s.mp, [c](const Vec2&) { return c; })).norm() <
          1e-9);
  }
}

TEST_CASE("zero-data evolution dissipates the poroelastic energy") {
  Setup s = make_setup(2, 3, reference_bc());
  Coefficients co;
  co.s0 = 0.2;
  Stepper st(s.fe, co, QuadMode::vertex, 0.05, Path::reduced);
  auto energy = [&](const SolutionState& state) {
    const Vec sp = state.x.segment(s.fe.off_sigp, s.fe.n_sigp);
    const Vec pp = state.x.segment(s.fe.off_pp, s.fe.n_pp);
    return sp.dot(st.bl.Ess * sp) + 2.0 * sp.dot(st.bl.Esp * pp) +
           pp.dot((st.bl.epp + st.bl.ms0).cwiseProduct(pp));
  };
  // Random compatible initial data: solve one step from a random history so
  // the state lies on the discrete solution manifold, then switch off data.
  SolutionState state = SolutionState::zero(s.fe);
  state.x.segment(s.fe.off_sigp, s.fe.n_sigp) = Vec::Random(s.fe.n_sigp);
  state.x.segment(s.fe.off_pp, s.fe.n_pp) = Vec::Random(s.fe.n_pp);
  state = st.step(state, ProblemData{}, 0.05);
  double e_prev = energy(state);
  CHECK(e_prev > 0.0);
  for (int m = 2; m <= 11; ++m) {
    state = st.step(state, ProblemData{}, m * 0.05);
    const double e = energy(state);
    CHECK(e <= e_prev * (1.0 + 1e-12));
    e_prev = e;
  }
  CHECK(std::isfinite(e_prev));
}

TEST_CASE("discrete initial construction: zero data gives the zero state") {
  Setup s = make_setup(2, 2, reference_bc());
  Coefficients co;
  Blocks bl = assemble_blocks(s.fe, co, QuadMode::vertex);
  SolutionState st = construct_initial_state(s.fe, co, bl, ProblemData{}, InitialData{});
  CHECK(st.x.norm() < 1e-12);
  CHECK(st.eta.norm() < 1e-12);
  CHECK(st.pf.norm() < 1e-12);
}

TEST_CASE("interface projection reproduces linear traces exactly") {
  Setup s = make_setup(3, 4, reference_bc());
  auto lin = [](const Vec2& p, double) { return Vec2(2.0 * p.x() - 1.0, 0.5 + p.x()); };
  const Vec proj = trace_l2_projection(s.fe, false, lin, 0.0);
  const Vec nodal = interp_trace_vec(s.fe, false, [&](const Vec2& p) { return lin(p, 0.0); });
  CHECK((proj - nodal).norm() < 1e-12);
}

TEST_CASE("discrete initial data satisfies the time-independent rows") {
  Setup s = make_setup(4, 3, reference_bc());
  Mms mms;
  Coefficients co;
  Blocks bl = assemble_blocks(s.fe, co, QuadMode::vertex);
  ProblemData pd = mms_problem(mms);
  InitialData id;
  id.p_p0 = [mms](const Vec2& p, double) { return mms.p_p(p.x(), p.y(), 0.0); };
  id.theta0 = [mms](const Vec2& p, double) { return mms.u_s_v(p, 0.0); };
  id.div_up0 = [mms](const Vec2& p, double) {
    // div u_p = (k/mu) * (5 pi^2/4) p_p for this solution
    return mms.prm.k / mms.prm.mu * (5.0 * M_PI * M_PI / 4.0) * mms.p_p(p.x(), p.y(), 0.0);
  };
  SolutionState st = construct_initial_state(s.fe, co, bl, pd, id);

  const FeSystem& fe = s.fe;
  const Rhs r0 = compute_rhs(fe, co, pd, 0.0);
  const Vec sigf = st.x.segment(fe.off_sigf, fe.n_sigf), up = st.x.segment(fe.off_up, fe.n_up);
  const Vec sigp = st.x.segment(fe.off_sigp, fe.n_sigp), pp = st.x.segment(fe.off_pp, fe.n_pp);
  const Vec phi = st.x.segment(fe.off_phi, fe.n_phi), th = st.x.segment(fe.off_th, fe.n_th);
  const Vec lam = st.x.segment(fe.off_lam, fe.n_lam), uf = st.x.segment(fe.off_uf, fe.n_uf);
  const Vec gf = st.x.segment(fe.off_gf, fe.n_gf), gp = st.x.segment(fe.off_gp, fe.n_gp);
  const double sc = 1.0 + st.x.norm();

  Vec rsf = bl.Af * sigf - bl.Bnf.transpose() * phi + bl.Bf.transpose() * uf +
            bl.Bskf.transpose() * gf - r0.sigf;
  for (int i = 0; i < fe.n_sigf; ++i)
    if (fe.ess_sigf[i]) rsf[i] = 0.0;  // essential rows replaced by BC values
  CHECK(rsf.norm() < 1e-8 * sc);
  Vec rup = bl.Ap * up + bl.Bp.transpose() * pp + bl.Bgam.transpose() * lam - r0.up;
  for (int i = 0; i < fe.n_up; ++i)
    if (fe.ess_up[i]) rup[i] = 0.0;
  CHECK(rup.norm() < 1e-8 * sc);
  CHECK((bl.Bnf * sigf + bl.Pff * phi - bl.Pft * th + bl.Cf * lam - r0.phi).norm() <
        1e-8 * sc);
  CHECK((bl.Bnp * sigp - bl.Pft.transpose() * phi + bl.Ptt * th + bl.Cp * lam - r0.th)
            .norm() < 1e-8 * sc);
  CHECK((-bl.Bgam * up - bl.Cf.transpose() * phi - bl.Cp.transpose() * th - r0.lam).norm() <
        1e-8 * sc);
  CHECK((-bl.Bf * sigf - r0.uf).norm() < 1e-8 * sc);
  CHECK((-bl.Bs * sigp - r0.us).norm() < 1e-8 * sc);
  CHECK((-bl.Bskf * sigf - r0.gf).norm() < 1e-8 * sc);
  CHECK((-bl.Bskp * sigp - r0.gp).norm() < 1e-8 * sc);

  // The essential DOFs hold their boundary values.
  const EssentialValues ev = essential_values(fe, pd, 0.0);
  for (int i = 0; i < fe.n_sigf; ++i)
    if (fe.ess_sigf[i]) CHECK(sigf[i] == Catch::Approx(ev.sigf[i]).margin(1e-12));
}
