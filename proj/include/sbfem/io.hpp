#pragma once
// Output writers: legacy ASCII VTK (one file per subdomain per step), a
// per-step CSV summary, and Matrix Market dumps of sparse matrices.

#include <fstream>
#include <iomanip>

#include "sbfem/verify.hpp"  // field evaluators shared with the error norms

namespace sbfem {
namespace detail {

inline void vtk_header(std::ostream& os, const Mesh& m, const std::string& title) {
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << m.n_vertices() << " double\n";
  for (const Vec2& v : m.vertices) os << v.x() << ' ' << v.y() << " 0\n";
  os << "CELLS " << m.n_tris() << ' ' << 4 * m.n_tris() << '\n';
  for (const auto& t : m.tris) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "CELL_TYPES " << m.n_tris() << '\n';
  for (int t = 0; t < m.n_tris(); ++t) os << "5\n";
}

inline void vtk_cell_scalar(std::ostream& os, const std::string& name,
                            const std::vector<double>& v) {
  os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double x : v) os << x << '\n';
}

inline void vtk_cell_vector(std::ostream& os, const std::string& name,
                            const std::vector<Vec2>& v) {
  os << "VECTORS " << name << " double\n";
  for (const Vec2& x : v) os << x.x() << ' ' << x.y() << " 0\n";
}

// Averages the P1 (vertex-slot) field as-is; used for the rotations.
inline void vtk_point_scalar(std::ostream& os, const std::string& name, const Vec& v) {
  os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (int i = 0; i < v.size(); ++i) os << v[i] << '\n';
}

// Vertex-averages an elementwise-constant vector field.
inline std::vector<Vec2> vertex_average(const Mesh& m, const Vec& cellwise) {
  std::vector<Vec2> acc(m.n_vertices(), Vec2::Zero());
  std::vector<int> cnt(m.n_vertices(), 0);
  for (int t = 0; t < m.n_tris(); ++t)
    for (int k = 0; k < 3; ++k) {
      acc[m.tris[t][k]] += Vec2(cellwise[2 * t], cellwise[2 * t + 1]);
      ++cnt[m.tris[t][k]];
    }
  for (int v = 0; v < m.n_vertices(); ++v) acc[v] /= std::max(cnt[v], 1);
  return acc;
}

inline std::vector<Vec2> cell_avg_bdm(const Mesh& m, const Vec& c) {
  std::vector<Vec2> out(m.n_tris());
  for (int t = 0; t < m.n_tris(); ++t) {
    const ElementBasis eb = build_element_basis(m, t);
    out[t] = eval_bdm_h(m, eb, c, t, m.centroid(t));  // = cell average (linear field)
  }
  return out;
}

inline std::array<std::vector<Vec2>, 2> cell_avg_sigma(const Mesh& m, const Vec& c) {
  std::array<std::vector<Vec2>, 2> out{std::vector<Vec2>(m.n_tris()),
                                       std::vector<Vec2>(m.n_tris())};
  for (int t = 0; t < m.n_tris(); ++t) {
    const ElementBasis eb = build_element_basis(m, t);
    const Mat2 S = eval_sigma_h(m, eb, c, t, m.centroid(t));
    out[0][t] = S.row(0);
    out[1][t] = S.row(1);
  }
  return out;
}

}  // namespace detail

// Fluid-subdomain file: cell data u_f, p_f and the stress rows; point data
// gamma_f.
inline void write_vtk_fluid(const FeSystem& fe, const SolutionState& st,
                            const std::string& path) {
  const Mesh& m = *fe.mf;
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write VTK file '" + path + "'");
  os.precision(9);
  detail::vtk_header(os, m, "fluid subdomain t=" + std::to_string(st.t));
  os << "CELL_DATA " << m.n_tris() << '\n';
  std::vector<Vec2> uf(m.n_tris());
  std::vector<double> pf(m.n_tris());
  for (int t = 0; t < m.n_tris(); ++t) {
    uf[t] = Vec2(st.x[fe.off_uf + 2 * t], st.x[fe.off_uf + 2 * t + 1]);
    pf[t] = st.pf[t];
  }
  detail::vtk_cell_vector(os, "u_f", uf);
  detail::vtk_cell_scalar(os, "p_f", pf);
  const auto rows = detail::cell_avg_sigma(m, st.x.segment(fe.off_sigf, fe.n_sigf));
  detail::vtk_cell_vector(os, "sigma_f_row1", rows[0]);
  detail::vtk_cell_vector(os, "sigma_f_row2", rows[1]);
  os << "POINT_DATA " << m.n_vertices() << '\n';
  detail::vtk_point_scalar(os, "gamma_f", st.x.segment(fe.off_gf, fe.n_gf));
}

// Poroelastic-subdomain file: cell data p_p, u_s, u_p and the stress rows;
// point data gamma_p and the vertex-averaged displacement eta_p.
inline void write_vtk_poro(const FeSystem& fe, const SolutionState& st,
                           const std::string& path) {
  const Mesh& m = *fe.mp;
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write VTK file '" + path + "'");
  os.precision(9);
  detail::vtk_header(os, m, "poroelastic subdomain t=" + std::to_string(st.t));
  os << "CELL_DATA " << m.n_tris() << '\n';
  std::vector<Vec2> us(m.n_tris());
  std::vector<double> pp(m.n_tris());
  for (int t = 0; t < m.n_tris(); ++t) {
    us[t] = Vec2(st.x[fe.off_us + 2 * t], st.x[fe.off_us + 2 * t + 1]);
    pp[t] = st.x[fe.off_pp + t];
  }
  detail::vtk_cell_scalar(os, "p_p", pp);
  detail::vtk_cell_vector(os, "u_s", us);
  detail::vtk_cell_vector(os, "u_p", detail::cell_avg_bdm(m, st.x.segment(fe.off_up, fe.n_up)));
  const auto rows = detail::cell_avg_sigma(m, st.x.segment(fe.off_sigp, fe.n_sigp));
  detail::vtk_cell_vector(os, "sigma_p_row1", rows[0]);
  detail::vtk_cell_vector(os, "sigma_p_row2", rows[1]);
  os << "POINT_DATA " << m.n_vertices() << '\n';
  detail::vtk_point_scalar(os, "gamma_p", st.x.segment(fe.off_gp, fe.n_gp));
  os << "VECTORS eta_p double\n";
  for (const Vec2& v : detail::vertex_average(m, st.eta)) os << v.x() << ' ' << v.y() << " 0\n";
}

// Per-step summary row: discrete L2 norms of the main fields plus the
// interface mass residual.  Deterministic fixed formatting.
inline std::string csv_header() {
  return "step,t,uf_l2,pf_l2,pp_l2,up_l2,us_l2,eta_l2,mass_residual\n";
}

inline std::string csv_row(const FeSystem& fe, const Blocks& bl, const SolutionState& st,
                           int step, const Vec& f_lam) {
  auto p0_norm = [](const Mesh& m, const Vec& v, int comps) {
    double s = 0.0;
    for (int t = 0; t < m.n_tris(); ++t)
      for (int r = 0; r < comps; ++r) s += m.tri_area[t] * v[comps * t + r] * v[comps * t + r];
    return std::sqrt(s);
  };
  const Mesh& mf = *fe.mf;
  const Mesh& mp = *fe.mp;
  double up2 = 0.0;
  const auto up_avg = detail::cell_avg_bdm(mp, st.x.segment(fe.off_up, fe.n_up));
  for (int t = 0; t < mp.n_tris(); ++t) up2 += mp.tri_area[t] * up_avg[t].squaredNorm();
  std::ostringstream os;
  os << std::scientific << std::setprecision(10);
  os << step << ',' << st.t << ',' << p0_norm(mf, st.x.segment(fe.off_uf, fe.n_uf), 2) << ','
     << p0_norm(mf, st.pf, 1) << ',' << p0_norm(mp, st.x.segment(fe.off_pp, fe.n_pp), 1) << ','
     << std::sqrt(up2) << ',' << p0_norm(mp, st.x.segment(fe.off_us, fe.n_us), 2) << ','
     << p0_norm(mp, st.eta, 2) << ',' << interface_mass_residual(fe, bl, st.x, f_lam) << '\n';
  return os.str();
}

inline void write_matrix_market(const SpMat& M, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write matrix file '" + path + "'");
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << M.rows() << ' ' << M.cols() << ' ' << M.nonZeros() << '\n';
  os.precision(17);
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it)
      os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

}  // namespace sbfem
