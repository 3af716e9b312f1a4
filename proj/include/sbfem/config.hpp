#pragma once
// Configuration: TOML-style key/value files, example presets, and assembly of
// the full runtime problem (meshes, boundary layout, data closures).

#include <fstream>
#include <optional>
#include <sstream>

#include "sbfem/verify.hpp"

namespace sbfem {

struct OutputConfig {
  int vtk_every = 0;       // write VTK files every N steps (0 = never)
  std::string csv;         // per-step summary CSV path ("" = none)
  bool dump_reduced = false;
  std::string dir = ".";   // output directory
};

struct MeshConfig {
  int nf = 8;  // fluid cells per unit length
  int np = 5;  // poroelastic cells per unit length
  std::string fluid_file, poro_file;  // optional external meshes (custom preset)
};

struct ProblemConfig {
  std::string preset = "custom";
  Coefficients co;
  double perm = 1.0;  // isotropic permeability (K = perm * I)
  Variant variant = Variant::S2;
  Path path = Path::reduced;
  MeshConfig mesh;
  double T = 1.0, dt = 0.1;
  unsigned seed = 1;
  OutputConfig out;
};

inline ProblemConfig preset_config(const std::string& name) {
  ProblemConfig c;
  c.preset = name;
  if (name == "example1") {
    c.T = 0.01;
    c.dt = 1e-3;
    c.mesh.nf = 8;
    c.mesh.np = 5;
  } else if (name == "example2") {
    c.T = 3.0;
    c.dt = 0.06;
    c.mesh.nf = 40;
    c.mesh.np = 40;
  } else if (name == "example3") {
    c.co.mu = 1e-6;
    c.co.alpha_p = 1.0;
    c.co.lam_p = 5.0 / 18.0 * 1e7;
    c.co.mu_p = 5.0 / 12.0 * 1e7;
    c.co.s0 = 6.89e-2;
    c.co.alpha_bjs = 1.0;
    c.perm = 1e-8;
    c.T = 10.0;
    c.dt = 0.05;
    c.mesh.nf = 64;  // one structured grid partitioned into cavity + matrix
    c.mesh.np = 64;
  } else if (name != "custom") {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

// ---------------------------------------------------------------------------
// TOML-style parsing
// ---------------------------------------------------------------------------
namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

inline double parse_double(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

inline long parse_int(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

}  // namespace detail

inline ProblemConfig parse_config_text(const std::string& text) {
  // First pass: locate the preset so its defaults apply before overrides.
  std::vector<std::pair<std::string, std::string>> entries;  // full key -> value
  {
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
        section = detail::trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string val = detail::unquote(detail::trim(line.substr(eq + 1)));
      entries.emplace_back(section.empty() ? key : section + "." + key, val);
    }
  }

  ProblemConfig c;
  for (const auto& [k, v] : entries)
    if (k == "preset") c = preset_config(v);

  for (const auto& [k, v] : entries) {
    if (k == "preset") {
      // already applied
    } else if (k == "variant") {
      if (v == "s1")
        c.variant = Variant::S1;
      else if (v == "s2")
        c.variant = Variant::S2;
      else
        throw ConfigError("key 'variant': expected s1 or s2, got '" + v + "'");
    } else if (k == "path") {
      if (v == "monolithic")
        c.path = Path::monolithic;
      else if (v == "reduced")
        c.path = Path::reduced;
      else
        throw ConfigError("key 'path': expected monolithic or reduced, got '" + v + "'");
    } else if (k == "seed") {
      c.seed = static_cast<unsigned>(detail::parse_int(v, k));
    } else if (k == "coefficients.mu") {
      c.co.mu = detail::parse_double(v, k);
    } else if (k == "coefficients.mu_p") {
      c.co.mu_p = detail::parse_double(v, k);
    } else if (k == "coefficients.lam_p") {
      c.co.lam_p = detail::parse_double(v, k);
    } else if (k == "coefficients.alpha_p") {
      c.co.alpha_p = detail::parse_double(v, k);
    } else if (k == "coefficients.s0") {
      c.co.s0 = detail::parse_double(v, k);
    } else if (k == "coefficients.alpha_bjs") {
      c.co.alpha_bjs = detail::parse_double(v, k);
    } else if (k == "coefficients.k") {
      c.perm = detail::parse_double(v, k);
    } else if (k == "mesh.nf") {
      c.mesh.nf = static_cast<int>(detail::parse_int(v, k));
    } else if (k == "mesh.np") {
      c.mesh.np = static_cast<int>(detail::parse_int(v, k));
    } else if (k == "mesh.fluid_file") {
      c.mesh.fluid_file = v;
    } else if (k == "mesh.poro_file") {
      c.mesh.poro_file = v;
    } else if (k == "time.T") {
      c.T = detail::parse_double(v, k);
    } else if (k == "time.dt") {
      c.dt = detail::parse_double(v, k);
    } else if (k == "output.vtk_every") {
      c.out.vtk_every = static_cast<int>(detail::parse_int(v, k));
    } else if (k == "output.csv") {
      c.out.csv = v;
    } else if (k == "output.dump_reduced") {
      c.out.dump_reduced = detail::parse_bool(v, k);
    } else if (k == "output.dir") {
      c.out.dir = v;
    } else {
      throw ConfigError("unknown key '" + k + "'");
    }
  }

  c.co.K = [perm = c.perm](const Vec2&) { return (perm * Mat2::Identity()).eval(); };
  c.co.validate();
  if (!(c.perm > 0.0)) throw ConfigError("key 'coefficients.k': must be positive");
  if (!(c.T > 0.0)) throw ConfigError("key 'time.T': must be positive");
  if (!(c.dt > 0.0)) throw ConfigError("key 'time.dt': must be positive");
  if (c.mesh.nf < 1 || c.mesh.np < 1) throw ConfigError("key 'mesh.nf/np': must be >= 1");
  if (c.out.vtk_every < 0) throw ConfigError("key 'output.vtk_every': must be >= 0");
  return c;
}

inline ProblemConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config_text(os.str());
}

inline std::string serialize_config(const ProblemConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "preset = " << c.preset << "\n"
     << "variant = " << (c.variant == Variant::S1 ? "s1" : "s2") << "\n"
     << "path = " << (c.path == Path::monolithic ? "monolithic" : "reduced") << "\n"
     << "seed = " << c.seed << "\n\n[coefficients]\n"
     << "mu = " << c.co.mu << "\nmu_p = " << c.co.mu_p << "\nlam_p = " << c.co.lam_p
     << "\nalpha_p = " << c.co.alpha_p << "\ns0 = " << c.co.s0
     << "\nalpha_bjs = " << c.co.alpha_bjs << "\nk = " << c.perm << "\n\n[mesh]\n"
     << "nf = " << c.mesh.nf << "\nnp = " << c.mesh.np << "\n";
  if (!c.mesh.fluid_file.empty()) os << "fluid_file = \"" << c.mesh.fluid_file << "\"\n";
  if (!c.mesh.poro_file.empty()) os << "poro_file = \"" << c.mesh.poro_file << "\"\n";
  os << "\n[time]\nT = " << c.T << "\ndt = " << c.dt << "\n\n[output]\n"
     << "vtk_every = " << c.out.vtk_every << "\n";
  if (!c.out.csv.empty()) os << "csv = \"" << c.out.csv << "\"\n";
  os << "dump_reduced = " << (c.out.dump_reduced ? "true" : "false") << "\ndir = \""
     << c.out.dir << "\"\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Runtime problem assembly
// ---------------------------------------------------------------------------
struct ProblemSetup {
  ProblemConfig cfg;
  Mesh mf, mp;
  InterfaceMesh iface;
  FeSystem fe;
  ProblemData pd;
  InitialData init;                 // used when exact is absent
  std::optional<ExactFields> exact;  // analytic initial data (examples 1 and 3)
};

namespace detail {

// Irregular star-shaped cavity with a channel reaching the right boundary.
// The figure-only geometry of the cavity example is reconstructed
// qualitatively; any interior region bounded by grid edges works.
inline bool cavity_inside(const Vec2& p) {
  const Vec2 c(0.45, 0.5);
  const Vec2 d = p - c;
  const double th = std::atan2(d.y(), d.x());
  const double r = 0.18 + 0.07 * std::sin(3.0 * th) + 0.05 * std::cos(5.0 * th);
  if (d.norm() < r) return true;
  return p.x() > 0.45 && std::abs(p.y() - 0.5) < 0.08;  // outflow channel
}

}  // namespace detail

inline std::unique_ptr<ProblemSetup> build_setup(const ProblemConfig& cfg) {
  auto s = std::make_unique<ProblemSetup>();
  s->cfg = cfg;
  const std::string& pr = cfg.preset;

  if (pr == "example1") {
    s->mf = build_rect_mesh(0, 0, 1, 1, cfg.mesh.nf, cfg.mesh.nf, Diag::left);
    s->mp = build_rect_mesh(0, -1, 1, 0, cfg.mesh.np, cfg.mesh.np, Diag::left);
    mark_interface(s->mf, "bottom");
    mark_interface(s->mp, "top");
    s->iface = build_interface(s->mf, s->mp);
    MmsParams mprm;
    mprm.mu = cfg.co.mu;
    mprm.mu_p = cfg.co.mu_p;
    mprm.lam_p = cfg.co.lam_p;
    mprm.alpha_p = cfg.co.alpha_p;
    mprm.s0 = cfg.co.s0;
    mprm.k = cfg.perm;
    const Mms mms{mprm};
    s->fe = build_fe_system(s->mf, s->mp, s->iface, cfg.variant, example1_bc());
    s->pd = example1_problem(mms);
    s->exact = example1_fields(mms);
  } else if (pr == "example2") {
    const int nx = 2 * cfg.mesh.nf, ny = cfg.mesh.nf;
    const int px = 2 * cfg.mesh.np, py = cfg.mesh.np;
    s->mf = build_rect_mesh(0, 0, 2, 1, nx, ny, Diag::left);
    s->mp = build_rect_mesh(0, -1, 2, 0, px, py, Diag::left);
    mark_interface(s->mf, "bottom");
    mark_interface(s->mp, "top");
    s->iface = build_interface(s->mf, s->mp);
    BcSpec bc;
    bc.fluid["left"] = FluidBc::velocity;   // parabolic inflow
    bc.fluid["top"] = FluidBc::velocity;    // no slip
    bc.fluid["right"] = FluidBc::traction;  // traction free
    bc.darcy["bottom"] = DarcyBc::pressure;  // drained
    bc.elas["bottom"] = ElasBc::traction;    // traction free
    bc.darcy["left"] = DarcyBc::flux;        // impermeable
    bc.darcy["right"] = DarcyBc::flux;
    bc.elas["left"] = ElasBc::displacement;  // clamped
    bc.elas["right"] = ElasBc::displacement;
    s->fe = build_fe_system(s->mf, s->mp, s->iface, cfg.variant, bc);
    s->pd.fluid_velocity["left"] = [](const Vec2& p, double) {
      return Vec2(-40.0 * p.y() * (p.y() - 1.0), 0.0);
    };
    // All other data (loads, sources, remaining boundary values) are zero.
  } else if (pr == "example3") {
    // Classify whole grid squares so the cavity boundary stays axis-aligned
    // (a per-triangle split would expose diagonal interface edges).
    const int n = cfg.mesh.nf;
    auto cellwise = [n](const Vec2& p) {
      const double cx = (std::floor(p.x() * n) + 0.5) / n;
      const double cy = (std::floor(p.y() * n) + 0.5) / n;
      return detail::cavity_inside(Vec2(cx, cy));
    };
    auto parts = build_partitioned_mesh(0, 0, 1, 1, n, n, cellwise, Diag::left);
    s->mf = std::move(parts.first);
    s->mp = std::move(parts.second);
    s->iface = build_interface(s->mf, s->mp);
    BcSpec bc;
    bc.fluid["right"] = FluidBc::traction_normal_noslip;
    bc.darcy["left"] = DarcyBc::pressure;
    bc.darcy["right"] = DarcyBc::pressure;
    bc.darcy["top"] = DarcyBc::flux;
    bc.darcy["bottom"] = DarcyBc::flux;
    bc.elas["left"] = ElasBc::traction;
    bc.elas["right"] = ElasBc::traction;
    bc.elas["top"] = ElasBc::displacement;
    bc.elas["bottom"] = ElasBc::displacement;
    s->fe = build_fe_system(s->mf, s->mp, s->iface, cfg.variant, bc);
    // Pressure drop ramped over [0, 0.5] s to stay consistent with the
    // initial condition p_p = 1000.
    auto ramp = [](double t) { return 1000.0 + std::min(std::max(t, 0.0) / 0.5, 1.0); };
    const double ap = cfg.co.alpha_p;
    // Outflow datum: compressive normal traction of magnitude 1000, i.e.
    // (sigma_f n).n = -1000, consistent with the normal-stress balance
    // against p_p = 1000 at equilibrium.
    s->pd.fluid_traction_normal["right"] = [](const Vec2&, double) { return -1000.0; };
    s->pd.darcy_pressure["left"] = [ramp](const Vec2&, double t) { return ramp(t); };
    s->pd.darcy_pressure["right"] = [](const Vec2&, double) { return 1000.0; };
    s->pd.elas_traction["left"] = [ramp, ap](const Vec2&, double t) {
      return (-ap * ramp(t) * Vec2(-1, 0)).eval();  // sigma_p n_out = -alpha_p p_p n
    };
    s->pd.elas_traction["right"] = [ap](const Vec2&, double) {
      return (-ap * 1000.0 * Vec2(1, 0)).eval();
    };
    // The t=0 data admits an exact uniform hydrostatic state: pressure 1000
    // everywhere, sigma = -1000 I, zero velocities and displacement.  It is
    // exactly representable in the discrete spaces and satisfies every
    // time-independent equation, so it is used as the initial condition.
    ExactFields ex;
    auto zero_v = [](const Vec2&, double) { return Vec2::Zero().eval(); };
    auto zero_s = [](const Vec2&, double) { return 0.0; };
    auto hyd = [](const Vec2&, double) { return (-1000.0 * Mat2::Identity()).eval(); };
    ex.u_f = ex.u_s = ex.u_p = ex.eta_p = zero_v;
    ex.sigma_f = ex.sigma_p = hyd;
    ex.gamma_f = ex.gamma_p = zero_s;
    ex.p_p = ex.p_f = [](const Vec2&, double) { return 1000.0; };
    s->exact = ex;
    s->init.p_p0 = [](const Vec2&, double) { return 1000.0; };
  } else if (pr == "custom") {
    if (cfg.mesh.fluid_file.empty() || cfg.mesh.poro_file.empty())
      throw ConfigError("custom preset requires mesh.fluid_file and mesh.poro_file");
    s->mf = read_mesh(cfg.mesh.fluid_file);
    s->mp = read_mesh(cfg.mesh.poro_file);
    s->iface = build_interface(s->mf, s->mp);
    BcSpec bc;  // zero-data defaults: velocity/pressure/displacement everywhere
    for (int e = 0; e < s->mf.n_edges(); ++e)
      if (s->mf.edge_tri[e][1] < 0 && s->mf.edge_tag[e] != "interface")
        bc.fluid[s->mf.edge_tag[e]] = FluidBc::velocity;
    for (int e = 0; e < s->mp.n_edges(); ++e)
      if (s->mp.edge_tri[e][1] < 0 && s->mp.edge_tag[e] != "interface") {
        bc.darcy[s->mp.edge_tag[e]] = DarcyBc::pressure;
        bc.elas[s->mp.edge_tag[e]] = ElasBc::displacement;
      }
    s->fe = build_fe_system(s->mf, s->mp, s->iface, cfg.variant, bc);
  } else {
    throw ConfigError("unknown preset '" + pr + "'");
  }
  return s;
}

}  // namespace sbfem
