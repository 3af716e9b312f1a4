// Command-line driver: transient runs from config files/presets, convergence
// studies, the property-check suite, and debug dumps of the reduced matrix.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "sbfem/config.hpp"
#include "sbfem/io.hpp"

namespace {

constexpr const char* kUsage =
    "usage: sbfem <command> [options]\n"
    "\n"
    "commands:\n"
    "  run --config FILE | --preset NAME   transient solve with output writers\n"
    "  convergence [--levels N] [--variant s1|s2] [--path reduced|monolithic]\n"
    "              [--out FILE]            manufactured-solution rate study (CSV)\n"
    "  verify                              property-check suite (exit 1 on failure)\n"
    "  dump-reduced [--config FILE | --preset NAME] [--out FILE]\n"
    "                                      reduced matrix in Matrix Market format\n"
    "\n"
    "exit codes: 0 success, 1 failed check, 2 configuration error\n";

std::map<std::string, std::string> parse_flags(int argc, char** argv, int from) {
  std::map<std::string, std::string> flags;
  for (int i = from; i < argc; ++i) {
    std::string a = argv[i];
    if (a.rfind("--", 0) != 0) throw sbfem::ConfigError("unexpected argument '" + a + "'");
    if (i + 1 >= argc) throw sbfem::ConfigError("flag '" + a + "' needs a value");
    flags[a.substr(2)] = argv[++i];
  }
  return flags;
}

sbfem::ProblemConfig config_from_flags(const std::map<std::string, std::string>& flags) {
  const bool has_cfg = flags.count("config"), has_preset = flags.count("preset");
  if (has_cfg == has_preset)
    throw sbfem::ConfigError("provide exactly one of --config or --preset");
  if (has_cfg) return sbfem::parse_config(flags.at("config"));
  sbfem::ProblemConfig c = sbfem::preset_config(flags.at("preset"));
  c.co.K = [perm = c.perm](const sbfem::Vec2&) {
    return (perm * sbfem::Mat2::Identity()).eval();
  };
  return c;
}

int cmd_run(const std::map<std::string, std::string>& flags) {
  using namespace sbfem;
  const ProblemConfig cfg = config_from_flags(flags);
  auto setup = build_setup(cfg);
  const FeSystem& fe = setup->fe;
  const TimeGrid grid(cfg.T, cfg.dt);
  Stepper st(fe, cfg.co, QuadMode::vertex, grid.dt, cfg.path);

  const std::filesystem::path dir(cfg.out.dir);
  std::filesystem::create_directories(dir);
  if (cfg.out.dump_reduced) {
    ReducedSolver red(fe, st.bl, grid.dt);
    write_matrix_market(red.rs.R, (dir / "reduced.mtx").string());
  }

  SolutionState state = setup->exact ? interpolate_state(fe, *setup->exact, 0.0)
                                     : construct_initial_state(fe, cfg.co, st.bl,
                                                               setup->pd, setup->init);
  std::ofstream csv;
  if (!cfg.out.csv.empty()) {
    csv.open((dir / cfg.out.csv).string());
    if (!csv) throw ConfigError("cannot write CSV file '" + cfg.out.csv + "'");
    csv << csv_header();
  }
  auto emit = [&](int m) {
    if (csv.is_open()) {
      const Rhs r = compute_rhs(fe, cfg.co, setup->pd, state.t);
      csv << csv_row(fe, st.bl, state, m, r.lam);
    }
    if (cfg.out.vtk_every > 0 && m % cfg.out.vtk_every == 0) {
      const std::string tag = std::to_string(m);
      write_vtk_fluid(fe, state, (dir / ("fluid_" + tag + ".vtk")).string());
      write_vtk_poro(fe, state, (dir / ("poro_" + tag + ".vtk")).string());
    }
  };
  emit(0);
  for (int m = 1; m <= grid.M; ++m) {
    state = st.step(state, setup->pd, m * grid.dt);
    emit(m);
  }
  std::cout << "run complete: " << grid.M << " steps, t = " << state.t << "\n";
  return 0;
}

int cmd_convergence(const std::map<std::string, std::string>& flags) {
  using namespace sbfem;
  StudyOptions opt;
  for (const auto& [k, v] : flags) {
    if (k == "levels") {
      opt.levels = std::stoi(v);
    } else if (k == "variant") {
      if (v == "s1")
        opt.variant = Variant::S1;
      else if (v == "s2")
        opt.variant = Variant::S2;
      else
        throw ConfigError("--variant: expected s1 or s2");
    } else if (k == "path") {
      if (v == "monolithic")
        opt.path = Path::monolithic;
      else if (v == "reduced")
        opt.path = Path::reduced;
      else
        throw ConfigError("--path: expected reduced or monolithic");
    } else if (k != "out") {
      throw ConfigError("unknown flag '--" + k + "'");
    }
  }
  const auto rows = convergence_study(opt);
  const std::string csv = errors_csv(rows);
  if (flags.count("out")) {
    std::ofstream os(flags.at("out"));
    if (!os) throw ConfigError("cannot write '" + flags.at("out") + "'");
    os << csv;
  } else {
    std::cout << csv;
  }
  return 0;
}

int cmd_verify() {
  const auto results = sbfem::property_suite();
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name
              << (r.detail.empty() ? "" : "  (" + r.detail + ")") << "\n";
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

int cmd_dump_reduced(const std::map<std::string, std::string>& flags) {
  using namespace sbfem;
  ProblemConfig cfg;
  if (flags.count("config") || flags.count("preset"))
    cfg = config_from_flags(flags);
  else
    cfg = preset_config("example1");
  auto setup = build_setup(cfg);
  const Blocks bl = assemble_blocks(setup->fe, cfg.co, QuadMode::vertex);
  ReducedSolver red(setup->fe, bl, cfg.dt);
  const std::string out = flags.count("out") ? flags.at("out") : "reduced.mtx";
  write_matrix_market(red.rs.R, out);
  std::cout << "wrote " << out << " (" << red.rs.total << " x " << red.rs.total << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("SOLVER_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) Eigen::setNbThreads(n);
  }
  if (argc < 2) {
    std::cerr << kUsage;
    return 2;
  }
  const std::string cmd = argv[1];
  try {
    if (cmd == "run") return cmd_run(parse_flags(argc, argv, 2));
    if (cmd == "convergence") return cmd_convergence(parse_flags(argc, argv, 2));
    if (cmd == "verify") return cmd_verify();
    if (cmd == "dump-reduced") return cmd_dump_reduced(parse_flags(argc, argv, 2));
    std::cerr << "unknown command '" << cmd << "'\n\n" << kUsage;
    return 2;
  } catch (const sbfem::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
