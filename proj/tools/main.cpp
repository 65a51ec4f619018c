// Command-line front end: validate configs, run simulations with online
// monitors, run refinement sweeps, and recompute diagnostics on stored
// trajectories.
//
// Exit codes: 0 success / all monitors pass; 2 inadmissible or unusable
// configuration; 3 monitor failure; 4 solver failure.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "crossdiff/diagnostics.hpp"
#include "crossdiff/io.hpp"
#include "crossdiff/oracles.hpp"
#include "crossdiff/stepper.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace crossdiff;

namespace {

constexpr const char* kVersion = "crossdiff 1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitMonitor = 3;
constexpr int kExitSolver = 4;

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << "error: " << kind << ": " << message << "\n";
}

json params_to_json(const ParamSet& p) {
  return json{{"d_u", p.d_u},     {"d_v", p.d_v},         {"d_alpha", p.d_alpha},
              {"d_beta", p.d_beta}, {"d_gamma", p.d_gamma}, {"r_u", p.r_u},
              {"r_v", p.r_v},     {"r_a", p.r_a},         {"r_b", p.r_b},
              {"r_c", p.r_c},     {"r_d", p.r_d},         {"a", p.a},
              {"b", p.b},         {"c", p.c},             {"d", p.d},
              {"alpha", p.alpha}, {"beta", p.beta},       {"gamma", p.gamma},
              {"strict_validation", p.strict_validation}};
}

ParamSet params_from_json(const json& j) {
  ParamSet p;
  p.d_u = j.at("d_u");
  p.d_v = j.at("d_v");
  p.d_alpha = j.at("d_alpha");
  p.d_beta = j.at("d_beta");
  p.d_gamma = j.at("d_gamma");
  p.r_u = j.at("r_u");
  p.r_v = j.at("r_v");
  p.r_a = j.at("r_a");
  p.r_b = j.at("r_b");
  p.r_c = j.at("r_c");
  p.r_d = j.at("r_d");
  p.a = j.at("a");
  p.b = j.at("b");
  p.c = j.at("c");
  p.d = j.at("d");
  p.alpha = j.at("alpha");
  p.beta = j.at("beta");
  p.gamma = j.at("gamma");
  p.strict_validation = j.at("strict_validation");
  return p;
}

struct MonitorSelection {
  std::set<std::string> enabled;

  bool has(const std::string& group) const { return enabled.count(group) > 0; }

  static MonitorSelection parse(const std::string& list) {
    static const std::set<std::string> known{"max_v",     "mass",      "duality",
                                             "entropy_v", "entropy_u", "log_entropy",
                                             "dual_probe", "regularity"};
    MonitorSelection sel;
    if (list.empty()) {
      sel.enabled = known;
      sel.enabled.erase("dual_probe");  // needs an explicit request
      return sel;
    }
    std::istringstream in(list);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      if (known.count(tok) == 0) {
        throw ConfigError("unknown monitor name: " + tok);
      }
      sel.enabled.insert(tok);
    }
    return sel;
  }
};

std::string series_group(const std::string& name) {
  if (name == "max_v") return "max_v";
  if (name == "mass_u") return "mass";
  if (name == "duality_u") return "duality";
  if (name.rfind("entropy_v", 0) == 0) return "entropy_v";
  if (name.rfind("entropy_u", 0) == 0) return "entropy_u";
  if (name.rfind("log_entropy", 0) == 0) return "log_entropy";
  return "";
}

// Applies the selection, computes diagnostics, writes per-monitor CSVs and
// fills the JSON summary. Returns true when every enabled monitor passes.
bool emit_diagnostics(const Trajectory& traj, const MonitorSelection& sel,
                      const fs::path& outdir, bool snapshot_resolution,
                      std::vector<std::string>& files, json& summary) {
  DiagnosticsConfig cfg = DiagnosticsConfig::defaults_for(traj.params);
  if (sel.has("dual_probe")) {
    DualProbeSpec spec;
    spec.forcing = [](double, double, double) { return -1.0; };
    cfg.dual_probe = spec;
  }
  if (!sel.has("regularity")) cfg.regularity_exponents.clear();
  DiagnosticsReport report = run_diagnostics(traj, cfg);
  report.snapshot_resolution = snapshot_resolution;

  bool all_pass = true;
  json monitors = json::object();
  for (const MonitorSeries& s : report.series) {
    const std::string group = series_group(s.name);
    if (group.empty() || !sel.has(group)) continue;
    const fs::path file = outdir / ("monitor_" + s.name + ".csv");
    write_monitor_csv(file, s);
    files.push_back(file.filename().string());
    json entry{{"status", to_string(s.status)},
               {"worst_margin", s.worst_margin},
               {"tolerance", s.tolerance}};
    if (!s.value.empty()) entry["final_value"] = s.value.back();
    if (!s.note.empty()) entry["note"] = s.note;
    monitors[s.name] = entry;
    if (s.status == MonitorStatus::Fail) all_pass = false;
  }
  if (report.dual_probe) {
    const DualProbeResult& probe = *report.dual_probe;
    json entry{{"status", to_string(probe.status)}, {"min_value", probe.min_value}};
    json ratios = json::array();
    for (size_t i = 0; i < probe.ratios.size(); ++i) {
      ratios.push_back(json{{"nu_hat", probe.nu_hats[i]}, {"ratio", probe.ratios[i]}});
    }
    entry["ratios"] = ratios;
    if (!probe.note.empty()) entry["note"] = probe.note;
    monitors["dual_probe"] = entry;
    if (probe.status == MonitorStatus::Fail) all_pass = false;
  }
  if (!report.regularity.empty() && sel.has("regularity")) {
    json regs = json::array();
    for (const RegularityNorms& r : report.regularity) {
      regs.push_back(json{{"q", r.q},
                          {"time_derivative_norm", r.time_derivative_norm},
                          {"hessian_norm", r.hessian_norm},
                          {"gradient_norm", r.gradient_norm},
                          {"gamma_zero", r.gamma_zero}});
    }
    summary["regularity"] = regs;
  }
  summary["monitors"] = monitors;
  summary["all_pass"] = all_pass;
  summary["snapshot_resolution"] = snapshot_resolution;
  return all_pass;
}

int cmd_validate(const std::string& config_path) {
  RunConfig cfg;
  try {
    cfg = parse_run_config(config_path);
  } catch (const ConfigError& e) {
    print_error("config", e.what());
    return kExitConfig;
  }
  try {
    const Regime regime = validate_params(cfg.params);
    std::cout << "admissible\n";
    std::cout << "regime strict=" << (regime.strict ? 1 : 0)
              << " alpha_zero_boundary=" << (regime.alpha_zero_boundary ? 1 : 0)
              << " gamma_zero=" << (regime.gamma_zero ? 1 : 0) << "\n";
    return kExitOk;
  } catch (const InadmissibleParams& e) {
    print_error("inadmissible", e.what());
    return kExitConfig;
  }
}

int cmd_run(const std::string& config_path, const fs::path& outdir,
            std::optional<uint64_t> seed_override, const std::string& monitor_list) {
  RunConfig cfg;
  MonitorSelection sel;
  try {
    cfg = parse_run_config(config_path);
    sel = MonitorSelection::parse(monitor_list);
  } catch (const ConfigError& e) {
    print_error("config", e.what());
    return kExitConfig;
  }
  if (seed_override) cfg.seed = *seed_override;
  try {
    validate_params(cfg.params);
  } catch (const InadmissibleParams& e) {
    print_error("inadmissible", e.what());
    return kExitConfig;
  }

  fs::create_directories(outdir);
  std::vector<std::string> files;
  json manifest;
  manifest["version"] = kVersion;
  manifest["config_path"] = config_path;
  manifest["seed"] = cfg.seed;
  manifest["params"] = params_to_json(cfg.params);

  try {
    const Grid grid = cfg.make_grid();
    const Field u_raw = make_initial_field(cfg.u_init, grid, cfg.seed);
    const Field v_raw = make_initial_field(cfg.v_init, grid, cfg.seed + 1);
    const State initial = initial_lift(u_raw, v_raw, cfg.steps);
    const SchemeConfig scheme = cfg.make_scheme();

    const RunResult result = run(initial, cfg.params, scheme);

    manifest["grid"] = json{{"dim", grid.dim}, {"nx", grid.nx}, {"ny", grid.ny},
                            {"lx", grid.lx},   {"ly", grid.ly}};
    manifest["tau"] = scheme.tau();
    manifest["steps"] = scheme.steps;
    manifest["newton_tol"] = scheme.newton_tol;

    // Snapshots every ceil(N/100) steps plus the endpoints.
    const int stride = (cfg.steps + 99) / 100;
    std::vector<int> snapshot_steps;
    for (int k = 0; k <= cfg.steps; k += stride) snapshot_steps.push_back(k);
    if (snapshot_steps.back() != cfg.steps) snapshot_steps.push_back(cfg.steps);
    for (int k : snapshot_steps) {
      char name[64];
      std::snprintf(name, sizeof(name), "state_%06d", k);
      const State& s = result.trajectory.states[static_cast<size_t>(k)];
      write_field_csv(outdir / (std::string(name) + "_u.csv"), s.u);
      write_field_csv(outdir / (std::string(name) + "_v.csv"), s.v);
      files.push_back(std::string(name) + "_u.csv");
      files.push_back(std::string(name) + "_v.csv");
    }
    manifest["snapshot_steps"] = snapshot_steps;
    manifest["snapshot_stride"] = stride;

    json summary;
    summary["version"] = kVersion;
    const bool all_pass = emit_diagnostics(result.trajectory, sel, outdir,
                                           /*snapshot_resolution=*/false, files, summary);
    double total_wall = 0.0;
    int total_newton = 0;
    for (const StepReport& r : result.reports) {
      total_wall += r.wall_time;
      total_newton += r.newton_iterations;
    }
    summary["total_newton_iterations"] = total_newton;
    summary["solver_wall_time"] = total_wall;
    {
      std::ofstream out(outdir / "summary.json");
      out << summary.dump(2) << "\n";
    }
    files.push_back("summary.json");

    manifest["all_pass"] = all_pass;
    manifest["monitors"] = summary["monitors"];
    manifest["files"] = files;
    {
      std::ofstream out(outdir / "manifest.json");
      out << manifest.dump(2) << "\n";
    }
    if (!all_pass) {
      print_error("monitor", "one or more monitors failed; see summary.json");
      return kExitMonitor;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    print_error("config", e.what());
    return kExitConfig;
  } catch (const StepSizeViolation& e) {
    print_error("solver", e.what());
    return kExitSolver;
  } catch (const NewtonDivergence& e) {
    print_error("solver", e.what());
    return kExitSolver;
  } catch (const PositivityLoss& e) {
    print_error("solver", e.what());
    return kExitSolver;
  } catch (const SolverFailure& e) {
    print_error("solver", e.what());
    return kExitSolver;
  } catch (const NegativeInput& e) {
    print_error("solver", e.what());
    return kExitSolver;
  }
}

int cmd_diagnose(const fs::path& traj_dir, const fs::path& outdir,
                 const std::string& monitor_list) {
  MonitorSelection sel;
  json manifest;
  try {
    sel = MonitorSelection::parse(monitor_list);
    std::ifstream in(traj_dir / "manifest.json");
    if (!in.is_open()) {
      throw ConfigError("no manifest.json in " + traj_dir.string());
    }
    in >> manifest;
  } catch (const ConfigError& e) {
    print_error("config", e.what());
    return kExitConfig;
  } catch (const json::exception& e) {
    print_error("config", std::string("manifest parse: ") + e.what());
    return kExitConfig;
  }

  try {
    Trajectory traj;
    traj.params = params_from_json(manifest.at("params"));
    const double tau = manifest.at("tau");
    const std::vector<int> steps = manifest.at("snapshot_steps");
    const int stride = manifest.at("snapshot_stride");
    // Keep the uniform prefix of the stored steps.
    std::vector<int> uniform;
    for (int k : steps) {
      if (k == static_cast<int>(uniform.size()) * stride) uniform.push_back(k);
    }
    for (int k : uniform) {
      char name[64];
      std::snprintf(name, sizeof(name), "state_%06d", k);
      State s;
      s.u = read_field_csv(traj_dir / (std::string(name) + "_u.csv"));
      s.v = read_field_csv(traj_dir / (std::string(name) + "_v.csv"));
      s.time = k * tau;
      traj.states.push_back(std::move(s));
    }
    if (traj.states.size() < 2) {
      print_error("config", "not enough snapshots for diagnostics");
      return kExitConfig;
    }
    traj.grid = traj.states[0].u.grid;
    traj.tau = tau * stride;

    fs::create_directories(outdir);
    std::vector<std::string> files;
    json summary;
    summary["version"] = kVersion;
    summary["source"] = traj_dir.string();
    const bool snapshot_resolution = stride > 1;
    const bool all_pass =
        emit_diagnostics(traj, sel, outdir, snapshot_resolution, files, summary);
    std::ofstream out(outdir / "summary.json");
    out << summary.dump(2) << "\n";
    return all_pass ? kExitOk : kExitMonitor;
  } catch (const ConfigError& e) {
    print_error("config", e.what());
    return kExitConfig;
  } catch (const json::exception& e) {
    print_error("config", std::string("manifest fields: ") + e.what());
    return kExitConfig;
  } catch (const SolverFailure& e) {
    print_error("solver", e.what());
    return kExitSolver;
  }
}

struct SweepOutcome {
  double level = 0.0;
  double tau = 0.0;
  int n = 0;
  double d_beta = 0.0;
  double duality = 0.0;
  double mass_final = 0.0;
  double max_v_final = 0.0;
  double ode_error = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::vector<double>& levels, const fs::path& outdir,
              std::optional<uint64_t> seed_override) {
  RunConfig base;
  try {
    base = parse_run_config(config_path);
    if (axis != "tau" && axis != "h" && axis != "d_beta") {
      throw ConfigError("sweep axis must be tau, h, or d_beta");
    }
    if (levels.empty()) throw ConfigError("sweep needs --levels");
  } catch (const ConfigError& e) {
    print_error("config", e.what());
    return kExitConfig;
  }
  if (seed_override) base.seed = *seed_override;

  // Homogeneous initial data admits the ODE reference as an error oracle.
  const bool homogeneous = base.u_init.rfind("constant:", 0) == 0 &&
                           base.v_init.rfind("constant:", 0) == 0;

  auto run_level = [&](double level) {
    SweepOutcome out;
    out.level = level;
    RunConfig cfg = base;
    if (axis == "tau") {
      cfg.steps = std::max(1, static_cast<int>(std::lround(cfg.final_time / level)));
    } else if (axis == "h") {
      cfg.n = static_cast<int>(std::lround(level));
      if (cfg.dim == 2) cfg.ny = cfg.n;
    } else {
      cfg.params.d_beta = level;
    }
    out.tau = cfg.final_time / cfg.steps;
    out.n = cfg.n;
    out.d_beta = cfg.params.d_beta;
    try {
      validate_params(cfg.params);
      const Grid grid = cfg.make_grid();
      const Field u_raw = make_initial_field(cfg.u_init, grid, cfg.seed);
      const Field v_raw = make_initial_field(cfg.v_init, grid, cfg.seed + 1);
      const State initial = initial_lift(u_raw, v_raw, cfg.steps);
      const RunResult result = run(initial, cfg.params, cfg.make_scheme());
      const Trajectory& traj = result.trajectory;
      out.duality = duality_functional(traj);
      out.mass_final = integrate(traj.states.back().u);
      out.max_v_final = traj.states.back().v.max();
      if (homogeneous) {
        const OdeState ref = homogeneous_ode_reference(
            cfg.params, initial.u[0], initial.v[0], cfg.final_time);
        const State& final_state = traj.states.back();
        const double eu =
            std::abs(final_state.u[0] - ref.u) / std::max(1e-300, std::abs(ref.u));
        const double ev =
            std::abs(final_state.v[0] - ref.v) / std::max(1e-300, std::abs(ref.v));
        out.ode_error = std::max(eu, ev);
      }
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    return out;
  };

  // One independent trajectory per worker; results collected and written
  // by this thread only.
  std::vector<std::future<SweepOutcome>> futures;
  for (double level : levels) {
    futures.push_back(std::async(std::launch::async, run_level, level));
  }
  std::vector<SweepOutcome> outcomes;
  for (auto& f : futures) outcomes.push_back(f.get());

  for (const SweepOutcome& o : outcomes) {
    if (!o.error.empty()) {
      print_error("solver", "level " + std::to_string(o.level) + ": " + o.error);
      return kExitSolver;
    }
  }

  fs::create_directories(outdir);
  std::ofstream out(outdir / "sweep.csv");
  out << "level,tau,n,d_beta,duality,duality_delta_ratio,mass_final,max_v_final,"
         "ode_error,ode_error_ratio\n";
  for (size_t i = 0; i < outcomes.size(); ++i) {
    const SweepOutcome& o = outcomes[i];
    out << format_double(o.level) << ',' << format_double(o.tau) << ',' << o.n << ','
        << format_double(o.d_beta) << ',' << format_double(o.duality) << ',';
    if (i >= 2) {
      const double d1 = std::abs(outcomes[i - 2].duality - outcomes[i - 1].duality);
      const double d2 = std::abs(outcomes[i - 1].duality - outcomes[i].duality);
      out << format_double(d2 > 0.0 ? d1 / d2 : 0.0);
    }
    out << ',' << format_double(o.mass_final) << ',' << format_double(o.max_v_final)
        << ',';
    if (std::isfinite(o.ode_error)) out << format_double(o.ode_error);
    out << ',';
    if (i >= 1 && std::isfinite(o.ode_error) && std::isfinite(outcomes[i - 1].ode_error) &&
        o.ode_error > 0.0) {
      out << format_double(outcomes[i - 1].ode_error / o.ode_error);
    }
    out << '\n';
  }
  if (!out.good()) {
    print_error("config", "failed writing sweep.csv");
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Triangular cross-diffusion system solver with runtime-checked "
               "a-priori estimates"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string monitors;
  std::string levels_csv;
  std::optional<uint64_t> seed;

  CLI::App* validate = app.add_subcommand("validate", "check a config's admissibility");
  validate->add_option("--config", config_path)->required();

  CLI::App* run_cmd = app.add_subcommand("run", "run a simulation with monitors");
  run_cmd->add_option("--config", config_path)->required();
  run_cmd->add_option("--out", out_dir)->required();
  run_cmd->add_option("--seed", seed);
  run_cmd->add_option("--monitors", monitors);

  std::string axis;
  CLI::App* sweep = app.add_subcommand("sweep", "refinement sweep along one axis");
  sweep->add_option("axis", axis, "tau | h | d_beta")->required();
  sweep->add_option("--config", config_path)->required();
  sweep->add_option("--out", out_dir)->required();
  sweep->add_option("--levels", levels_csv)->required();
  sweep->add_option("--seed", seed);

  std::string traj_dir;
  CLI::App* diagnose = app.add_subcommand("diagnose", "recompute monitors on a stored run");
  diagnose->add_option("--config", traj_dir, "directory containing manifest.json")
      ->required();
  diagnose->add_option("--out", out_dir)->required();
  diagnose->add_option("--monitors", monitors);

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) return cmd_validate(config_path);
  if (run_cmd->parsed()) return cmd_run(config_path, out_dir, seed, monitors);
  if (diagnose->parsed()) return cmd_diagnose(traj_dir, out_dir, monitors);
  if (sweep->parsed()) {
    std::vector<double> levels;
    std::istringstream in(levels_csv);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      try {
        levels.push_back(std::stod(tok));
      } catch (const std::exception&) {
        print_error("config", "bad level: " + tok);
        return kExitConfig;
      }
    }
    return cmd_sweep(config_path, axis, levels, out_dir, seed);
  }
  return kExitOk;
}
