#include "ifp/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ifp/error.hpp"
#include "ifp/io.hpp"
#include "ifp/parallel.hpp"
#include "ifp/templates.hpp"

namespace ifp::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

std::string hex64(std::uint64_t x) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << x;
  return ss.str();
}

std::string absolute(const std::string& path) {
  return path.empty() ? path : fs::absolute(path).lexically_normal().string();
}

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

struct Run {
  std::string command;
  std::vector<std::string> args;  // canonical, absolute paths, no --threads
  Common common;
  std::string started;
  std::vector<std::string> outputs;  // file names inside the output directory
  std::ostream* out = nullptr;
};

void add_common(CLI::App* app, Common& c, bool needs_out) {
  app->add_option("--config", c.config, "Run configuration (JSON)")->required();
  auto* out = app->add_option("--out", c.out, "Output directory");
  if (needs_out) out->required();
  app->add_option("--seed", c.seed, "Random seed (overrides the config)");
  app->add_option("--threads", c.threads, "Worker threads (default: IFP_THREADS or 1)");
}

void canonical_common(Run& run) {
  run.args = {run.command, "--config", absolute(run.common.config)};
  if (!run.common.out.empty()) {
    run.args.push_back("--out");
    run.args.push_back(absolute(run.common.out));
  }
  if (run.common.seed) {
    run.args.push_back("--seed");
    run.args.push_back(std::to_string(*run.common.seed));
  }
}

io::RunConfig load(const Run& run) {
  io::RunConfig config = io::load_config(run.common.config);
  if (run.common.seed) {
    config.seed = *run.common.seed;
    config.simulation.seed = config.seed;
    config.tail.seed = config.seed;
  }
  const unsigned threads = resolve_threads(run.common.threads);
  config.solver.threads = threads;
  config.simulation.threads = threads;
  config.tail.threads = threads;
  return config;
}

void emit(Run& run, const std::string& name, const std::string& content) {
  io::write_text(fs::path(run.common.out) / name, content);
  run.outputs.push_back(name);
}

void write_manifest(const Run& run, std::uint64_t seed) {
  if (run.common.out.empty()) return;
  Json m;
  m["command"] = run.command;
  m["args"] = run.args;
  m["config"] = absolute(run.common.config);
  m["config_fnv1a"] = hex64(fnv1a(io::read_text(run.common.config)));
  m["seed"] = seed;
  m["threads"] = resolve_threads(run.common.threads);
  m["version"] = kVersion;
  m["started"] = run.started;
  m["finished"] = utc_now();
  m["out_dir"] = absolute(run.common.out);
  Json outputs = Json::array();
  for (const auto& name : run.outputs) {
    const std::string content = io::read_text(fs::path(run.common.out) / name);
    outputs.push_back(Json{{"path", name}, {"fnv1a", hex64(fnv1a(content))}});
  }
  m["outputs"] = outputs;
  io::write_text(fs::path(run.common.out) / "run_manifest.json", io::dump(m));
}

std::vector<double> read_sample(const fs::path& path) {
  std::istringstream in(io::read_text(path));
  std::string line;
  std::getline(in, line);
  if (line != "path,state,asset") {
    throw Error(ErrorKind::SchemaViolation,
                path.string() + ":1: expected a terminal cross-section (path,state,asset)");
  }
  std::vector<double> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t comma = line.rfind(',');
    double a = 0.0;
    const char* end = line.data() + line.size();
    if (comma == std::string::npos ||
        std::from_chars(line.data() + comma + 1, end, a).ptr != end) {
      throw Error(ErrorKind::SchemaViolation,
                  path.string() + ":" + std::to_string(line_no) + ": malformed asset value");
    }
    out.push_back(a);
  }
  return out;
}

fs::path sidecar_for(const std::string& policy, const std::string& explicit_sidecar) {
  if (!explicit_sidecar.empty()) return explicit_sidecar;
  return fs::path(policy).replace_extension(".json");
}

struct SolveFlags {
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::size_t> grid_points;
};

struct SimFlags {
  std::string policy;
  std::string sidecar;
  std::optional<std::size_t> n_paths;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> burn_in;
  bool full_panel = false;
};

struct TailFlags {
  std::string policy;
  std::string sidecar;
  std::string sample;
  std::optional<std::size_t> stationary;
  std::optional<double> s_max;
};

struct SweepFlags {
  std::string x;
  std::string y;
  std::string quantity;
};

int cmd_check(Run& run) {
  canonical_common(run);
  const io::RunConfig config = load(run);
  const GrowthReport report = compute_growth_report(config.model);
  const std::string text = io::dump(io::growth_report_to_json(report));
  *run.out << text;
  if (!run.common.out.empty()) emit(run, "growth_report.json", text);
  write_manifest(run, config.seed);
  return report.all_required_hold() ? kExitOk : kExitAssumption;
}

int cmd_solve(Run& run, const SolveFlags& flags) {
  canonical_common(run);
  if (flags.tol) {
    run.args.insert(run.args.end(), {"--tol", io::format_number(*flags.tol)});
  }
  if (flags.max_iter) {
    run.args.insert(run.args.end(), {"--max-iter", std::to_string(*flags.max_iter)});
  }
  if (flags.grid_points) {
    run.args.insert(run.args.end(), {"--grid-points", std::to_string(*flags.grid_points)});
  }
  io::RunConfig config = load(run);
  if (flags.tol) config.solver.tol_rho = *flags.tol;
  if (flags.max_iter) config.solver.max_iter = *flags.max_iter;
  if (flags.grid_points) config.solver.grid.n_points = *flags.grid_points;

  const SolveResult result = solve(config.model, config.solver);
  emit(run, "policy.csv", io::policy_csv(result.policy));
  emit(run, "policy.json", io::dump(io::policy_sidecar(result)));
  write_manifest(run, config.seed);
  *run.out << "iterations " << result.iterations << ", final rho "
           << (result.trace.empty() ? std::string("n/a")
                                    : io::format_number(result.trace.back()))
           << (result.converged ? "" : " (not converged)") << "\n";
  return result.converged ? kExitOk : kExitNoConvergence;
}

int cmd_simulate(Run& run, const SimFlags& flags) {
  canonical_common(run);
  run.args.insert(run.args.end(), {"--policy", absolute(flags.policy)});
  const fs::path sidecar = sidecar_for(flags.policy, flags.sidecar);
  run.args.insert(run.args.end(), {"--sidecar", absolute(sidecar.string())});
  if (flags.n_paths) run.args.insert(run.args.end(), {"--n-paths", std::to_string(*flags.n_paths)});
  if (flags.horizon) run.args.insert(run.args.end(), {"--horizon", std::to_string(*flags.horizon)});
  if (flags.burn_in) run.args.insert(run.args.end(), {"--burn-in", std::to_string(*flags.burn_in)});
  if (flags.full_panel) run.args.push_back("--full-panel");

  io::RunConfig config = load(run);
  const io::PolicyFile policy = io::read_policy(flags.policy, sidecar, config.model.n_states());
  SimConfig sim = config.simulation;
  if (flags.n_paths) sim.n_paths = *flags.n_paths;
  if (flags.horizon) sim.horizon = *flags.horizon;
  if (flags.burn_in) sim.burn_in = *flags.burn_in;
  if (flags.full_panel) sim.keep_paths = true;

  const WealthPanel panel = simulate(config.model, policy.policy, sim);
  if (sim.keep_paths) emit(run, "panel.csv", io::panel_csv(panel));
  emit(run, "terminal.csv", io::terminal_csv(panel));
  emit(run, "summary.json", io::dump(io::panel_summary(panel)));
  write_manifest(run, config.seed);
  return kExitOk;
}

int cmd_tail(Run& run, const TailFlags& flags) {
  canonical_common(run);
  run.args.insert(run.args.end(), {"--policy", absolute(flags.policy)});
  const fs::path sidecar = sidecar_for(flags.policy, flags.sidecar);
  run.args.insert(run.args.end(), {"--sidecar", absolute(sidecar.string())});
  if (!flags.sample.empty()) run.args.insert(run.args.end(), {"--sample", absolute(flags.sample)});
  if (flags.stationary) {
    run.args.insert(run.args.end(), {"--stationary", std::to_string(*flags.stationary)});
  }
  if (flags.s_max) run.args.insert(run.args.end(), {"--s-max", io::format_number(*flags.s_max)});

  io::RunConfig config = load(run);
  if (flags.s_max) config.tail.kappa.s_max = *flags.s_max;
  const io::PolicyFile policy = io::read_policy(flags.policy, sidecar, config.model.n_states());
  std::vector<double> sample;
  if (!flags.sample.empty()) sample = read_sample(flags.sample);
  if (flags.stationary) {
    // Paths and burn-in come from the simulation section; each path is
    // recorded every 100 dates until the requested count is reached.
    StationarySampleConfig sc;
    sc.n_paths = std::min(config.simulation.n_paths, *flags.stationary);
    sc.draws_per_path = (*flags.stationary + sc.n_paths - 1) / sc.n_paths;
    sc.burn_in = config.simulation.burn_in;
    sc.a0 = config.simulation.a0;
    sc.seed = config.seed;
    sc.threads = config.simulation.threads;
    sample = stationary_sample(config.model, policy.policy, sc);
    sample.resize(*flags.stationary);
  }

  const TailReport report = build_tail_report(config.model, policy.policy, sample, config.tail);
  emit(run, "tail_report.json", io::dump(io::tail_report_to_json(report)));
  emit(run, "lambda.csv", io::lambda_csv(report.lambda_curve));
  write_manifest(run, config.seed);
  *run.out << "verdict: " << report.verdict;
  if (report.kappa) *run.out << ", kappa = " << io::format_number(*report.kappa);
  *run.out << "\n";
  return kExitOk;
}

int cmd_sweep(Run& run, const SweepFlags& flags) {
  canonical_common(run);
  run.args.insert(run.args.end(),
                  {"--x", flags.x, "--y", flags.y, "--quantity", flags.quantity});
  const io::RunConfig config = load(run);
  if (!config.templ) {
    throw Error(ErrorKind::UnknownParameter,
                "sweeps need a config with a 'template' section");
  }
  const SweepGrid grid = sweep(*config.templ, parse_axis(flags.x), parse_axis(flags.y),
                               parse_quantity(flags.quantity), config.solver.threads);
  emit(run, "sweep.csv", sweep_csv(grid));
  write_manifest(run, config.seed);
  return kExitOk;
}

int cmd_rerun(const std::string& manifest_path, const std::string& out_override,
              unsigned threads, std::ostream& out, std::ostream& err) {
  const Json manifest = io::read_json_file(manifest_path);
  if (!manifest.contains("args") || !manifest.at("args").is_array() ||
      !manifest.contains("outputs")) {
    throw Error(ErrorKind::SchemaViolation, manifest_path + ": not a run manifest");
  }
  std::vector<std::string> args = manifest.at("args").get<std::vector<std::string>>();
  fs::path out_dir = manifest.value("out_dir", std::string());
  if (!out_override.empty()) {
    out_dir = absolute(out_override);
    auto it = std::find(args.begin(), args.end(), "--out");
    if (it != args.end() && it + 1 != args.end()) {
      *(it + 1) = out_dir.string();
    } else {
      args.insert(args.end(), {"--out", out_dir.string()});
    }
  }
  if (threads > 0) args.insert(args.end(), {"--threads", std::to_string(threads)});

  std::ostringstream sink;
  const int code = run(args, sink, err);
  bool identical = true;
  for (const auto& entry : manifest.at("outputs")) {
    const std::string name = entry.at("path").get<std::string>();
    const fs::path file = out_dir / name;
    std::string got = "missing";
    if (fs::exists(file)) got = hex64(fnv1a(io::read_text(file)));
    const bool same = got == entry.at("fnv1a").get<std::string>();
    identical = identical && same;
    out << (same ? "identical " : "DIFFERENT ") << name << "\n";
  }
  if (!identical) return kExitNotReproduced;
  return code;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::AssumptionViolated: return kExitAssumption;
    case ErrorKind::NoConvergence: return kExitNoConvergence;
    case ErrorKind::InvalidParameter:
    case ErrorKind::NotIrreducible:
    case ErrorKind::GridMismatch:
    case ErrorKind::UnknownParameter:
    case ErrorKind::SchemaViolation:
    case ErrorKind::MissingFile:
    case ErrorKind::DegenerateAlpha:
    case ErrorKind::UndefinedMoment:
      return kExitInput;
    default:
      return kExitInternal;
  }
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Income fluctuation problem: conditions, policies, wealth dynamics, tails",
               "ifp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Run run;
  run.out = &out;
  SolveFlags solve_flags;
  SimFlags sim_flags;
  TailFlags tail_flags;
  SweepFlags sweep_flags;
  std::string manifest_path, rerun_out;
  unsigned rerun_threads = 0;

  auto* check = app.add_subcommand("check", "Verify the growth conditions");
  add_common(check, run.common, false);

  auto* solve_cmd = app.add_subcommand("solve", "Solve for the optimal consumption policy");
  add_common(solve_cmd, run.common, true);
  solve_cmd->add_option("--tol", solve_flags.tol, "Stopping tolerance on rho");
  solve_cmd->add_option("--max-iter", solve_flags.max_iter, "Iteration budget");
  solve_cmd->add_option("--grid-points", solve_flags.grid_points, "Asset grid size");

  auto* sim_cmd = app.add_subcommand("simulate", "Simulate the wealth process");
  add_common(sim_cmd, run.common, true);
  sim_cmd->add_option("--policy", sim_flags.policy, "Policy CSV from solve")->required();
  sim_cmd->add_option("--sidecar", sim_flags.sidecar, "Policy sidecar (default: .json next to the CSV)");
  sim_cmd->add_option("--n-paths", sim_flags.n_paths, "Number of paths");
  sim_cmd->add_option("--horizon", sim_flags.horizon, "Dates per path");
  sim_cmd->add_option("--burn-in", sim_flags.burn_in, "Burn-in dates");
  sim_cmd->add_flag("--full-panel", sim_flags.full_panel, "Also write every date (large)");

  auto* tail_cmd = app.add_subcommand("tail", "Pareto tail exponent of stationary wealth");
  add_common(tail_cmd, run.common, true);
  tail_cmd->add_option("--policy", tail_flags.policy, "Policy CSV from solve")->required();
  tail_cmd->add_option("--sidecar", tail_flags.sidecar, "Policy sidecar");
  auto* sample_opt =
      tail_cmd->add_option("--sample", tail_flags.sample, "terminal.csv from simulate (for Hill)");
  tail_cmd
      ->add_option("--stationary", tail_flags.stationary,
                   "Draw N stationary observations for Hill (thinned, every 100 dates)")
      ->excludes(sample_opt);
  tail_cmd->add_option("--s-max", tail_flags.s_max, "Upper end of the s-grid");

  auto* sweep_cmd = app.add_subcommand("sweep", "Two-parameter grid of a growth quantity");
  add_common(sweep_cmd, run.common, true);
  sweep_cmd->add_option("--x", sweep_flags.x, "First axis name:lo:hi:count")->required();
  sweep_cmd->add_option("--y", sweep_flags.y, "Second axis name:lo:hi:count")->required();
  sweep_cmd->add_option("--quantity", sweep_flags.quantity,
                        "G_beta, G_betaR, G_R, s_bar or stable")
      ->required();

  auto* rerun_cmd = app.add_subcommand("rerun", "Re-execute a run manifest and compare outputs");
  rerun_cmd->add_option("manifest", manifest_path, "run_manifest.json")->required();
  rerun_cmd->add_option("--out", rerun_out, "Write to this directory instead");
  rerun_cmd->add_option("--threads", rerun_threads, "Worker threads for the rerun");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << sub->help();
    }
    return kExitInput;
  }

  try {
    run.started = utc_now();
    if (check->parsed()) {
      run.command = "check";
      return cmd_check(run);
    }
    if (solve_cmd->parsed()) {
      run.command = "solve";
      return cmd_solve(run, solve_flags);
    }
    if (sim_cmd->parsed()) {
      run.command = "simulate";
      return cmd_simulate(run, sim_flags);
    }
    if (tail_cmd->parsed()) {
      run.command = "tail";
      return cmd_tail(run, tail_flags);
    }
    if (sweep_cmd->parsed()) {
      run.command = "sweep";
      return cmd_sweep(run, sweep_flags);
    }
    return cmd_rerun(manifest_path, rerun_out, rerun_threads, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace ifp::cli
