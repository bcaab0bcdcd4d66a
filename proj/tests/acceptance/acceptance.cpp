// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ifp/cli.hpp"
#include "ifp/dynamics.hpp"
#include "ifp/io.hpp"
#include "ifp/markov.hpp"
#include "ifp/model.hpp"
#include "ifp/solver.hpp"
#include "ifp/tail.hpp"
#include "ifp/templates.hpp"
#include "vfi.hpp"

namespace fs = std::filesystem;
using namespace ifp;

namespace {

const fs::path kConfigs = fs::path(IFP_SOURCE_DIR) / "configs";

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

TransitionMatrix matrix2(double a, double b, double c, double d) {
  Eigen::Matrix2d m;
  m << a, b, c, d;
  return TransitionMatrix(m);
}

int cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0 && code != cli::kExitNotReproduced) std::cerr << err.str();
  return code;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "ifp_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const SolveResult& benhabib_solution() {
  static const SolveResult r = [] {
    const auto c = io::load_config(kConfigs / "benhabib.json");
    return solve(c.model, c.solver);
  }();
  return r;
}

// 1. Growth rates against the path-simulation oracle.
Outcome growth_lemma() {
  Outcome o;
  struct Case {
    std::string name;
    TransitionMatrix chain;
    PrimitiveSpec beta;
  };
  const std::vector<Case> cases = {
      {"constant", matrix2(0.9, 0.1, 0.2, 0.8), PrimitiveSpec::constant(0.95)},
      {"iid", matrix2(0.3, 0.7, 0.3, 0.7),
       PrimitiveSpec::discrete({DiscreteLaw{{0.85, 0.95}, {0.5, 0.5}},
                                DiscreteLaw{{0.97, 1.05}, {0.4, 0.6}}})},
      // Conditional means 0.9 and 1.1 with log-sd 0.1.
      {"persistent", matrix2(0.9, 0.1, 0.2, 0.8),
       PrimitiveSpec::lognormal({std::log(0.9) - 0.005, std::log(1.1) - 0.005}, {0.1, 0.1})},
  };
  std::uint64_t seed = 101;
  for (const auto& c : cases) {
    const double exact = growth_rate(c.chain, conditional_means(c.beta, 2)).value;
    const StateSampler sampler = [&](std::size_t z, const rng::Innovation& d) {
      return sample(c.beta, z, d);
    };
    const auto mc = mc_growth_oracle(c.chain, sampler, 200, 100'000, seed++);
    // A deterministic product has zero standard error; allow rounding there.
    const double band = std::max(2.0 * mc.std_error, 1e-12);
    o.require(std::abs(mc.estimate - exact) <= band,
              c.name + " |G-mc|=" + num(std::abs(mc.estimate - exact)) + " 2se=" +
                  num(2.0 * mc.std_error));
  }
  return o;
}

// 2. Closed-form reductions.
Outcome reductions() {
  Outcome o;
  const auto chain = rouwenhorst(7, 0.0, 0.8, 1.0).transition;
  {
    const double g = growth_rate(chain, conditional_means(PrimitiveSpec::constant(0.96), 7)).value;
    o.require(std::abs(g - 0.96) <= 1e-12, "const beta err=" + num(std::abs(g - 0.96)));
  }
  {
    const auto iid = matrix2(0.25, 0.75, 0.25, 0.75);
    const auto beta = PrimitiveSpec::constant({0.9, 0.98});
    const double g = growth_rate(iid, conditional_means(beta, 2)).value;
    const double e = 0.25 * 0.9 + 0.75 * 0.98;
    o.require(std::abs(g - e) <= 1e-10, "iid E beta err=" + num(std::abs(g - e)));
  }
  {
    ModelSpec spec;
    spec.chain = chain;
    spec.state_labels.assign(7, "z");
    for (std::size_t i = 0; i < 7; ++i) spec.state_labels[i] += std::to_string(i);
    spec.beta = PrimitiveSpec::constant(0.95);
    spec.ret = PrimitiveSpec::lognormal(0.02, 0.1);
    spec.gamma = 2.0;
    const auto r = compute_growth_report(spec);
    // E R = exp(m + v^2/2), E R^(1-gamma) = exp((1-gamma) m + (1-gamma)^2 v^2 / 2).
    const double er = std::exp(0.02 + 0.005);
    const double s_bar = std::pow(0.95 * std::exp(-0.02 + 0.005), 0.5);
    o.require(std::abs(r.g_beta_r - 0.95 * er) <= 1e-10,
              "G_betaR err=" + num(std::abs(r.g_beta_r - 0.95 * er)));
    o.require(std::abs(r.s_bar - s_bar) <= 1e-10, "s_bar err=" + num(std::abs(r.s_bar - s_bar)));
  }
  return o;
}

// 3. G_beta over (rho, sigma) for the AR(1) discount template.
Outcome discount_sweep() {
  Outcome o;
  const auto c = io::load_config(kConfigs / "ar1_discount.json");
  const auto x = parse_axis("rho:0:0.99:34");
  const auto y = parse_axis("sigma:0.001:0.02:20");
  const auto g = sweep(*c.templ, x, y, SweepQuantity::GBeta);
  // Rounding in the Perron root: differences below 1e-12 are not decreases.
  constexpr double kSlack = 1e-12;
  bool mono_rho = true, mono_sigma = true;
  double col0 = 0.0, corner = g.at(x.count - 1, y.count - 1);
  bool region = false;
  for (std::size_t i = 0; i < x.count; ++i) {
    for (std::size_t j = 0; j < y.count; ++j) {
      if (i > 0 && g.at(i, j) < g.at(i - 1, j) - kSlack) mono_rho = false;
      if (j > 0 && g.at(i, j) < g.at(i, j - 1) - kSlack) mono_sigma = false;
      if (g.at(i, j) >= 1.0) region = true;
    }
  }
  for (std::size_t j = 0; j < y.count; ++j) col0 = std::max(col0, std::abs(g.at(0, j) - 0.99));
  o.require(mono_rho, "nondecreasing in rho");
  o.require(mono_sigma, "nondecreasing in sigma");
  o.require(col0 <= 1e-6, "rho=0 column err=" + num(col0));
  o.require(region && corner >= 1.0, "corner G_beta=" + num(corner));
  return o;
}

// 4. Model I and Model II stability and the simulated return moments.
Outcome calibration() {
  Outcome o;
  for (const std::string name : {"model_i", "model_ii"}) {
    const auto dir = scratch(name);
    const int code = cli({"check", "--config", (kConfigs / (name + ".json")).string(), "--out",
                          dir.string()});
    const auto rep = io::read_json_file(dir / "growth_report.json");
    o.require(code == 0, name + " exit=" + std::to_string(code));
    o.require(rep["G_betaR"].get<double>() < 1.0, "G_betaR=" + num(rep["G_betaR"].get<double>()));
    o.require(rep["s_bar"].get<double>() < 1.0, "s_bar=" + num(rep["s_bar"].get<double>()));
    o.require(rep["s_bar_G_R"].get<double>() < 1.0,
              "s_bar*G_R=" + num(rep["s_bar_G_R"].get<double>()));

    // Stationary R_t: 10^4 chains, 200 dates each after a burn-in of 100.
    const auto c = io::load_config(kConfigs / (name + ".json"));
    double s1 = 0.0, s2 = 0.0;
    std::size_t n = 0;
    for (std::uint64_t path = 0; path < 10'000; ++path) {
      std::size_t z = draw_initial_state(c.model, c.simulation.seed, path);
      for (std::size_t t = 0; t < 300; ++t) {
        const auto d = draw_step(c.model, c.simulation.seed, path, t, z);
        z = d.next_state;
        if (t >= 100) {
          s1 += d.ret;
          s2 += d.ret * d.ret;
          ++n;
        }
      }
    }
    const double mean = s1 / static_cast<double>(n);
    const double sd = std::sqrt(s2 / static_cast<double>(n) - mean * mean);
    o.require(std::abs(mean - 1.03) <= 0.103, "E R=" + num(mean));
    o.require(std::abs(sd - 0.04) <= 0.004, "sd R=" + num(sd));
  }
  return o;
}

// 5. Deterministic case: c(a) = a up to a_bar = 2.
Outcome deterministic_case() {
  Outcome o;
  const auto c = io::load_config(kConfigs / "deterministic.json");
  const auto r = solve(c.model, c.solver);
  o.require(r.converged, "converged");
  const auto& p = r.policy;
  bool exact = true;
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    if (p.grid[i] <= 2.0 && p.consumption(static_cast<Eigen::Index>(i), 0) != p.grid[i]) {
      exact = false;
    }
  }
  o.require(exact, "c(a)=a on a<=2");
  o.require(std::abs(p.a_bar[0] - 2.0) <= 1e-8, "a_bar=" + num(p.a_bar[0]));
  return o;
}

// 6. Shape, residual, trace and start-independence on the Benhabib spec.
Outcome policy_properties() {
  Outcome o;
  const auto spec = io::load_config(kConfigs / "benhabib.json").model;
  const auto& r = benhabib_solution();
  o.require(r.converged, "converged");
  const auto& p = r.policy;
  const double s_bar = savings_rate_bound(spec);
  bool mono_c = true, mono_s = true, concave = true, lower = true;
  double resid = 0.0;
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double a = p.grid[i], c = p.consumption(ii, 0);
    if (c < (1 - s_bar) * a - 1e-8) lower = false;
    if (i > 0) {
      if (c < p.consumption(ii - 1, 0)) mono_c = false;
      if (a - c < p.grid[i - 1] - p.consumption(ii - 1, 0)) mono_s = false;
    }
    if (i > 0 && i + 1 < p.grid.size()) {
      const double s0 = (c - p.consumption(ii - 1, 0)) / (a - p.grid[i - 1]);
      const double s1 = (p.consumption(ii + 1, 0) - c) / (p.grid[i + 1] - a);
      if (s1 - s0 > 1e-8) concave = false;
    }
    resid = std::max(resid, std::abs(euler_residual(spec, p, a, 0)));
  }
  o.require(mono_c && mono_s, "monotone");
  o.require(concave, "concave");
  o.require(lower, "c>=(1-s_bar)a");
  o.require(resid < 1e-6, "sup residual=" + num(resid));
  bool decay = r.trace.size() > 11;
  for (std::size_t k = r.trace.size() - 11; decay && k + 1 < r.trace.size(); ++k) {
    decay = r.trace[k + 1] < r.trace[k];
  }
  o.require(decay, "trace decays");
  const auto grid = make_grid(spec);
  Policy start = consume_everything(grid, 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    start.consumption(static_cast<Eigen::Index>(i), 0) =
        std::min(grid[i], std::max(grid.a_min(), (1 - s_bar) * grid[i] + 0.01));
  }
  const auto other = solve(spec, io::load_config(kConfigs / "benhabib.json").solver, start);
  const double d = policy_distance(spec.gamma, other.policy, p);
  o.require(d < 1e-6, "start distance=" + num(d));
  return o;
}

// 7. Value function iteration on 30 nodes.
Outcome vfi_oracle() {
  Outcome o;
  const auto spec = io::load_config(kConfigs / "benhabib.json").model;
  const auto vfi = oracle::ValueIteration(spec, 0.25, 400.0, 30).solve();
  const auto& star = benhabib_solution().policy;
  double gap = 0.0, gap_all = 0.0;
  for (std::size_t i = 0; i < vfi.grid.size(); ++i) {
    const double g = std::abs(vfi.consumption[0][i] - star(vfi.grid[i], 0));
    gap_all = std::max(gap_all, g);
    // Above a = 30 the oracle's truncation at 400 bends its own policy.
    if (vfi.grid[i] <= 30.0) gap = std::max(gap, g);
  }
  o.require(gap < 1e-2, "sup gap a<=30=" + num(gap));
  o.detail += " (whole oracle grid " + num(gap_all) + ")";
  return o;
}

// 8. Ergodicity, two-start forgetting, CLT normality.
Outcome ergodicity() {
  Outcome o;
  const auto c = io::load_config(kConfigs / "benhabib.json");
  const auto& p = benhabib_solution().policy;
  ErgodicityConfig cfg;
  cfg.seed = c.simulation.seed;
  for (const auto& [name, h] : {std::pair{"a", TestFunctional::assets()},
                                std::pair{"log(1+a)", TestFunctional::log_one_plus()}}) {
    const auto r = ergodicity_check(c.model, p, h, cfg);
    o.require(r.rel_gap < 0.02, std::string("rel_gap ") + name + "=" + num(r.rel_gap));
  }
  TwoStartConfig two;
  two.seed = c.simulation.seed;
  const double ks = two_start_distance(c.model, p, 0.1, 100.0, 2000, two);
  o.require(ks < 0.01, "KS=" + num(ks));
  const auto clt = clt_diagnostic(c.model, p, TestFunctional::log_one_plus(), 1'000'000, 200,
                                  c.simulation.seed);
  o.require(clt.normality_statistic < clt.critical_value,
            "JB=" + num(clt.normality_statistic) + " crit=" + num(clt.critical_value));
  return o;
}

// 9. Two-point growth factor with alpha = 0.
Outcome analytic_tail() {
  Outcome o;
  const std::vector<double> alpha = {0.0};
  for (const auto& [q, expected] : {std::pair{0.5, std::log(2.0) / std::log(1.5)},
                                    std::pair{1.0 / 1.5, 1.0}}) {
    auto spec = io::load_config(kConfigs / "benhabib.json").model;
    spec.ret = PrimitiveSpec::discrete({1.5, 0.5}, {q, 1 - q});
    const auto k = kappa(spec, alpha);
    const double err = k.kappa ? std::abs(*k.kappa - expected) : INFINITY;
    o.require(err <= 1e-6, "q=" + num(q) + " kappa err=" + num(err));
    o.require(convex_surrogate_holds(k.curve), "convex surrogate");
    o.require(lambda_of_s(spec, alpha, 0.0) <= 1.0, "lambda(0)<=1");
  }
  return o;
}

// 10. Hill on a 10^6-draw stationary sample vs kappa.
Outcome simulated_tail() {
  Outcome o;
  const auto c = io::load_config(kConfigs / "pareto_tail.json");
  const auto r = solve(c.model, c.solver);
  const auto growth = check_wealth_growth(c.model, r.policy);
  const auto k = kappa(c.model, r.policy, c.tail.kappa);
  o.require(growth.holds, "wealth growth condition");
  o.require(k.kappa && *k.kappa >= 1.0 && *k.kappa <= 4.0,
            "kappa=" + (k.kappa ? num(*k.kappa) : std::string("none")));
  if (!k.kappa) return o;

  StationarySampleConfig sc;
  sc.n_paths = 10'000;
  sc.draws_per_path = 100;
  sc.spacing = 100;
  sc.burn_in = c.simulation.burn_in;
  sc.seed = c.simulation.seed;
  sc.a0 = c.simulation.a0;
  const auto sample = stationary_sample(c.model, r.policy, sc);
  const auto hill = hill_estimator(sample, sample.size() / 100, c.tail.n_boot, c.tail.seed);
  const double ratio = hill.estimate / *k.kappa;
  o.require(ratio >= 0.7 && ratio <= 1.3,
            "hill=" + num(hill.estimate) + " [" + num(hill.lower) + ", " + num(hill.upper) +
                "] hill/kappa=" + num(ratio));
  return o;
}

// 11. Income scaled by 1.5 raises consumption at every node.
Outcome income_dominance() {
  Outcome o;
  const auto c = io::load_config(kConfigs / "benhabib.json");
  auto richer = c.model;
  richer.income = PrimitiveSpec::discrete({0.75, 1.5, 2.25}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  o.require(income_dominance_check(c.model, richer, c.solver), "c_lo <= c_hi on every node");
  return o;
}

// 12. Every command rerun from its manifest under 1 and 4 threads.
Outcome determinism() {
  Outcome o;
  const auto dir = scratch("determinism");
  const auto bench = (kConfigs / "benhabib.json").string();
  const auto policy = (dir / "solve" / "policy.csv").string();
  const std::vector<std::pair<std::string, std::vector<std::string>>> runs = {
      {"check", {"check", "--config", bench}},
      {"solve", {"solve", "--config", bench}},
      {"simulate",
       {"simulate", "--config", bench, "--policy", policy, "--n-paths", "2000", "--horizon", "400", "--burn-in", "100",
        "--threads", "2"}},
      {"tail", {"tail", "--config", bench, "--policy", policy, "--stationary", "50000"}},
      {"sweep",
       {"sweep", "--config", (kConfigs / "ar1_discount.json").string(), "--x", "rho:0:0.95:6",
        "--y", "sigma:0.005:0.02:4", "--quantity", "G_beta", "--threads", "3"}},
  };
  for (auto [name, args] : runs) {
    args.push_back("--out");
    args.push_back((dir / name).string());
    const int code = cli(args);
    if (code != 0) {
      o.require(false, name + " exit=" + std::to_string(code));
      continue;
    }
    for (const char* threads : {"1", "4"}) {
      const auto again = dir / (name + "_rerun" + threads);
      const int rc = cli({"rerun", (dir / name / "run_manifest.json").string(), "--out",
                          again.string(), "--threads", threads});
      o.require(rc == 0, name + "@" + threads);
    }
  }
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    double budget_s;  // 0: no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "growth-rate lemma vs path simulation", 60, growth_lemma},
      {2, "closed-form reductions", 0, reductions},
      {3, "G_beta sweep shape", 120, discount_sweep},
      {4, "Model I/II stability", 60, calibration},
      {5, "deterministic binding threshold", 0, deterministic_case},
      {6, "policy property suite", 120, policy_properties},
      {7, "value iteration oracle", 120, vfi_oracle},
      {8, "ergodicity and stability", 300, ergodicity},
      {9, "analytic tail exponent", 0, analytic_tail},
      {10, "simulated tail exponent", 300, simulated_tail},
      {11, "income dominance", 0, income_dominance},
      {12, "byte-identical reruns", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += "; over the " + num(c.budget_s) + " s budget";
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
