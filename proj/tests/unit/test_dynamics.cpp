#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ifp/dynamics.hpp"
#include "ifp/error.hpp"
#include "ifp/solver.hpp"
#include "specs.hpp"

using namespace ifp;

namespace {

const Policy& benhabib_policy() {
  static const Policy p = solve(ifp::testing::benhabib()).policy;
  return p;
}

// Wealth is iid income when nothing is carried over.
ModelSpec zero_return() {
  auto spec = ifp::testing::benhabib();
  spec.ret = PrimitiveSpec::constant(0.0);
  return spec;
}

const Policy& zero_return_policy() {
  static const Policy p = solve(zero_return()).policy;
  return p;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("zero return: next wealth is the income draw") {
  const auto spec = zero_return();
  SimConfig cfg;
  cfg.n_paths = 200;
  cfg.horizon = 50;
  cfg.burn_in = 10;
  cfg.seed = 5;
  const auto panel = simulate(spec, zero_return_policy(), cfg);
  for (std::size_t p = 0; p < cfg.n_paths; ++p) {
    for (std::size_t t = 0; t < cfg.horizon; ++t) {
      const auto d = draw_step(spec, cfg.seed, p, t, panel.state(p, t));
      CHECK(panel.asset(p, t + 1) == d.income);
    }
  }
}

TEST_CASE("law of motion reproduces the stored panel") {
  const auto spec = ifp::testing::two_state_lognormal();
  SolverConfig sc;
  sc.tol_rho = 1e-6;
  const auto policy = solve(spec, sc).policy;
  SimConfig cfg;
  cfg.n_paths = 300;
  cfg.horizon = 200;
  cfg.burn_in = 10;
  cfg.seed = 99;
  const auto panel = simulate(spec, policy, cfg);
  for (std::size_t p = 0; p < cfg.n_paths; ++p) {
    CHECK(panel.asset(p, 0) == cfg.a0);
    CHECK(panel.state(p, 0) == draw_initial_state(spec, cfg.seed, p));
    for (std::size_t t = 0; t < cfg.horizon; ++t) {
      const double a = panel.asset(p, t);
      const auto z = panel.state(p, t);
      const auto d = draw_step(spec, cfg.seed, p, t, z);
      CHECK(panel.state(p, t + 1) == d.next_state);
      CHECK(panel.asset(p, t + 1) == next_wealth(policy, a, z, d));
      // Nonnegativity, income floor, and consumption in (0, a].
      CHECK(panel.asset(p, t + 1) >= d.income);
      const double c = std::min(a, policy(a, z));
      CHECK(c > 0.0);
      CHECK(c <= a);
    }
  }
}

TEST_CASE("simulation is deterministic and thread invariant") {
  const auto spec = ifp::testing::benhabib();
  SimConfig cfg;
  cfg.n_paths = 700;
  cfg.horizon = 300;
  cfg.burn_in = 50;
  cfg.seed = 17;
  const auto a = simulate(spec, benhabib_policy(), cfg);
  const auto b = simulate(spec, benhabib_policy(), cfg);
  cfg.threads = 4;
  const auto c = simulate(spec, benhabib_policy(), cfg);
  CHECK(a.assets == b.assets);
  CHECK(a.assets == c.assets);
  CHECK(a.states == c.states);
  CHECK(a.mean_path == c.mean_path);

  cfg.seed = 18;
  CHECK(simulate(spec, benhabib_policy(), cfg).assets != a.assets);
}

TEST_CASE("terminal-only mode matches the full panel") {
  const auto spec = ifp::testing::benhabib();
  SimConfig cfg;
  cfg.n_paths = 100;
  cfg.horizon = 120;
  cfg.burn_in = 20;
  cfg.seed = 3;
  const auto full = simulate(spec, benhabib_policy(), cfg);
  cfg.keep_paths = false;
  const auto terminal = simulate(spec, benhabib_policy(), cfg);
  CHECK(full.terminal_assets() == terminal.terminal_assets());
  CHECK(full.terminal_states() == terminal.terminal_states());
  CHECK(full.mean_path == terminal.mean_path);
}

TEST_CASE("simulation configuration errors") {
  const auto spec = ifp::testing::benhabib();
  SimConfig cfg;
  cfg.horizon = 10;
  cfg.burn_in = 10;
  CHECK_THROWS_AS(simulate(spec, benhabib_policy(), cfg), Error);
  cfg.burn_in = 0;
  cfg.n_paths = 0;
  CHECK_THROWS_AS(simulate(spec, benhabib_policy(), cfg), Error);
  cfg.n_paths = 1;
  cfg.z0 = 3;
  CHECK_THROWS_AS(simulate(spec, benhabib_policy(), cfg), Error);
}

TEST_CASE("explosive returns saturate and flag divergence") {
  // Solved with a patient, low-return spec, then simulated under huge returns.
  auto spec = ifp::testing::benhabib();
  spec.ret = PrimitiveSpec::constant(1e40);
  SimConfig cfg;
  cfg.n_paths = 10;
  cfg.horizon = 100;
  cfg.burn_in = 0;
  cfg.a0 = 100.0;
  const auto panel = simulate(spec, benhabib_policy(), cfg);
  CHECK(panel.any_diverged());
  for (double a : panel.terminal_assets()) CHECK(a == kDivergenceCap);
}

TEST_CASE("benhabib cross-sectional mean stabilizes without divergence") {
  const auto spec = ifp::testing::benhabib();
  SimConfig cfg;
  cfg.n_paths = 10'000;
  cfg.horizon = 2000;
  cfg.burn_in = 500;
  cfg.seed = 1;
  cfg.keep_paths = false;
  const auto panel = simulate(spec, benhabib_policy(), cfg);
  CHECK_FALSE(panel.any_diverged());
  const double late = panel.mean_path[2000];
  const double mid = panel.mean_path[1500];
  // Two nearly independent cross-sections of 1e4 paths: the sampling sd of
  // their difference is sqrt(2) sd(a) / 100.
  const double sd = std::sqrt(variance(panel.terminal_assets()));
  CHECK(std::abs(mid - late) < 3.0 * std::sqrt(2.0) * sd / 100.0);
  CHECK(std::abs(mid - late) / late < 0.02);
  CHECK(*std::max_element(panel.mean_path.begin(), panel.mean_path.end()) < 10.0);
}

TEST_CASE("ergodicity with iid wealth") {
  ErgodicityConfig cfg;
  cfg.path_length = 200'000;
  cfg.horizon = 50;
  cfg.burn_in = 10;
  cfg.seed = 4;
  const auto r = ergodicity_check(zero_return(), zero_return_policy(), TestFunctional::assets(), cfg);
  CHECK(r.cross_avg == doctest::Approx(1.0).epsilon(0.02));
  CHECK(r.rel_gap < 3.0 * r.rel_std_error);
}

TEST_CASE("ergodicity on the benhabib spec") {
  const auto spec = ifp::testing::benhabib();
  ErgodicityConfig cfg;
  cfg.seed = 2;
  for (const auto& h : {TestFunctional::assets(), TestFunctional::log_one_plus(),
                        TestFunctional::below_quantile(0.5)}) {
    const auto r = ergodicity_check(spec, benhabib_policy(), h, cfg);
    CAPTURE(static_cast<int>(h.kind));
    CHECK(r.rel_gap < 0.02);
  }
}

TEST_CASE("ergodicity refuses specs without mixing") {
  auto spec = ifp::testing::two_state_lognormal();
  spec.chain = ifp::testing::matrix2(0.0, 1.0, 1.0, 0.0);
  CHECK_THROWS_AS(ergodicity_check(spec, benhabib_policy(), TestFunctional::assets()), Error);
}

TEST_CASE("ks statistic") {
  CHECK(ks_statistic({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(ks_statistic({1, 1, 1}, {2, 2}) == 1.0);
  CHECK(ks_statistic({1, 2, 3, 4}, {3, 4, 5, 6}) == doctest::Approx(0.5));
}

TEST_CASE("two-start distance at horizon zero is one") {
  CHECK(two_start_distance(ifp::testing::benhabib(), benhabib_policy(), 0.1, 100.0, 0) == 1.0);
  CHECK_THROWS_AS(two_start_distance(ifp::testing::benhabib(), benhabib_policy(), 1.0, 1.0, 5),
                  Error);
}

TEST_CASE("same start, independent seeds: KS within sampling noise") {
  const auto spec = ifp::testing::benhabib();
  SimConfig cfg;
  cfg.n_paths = 10'000;
  cfg.horizon = 200;
  cfg.burn_in = 0;
  cfg.keep_paths = false;
  cfg.seed = 1;
  const auto a = simulate(spec, benhabib_policy(), cfg).terminal_assets();
  cfg.seed = 2;
  const auto b = simulate(spec, benhabib_policy(), cfg).terminal_assets();
  // 1% critical value of the two-sample KS test.
  CHECK(ks_statistic(a, b) < 1.628 * std::sqrt(2.0 / 10'000));
}

TEST_CASE("starts far apart forget their initial condition") {
  CHECK(two_start_distance(ifp::testing::benhabib(), benhabib_policy(), 0.1, 100.0, 2000) < 0.01);
}

TEST_CASE("batch means on iid and constant series") {
  std::vector<double> flat(10'000, 2.5);
  CHECK_THROWS_AS(batch_means(flat, 10), Error);
  try {
    batch_means(flat, 10);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateVariance);
  }
  std::vector<double> iid(200'000);
  for (std::size_t i = 0; i < iid.size(); ++i) iid[i] = rng::draw(8, 0, i, rng::Stream::Test).normal;
  const auto r = batch_means(iid, 100);
  CHECK(r.long_run_variance == doctest::Approx(1.0).epsilon(0.3));
  CHECK(r.normality_statistic < r.critical_value);
}

TEST_CASE("clt diagnostic") {
  CHECK_THROWS_AS(clt_diagnostic(zero_return(), zero_return_policy(), TestFunctional::assets(),
                                 10'000, 100),
                  Error);

  // Constant income and no returns: wealth is constant.
  auto flat = zero_return();
  flat.income = PrimitiveSpec::constant(1.0);
  const auto flat_policy = solve(flat).policy;
  try {
    clt_diagnostic(flat, flat_policy, TestFunctional::assets(), 100'000, 50);
    FAIL("expected DegenerateVariance");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateVariance);
  }

  // iid wealth: long-run variance is Var(Y) = 1/6 for Y uniform on {0.5, 1, 1.5}.
  const auto iid = clt_diagnostic(zero_return(), zero_return_policy(), TestFunctional::assets(),
                                  1'000'000, 200, 3);
  CHECK(iid.long_run_variance == doctest::Approx(1.0 / 6.0).epsilon(0.1));
  CHECK(iid.normality_statistic < iid.critical_value);

  const auto b = clt_diagnostic(ifp::testing::benhabib(), benhabib_policy(),
                                TestFunctional::log_one_plus(), 1'000'000, 200, 3);
  CHECK(b.long_run_variance > 0.0);
  CHECK(b.normality_statistic < b.critical_value);
}

TEST_CASE("stationary sample") {
  const auto spec = ifp::testing::benhabib();
  StationarySampleConfig cfg;
  cfg.n_paths = 50;
  cfg.draws_per_path = 20;
  cfg.spacing = 10;
  cfg.burn_in = 30;
  cfg.seed = 6;
  const auto s = stationary_sample(spec, benhabib_policy(), cfg);
  REQUIRE(s.size() == 1000);
  // Same draws as walking path 0 by hand.
  double a = cfg.a0;
  std::size_t z = draw_initial_state(spec, cfg.seed, 0);
  std::size_t recorded = 0;
  for (std::size_t t = 0; t < cfg.burn_in + 200; ++t) {
    const auto d = draw_step(spec, cfg.seed, 0, t, z);
    a = next_wealth(benhabib_policy(), a, z, d);
    z = d.next_state;
    if (t + 1 > cfg.burn_in && (t + 1 - cfg.burn_in) % cfg.spacing == 0) {
      CHECK(s[recorded++] == a);
    }
  }
  cfg.threads = 3;
  CHECK(stationary_sample(spec, benhabib_policy(), cfg) == s);
}

TEST_CASE("quantile interpolation") {
  CHECK(quantile({1, 2, 3, 4, 5}, 0.5) == 3.0);
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(quantile({4, 1, 3, 2}, 0.0) == 1.0);
  CHECK(quantile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(quantile({1, 2, 3, 4, 5}, 0.1) == doctest::Approx(1.4));
}

}  // TEST_SUITE
