#pragma once

// Simulation of a' = R(Z', zeta') [a - c*(a, Z)] + Y(Z', eta') and
// ergodicity / stability diagnostics built on it.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ifp/model.hpp"
#include "ifp/solver.hpp"

namespace ifp {

// Assets are saturated here and the path is flagged as diverged.
inline constexpr double kDivergenceCap = 1e300;

struct SimConfig {
  std::size_t n_paths = 10000;
  std::size_t horizon = 2000;
  std::size_t burn_in = 500;
  std::uint64_t seed = 0;
  double a0 = 1.0;
  std::optional<std::size_t> z0;  // nullopt: draw from the stationary law
  bool keep_paths = true;         // false: keep only the terminal cross-section
  std::size_t path_offset = 0;    // shifts the RNG path index
  unsigned threads = 1;
};

struct WealthPanel {
  SimConfig config;
  // keep_paths: n_paths x (horizon + 1), row-major by path.
  // otherwise: n_paths terminal values.
  std::vector<double> assets;
  std::vector<std::uint32_t> states;
  std::vector<double> mean_path;  // cross-sectional mean at each date
  std::vector<std::uint8_t> diverged;

  std::size_t n_paths() const noexcept { return config.n_paths; }
  std::size_t columns() const noexcept {
    return config.keep_paths ? config.horizon + 1 : 1;
  }
  double asset(std::size_t path, std::size_t t) const {
    return assets[path * columns() + t];
  }
  std::uint32_t state(std::size_t path, std::size_t t) const {
    return states[path * columns() + t];
  }
  std::vector<double> terminal_assets() const;
  std::vector<std::uint32_t> terminal_states() const;
  bool any_diverged() const;
};

// Everything drawn when moving from date t to t + 1 on one path.
struct StepDraws {
  std::size_t next_state;
  double ret;
  double income;
};

StepDraws draw_step(const ModelSpec& spec, std::uint64_t seed, std::uint64_t path,
                    std::uint64_t t, std::size_t state);

std::size_t draw_initial_state(const ModelSpec& spec, std::uint64_t seed,
                               std::uint64_t path);

// One application of the law of motion, saturated at kDivergenceCap.
double next_wealth(const Policy& policy, double a, std::size_t state,
                   const StepDraws& draws);

WealthPanel simulate(const ModelSpec& spec, const Policy& policy,
                     const SimConfig& config);

// Pooled draws from the stationary law: each path is burnt in, then recorded
// every `spacing` dates. Used for tail estimates, where one long thinned
// ensemble is far cheaper than storing a full panel.
struct StationarySampleConfig {
  std::size_t n_paths = 10'000;
  std::size_t burn_in = 500;
  std::size_t draws_per_path = 100;
  std::size_t spacing = 100;
  std::uint64_t seed = 0;
  double a0 = 1.0;
  unsigned threads = 1;
};

// Output is path-major: sample[p * draws_per_path + j].
std::vector<double> stationary_sample(const ModelSpec& spec, const Policy& policy,
                                      const StationarySampleConfig& config);

struct TestFunctional {
  enum class Kind { Assets, LogOnePlusAssets, BelowQuantile };
  Kind kind = Kind::Assets;
  double level = 0.5;  // quantile level for BelowQuantile

  static TestFunctional assets() { return {Kind::Assets, 0.0}; }
  static TestFunctional log_one_plus() { return {Kind::LogOnePlusAssets, 0.0}; }
  static TestFunctional below_quantile(double level) {
    return {Kind::BelowQuantile, level};
  }
};

struct ErgodicityConfig {
  std::size_t path_length = 1'000'000;
  std::size_t n_paths = 10'000;
  std::size_t horizon = 2000;
  std::size_t burn_in = 500;
  std::uint64_t seed = 0;
  double a0 = 1.0;
  unsigned threads = 1;
};

struct ErgodicityResult {
  double time_avg;
  double cross_avg;
  double rel_gap;        // |time - cross| / |cross|
  double rel_std_error;  // pooled standard error of the gap, relative to cross
};

// Time average along one long path vs the cross-section at the final date.
// Throws AssumptionViolated when stationarity or mixing flags fail.
ErgodicityResult ergodicity_check(const ModelSpec& spec, const Policy& policy,
                                  const TestFunctional& h,
                                  const ErgodicityConfig& config = {});

struct TwoStartConfig {
  std::size_t n_paths = 10'000;
  std::size_t z0 = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

// KS distance between terminal cross-sections of ensembles started at a_lo and
// a_hi. Both ensembles use the same innovations (common random numbers).
double two_start_distance(const ModelSpec& spec, const Policy& policy, double a_lo,
                          double a_hi, std::size_t horizon,
                          const TwoStartConfig& config = {});

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> x, std::vector<double> y);

struct CltResult {
  double long_run_variance;    // batch-means estimate of gamma_h^2
  double normality_statistic;  // Jarque-Bera on standardized batch means
  double critical_value;       // chi-square(2) 1% critical value
  double mean;
};

inline constexpr double kJarqueBera1Percent = 9.210340371976184;

// Throws DegenerateVariance when the batch means do not vary.
CltResult clt_diagnostic(const ModelSpec& spec, const Policy& policy,
                         const TestFunctional& h, std::size_t path_length,
                         std::size_t n_batches, std::uint64_t seed = 0,
                         std::size_t burn_in = 500);

// Batch-means core, exposed for testing on arbitrary series.
CltResult batch_means(std::span<const double> series, std::size_t n_batches);

// Empirical quantile (type 7 interpolation).
double quantile(std::vector<double> values, double level);

}  // namespace ifp
