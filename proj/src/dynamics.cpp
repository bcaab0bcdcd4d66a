#include "ifp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ifp/error.hpp"
#include "ifp/parallel.hpp"

namespace ifp {

namespace {

constexpr std::size_t kChunk = 1024;

std::vector<double> stationary_cdf(const ModelSpec& spec) {
  const Eigen::VectorXd pi = stationary_distribution(spec.chain);
  std::vector<double> cdf(static_cast<std::size_t>(pi.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < pi.size(); ++i) {
    acc += pi(i);
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  return cdf;
}

std::size_t pick_state(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end() - 1, u);
  return static_cast<std::size_t>(it - cdf.begin());
}

double evaluate(const TestFunctional& h, double a, double threshold) {
  switch (h.kind) {
    case TestFunctional::Kind::Assets: return a;
    case TestFunctional::Kind::LogOnePlusAssets: return std::log1p(a);
    case TestFunctional::Kind::BelowQuantile: return a <= threshold ? 1.0 : 0.0;
  }
  return a;
}

// Walks one path for `steps` periods after `burn_in`, calling visit(a_t).
template <class Visit>
void walk_path(const ModelSpec& spec, const Policy& policy, std::uint64_t seed,
               std::uint64_t path, double a0, std::size_t z0, std::size_t burn_in,
               std::size_t steps, Visit&& visit) {
  double a = a0;
  std::size_t z = z0;
  const std::size_t total = burn_in + steps;
  for (std::size_t t = 0; t < total; ++t) {
    const StepDraws d = draw_step(spec, seed, path, t, z);
    a = next_wealth(policy, a, z, d);
    z = d.next_state;
    if (t + 1 > burn_in) visit(a);
  }
}

}  // namespace

std::vector<double> WealthPanel::terminal_assets() const {
  std::vector<double> out(n_paths());
  const std::size_t cols = columns();
  for (std::size_t p = 0; p < n_paths(); ++p) out[p] = assets[p * cols + cols - 1];
  return out;
}

std::vector<std::uint32_t> WealthPanel::terminal_states() const {
  std::vector<std::uint32_t> out(n_paths());
  const std::size_t cols = columns();
  for (std::size_t p = 0; p < n_paths(); ++p) out[p] = states[p * cols + cols - 1];
  return out;
}

bool WealthPanel::any_diverged() const {
  return std::any_of(diverged.begin(), diverged.end(), [](auto d) { return d != 0; });
}

StepDraws draw_step(const ModelSpec& spec, std::uint64_t seed, std::uint64_t path,
                    std::uint64_t t, std::size_t state) {
  const std::uint64_t date = t + 1;
  StepDraws d;
  d.next_state = spec.chain.next_state(
      state, rng::uniform(seed, path, date, rng::Stream::State));
  d.ret = sample(spec.ret, d.next_state, rng::draw(seed, path, date, rng::Stream::Return));
  d.income =
      sample(spec.income, d.next_state, rng::draw(seed, path, date, rng::Stream::Income));
  return d;
}

std::size_t draw_initial_state(const ModelSpec& spec, std::uint64_t seed,
                               std::uint64_t path) {
  return pick_state(stationary_cdf(spec), rng::uniform(seed, path, 0, rng::Stream::Start));
}

double next_wealth(const Policy& policy, double a, std::size_t state,
                   const StepDraws& draws) {
  const double c = std::min(a, policy(a, state));
  const double next = draws.ret * std::max(0.0, a - c) + draws.income;
  if (!(next < kDivergenceCap)) return kDivergenceCap;
  return next;
}

WealthPanel simulate(const ModelSpec& spec, const Policy& policy,
                     const SimConfig& config) {
  // horizon 0 (a point mass at a0) is allowed with burn_in 0.
  if (config.n_paths < 1 || (config.horizon > 0 && config.burn_in >= config.horizon)) {
    throw Error(ErrorKind::InvalidParameter,
                "simulation needs n_paths >= 1 and burn_in < horizon");
  }
  if (policy.n_states() != spec.n_states()) {
    throw Error(ErrorKind::GridMismatch, "policy and model disagree on the state count");
  }
  if (config.z0 && *config.z0 >= spec.n_states()) {
    throw Error(ErrorKind::InvalidParameter, "initial state out of range");
  }
  if (!(config.a0 >= 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "initial assets must be >= 0");
  }

  WealthPanel panel;
  panel.config = config;
  const std::size_t n = config.n_paths;
  const std::size_t horizon = config.horizon;
  const std::size_t cols = panel.columns();
  panel.assets.assign(n * cols, 0.0);
  panel.states.assign(n * cols, 0);
  panel.diverged.assign(n, 0);

  const std::vector<double> cdf = stationary_cdf(spec);
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> chunk_sums(n_chunks * (horizon + 1), 0.0);

  parallel_for(n_chunks, config.threads, [&](std::size_t chunk) {
    double* sums = chunk_sums.data() + chunk * (horizon + 1);
    const std::size_t end = std::min(n, (chunk + 1) * kChunk);
    for (std::size_t p = chunk * kChunk; p < end; ++p) {
      const std::uint64_t path = config.path_offset + p;
      std::size_t z = config.z0 ? *config.z0
                                : pick_state(cdf, rng::uniform(config.seed, path, 0,
                                                               rng::Stream::Start));
      double a = config.a0;
      double* row = panel.assets.data() + p * cols;
      std::uint32_t* srow = panel.states.data() + p * cols;
      if (config.keep_paths) {
        row[0] = a;
        srow[0] = static_cast<std::uint32_t>(z);
      }
      sums[0] += a;
      for (std::size_t t = 0; t < horizon; ++t) {
        const StepDraws d = draw_step(spec, config.seed, path, t, z);
        a = next_wealth(policy, a, z, d);
        z = d.next_state;
        if (a >= kDivergenceCap) panel.diverged[p] = 1;
        if (config.keep_paths) {
          row[t + 1] = a;
          srow[t + 1] = static_cast<std::uint32_t>(z);
        }
        sums[t + 1] += a;
      }
      if (!config.keep_paths) {
        row[0] = a;
        srow[0] = static_cast<std::uint32_t>(z);
      }
    }
  });

  panel.mean_path.assign(horizon + 1, 0.0);
  for (std::size_t chunk = 0; chunk < n_chunks; ++chunk) {
    for (std::size_t t = 0; t <= horizon; ++t) {
      panel.mean_path[t] += chunk_sums[chunk * (horizon + 1) + t];
    }
  }
  for (double& m : panel.mean_path) m /= static_cast<double>(n);
  return panel;
}

std::vector<double> stationary_sample(const ModelSpec& spec, const Policy& policy,
                                      const StationarySampleConfig& config) {
  if (config.n_paths < 1 || config.draws_per_path < 1 || config.spacing < 1) {
    throw Error(ErrorKind::InvalidParameter,
                "stationary sample needs positive path count, draws and spacing");
  }
  if (policy.n_states() != spec.n_states()) {
    throw Error(ErrorKind::GridMismatch, "policy and model disagree on the state count");
  }
  const std::vector<double> cdf = stationary_cdf(spec);
  const std::size_t per = config.draws_per_path;
  std::vector<double> out(config.n_paths * per, 0.0);
  const std::size_t steps = per * config.spacing;
  parallel_for(config.n_paths, config.threads, [&](std::size_t p) {
    const std::size_t z0 =
        pick_state(cdf, rng::uniform(config.seed, p, 0, rng::Stream::Start));
    std::size_t t = 0;
    walk_path(spec, policy, config.seed, p, config.a0, z0, config.burn_in, steps,
              [&](double a) {
                if (++t % config.spacing == 0) out[p * per + t / config.spacing - 1] = a;
              });
  });
  return out;
}

double quantile(std::vector<double> values, double level) {
  if (values.empty()) throw Error(ErrorKind::InvalidParameter, "quantile of empty sample");
  level = std::clamp(level, 0.0, 1.0);
  const double pos = level * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo),
                   values.end());
  const double v_lo = values[lo];
  double v_hi = v_lo;
  if (hi != lo) {
    v_hi = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1,
                             values.end());
  }
  return v_lo + (pos - static_cast<double>(lo)) * (v_hi - v_lo);
}

ErgodicityResult ergodicity_check(const ModelSpec& spec, const Policy& policy,
                                  const TestFunctional& h,
                                  const ErgodicityConfig& config) {
  const GrowthReport report = compute_growth_report(spec);
  if (!report.flags.savings_return_growth || !report.flags.mixing) {
    throw Error(ErrorKind::AssumptionViolated,
                "ergodicity needs the stationarity and mixing conditions");
  }

  SimConfig cross_cfg;
  cross_cfg.n_paths = config.n_paths;
  cross_cfg.horizon = config.horizon;
  cross_cfg.burn_in = config.burn_in;
  cross_cfg.seed = config.seed;
  cross_cfg.a0 = config.a0;
  cross_cfg.keep_paths = false;
  cross_cfg.path_offset = 1;  // path 0 is the long time-series path
  cross_cfg.threads = config.threads;
  const std::vector<double> terminal = simulate(spec, policy, cross_cfg).terminal_assets();

  const double threshold = h.kind == TestFunctional::Kind::BelowQuantile
                               ? quantile(terminal, h.level)
                               : 0.0;
  double cross_sum = 0.0;
  double cross_sq = 0.0;
  for (double a : terminal) {
    const double v = evaluate(h, a, threshold);
    cross_sum += v;
    cross_sq += v * v;
  }
  const auto n_cross = static_cast<double>(terminal.size());
  const double cross_avg = cross_sum / n_cross;
  const double cross_var =
      std::max(0.0, (cross_sq - n_cross * cross_avg * cross_avg) / (n_cross - 1.0));

  std::vector<double> series;
  series.reserve(config.path_length);
  const std::size_t z0 = draw_initial_state(spec, config.seed, 0);
  walk_path(spec, policy, config.seed, 0, config.a0, z0, config.burn_in,
            config.path_length, [&](double a) { series.push_back(evaluate(h, a, threshold)); });
  const double time_avg =
      std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());

  double time_se2 = 0.0;
  const std::size_t n_batches = std::min<std::size_t>(1000, series.size() / 100);
  if (n_batches >= 2) {
    try {
      const CltResult clt = batch_means(series, n_batches);
      time_se2 = clt.long_run_variance / static_cast<double>(series.size());
    } catch (const Error&) {
      time_se2 = 0.0;
    }
  }
  const double scale = std::abs(cross_avg);
  const double pooled = std::sqrt(time_se2 + cross_var / n_cross);
  return {time_avg, cross_avg, std::abs(time_avg - cross_avg) / scale, pooled / scale};
}

double ks_statistic(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || y.empty()) {
    throw Error(ErrorKind::InvalidParameter, "KS statistic needs nonempty samples");
  }
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto nx = static_cast<double>(x.size());
  const auto ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double worst = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / nx -
                                     static_cast<double>(j) / ny));
  }
  return worst;
}

double two_start_distance(const ModelSpec& spec, const Policy& policy, double a_lo,
                          double a_hi, std::size_t horizon,
                          const TwoStartConfig& config) {
  if (!(a_lo < a_hi)) {
    throw Error(ErrorKind::InvalidParameter, "two_start_distance needs a_lo < a_hi");
  }
  SimConfig cfg;
  cfg.n_paths = config.n_paths;
  cfg.horizon = horizon;
  cfg.burn_in = 0;
  cfg.seed = config.seed;
  cfg.z0 = config.z0;
  cfg.keep_paths = false;
  cfg.threads = config.threads;
  cfg.a0 = a_lo;
  const auto lo = simulate(spec, policy, cfg).terminal_assets();
  cfg.a0 = a_hi;
  const auto hi = simulate(spec, policy, cfg).terminal_assets();
  return ks_statistic(lo, hi);
}

CltResult batch_means(std::span<const double> series, std::size_t n_batches) {
  if (n_batches < 2 || series.size() < n_batches) {
    throw Error(ErrorKind::InvalidParameter, "batch means needs >= 2 nonempty batches");
  }
  const std::size_t m = series.size() / n_batches;
  std::vector<double> means(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * m; i < (b + 1) * m; ++i) s += series[i];
    means[b] = s / static_cast<double>(m);
  }
  const auto nb = static_cast<double>(n_batches);
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / nb;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double b : means) {
    const double d = b - grand;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const double sample_var = m2 / (nb - 1.0);
  if (!(sample_var > 1e-24 * std::max(1.0, grand * grand))) {
    throw Error(ErrorKind::DegenerateVariance,
                "batch means do not vary; long-run variance is zero");
  }
  m2 /= nb;
  m3 /= nb;
  m4 /= nb;
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  const double jb = nb / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
  return {static_cast<double>(m) * sample_var, jb, kJarqueBera1Percent, grand};
}

CltResult clt_diagnostic(const ModelSpec& spec, const Policy& policy,
                         const TestFunctional& h, std::size_t path_length,
                         std::size_t n_batches, std::uint64_t seed,
                         std::size_t burn_in) {
  if (n_batches < 2 || path_length / n_batches < 1000) {
    throw Error(ErrorKind::InvalidParameter,
                "clt_diagnostic needs at least 1000 observations per batch");
  }
  std::vector<double> assets;
  assets.reserve(path_length);
  const std::size_t z0 = draw_initial_state(spec, seed, 0);
  walk_path(spec, policy, seed, 0, 1.0, z0, burn_in, path_length,
            [&](double a) { assets.push_back(a); });
  const double threshold =
      h.kind == TestFunctional::Kind::BelowQuantile ? quantile(assets, h.level) : 0.0;
  for (double& a : assets) a = evaluate(h, a, threshold);
  return batch_means(assets, n_batches);
}

}  // namespace ifp
