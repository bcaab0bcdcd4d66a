#include "ifp/tail.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ifp/dynamics.hpp"
#include "ifp/error.hpp"
#include "ifp/markov.hpp"
#include "ifp/parallel.hpp"
#include "ifp/rng.hpp"

namespace ifp {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

template <class T>
const T& at_state(const std::vector<T>& v, std::size_t z) {
  return v.size() == 1 ? v.front() : v.at(z);
}

double hill_core(std::vector<double>& work, std::size_t k) {
  // Top k+1 order statistics at the front, largest first.
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(k),
                   work.end(), std::greater<>());
  const double threshold = work[k];
  if (!(threshold > 0.0)) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(work[i] / threshold);
  return sum / static_cast<double>(k);
}

}  // namespace

WealthGrowthCheck check_wealth_growth(const ModelSpec& spec,
                                      std::span<const double> alpha) {
  if (alpha.size() != spec.n_states()) {
    throw Error(ErrorKind::InvalidParameter, "alpha needs one entry per state");
  }
  for (std::size_t z = 0; z < spec.n_states(); ++z) {
    if (!(spec.chain(z, z) > 0.0)) continue;
    const double keep = 1.0 - alpha[z];
    if (!(keep > 0.0)) continue;
    bool grows = false;
    if (spec.ret.is_lognormal()) {
      grows = true;  // unbounded support
    } else {
      for (const auto& node : expectation_nodes(spec.ret, z, 1)) {
        if (node.weight > 0.0 && node.point * keep > 1.0) grows = true;
      }
    }
    if (grows) return {true, z};
  }
  return {false, std::nullopt};
}

WealthGrowthCheck check_wealth_growth(const ModelSpec& spec, const Policy& policy) {
  return check_wealth_growth(spec, policy.alpha);
}

double truncated_growth_moment(const PrimitiveSpec& ret, std::size_t z_next, double scale,
                               double s) {
  if (!(scale > 0.0)) return 0.0;
  return std::visit(
      [&](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Constant>) {
          const double g = scale * at_state(law.values, z_next);
          return g > 1.0 ? std::pow(g, s) : 0.0;
        } else if constexpr (std::is_same_v<T, Lognormal>) {
          const double m = at_state(law.location, z_next) + std::log(scale);
          const double v = at_state(law.scale, z_next);
          return std::exp(s * m + 0.5 * s * s * v * v) * normal_cdf(s * v + m / v);
        } else {
          const DiscreteLaw& d = at_state(law.laws, z_next);
          double total = 0.0;
          for (std::size_t i = 0; i < d.points.size(); ++i) {
            const double g = scale * d.points[i];
            if (d.probs[i] > 0.0 && g > 1.0) total += d.probs[i] * std::pow(g, s);
          }
          return total;
        }
      },
      ret.law);
}

double lambda_of_s(const ModelSpec& spec, std::span<const double> alpha, double s) {
  const std::size_t n = spec.n_states();
  if (alpha.size() != n) {
    throw Error(ErrorKind::InvalidParameter, "alpha needs one entry per state");
  }
  if (!(s >= 0.0)) throw Error(ErrorKind::InvalidParameter, "lambda needs s >= 0");
  if (std::all_of(alpha.begin(), alpha.end(), [](double a) { return a >= 1.0; })) {
    throw Error(ErrorKind::DegenerateAlpha,
                "alpha = 1 in every state: nothing is saved at high wealth");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t z = 0; z < n; ++z) {
    for (std::size_t next = 0; next < n; ++next) {
      const double p = spec.chain(z, next);
      m(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(next)) =
          p > 0.0 ? p * truncated_growth_moment(spec.ret, next, 1.0 - alpha[z], s) : 0.0;
    }
  }
  return spectral_radius(m);
}

double lambda_of_s(const ModelSpec& spec, const Policy& policy, double s) {
  return lambda_of_s(spec, policy.alpha, s);
}

KappaResult kappa(const ModelSpec& spec, std::span<const double> alpha,
                  const KappaSettings& settings) {
  if (!(settings.s_min > 0.0) || !(settings.s_max > settings.s_min) ||
      settings.n_grid < 2) {
    throw Error(ErrorKind::InvalidParameter, "invalid s-grid for kappa");
  }
  KappaResult result;
  const double log_lo = std::log(settings.s_min);
  const double log_hi = std::log(settings.s_max);
  std::optional<std::size_t> crossing;
  for (std::size_t i = 0; i < settings.n_grid; ++i) {
    const double s = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                           static_cast<double>(settings.n_grid - 1));
    const double lam = lambda_of_s(spec, alpha, s);
    result.curve.emplace_back(s, lam);
    if (!crossing && lam > 1.0) crossing = i;
  }
  if (!crossing) return result;

  double lo = *crossing == 0 ? 0.0 : result.curve[*crossing - 1].first;
  double hi = result.curve[*crossing].first;
  if (lambda_of_s(spec, alpha, lo) > 1.0) {
    result.kappa = lo;  // lambda(0) > 1 cannot happen for a substochastic P o M_A(0)
    return result;
  }
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    const double lam = lambda_of_s(spec, alpha, mid);
    if (std::abs(lam - 1.0) < 1e-8 && hi - lo < 1e-9) break;
    (lam > 1.0 ? hi : lo) = mid;
    if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
  }
  result.kappa = mid;
  return result;
}

KappaResult kappa(const ModelSpec& spec, const Policy& policy,
                  const KappaSettings& settings) {
  return kappa(spec, policy.alpha, settings);
}

bool convex_surrogate_holds(const std::vector<std::pair<double, double>>& curve) {
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    const double v = curve[i].second;
    if (v > curve[i - 1].second && v > curve[i + 1].second) return false;
  }
  return true;
}

HillResult hill_estimator(std::span<const double> samples, std::size_t k,
                          std::size_t n_boot, std::uint64_t seed, unsigned threads) {
  const std::size_t n = samples.size();
  if (k < 50 || 2 * k >= n) {
    throw Error(ErrorKind::InsufficientTail,
                "Hill estimator needs 50 <= k < n/2 (k=" + std::to_string(k) +
                    ", n=" + std::to_string(n) + ")");
  }
  std::vector<double> work(samples.begin(), samples.end());
  const double h = hill_core(work, k);
  if (!(h > 0.0)) {
    throw Error(ErrorKind::InsufficientTail, "degenerate tail: all tail ratios equal 1");
  }

  std::vector<double> boot(n_boot, 0.0);
  parallel_for(n_boot, threads, [&](std::size_t b) {
    std::vector<double> resample(n);
    for (std::size_t i = 0; i < n; i += 4) {
      const rng::Counter bits = rng::bits(seed, b, i / 4, rng::Stream::Bootstrap);
      for (std::size_t j = 0; j < 4 && i + j < n; ++j) {
        const auto idx = static_cast<std::size_t>(
            (static_cast<std::uint64_t>(bits[j]) * n) >> 32);
        resample[i + j] = samples[idx];
      }
    }
    const double hb = hill_core(resample, k);
    boot[b] = hb > 0.0 ? 1.0 / hb : std::numeric_limits<double>::infinity();
  });

  HillResult result{1.0 / h, 1.0 / h, 1.0 / h, k};
  if (n_boot >= 2) {
    result.lower = quantile(boot, 0.05);
    result.upper = quantile(boot, 0.95);
  }
  return result;
}

TailReport build_tail_report(const ModelSpec& spec, const Policy& policy,
                             std::span<const double> sample,
                             const TailSettings& settings) {
  TailReport report;
  report.alpha = policy.alpha;
  const auto growth = check_wealth_growth(spec, policy);
  report.growth_condition_holds = growth.holds;
  report.witness_state = growth.witness;
  report.notes.push_back(
      "alpha is the least-squares slope over the top 10% of grid nodes; it is the "
      "dominant approximation in kappa");
  if (spec.ret.is_lognormal()) {
    report.notes.push_back(
        "lognormal returns: all moments are finite, lambda is treated as finite on "
        "[0, inf)");
  }

  try {
    const KappaResult k = kappa(spec, policy, settings.kappa);
    report.lambda_curve = k.curve;
    report.kappa = k.kappa;
    if (std::any_of(policy.alpha.begin(), policy.alpha.end(),
                    [](double a) { return a >= 1.0; })) {
      report.notes.push_back("alpha = 1 in some states: those rows of M_A vanish");
    }

    std::vector<double> lo(policy.alpha), hi(policy.alpha);
    for (std::size_t z = 0; z < policy.alpha.size(); ++z) {
      const double step = std::abs(policy.top_slope(z) - policy.next_to_top_slope(z));
      lo[z] = std::clamp(policy.alpha[z] - step, 0.0, 1.0);
      hi[z] = std::clamp(policy.alpha[z] + step, 0.0, 1.0);
    }
    report.kappa_alpha_low = kappa(spec, lo, settings.kappa).kappa;
    try {
      report.kappa_alpha_high = kappa(spec, hi, settings.kappa).kappa;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateAlpha) throw;
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateAlpha) throw;
    report.notes.push_back(e.what());
  }

  if (!sample.empty()) {
    const std::vector<double> values(sample.begin(), sample.end());
    const double median = quantile(values, 0.5);
    if (median > 0.0) report.q999_over_median = quantile(values, 0.999) / median;
    const auto k = static_cast<std::size_t>(
        std::floor(settings.hill_fraction * static_cast<double>(sample.size())));
    try {
      report.hill = hill_estimator(sample, k, settings.n_boot, settings.seed,
                                   settings.threads);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientTail) throw;
      report.notes.push_back(e.what());
    }
  }

  if (!report.growth_condition_holds) {
    report.verdict = "no heavy-tail guarantee";
    report.verdict_detail =
        "wealth growth condition fails: no state lets large wealth grow with "
        "positive probability";
  } else if (report.kappa) {
    report.verdict = kHeavyVerdict;
    report.verdict_detail =
        "conditional on unbounded support, stationary wealth is at least Pareto: "
        "tail exponent <= kappa + eps for every eps > 0";
  } else {
    report.verdict = "undetermined";
    report.verdict_detail = "lambda(s) stays <= 1 up to s_max; increase s_max";
  }
  return report;
}

}  // namespace ifp
