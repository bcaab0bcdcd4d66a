#pragma once

// Pareto tail exponent of stationary wealth.
//
// With G(z, z', zeta') = R(z', zeta') (1 - alpha(z)) and A = G 1{G > 1},
// lambda(s) is the spectral radius of P o M_A(s), M_A(s)(z, z') = E A^s, and
// kappa = inf{s > 0 : lambda(s) > 1}. Stationary wealth with unbounded support
// then satisfies P{a >= x} >= C x^(-kappa - eps): the tail is at least Pareto.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ifp/model.hpp"
#include "ifp/solver.hpp"

namespace ifp {

struct WealthGrowthCheck {
  bool holds = false;
  std::optional<std::size_t> witness;
};

// Looks for a state with P(z,z) > 0 and P{R(z, .) (1 - alpha(z)) > 1} > 0.
WealthGrowthCheck check_wealth_growth(const ModelSpec& spec,
                                      std::span<const double> alpha);
WealthGrowthCheck check_wealth_growth(const ModelSpec& spec, const Policy& policy);

// E[(k R)^s 1{k R > 1} | z'] in closed form.
double truncated_growth_moment(const PrimitiveSpec& ret, std::size_t z_next, double scale,
                               double s);

// Throws DegenerateAlpha when alpha(z) = 1 for every z.
double lambda_of_s(const ModelSpec& spec, std::span<const double> alpha, double s);
double lambda_of_s(const ModelSpec& spec, const Policy& policy, double s);

struct KappaSettings {
  double s_min = 0.05;
  double s_max = 20.0;
  std::size_t n_grid = 60;
};

struct KappaResult {
  std::optional<double> kappa;
  std::vector<std::pair<double, double>> curve;  // (s, lambda(s))
};

KappaResult kappa(const ModelSpec& spec, std::span<const double> alpha,
                  const KappaSettings& settings = {});
KappaResult kappa(const ModelSpec& spec, const Policy& policy,
                  const KappaSettings& settings = {});

// No interior strict local maximum on the curve.
bool convex_surrogate_holds(const std::vector<std::pair<double, double>>& curve);

struct HillResult {
  double estimate;
  double lower;  // 5% bootstrap quantile
  double upper;  // 95% bootstrap quantile
  std::size_t k;
};

// Classical Hill estimate over the top k order statistics with a
// nonparametric bootstrap 90% interval. Throws InsufficientTail.
HillResult hill_estimator(std::span<const double> samples, std::size_t k,
                          std::size_t n_boot = 200, std::uint64_t seed = 0,
                          unsigned threads = 1);

struct TailSettings {
  KappaSettings kappa;
  double hill_fraction = 0.01;
  std::size_t n_boot = 200;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct TailReport {
  std::vector<std::pair<double, double>> lambda_curve;
  std::optional<double> kappa;
  std::optional<double> kappa_alpha_low;   // alpha - top-segment slope step
  std::optional<double> kappa_alpha_high;  // alpha + top-segment slope step
  bool growth_condition_holds = false;
  std::optional<std::size_t> witness_state;
  std::optional<HillResult> hill;
  std::optional<double> q999_over_median;
  std::vector<double> alpha;
  std::string verdict;
  std::string verdict_detail;
  std::vector<std::string> notes;
};

inline constexpr const char* kHeavyVerdict = "heavy (κ reported)";

// Builds the report; `sample` (stationary wealth draws) may be empty, in
// which case no Hill estimate is attached.
TailReport build_tail_report(const ModelSpec& spec, const Policy& policy,
                             std::span<const double> sample,
                             const TailSettings& settings = {});

}  // namespace ifp
