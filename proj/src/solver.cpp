#include "ifp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ifp/error.hpp"
#include "ifp/parallel.hpp"

namespace ifp {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

double clip_unit(double x) { return std::clamp(x, 0.0, 1.0); }

double segment_slope(const Policy& policy, std::size_t hi, std::size_t z) {
  const auto& g = policy.grid;
  const auto col = static_cast<Eigen::Index>(z);
  return (policy.consumption(static_cast<Eigen::Index>(hi), col) -
          policy.consumption(static_cast<Eigen::Index>(hi - 1), col)) /
         (g[hi] - g[hi - 1]);
}

void check_same_grid(const Policy& p1, const Policy& p2) {
  if (!(p1.grid == p2.grid) || p1.n_states() != p2.n_states()) {
    throw Error(ErrorKind::GridMismatch, "policies live on different grids");
  }
}

}  // namespace

AssetGrid AssetGrid::exponential(double a_min, double a_max, std::size_t n_points) {
  if (!(a_min > 0.0) || !(a_max > a_min) || !std::isfinite(a_max)) {
    throw Error(ErrorKind::InvalidParameter, "asset grid needs 0 < a_min < a_max");
  }
  if (n_points < 50) {
    throw Error(ErrorKind::InvalidParameter, "asset grid needs at least 50 points");
  }
  std::vector<double> points(n_points);
  const double log_ratio = std::log(a_max / a_min);
  for (std::size_t i = 0; i < n_points; ++i) {
    points[i] = a_min * std::exp(log_ratio * static_cast<double>(i) /
                                 static_cast<double>(n_points - 1));
  }
  points.front() = a_min;
  points.back() = a_max;
  return AssetGrid(std::move(points));
}

AssetGrid AssetGrid::from_points(std::vector<double> points) {
  if (points.size() < 2 || !(points.front() > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "asset grid needs >= 2 positive points");
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i] > points[i - 1]) || !std::isfinite(points[i])) {
      throw Error(ErrorKind::InvalidParameter, "asset grid must be strictly increasing");
    }
  }
  return AssetGrid(std::move(points));
}

std::size_t AssetGrid::segment(double a) const noexcept {
  const auto it = std::upper_bound(points_.begin(), points_.end(), a);
  const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
      0, (it - points_.begin()) - 1));
  return std::min(idx, points_.size() - 2);
}

AssetGrid make_grid(const ModelSpec& spec, const GridSettings& settings) {
  double scale = 0.0;
  if (!settings.a_min || !settings.a_max) {
    scale = median_income(spec);
    if (!(scale > 0.0)) {
      const Eigen::VectorXd pi = stationary_distribution(spec.chain);
      scale = pi.dot(conditional_means(spec.income, spec.n_states()));
    }
  }
  return AssetGrid::exponential(settings.a_min.value_or(1e-3 * scale),
                                settings.a_max.value_or(200.0 * scale),
                                settings.n_points);
}

double Policy::operator()(double a, std::size_t z) const {
  if (!(a > 0.0)) return 0.0;
  const auto col = static_cast<Eigen::Index>(z);
  const std::size_t n = grid.size();
  if (a <= grid.a_min()) return consumption(0, col) * (a / grid.a_min());
  if (a >= grid.a_max()) {
    return consumption(static_cast<Eigen::Index>(n - 1), col) +
           top_slope(z) * (a - grid.a_max());
  }
  const std::size_t i = grid.segment(a);
  const double w = (a - grid[i]) / (grid[i + 1] - grid[i]);
  return (1.0 - w) * consumption(static_cast<Eigen::Index>(i), col) +
         w * consumption(static_cast<Eigen::Index>(i + 1), col);
}

double Policy::top_slope(std::size_t z) const {
  return clip_unit(segment_slope(*this, grid.size() - 1, z));
}

double Policy::next_to_top_slope(std::size_t z) const {
  return clip_unit(segment_slope(*this, grid.size() - 2, z));
}

Policy consume_everything(const AssetGrid& grid, std::size_t n_states) {
  Policy policy;
  policy.grid = grid;
  policy.consumption.resize(static_cast<Eigen::Index>(grid.size()),
                            static_cast<Eigen::Index>(n_states));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    policy.consumption.row(static_cast<Eigen::Index>(i)).setConstant(grid[i]);
  }
  policy.alpha.assign(n_states, 1.0);
  policy.a_bar.assign(n_states, kInfinity);
  return policy;
}

EulerOperator::EulerOperator(const ModelSpec& spec, int quad_nodes) : spec_(spec) {
  if (quad_nodes < 5) {
    throw Error(ErrorKind::InvalidParameter, "need at least 5 quadrature nodes");
  }
  const std::size_t n = spec.n_states();
  beta_mean_.resize(n);
  returns_.resize(n);
  incomes_.resize(n);
  for (std::size_t z = 0; z < n; ++z) {
    beta_mean_[z] = conditional_power_moment(spec.beta, z, 1.0);
    for (const auto& node : expectation_nodes(spec.ret, z, quad_nodes)) {
      returns_[z].push_back({node.point, node.weight});
    }
    for (const auto& node : expectation_nodes(spec.income, z, quad_nodes)) {
      incomes_[z].push_back({node.point, node.weight});
    }
  }
}

double EulerOperator::expectation(const Policy& policy, double savings,
                                  std::size_t z) const {
  const double gamma = spec_.gamma;
  const std::size_t n = spec_.n_states();
  double total = 0.0;
  for (std::size_t next = 0; next < n; ++next) {
    const double p = spec_.chain(z, next);
    if (p == 0.0 || beta_mean_[next] == 0.0) continue;
    double inner = 0.0;
    for (const Cell& r : returns_[next]) {
      if (r.value == 0.0) continue;  // 0 * inf = 0
      double over_income = 0.0;
      for (const Cell& y : incomes_[next]) {
        const double c = policy(r.value * savings + y.value, next);
        if (!(c > 0.0)) {
          throw Error(ErrorKind::DomainError,
                      "nonpositive consumption inside the Euler expectation");
        }
        over_income += y.weight * (gamma == 1.0 ? 1.0 / c : std::pow(c, -gamma));
      }
      inner += r.weight * r.value * over_income;
    }
    total += p * beta_mean_[next] * inner;
  }
  return total;
}

double euler_expectation(const ModelSpec& spec, const Policy& policy, double savings,
                         std::size_t z, int quad_nodes) {
  if (!(savings >= 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "savings must be nonnegative");
  }
  return EulerOperator(spec, quad_nodes).expectation(policy, savings, z);
}

namespace {

Policy apply_operator(const EulerOperator& op, const Policy& policy,
                      const SolverConfig& config) {
  const ModelSpec& spec = op.spec();
  const double gamma = spec.gamma;
  const std::size_t n_states = spec.n_states();
  const std::size_t n_grid = policy.grid.size();

  Policy out;
  out.grid = policy.grid;
  out.consumption.resize(policy.consumption.rows(), policy.consumption.cols());
  out.alpha = policy.alpha;
  out.a_bar.assign(n_states, kInfinity);

  std::vector<double> corner(n_states);
  for (std::size_t z = 0; z < n_states; ++z) {
    corner[z] = op.expectation(policy, 0.0, z);
    if (corner[z] > 0.0) out.a_bar[z] = inverse_marginal_utility(gamma, corner[z]);
  }

  parallel_for(n_states * n_grid, config.threads, [&](std::size_t job) {
    const std::size_t z = job / n_grid;
    const std::size_t i = job % n_grid;
    const double a = policy.grid[i];
    double c = a;
    if (marginal_utility(gamma, a) < corner[z]) {
      // u'(xi) - E(a - xi) is strictly decreasing in xi and negative at a.
      auto excess = [&](double xi) {
        return marginal_utility(gamma, xi) - op.expectation(policy, a - xi, z);
      };
      double hi = a;
      double lo = 0.5 * a;
      int halvings = 0;
      while (excess(lo) <= 0.0) {
        hi = lo;
        lo *= 0.5;
        if (++halvings > 200) {
          throw Error(ErrorKind::RootBracketFailure,
                      "could not bracket the Euler root at a = " + std::to_string(a));
        }
      }
      const double tol = config.root_tol * a;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (excess(mid) > 0.0 ? lo : hi) = mid;
      }
      c = 0.5 * (lo + hi);
    }
    out.consumption(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(z)) = c;
  });
  return out;
}

}  // namespace

Policy time_iteration_step(const ModelSpec& spec, const Policy& policy,
                           const SolverConfig& config) {
  if (policy.n_states() != spec.n_states()) {
    throw Error(ErrorKind::GridMismatch, "policy and model disagree on the state count");
  }
  const EulerOperator op(spec, config.quad_nodes);
  Policy out = apply_operator(op, policy, config);
  for (std::size_t z = 0; z < out.n_states(); ++z) out.alpha[z] = asymptotic_mpc(out, z);
  return out;
}

double policy_distance(double gamma, const Policy& p1, const Policy& p2) {
  check_same_grid(p1, p2);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < p1.consumption.cols(); ++j) {
    for (Eigen::Index i = 0; i < p1.consumption.rows(); ++i) {
      const double d = std::abs(marginal_utility(gamma, p1.consumption(i, j)) -
                                marginal_utility(gamma, p2.consumption(i, j)));
      worst = std::max(worst, d);
    }
  }
  return worst;
}

SolveResult solve(const ModelSpec& spec, const SolverConfig& config,
                  std::optional<Policy> initial) {
  const GrowthReport report = compute_growth_report(spec);
  if (!report.optimality_holds()) {
    std::ostringstream msg;
    msg << "optimality conditions fail (G_beta=" << report.g_beta
        << ", G_betaR=" << report.g_beta_r << ", E Y=" << report.e_y
        << ", E u'(Y)=" << report.e_uprime_y << ")";
    throw Error(ErrorKind::AssumptionViolated, msg.str());
  }
  if (!(config.tol_rho > 0.0) || config.max_iter < 1 || !(config.root_tol > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "solver tolerances must be positive");
  }

  SolveResult result;
  result.policy = initial ? std::move(*initial)
                          : consume_everything(make_grid(spec, config.grid),
                                               spec.n_states());
  if (result.policy.n_states() != spec.n_states()) {
    throw Error(ErrorKind::GridMismatch, "initial policy has the wrong state count");
  }
  const EulerOperator op(spec, config.quad_nodes);
  for (int k = 0; k < config.max_iter; ++k) {
    Policy next = apply_operator(op, result.policy, config);
    const double d = policy_distance(spec.gamma, next, result.policy);
    result.trace.push_back(d);
    result.policy = std::move(next);
    result.iterations = k + 1;
    if (d < config.tol_rho) {
      result.converged = true;
      break;
    }
  }
  for (std::size_t z = 0; z < spec.n_states(); ++z) {
    result.policy.alpha[z] = asymptotic_mpc(result.policy, z);
  }
  return result;
}

double euler_residual(const ModelSpec& spec, const Policy& policy, double a,
                      std::size_t z, int quad_nodes) {
  const double c = policy(a, z);
  const double e = euler_expectation(spec, policy, std::max(0.0, a - c), z, quad_nodes);
  return marginal_utility(spec.gamma, c) -
         std::max(e, marginal_utility(spec.gamma, a));
}

double asymptotic_mpc(const Policy& policy, std::size_t z) {
  const std::size_t n = policy.grid.size();
  const std::size_t m = std::max<std::size_t>(2, (n + 9) / 10);
  const auto col = static_cast<Eigen::Index>(z);
  double mean_a = 0.0;
  double mean_c = 0.0;
  for (std::size_t i = n - m; i < n; ++i) {
    mean_a += policy.grid[i];
    mean_c += policy.consumption(static_cast<Eigen::Index>(i), col);
  }
  mean_a /= static_cast<double>(m);
  mean_c /= static_cast<double>(m);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = n - m; i < n; ++i) {
    const double da = policy.grid[i] - mean_a;
    sxy += da * (policy.consumption(static_cast<Eigen::Index>(i), col) - mean_c);
    sxx += da * da;
  }
  return clip_unit(sxy / sxx);
}

std::optional<bool> income_dominates(const PrimitiveSpec& lo, const PrimitiveSpec& hi,
                                     std::size_t n_states) {
  if (lo.is_lognormal() != hi.is_lognormal()) return std::nullopt;
  bool dominated = true;
  for (std::size_t z = 0; z < n_states; ++z) {
    if (lo.is_lognormal()) {
      const auto& a = std::get<Lognormal>(lo.law);
      const auto& b = std::get<Lognormal>(hi.law);
      const auto pick = [z](const std::vector<double>& v) {
        return v.size() == 1 ? v.front() : v.at(z);
      };
      if (pick(a.scale) != pick(b.scale)) return std::nullopt;
      if (pick(b.location) < pick(a.location)) dominated = false;
      continue;
    }
    const auto lo_nodes = expectation_nodes(lo, z, 1);
    const auto hi_nodes = expectation_nodes(hi, z, 1);
    auto cdf = [](const std::vector<QuadratureNode>& nodes, double x) {
      double total = 0.0;
      for (const auto& node : nodes) {
        if (node.point <= x) total += node.weight;
      }
      return total;
    };
    for (const auto& nodes : {lo_nodes, hi_nodes}) {
      for (const auto& node : nodes) {
        if (cdf(hi_nodes, node.point) > cdf(lo_nodes, node.point) + 1e-12) {
          dominated = false;
        }
      }
    }
  }
  return dominated;
}

bool income_dominance_check(const ModelSpec& spec_lo, const ModelSpec& spec_hi,
                            const SolverConfig& config) {
  if (!(spec_lo.chain == spec_hi.chain) || !(spec_lo.beta == spec_hi.beta) ||
      !(spec_lo.ret == spec_hi.ret) || spec_lo.gamma != spec_hi.gamma) {
    throw Error(ErrorKind::DominanceUnverifiable,
                "specs differ in more than the income process");
  }
  if (!income_dominates(spec_lo.income, spec_hi.income, spec_lo.n_states())) {
    throw Error(ErrorKind::DominanceUnverifiable,
                "income laws are of kinds that cannot be ordered");
  }
  SolverConfig common = config;
  const AssetGrid grid = make_grid(spec_lo, config.grid);
  common.grid.a_min = grid.a_min();
  common.grid.a_max = grid.a_max();
  common.grid.n_points = grid.size();
  const SolveResult lo = solve(spec_lo, common);
  const SolveResult hi = solve(spec_hi, common);
  return (lo.policy.consumption.array() <= hi.policy.consumption.array() + 1e-8).all();
}

}  // namespace ifp
