#include "ifp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ifp/error.hpp"

namespace ifp {

namespace {

template <class T>
const T& at_state(const std::vector<T>& v, std::size_t z) {
  return v.size() == 1 ? v.front() : v.at(z);
}

void check_broadcast(std::size_t size, std::size_t n_states, const std::string& what) {
  if (size != 1 && size != n_states) {
    throw Error(ErrorKind::InvalidParameter,
                what + ": expected 1 or " + std::to_string(n_states) +
                    " per-state entries, got " + std::to_string(size));
  }
}

double power_with_zero(double x, double s) {
  if (x > 0.0) return std::pow(x, s);
  if (s > 0.0) return 0.0;
  if (s == 0.0) return 1.0;
  throw Error(ErrorKind::UndefinedMoment,
              "negative moment of a variable with an atom at zero");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

void validate(const PrimitiveSpec& spec, std::size_t n_states, const std::string& what) {
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Constant>) {
          check_broadcast(law.values.size(), n_states, what);
          for (double v : law.values) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
              throw Error(ErrorKind::InvalidParameter,
                          what + ": constant values must be finite and >= 0");
            }
          }
        } else if constexpr (std::is_same_v<T, Lognormal>) {
          check_broadcast(law.location.size(), n_states, what + " location");
          check_broadcast(law.scale.size(), n_states, what + " scale");
          for (double m : law.location) {
            if (!std::isfinite(m)) {
              throw Error(ErrorKind::InvalidParameter, what + ": location must be finite");
            }
          }
          for (double v : law.scale) {
            if (!(v > 0.0) || !std::isfinite(v)) {
              throw Error(ErrorKind::InvalidParameter, what + ": scale must be > 0");
            }
          }
        } else {
          check_broadcast(law.laws.size(), n_states, what);
          for (const auto& d : law.laws) {
            if (d.points.empty() || d.points.size() != d.probs.size()) {
              throw Error(ErrorKind::InvalidParameter,
                          what + ": discrete law needs matching points and probs");
            }
            double total = 0.0;
            for (std::size_t i = 0; i < d.points.size(); ++i) {
              if (!(d.points[i] >= 0.0) || !std::isfinite(d.points[i])) {
                throw Error(ErrorKind::InvalidParameter,
                            what + ": support points must be finite and >= 0");
              }
              if (!(d.probs[i] >= 0.0)) {
                throw Error(ErrorKind::InvalidParameter,
                            what + ": probabilities must be >= 0");
              }
              total += d.probs[i];
            }
            if (std::abs(total - 1.0) > 1e-12) {
              throw Error(ErrorKind::InvalidParameter,
                          what + ": probabilities must sum to 1");
            }
          }
        }
      },
      spec.law);
}

double conditional_power_moment(const PrimitiveSpec& spec, std::size_t z, double s) {
  return std::visit(
      [&](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return power_with_zero(at_state(law.values, z), s);
        } else if constexpr (std::is_same_v<T, Lognormal>) {
          const double m = at_state(law.location, z);
          const double v = at_state(law.scale, z);
          return std::exp(s * m + 0.5 * s * s * v * v);
        } else {
          const DiscreteLaw& d = at_state(law.laws, z);
          double total = 0.0;
          for (std::size_t i = 0; i < d.points.size(); ++i) {
            if (d.probs[i] > 0.0) total += d.probs[i] * power_with_zero(d.points[i], s);
          }
          return total;
        }
      },
      spec.law);
}

double conditional_weighted_moment(const PrimitiveSpec& spec, std::size_t z,
                                   double gamma) {
  const double s = 1.0 - gamma;
  return std::visit(
      [&](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Constant>) {
          const double v = at_state(law.values, z);
          return v > 0.0 ? std::pow(v, s) : 0.0;
        } else if constexpr (std::is_same_v<T, Lognormal>) {
          return conditional_power_moment(spec, z, s);
        } else {
          const DiscreteLaw& d = at_state(law.laws, z);
          double total = 0.0;
          for (std::size_t i = 0; i < d.points.size(); ++i) {
            if (d.probs[i] > 0.0 && d.points[i] > 0.0) {
              total += d.probs[i] * std::pow(d.points[i], s);
            }
          }
          return total;
        }
      },
      spec.law);
}

double sample(const PrimitiveSpec& spec, std::size_t z, const rng::Innovation& draw) {
  return std::visit(
      [&](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return at_state(law.values, z);
        } else if constexpr (std::is_same_v<T, Lognormal>) {
          return std::exp(at_state(law.location, z) + at_state(law.scale, z) * draw.normal);
        } else {
          const DiscreteLaw& d = at_state(law.laws, z);
          double acc = 0.0;
          std::size_t last = 0;
          for (std::size_t i = 0; i < d.points.size(); ++i) {
            if (d.probs[i] <= 0.0) continue;
            last = i;
            acc += d.probs[i];
            if (draw.uniform < acc) return d.points[i];
          }
          return d.points[last];
        }
      },
      spec.law);
}

std::vector<QuadratureNode> expectation_nodes(const PrimitiveSpec& spec, std::size_t z,
                                              int quad_nodes) {
  return std::visit(
      [&](const auto& law) -> std::vector<QuadratureNode> {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return {{at_state(law.values, z), 1.0}};
        } else if constexpr (std::is_same_v<T, Lognormal>) {
          const double m = at_state(law.location, z);
          const double v = at_state(law.scale, z);
          auto nodes = gauss_hermite_normal(quad_nodes);
          for (auto& node : nodes) node.point = std::exp(m + v * node.point);
          return nodes;
        } else {
          const DiscreteLaw& d = at_state(law.laws, z);
          std::vector<QuadratureNode> nodes;
          for (std::size_t i = 0; i < d.points.size(); ++i) {
            if (d.probs[i] > 0.0) nodes.push_back({d.points[i], d.probs[i]});
          }
          return nodes;
        }
      },
      spec.law);
}

std::pair<double, double> support_bounds(const PrimitiveSpec& spec, std::size_t z) {
  return std::visit(
      [&](const auto& law) -> std::pair<double, double> {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, Constant>) {
          const double v = at_state(law.values, z);
          return {v, v};
        } else if constexpr (std::is_same_v<T, Lognormal>) {
          return {0.0, std::numeric_limits<double>::infinity()};
        } else {
          const DiscreteLaw& d = at_state(law.laws, z);
          double lo = std::numeric_limits<double>::infinity();
          double hi = -std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < d.points.size(); ++i) {
            if (d.probs[i] <= 0.0) continue;
            lo = std::min(lo, d.points[i]);
            hi = std::max(hi, d.points[i]);
          }
          return {lo, hi};
        }
      },
      spec.law);
}

double marginal_utility(double gamma, double c) {
  if (!(c > 0.0)) throw Error(ErrorKind::DomainError, "marginal utility needs c > 0");
  return gamma == 1.0 ? 1.0 / c : std::pow(c, -gamma);
}

double inverse_marginal_utility(double gamma, double m) {
  if (!(m > 0.0)) {
    throw Error(ErrorKind::DomainError, "inverse marginal utility needs m > 0");
  }
  return gamma == 1.0 ? 1.0 / m : std::pow(m, -1.0 / gamma);
}

CrraUtility::CrraUtility(double gamma) : gamma_(gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorKind::InvalidParameter, "CRRA curvature must be positive");
  }
}

double CrraUtility::value(double c) const {
  if (!(c > 0.0)) throw Error(ErrorKind::DomainError, "utility needs c > 0");
  if (gamma_ == 1.0) return std::log(c);
  return std::pow(c, 1.0 - gamma_) / (1.0 - gamma_);
}

void ModelSpec::validate() const {
  const std::size_t n = n_states();
  if (!state_labels.empty() && state_labels.size() != n) {
    throw Error(ErrorKind::InvalidParameter, "state labels do not match the chain size");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorKind::InvalidParameter, "gamma must be positive and finite");
  }
  if (!chain.is_irreducible()) {
    throw Error(ErrorKind::NotIrreducible, "exogenous chain must be irreducible");
  }
  ifp::validate(beta, n, "beta");
  ifp::validate(ret, n, "ret");
  ifp::validate(income, n, "income");
  bool any_income = false;
  for (std::size_t z = 0; z < n; ++z) {
    if (support_bounds(income, z).second > 0.0) any_income = true;
  }
  if (!any_income) {
    throw Error(ErrorKind::InvalidParameter, "income is identically zero");
  }
}

Eigen::VectorXd conditional_means(const PrimitiveSpec& spec, std::size_t n_states) {
  Eigen::VectorXd means(static_cast<Eigen::Index>(n_states));
  for (std::size_t z = 0; z < n_states; ++z) {
    means(static_cast<Eigen::Index>(z)) = conditional_power_moment(spec, z, 1.0);
  }
  return means;
}

double savings_rate_bound(const ModelSpec& spec) {
  const std::size_t n = spec.n_states();
  Eigen::VectorXd next(static_cast<Eigen::Index>(n));
  for (std::size_t z = 0; z < n; ++z) {
    next(static_cast<Eigen::Index>(z)) =
        conditional_power_moment(spec.beta, z, 1.0) *
        conditional_weighted_moment(spec.ret, z, spec.gamma);
  }
  const double worst = (spec.chain.matrix() * next).maxCoeff();
  return std::pow(worst, 1.0 / spec.gamma);
}

GrowthReport compute_growth_report(const ModelSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_states();
  GrowthReport report;

  const Eigen::VectorXd e_beta = conditional_means(spec.beta, n);
  const Eigen::VectorXd e_r = conditional_means(spec.ret, n);
  report.g_beta = growth_rate(spec.chain, e_beta).value;
  report.g_beta_r = growth_rate(spec.chain, e_beta.cwiseProduct(e_r)).value;
  report.g_r = growth_rate(spec.chain, e_r).value;
  report.s_bar = savings_rate_bound(spec);

  const Eigen::VectorXd pi = stationary_distribution(spec.chain);
  report.e_y = 0.0;
  report.e_uprime_y = 0.0;
  for (std::size_t z = 0; z < n; ++z) {
    const double w = pi(static_cast<Eigen::Index>(z));
    report.e_y += w * conditional_power_moment(spec.income, z, 1.0);
    try {
      report.e_uprime_y += w * conditional_power_moment(spec.income, z, -spec.gamma);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UndefinedMoment) throw;
      report.e_uprime_y = std::numeric_limits<double>::infinity();
      report.notes.push_back("income has an atom at zero: E u'(Y) is infinite");
    }
  }

  auto& f = report.flags;
  f.discount_growth = report.g_beta < 1.0;
  f.discounted_return_growth = report.g_beta_r < 1.0;
  f.income_moments = std::isfinite(report.e_y) && std::isfinite(report.e_uprime_y);
  f.savings_return_growth = report.s_bar < 1.0 && report.s_bar * report.g_r < 1.0;

  // Mixing: a persistent state that puts mass on (or density near) the
  // lowest income level.
  double y_low = std::numeric_limits<double>::infinity();
  for (std::size_t z = 0; z < n; ++z) {
    y_low = std::min(y_low, support_bounds(spec.income, z).first);
  }
  f.mixing = false;
  for (std::size_t z = 0; z < n && !f.mixing; ++z) {
    if (!(spec.chain(z, z) > 0.0)) continue;
    bool low_mass = false;
    if (spec.income.is_lognormal()) {
      low_mass = true;
    } else {
      for (const auto& node : expectation_nodes(spec.income, z, 1)) {
        if (node.point == y_low && node.weight > 0.0) low_mass = true;
      }
    }
    if (low_mass) {
      f.mixing = true;
      report.mixing_state = z;
    }
  }
  if (spec.income.is_lognormal()) {
    report.notes.push_back(
        "lognormal income: density is positive near the support infimum 0; "
        "mixing flag assumes y_low = 0 is admissible");
  }
  return report;
}

double median_income(const ModelSpec& spec) {
  const std::size_t n = spec.n_states();
  const Eigen::VectorXd pi = stationary_distribution(spec.chain);
  if (spec.income.is_lognormal()) {
    const auto& law = std::get<Lognormal>(spec.income.law);
    auto cdf = [&](double log_y) {
      double total = 0.0;
      for (std::size_t z = 0; z < n; ++z) {
        total += pi(static_cast<Eigen::Index>(z)) *
                 normal_cdf((log_y - at_state(law.location, z)) / at_state(law.scale, z));
      }
      return total;
    };
    double lo = -50.0;
    double hi = 50.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < 0.5 ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
  }
  std::vector<QuadratureNode> mass;
  for (std::size_t z = 0; z < n; ++z) {
    for (const auto& node : expectation_nodes(spec.income, z, 1)) {
      mass.push_back({node.point, node.weight * pi(static_cast<Eigen::Index>(z))});
    }
  }
  std::sort(mass.begin(), mass.end(),
            [](const auto& a, const auto& b) { return a.point < b.point; });
  double acc = 0.0;
  for (const auto& m : mass) {
    acc += m.weight;
    if (acc >= 0.5 - 1e-12) return m.point;
  }
  return mass.back().point;
}

}  // namespace ifp
