#pragma once

// Problem primitives, CRRA utility and the growth-condition report.
//
// Discount, return and income innovations are mutually independent given the
// exogenous state; any correlation between them comes only through the
// shared Markov state.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ifp/markov.hpp"
#include "ifp/quadrature.hpp"
#include "ifp/rng.hpp"

namespace ifp {

// Deterministic given the state. One value is broadcast to every state.
struct Constant {
  std::vector<double> values;
  bool operator==(const Constant&) const = default;
};

// X = exp(location(z) + scale(z) * N), N standard normal.
struct Lognormal {
  std::vector<double> location;
  std::vector<double> scale;
  bool operator==(const Lognormal&) const = default;
};

struct DiscreteLaw {
  std::vector<double> points;
  std::vector<double> probs;
  bool operator==(const DiscreteLaw&) const = default;
};

// One law per state; a single law is broadcast (iid case).
struct Discrete {
  std::vector<DiscreteLaw> laws;
  bool operator==(const Discrete&) const = default;
};

struct PrimitiveSpec {
  std::variant<Constant, Lognormal, Discrete> law;

  static PrimitiveSpec constant(double value) { return {Constant{{value}}}; }
  static PrimitiveSpec constant(std::vector<double> values) {
    return {Constant{std::move(values)}};
  }
  static PrimitiveSpec lognormal(double location, double scale) {
    return {Lognormal{{location}, {scale}}};
  }
  static PrimitiveSpec lognormal(std::vector<double> location,
                                 std::vector<double> scale) {
    return {Lognormal{std::move(location), std::move(scale)}};
  }
  static PrimitiveSpec discrete(std::vector<double> points, std::vector<double> probs) {
    return {Discrete{{DiscreteLaw{std::move(points), std::move(probs)}}}};
  }
  static PrimitiveSpec discrete(std::vector<DiscreteLaw> laws) {
    return {Discrete{std::move(laws)}};
  }

  bool is_constant() const { return std::holds_alternative<Constant>(law); }
  bool is_lognormal() const { return std::holds_alternative<Lognormal>(law); }
  bool is_discrete() const { return std::holds_alternative<Discrete>(law); }

  bool operator==(const PrimitiveSpec&) const = default;
};

// Throws InvalidParameter naming `what` when the spec is malformed for n states.
void validate(const PrimitiveSpec& spec, std::size_t n_states, const std::string& what);

// E[X^s | state z]. Zero support points follow 0^s = 0 for s > 0, 0^0 = 1;
// a zero point with positive mass and s < 0 throws UndefinedMoment.
double conditional_power_moment(const PrimitiveSpec& spec, std::size_t z, double s);

// E[X * X^(-gamma) | z] under the convention 0 * inf = 0.
double conditional_weighted_moment(const PrimitiveSpec& spec, std::size_t z,
                                   double gamma);

// Realization of X at state z from an innovation.
double sample(const PrimitiveSpec& spec, std::size_t z, const rng::Innovation& draw);

// Discrete representation of the law at z: exact for Constant/Discrete,
// Gauss-Hermite with quad_nodes points for Lognormal. Zero-mass points dropped.
std::vector<QuadratureNode> expectation_nodes(const PrimitiveSpec& spec, std::size_t z,
                                              int quad_nodes);

// Smallest and largest points of the support at state z (upper may be inf).
std::pair<double, double> support_bounds(const PrimitiveSpec& spec, std::size_t z);

double marginal_utility(double gamma, double c);
double inverse_marginal_utility(double gamma, double m);

// u(c) = c^(1-gamma)/(1-gamma), log c when gamma = 1.
class CrraUtility {
 public:
  explicit CrraUtility(double gamma);

  double gamma() const noexcept { return gamma_; }
  double value(double c) const;
  double marginal(double c) const { return marginal_utility(gamma_, c); }
  double inverse_marginal(double m) const {
    return inverse_marginal_utility(gamma_, m);
  }

 private:
  double gamma_;
};

struct ModelSpec {
  std::vector<std::string> state_labels;
  TransitionMatrix chain;
  PrimitiveSpec beta = PrimitiveSpec::constant(0.95);
  PrimitiveSpec ret = PrimitiveSpec::constant(1.0);
  PrimitiveSpec income = PrimitiveSpec::constant(1.0);
  double gamma = 1.0;

  std::size_t n_states() const noexcept { return chain.size(); }

  // Checks shapes, irreducibility, gamma > 0 and that income is not
  // identically zero.
  void validate() const;

  bool operator==(const ModelSpec& other) const {
    return chain == other.chain && beta == other.beta && ret == other.ret &&
           income == other.income && gamma == other.gamma;
  }
};

struct AssumptionFlags {
  bool discount_growth = false;           // G_beta < 1
  bool discounted_return_growth = false;  // G_betaR < 1
  bool income_moments = false;            // E Y < inf and E u'(Y) < inf
  bool savings_return_growth = false;     // s_bar < 1 and s_bar * G_R < 1
  bool mixing = false;                    // persistent state with low-income mass
  std::optional<bool> wealth_growth;      // needs a solved policy (tail module)
};

struct GrowthReport {
  double g_beta = 0.0;
  double g_beta_r = 0.0;
  double g_r = 0.0;
  double s_bar = 0.0;
  double e_y = 0.0;
  double e_uprime_y = 0.0;
  AssumptionFlags flags;
  std::optional<std::size_t> mixing_state;
  std::vector<std::string> notes;

  // Conditions needed for a unique optimal policy.
  bool optimality_holds() const {
    return flags.discount_growth && flags.discounted_return_growth &&
           flags.income_moments;
  }
  // Everything cmd_check requires: optimality, stationarity and mixing.
  bool all_required_hold() const {
    return optimality_holds() && flags.savings_return_growth && flags.mixing;
  }
};

// Per-state conditional means E[X | z] as a vector.
Eigen::VectorXd conditional_means(const PrimitiveSpec& spec, std::size_t n_states);

// Upper bound on the savings rate for CRRA utility:
// (max_z sum_z' P(z,z') E[beta|z'] E[R^(1-gamma)|z'])^(1/gamma).
double savings_rate_bound(const ModelSpec& spec);

GrowthReport compute_growth_report(const ModelSpec& spec);

// Median of the stationary income distribution.
double median_income(const ModelSpec& spec);

}  // namespace ifp
