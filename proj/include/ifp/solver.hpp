#pragma once

// Time iteration on the Euler equation.
//
// A policy is stored on an exponential asset grid, one column per exogenous
// state. Off-grid consumption is linear between nodes, linear through the
// origin below the first node (c(0, z) = 0), and linear with the top-segment
// slope above the last node.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ifp/model.hpp"

namespace ifp {

class AssetGrid {
 public:
  AssetGrid() = default;

  // a_min * (a_max / a_min)^(i / (n-1)). Requires 0 < a_min < a_max, n >= 50.
  static AssetGrid exponential(double a_min, double a_max, std::size_t n_points);

  // Strictly increasing positive points (at least 2; used by tests and I/O).
  static AssetGrid from_points(std::vector<double> points);

  std::span<const double> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double a_min() const { return points_.front(); }
  double a_max() const { return points_.back(); }
  double operator[](std::size_t i) const { return points_[i]; }

  // Index i with points[i] <= a < points[i+1], clamped to [0, size-2].
  std::size_t segment(double a) const noexcept;

  bool operator==(const AssetGrid&) const = default;

 private:
  explicit AssetGrid(std::vector<double> points) : points_(std::move(points)) {}
  std::vector<double> points_;
};

struct GridSettings {
  std::optional<double> a_min;  // default 1e-3 * median income
  std::optional<double> a_max;  // default 200 * median income
  std::size_t n_points = 200;
};

AssetGrid make_grid(const ModelSpec& spec, const GridSettings& settings = {});

struct Policy {
  AssetGrid grid;
  Eigen::MatrixXd consumption;  // grid.size() x n_states
  std::vector<double> alpha;    // asymptotic MPC per state
  std::vector<double> a_bar;    // binding threshold per state (may be +inf)

  std::size_t n_states() const noexcept {
    return static_cast<std::size_t>(consumption.cols());
  }

  // c(a, z) with the interpolation/extrapolation rules above.
  double operator()(double a, std::size_t z) const;

  // Slope of the last grid segment at state z, clipped to [0, 1].
  double top_slope(std::size_t z) const;
  // Slope of the second-to-last segment, clipped to [0, 1].
  double next_to_top_slope(std::size_t z) const;
};

// c(a, z) = a on every node.
Policy consume_everything(const AssetGrid& grid, std::size_t n_states);

struct SolverConfig {
  double tol_rho = 1e-8;   // marginal-utility units
  int max_iter = 10000;
  int quad_nodes = 11;     // Gauss-Hermite nodes per lognormal innovation
  double root_tol = 1e-10; // relative to a: bisection stops at root_tol * a
  GridSettings grid;
  unsigned threads = 1;
};

// Precomputed conditional expectations for one model. Holds per-state
// quadrature nodes for (R, Y) and E[beta | z'].
class EulerOperator {
 public:
  EulerOperator(const ModelSpec& spec, int quad_nodes);

  // sum_z' P(z,z') E[beta|z'] E[R u'(c(R x + Y, z'))], with 0 * inf = 0.
  double expectation(const Policy& policy, double savings, std::size_t z) const;

  const ModelSpec& spec() const noexcept { return spec_; }

 private:
  struct Cell {
    double value;   // R or Y level
    double weight;
  };
  const ModelSpec& spec_;
  std::vector<double> beta_mean_;
  std::vector<std::vector<Cell>> returns_;
  std::vector<std::vector<Cell>> incomes_;
};

double euler_expectation(const ModelSpec& spec, const Policy& policy, double savings,
                         std::size_t z, int quad_nodes = 11);

// One application of the time iteration operator on the grid nodes.
Policy time_iteration_step(const ModelSpec& spec, const Policy& policy,
                           const SolverConfig& config = {});

// sup over grid nodes of |u'(c1) - u'(c2)|. Throws GridMismatch.
double policy_distance(double gamma, const Policy& p1, const Policy& p2);

struct SolveResult {
  Policy policy;
  std::vector<double> trace;  // rho(T c_k, c_k) per iteration
  bool converged = false;
  int iterations = 0;
};

// Iterates T from `initial` (default c0(a,z) = a) until rho < tol_rho.
// Throws AssumptionViolated unless the optimality conditions hold.
SolveResult solve(const ModelSpec& spec, const SolverConfig& config = {},
                  std::optional<Policy> initial = std::nullopt);

// u'(c(a,z)) - max{E(a - c(a,z), z), u'(a)}.
double euler_residual(const ModelSpec& spec, const Policy& policy, double a,
                      std::size_t z, int quad_nodes = 11);

// Least-squares slope of c over the top 10% of nodes, clipped to [0, 1].
double asymptotic_mpc(const Policy& policy, std::size_t z);

// Solves both models on a common grid and reports whether c_lo <= c_hi + 1e-8
// on every node. Throws DominanceUnverifiable when the two specs differ in
// anything but income or when the income laws cannot be ordered.
bool income_dominance_check(const ModelSpec& spec_lo, const ModelSpec& spec_hi,
                            const SolverConfig& config = {});

// First-order stochastic dominance of income, state by state. nullopt when
// the laws are of incomparable kinds.
std::optional<bool> income_dominates(const PrimitiveSpec& lo, const PrimitiveSpec& hi,
                                     std::size_t n_states);

}  // namespace ifp
