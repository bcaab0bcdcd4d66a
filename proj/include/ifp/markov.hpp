#pragma once

// Finite Markov chains: validation, stationary laws, Rouwenhorst
// discretization and long-run growth rates as spectral radii.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "ifp/rng.hpp"

namespace ifp {

// Row-stochastic matrix. Entries lie in [0,1] and rows sum to 1 within 1e-12.
class TransitionMatrix {
 public:
  // Single absorbing state.
  TransitionMatrix();
  explicit TransitionMatrix(Eigen::MatrixXd rows);

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(rows_.rows());
  }
  const Eigen::MatrixXd& matrix() const noexcept { return rows_; }
  double operator()(std::size_t from, std::size_t to) const {
    return rows_(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
  }

  // Strong connectivity of the graph {i -> j : P(i,j) > 0}.
  bool is_irreducible() const;

  // Inverse-CDF draw of the next state given a uniform on [0,1).
  std::size_t next_state(std::size_t from, double u) const noexcept;

  bool operator==(const TransitionMatrix& other) const {
    return rows_ == other.rows_;
  }

 private:
  Eigen::MatrixXd rows_;
  Eigen::MatrixXd cumulative_;
};

// Kronecker product chain of two independent chains; state (i, j) has index
// i * second.size() + j.
TransitionMatrix product_chain(const TransitionMatrix& first,
                               const TransitionMatrix& second);

// Unique stationary distribution; throws NotIrreducible.
Eigen::VectorXd stationary_distribution(const TransitionMatrix& p);

struct DiscretizedAR1 {
  std::vector<double> states;
  TransitionMatrix transition;
  double mean;
  double persistence;
  double std_dev;
};

// Rouwenhorst discretization of x' = (1-rho) mean + rho x + sqrt(1-rho^2) sd e.
// States are equally spaced over mean +/- sd * sqrt(n-1).
DiscretizedAR1 rouwenhorst(std::size_t n_states, double mean, double persistence,
                           double std_dev);

// Perron root of a nonnegative square matrix, relative accuracy ~1e-10.
double spectral_radius(const Eigen::MatrixXd& m);

// L(z, z') = P(z, z') * E[phi | z'].
struct GrowthOperator {
  Eigen::MatrixXd matrix;
};

struct GrowthRate {
  double value;
  GrowthOperator op;
};

GrowthRate growth_rate(const TransitionMatrix& p,
                       const Eigen::VectorXd& cond_means);

// Draws phi given the current state and an innovation.
using StateSampler =
    std::function<double(std::size_t state, const rng::Innovation& draw)>;

struct MonteCarloEstimate {
  double estimate;
  double std_error;
};

// (mean over paths of prod_{t=1..horizon} phi_t)^(1/horizon) with Z_0 drawn
// from the stationary law. Products are accumulated in logs.
MonteCarloEstimate mc_growth_oracle(const TransitionMatrix& p,
                                    const StateSampler& sampler, int horizon,
                                    std::size_t n_paths, std::uint64_t seed,
                                    unsigned threads = 1);

}  // namespace ifp
