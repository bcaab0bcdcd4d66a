#include "ifp/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ifp/error.hpp"
#include "ifp/parallel.hpp"

namespace ifp {

namespace {

constexpr double kRowSumTolerance = 1e-12;
constexpr int kPowerIterations = 20000;
constexpr double kPowerTolerance = 1e-13;
constexpr Eigen::Index kDenseFallbackLimit = 64;

Eigen::MatrixXd cumulative_rows(const Eigen::MatrixXd& p) {
  Eigen::MatrixXd c = p;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 1; j < c.cols(); ++j) c(i, j) += c(i, j - 1);
  }
  return c;
}

}  // namespace

TransitionMatrix::TransitionMatrix()
    : rows_(Eigen::MatrixXd::Identity(1, 1)), cumulative_(rows_) {}

TransitionMatrix::TransitionMatrix(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
  if (rows_.rows() < 1 || rows_.rows() != rows_.cols()) {
    throw Error(ErrorKind::InvalidParameter,
                "transition matrix must be square with at least one state");
  }
  for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < rows_.cols(); ++j) {
      const double v = rows_(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorKind::InvalidParameter,
                    "transition entry (" + std::to_string(i) + "," +
                        std::to_string(j) + ") outside [0,1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw Error(ErrorKind::InvalidParameter,
                  "transition row " + std::to_string(i) + " sums to " +
                      std::to_string(sum));
    }
  }
  cumulative_ = cumulative_rows(rows_);
}

bool TransitionMatrix::is_irreducible() const {
  const Eigen::Index n = rows_.rows();
  std::vector<char> reach(static_cast<std::size_t>(n * n), 0);
  auto at = [&](Eigen::Index i, Eigen::Index j) -> char& {
    return reach[static_cast<std::size_t>(i * n + j)];
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    at(i, i) = 1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (rows_(i, j) > 0.0) at(i, j) = 1;
    }
  }
  // Warshall transitive closure.
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!at(i, k)) continue;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (at(k, j)) at(i, j) = 1;
      }
    }
  }
  return std::all_of(reach.begin(), reach.end(), [](char c) { return c != 0; });
}

std::size_t TransitionMatrix::next_state(std::size_t from, double u) const noexcept {
  const Eigen::Index n = cumulative_.cols();
  const auto row = static_cast<Eigen::Index>(from);
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    if (u < cumulative_(row, j)) return static_cast<std::size_t>(j);
  }
  // Rounding can leave the last cumulative entry a hair below 1; skip
  // trailing zero-probability states.
  Eigen::Index last = n - 1;
  while (last > 0 && rows_(row, last) == 0.0) --last;
  return static_cast<std::size_t>(last);
}

TransitionMatrix product_chain(const TransitionMatrix& first,
                               const TransitionMatrix& second) {
  const Eigen::Index n1 = first.matrix().rows();
  const Eigen::Index n2 = second.matrix().rows();
  Eigen::MatrixXd k(n1 * n2, n1 * n2);
  for (Eigen::Index i = 0; i < n1; ++i) {
    for (Eigen::Index j = 0; j < n1; ++j) {
      k.block(i * n2, j * n2, n2, n2) = first.matrix()(i, j) * second.matrix();
    }
  }
  // Renormalize away the rounding of the products so rows sum to 1 tightly.
  for (Eigen::Index i = 0; i < k.rows(); ++i) k.row(i) /= k.row(i).sum();
  return TransitionMatrix(std::move(k));
}

Eigen::VectorXd stationary_distribution(const TransitionMatrix& p) {
  if (!p.is_irreducible()) {
    throw Error(ErrorKind::NotIrreducible,
                "transition matrix is not irreducible; stationary law is not unique");
  }
  const Eigen::Index n = p.matrix().rows();
  Eigen::MatrixXd a = p.matrix().transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::VectorXd pi = a.fullPivLu().solve(b);
  pi = pi.cwiseMax(0.0);
  return pi / pi.sum();
}

DiscretizedAR1 rouwenhorst(std::size_t n_states, double mean, double persistence,
                           double std_dev) {
  if (n_states < 2) {
    throw Error(ErrorKind::InvalidParameter, "rouwenhorst needs at least 2 states");
  }
  if (!(persistence >= 0.0 && persistence < 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "persistence must lie in [0,1)");
  }
  if (!(std_dev > 0.0) || !std::isfinite(std_dev) || !std::isfinite(mean)) {
    throw Error(ErrorKind::InvalidParameter,
                "standard deviation must be positive and finite");
  }

  const double p = (1.0 + persistence) / 2.0;
  const double q = p;
  Eigen::MatrixXd theta(2, 2);
  theta << p, 1.0 - p, 1.0 - q, q;
  for (std::size_t m = 3; m <= n_states; ++m) {
    const auto k = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, k);
    next.topLeftCorner(k - 1, k - 1) += p * theta;
    next.topRightCorner(k - 1, k - 1) += (1.0 - p) * theta;
    next.bottomLeftCorner(k - 1, k - 1) += (1.0 - q) * theta;
    next.bottomRightCorner(k - 1, k - 1) += q * theta;
    next.middleRows(1, k - 2) /= 2.0;
    theta = std::move(next);
  }

  const double span = std_dev * std::sqrt(static_cast<double>(n_states - 1));
  std::vector<double> states(n_states);
  for (std::size_t i = 0; i < n_states; ++i) {
    states[i] = mean - span +
                2.0 * span * static_cast<double>(i) / static_cast<double>(n_states - 1);
  }
  return {std::move(states), TransitionMatrix(std::move(theta)), mean, persistence,
          std_dev};
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw Error(ErrorKind::InvalidParameter, "spectral_radius needs a square matrix");
  }
  if (!m.allFinite() || (m.array() < 0.0).any()) {
    throw Error(ErrorKind::InvalidParameter,
                "spectral_radius needs finite nonnegative entries");
  }
  const double max_entry = m.maxCoeff();
  if (max_entry == 0.0) return 0.0;

  // The shift makes the iteration aperiodic and keeps every iterate strictly
  // positive; it moves the Perron root by exactly eps.
  const Eigen::Index n = m.rows();
  const double eps = 1e-8 * max_entry;
  Eigen::MatrixXd shifted = m;
  shifted.diagonal().array() += eps;

  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < kPowerIterations; ++iter) {
    const Eigen::VectorXd y = shifted * x;
    const double scale = x.maxCoeff();
    lower = std::numeric_limits<double>::infinity();
    upper = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (x(i) <= 1e-280 * scale) continue;
      const double ratio = y(i) / x(i);
      lower = std::min(lower, ratio);
      upper = std::max(upper, ratio);
    }
    // Collatz-Wielandt: lower <= r(M + eps I) <= upper.
    if (upper - lower <= kPowerTolerance * upper) {
      // Re-bracket with the unshifted matrix so that exact cases (r = 1 for a
      // stochastic matrix) come out exact instead of off by the rounding of eps.
      const Eigen::VectorXd my = m * x;
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (x(i) <= 1e-280 * scale) continue;
        lo = std::min(lo, my(i) / x(i));
        hi = std::max(hi, my(i) / x(i));
      }
      if (hi - lo <= kPowerTolerance * hi) return 0.5 * (lo + hi);
      return std::max(0.0, 0.5 * (lower + upper) - eps);
    }
    x = y / y.sum();
  }

  if (n <= kDenseFallbackLimit) {
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    if (solver.info() == Eigen::Success) {
      return solver.eigenvalues().cwiseAbs().maxCoeff();
    }
  }
  throw Error(ErrorKind::NoConvergence, "power iteration did not converge",
              std::max(0.0, 0.5 * (lower + upper) - eps));
}

GrowthRate growth_rate(const TransitionMatrix& p, const Eigen::VectorXd& cond_means) {
  if (cond_means.size() != p.matrix().rows()) {
    throw Error(ErrorKind::InvalidParameter,
                "conditional means must have one entry per state");
  }
  if (!cond_means.allFinite() || (cond_means.array() < 0.0).any()) {
    throw Error(ErrorKind::InvalidParameter,
                "conditional means must be finite and nonnegative");
  }
  Eigen::MatrixXd l = p.matrix() * cond_means.asDiagonal();
  const double g = spectral_radius(l);
  return {g, {std::move(l)}};
}

MonteCarloEstimate mc_growth_oracle(const TransitionMatrix& p,
                                    const StateSampler& sampler, int horizon,
                                    std::size_t n_paths, std::uint64_t seed,
                                    unsigned threads) {
  if (horizon < 50) {
    throw Error(ErrorKind::InvalidParameter, "oracle horizon must be at least 50");
  }
  if (n_paths < 10000) {
    throw Error(ErrorKind::InvalidParameter, "oracle needs at least 1e4 paths");
  }
  const Eigen::VectorXd pi = stationary_distribution(p);
  std::vector<double> pi_cdf(static_cast<std::size_t>(pi.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < pi.size(); ++i) {
    acc += pi(i);
    pi_cdf[static_cast<std::size_t>(i)] = acc;
  }

  std::vector<double> log_products(n_paths, 0.0);
  constexpr std::size_t kChunk = 512;
  const std::size_t n_chunks = (n_paths + kChunk - 1) / kChunk;
  parallel_for(n_chunks, threads, [&](std::size_t chunk) {
    const std::size_t end = std::min(n_paths, (chunk + 1) * kChunk);
    for (std::size_t path = chunk * kChunk; path < end; ++path) {
      const double u0 = rng::uniform(seed, path, 0, rng::Stream::Start);
      std::size_t z = static_cast<std::size_t>(
          std::upper_bound(pi_cdf.begin(), pi_cdf.end() - 1, u0) - pi_cdf.begin());
      double log_product = 0.0;
      for (int t = 1; t <= horizon; ++t) {
        const auto date = static_cast<std::uint64_t>(t);
        z = p.next_state(z, rng::uniform(seed, path, date, rng::Stream::State));
        const double phi = sampler(z, rng::draw(seed, path, date, rng::Stream::Oracle));
        if (!(phi >= 0.0) || std::isinf(phi)) {
          throw Error(ErrorKind::Overflow, "sampler produced a non-finite or negative value");
        }
        log_product += std::log(phi);
      }
      log_products[path] = log_product;
    }
  });

  double peak = -std::numeric_limits<double>::infinity();
  for (double l : log_products) peak = std::max(peak, l);
  if (std::isinf(peak) && peak > 0) {
    throw Error(ErrorKind::Overflow, "log product diverged");
  }
  if (std::isinf(peak)) return {0.0, 0.0};

  // Log-sum-exp: average exp(l - peak), then undo the shift in logs.
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double l : log_products) {
    const double v = std::exp(l - peak);
    sum += v;
    sum_sq += v * v;
  }
  const auto n = static_cast<double>(n_paths);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  const double log_mean = std::log(mean) + peak;
  if (!std::isfinite(log_mean / horizon)) {
    throw Error(ErrorKind::Overflow, "growth estimate not representable");
  }
  const double estimate = std::exp(log_mean / horizon);
  // Delta method for m -> m^(1/n); the ratio sd/mean is shift invariant.
  const double std_error = estimate / horizon * std::sqrt(var / n) / mean;
  return {estimate, std_error};
}

}  // namespace ifp
