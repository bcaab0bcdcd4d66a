#pragma once

// Value-function iteration oracle for the consumption policy.
//
// Independent of the time-iteration code: no Euler equation, no bisection.
// The Bellman operator is maximized by golden-section search and V is
// interpolated by PCHIP in a transformed space where it is close to linear.
// Supports Constant/Discrete primitives only.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ifp/model.hpp"

namespace ifp::oracle {

// Fritsch-Carlson monotone cubic; linear with the end slopes outside the nodes.
class Pchip {
 public:
  Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    d_[0] = delta[0];
    d_[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) continue;
      const double w1 = 2 * h[i] + h[i - 1];
      const double w2 = h[i] + 2 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }

  double operator()(double x) const {
    if (x <= x_.front()) return y_.front() + d_.front() * (x - x_.front());
    if (x >= x_.back()) return y_.back() + d_.back() * (x - x_.back());
    const std::size_t i = static_cast<std::size_t>(
        std::upper_bound(x_.begin(), x_.end(), x) - x_.begin() - 1);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * d_[i] +
           (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * d_[i + 1];
  }

 private:
  std::vector<double> x_, y_, d_;
};

struct VfiResult {
  std::vector<double> grid;
  // consumption[z][i] at grid[i]
  std::vector<std::vector<double>> consumption;
  int iterations = 0;
};

class ValueIteration {
 public:
  ValueIteration(const ModelSpec& spec, double a_lo, double a_hi, std::size_t n_nodes)
      : spec_(spec), gamma_(spec.gamma), n_(spec.n_states()) {
    for (std::size_t i = 0; i < n_nodes; ++i) {
      grid_.push_back(a_lo * std::pow(a_hi / a_lo, double(i) / double(n_nodes - 1)));
    }
    for (std::size_t z = 0; z < n_; ++z) {
      ebeta_.push_back(conditional_power_moment(spec.beta, z, 1.0));
      rets_.push_back(expectation_nodes(spec.ret, z, 1));
      incomes_.push_back(expectation_nodes(spec.income, z, 1));
    }
    beta_ref_ = *std::max_element(ebeta_.begin(), ebeta_.end());
  }

  double utility(double c) const {
    return gamma_ == 1.0 ? std::log(c) : std::pow(c, 1 - gamma_) / (1 - gamma_);
  }
  double forward(double v) const {
    return gamma_ == 1.0 ? std::exp((1 - beta_ref_) * v)
                         : std::pow((1 - gamma_) * (1 - beta_ref_) * v, 1 / (1 - gamma_));
  }
  double backward(double w) const {
    w = std::max(w, 1e-300);
    return gamma_ == 1.0 ? std::log(w) / (1 - beta_ref_)
                         : std::pow(w, 1 - gamma_) / ((1 - gamma_) * (1 - beta_ref_));
  }

  // Continuation value of savings x at state z.
  double continuation(const std::vector<Pchip>& w, double x, std::size_t z) const {
    double total = 0.0;
    for (std::size_t zn = 0; zn < n_; ++zn) {
      const double p = spec_.chain(z, zn);
      if (p == 0.0) continue;
      double ev = 0.0;
      for (const auto& r : rets_[zn]) {
        for (const auto& y : incomes_[zn]) {
          ev += r.weight * y.weight * backward(w[zn](r.point * x + y.point));
        }
      }
      total += p * ebeta_[zn] * ev;
    }
    return total;
  }

  // Golden-section maximization of u(c) + continuation(a - c) over c in (0, a].
  std::pair<double, double> maximize(const std::vector<Pchip>& w, double a,
                                     std::size_t z) const {
    auto f = [&](double c) { return utility(c) + continuation(w, a - c, z); };
    const double g = (std::sqrt(5.0) - 1) / 2;
    double lo = 1e-10 * a, hi = a;
    double c1 = hi - g * (hi - lo), c2 = lo + g * (hi - lo);
    double f1 = f(c1), f2 = f(c2);
    while (hi - lo > 1e-11 * a) {
      if (f1 < f2) {
        lo = c1;
        c1 = c2;
        f1 = f2;
        c2 = lo + g * (hi - lo);
        f2 = f(c2);
      } else {
        hi = c2;
        c2 = c1;
        f2 = f1;
        c1 = hi - g * (hi - lo);
        f1 = f(c1);
      }
    }
    // The constraint c <= a may bind; compare with the corner.
    const double interior = 0.5 * (lo + hi);
    const double fi = f(interior), fa = f(a);
    return fa >= fi ? std::make_pair(a, fa) : std::make_pair(interior, fi);
  }

  VfiResult solve(double tol = 1e-9, int max_iter = 5000) const {
    // Start from "consume everything forever": V0 = u(a) / (1 - beta).
    std::vector<std::vector<double>> v(n_, std::vector<double>(grid_.size()));
    for (std::size_t z = 0; z < n_; ++z) {
      for (std::size_t i = 0; i < grid_.size(); ++i) v[z][i] = utility(grid_[i]) / (1 - beta_ref_);
    }
    VfiResult out;
    out.grid = grid_;
    out.consumption.assign(n_, std::vector<double>(grid_.size()));
    for (int it = 0; it < max_iter; ++it) {
      std::vector<Pchip> w;
      for (std::size_t z = 0; z < n_; ++z) {
        std::vector<double> tv(grid_.size());
        for (std::size_t i = 0; i < grid_.size(); ++i) tv[i] = forward(v[z][i]);
        w.emplace_back(grid_, tv);
      }
      double diff = 0.0;
      for (std::size_t z = 0; z < n_; ++z) {
        for (std::size_t i = 0; i < grid_.size(); ++i) {
          const auto [c, value] = maximize(w, grid_[i], z);
          diff = std::max(diff, std::abs(value - v[z][i]));
          v[z][i] = value;
          out.consumption[z][i] = c;
        }
      }
      out.iterations = it + 1;
      if (diff < tol) break;
    }
    return out;
  }

 private:
  const ModelSpec& spec_;
  double gamma_;
  std::size_t n_;
  double beta_ref_;
  std::vector<double> grid_;
  std::vector<double> ebeta_;
  std::vector<std::vector<QuadratureNode>> rets_;
  std::vector<std::vector<QuadratureNode>> incomes_;
};

}  // namespace ifp::oracle
