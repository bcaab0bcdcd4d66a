#include "ifp/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>

#include "ifp/error.hpp"

namespace ifp {

namespace {

std::vector<QuadratureNode> compute_nodes(int n) {
  // Jacobi matrix of He_k: off-diagonal sqrt(k), zero diagonal.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  std::vector<QuadratureNode> nodes(static_cast<std::size_t>(n));
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    nodes[static_cast<std::size_t>(i)] = {solver.eigenvalues()(i), v0 * v0};
    total += v0 * v0;
  }
  for (auto& node : nodes) node.weight /= total;
  // Symmetrize to remove eigen-solver noise.
  for (int i = 0; i < n / 2; ++i) {
    auto& lo = nodes[static_cast<std::size_t>(i)];
    auto& hi = nodes[static_cast<std::size_t>(n - 1 - i)];
    const double x = 0.5 * (hi.point - lo.point);
    const double w = 0.5 * (hi.weight + lo.weight);
    lo = {-x, w};
    hi = {x, w};
  }
  if (n % 2 == 1) nodes[static_cast<std::size_t>(n / 2)].point = 0.0;
  return nodes;
}

}  // namespace

std::vector<QuadratureNode> gauss_hermite_normal(int n_nodes) {
  if (n_nodes < 1 || n_nodes > 200) {
    throw Error(ErrorKind::InvalidParameter, "quadrature order must be in [1, 200]");
  }
  static std::mutex mutex;
  static std::map<int, std::vector<QuadratureNode>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n_nodes);
  if (it == cache.end()) it = cache.emplace(n_nodes, compute_nodes(n_nodes)).first;
  return it->second;
}

}  // namespace ifp
