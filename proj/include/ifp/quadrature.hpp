#pragma once

#include <vector>

namespace ifp {

struct QuadratureNode {
  double point;
  double weight;
};

// Nodes and weights with sum_i w_i f(x_i) ~= E f(N) for N standard normal.
// Built by Golub-Welsch on the probabilists' Hermite recurrence.
std::vector<QuadratureNode> gauss_hermite_normal(int n_nodes);

}  // namespace ifp
