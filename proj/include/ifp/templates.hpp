#pragma once

// Parametric model builders and two-axis parameter sweeps.
//
// A template names a builder and a set of scalar slots. Sweeps overwrite two
// slots per cell and rebuild the model, so every discretization is redone.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifp/model.hpp"

namespace ifp {

struct TemplateSpec {
  std::string builder;
  std::map<std::string, double> slots;
  nlohmann::ordered_json options = nlohmann::ordered_json::object();
};

// Slot names accepted by a builder. Throws InvalidParameter for an unknown builder.
std::vector<std::string> template_slots(const std::string& builder);

// Missing slots take builder defaults; unknown slots throw UnknownParameter.
//
// ar1_discount: beta_t = Z_t, Z a Rouwenhorst AR(1) with mean mu, persistence
//   rho and stationary sd sigma. Options: n_states (15), ret, income
//   (primitive JSON, default Constant 1).
// stochastic_return: log R = mu_t + sigma_t zeta, mu and log sigma AR(1)
//   chains with innovation sd delta_mu, delta_sigma. Options: n_mu, n_sigma
//   (5 each), variant ("full", "model_i", "model_ii"), income.
ModelSpec build_model(const TemplateSpec& spec);

struct SweepAxis {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 1;

  double value(std::size_t i) const;
};

// "name:lo:hi:count"
SweepAxis parse_axis(const std::string& text);

enum class SweepQuantity { GBeta, GBetaR, GR, SBar, Stable };

SweepQuantity parse_quantity(const std::string& text);
std::string to_string(SweepQuantity q);

double sweep_value(const ModelSpec& spec, SweepQuantity q);

struct SweepGrid {
  SweepAxis x;
  SweepAxis y;
  SweepQuantity quantity;
  std::vector<double> values;  // row-major: x outer, y inner

  double at(std::size_t i, std::size_t j) const { return values[i * y.count + j]; }
};

SweepGrid sweep(const TemplateSpec& base, const SweepAxis& x, const SweepAxis& y,
                SweepQuantity quantity, unsigned threads = 1);

// Header "x,y,value", one row per cell in grid order.
std::string sweep_csv(const SweepGrid& grid);

}  // namespace ifp
