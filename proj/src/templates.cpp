#include "ifp/templates.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "ifp/error.hpp"
#include "ifp/io.hpp"
#include "ifp/markov.hpp"
#include "ifp/parallel.hpp"

namespace ifp {

namespace {

using Json = nlohmann::ordered_json;

const std::map<std::string, double>& defaults(const std::string& builder) {
  static const std::map<std::string, double> ar1{
      {"mu", 0.99}, {"rho", 0.5}, {"sigma", 0.01}, {"gamma", 1.0}};
  static const std::map<std::string, double> sr{
      {"mu_bar", 0.0281},     {"rho_mu", 0.5722},   {"delta_mu", 0.0067},
      {"sigma_bar", -3.2556}, {"rho_sigma", 0.2895}, {"delta_sigma", 0.1896},
      {"beta", 0.95},         {"gamma", 1.5}};
  if (builder == "ar1_discount") return ar1;
  if (builder == "stochastic_return") return sr;
  throw Error(ErrorKind::InvalidParameter, "unknown template builder '" + builder + "'");
}

std::size_t option_size(const Json& options, const char* key, std::size_t fallback) {
  if (!options.contains(key)) return fallback;
  const Json& v = options.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 2) {
    throw Error(ErrorKind::SchemaViolation,
                std::string("/template/options/") + key + ": expected an integer >= 2");
  }
  return v.get<std::size_t>();
}

PrimitiveSpec option_primitive(const Json& options, const char* key,
                               PrimitiveSpec fallback) {
  if (!options.contains(key)) return fallback;
  return io::primitive_from_json(options.at(key), std::string("/template/options/") + key);
}

// Mean-one lognormal income, v = 0.5.
PrimitiveSpec default_income() { return PrimitiveSpec::lognormal(-0.125, 0.5); }

ModelSpec build_ar1_discount(const std::map<std::string, double>& s, const Json& options) {
  const std::size_t n = option_size(options, "n_states", 15);
  const DiscretizedAR1 z = rouwenhorst(n, s.at("mu"), s.at("rho"), s.at("sigma"));
  ModelSpec spec;
  for (std::size_t i = 0; i < n; ++i) spec.state_labels.push_back("z" + std::to_string(i));
  spec.chain = z.transition;
  spec.beta = PrimitiveSpec::constant(z.states);
  spec.ret = option_primitive(options, "ret", PrimitiveSpec::constant(1.0));
  spec.income = option_primitive(options, "income", PrimitiveSpec::constant(1.0));
  spec.gamma = s.at("gamma");
  return spec;
}

ModelSpec build_stochastic_return(const std::map<std::string, double>& s,
                                  const Json& options) {
  std::string variant = "full";
  if (options.contains("variant")) {
    if (!options.at("variant").is_string()) {
      throw Error(ErrorKind::SchemaViolation, "/template/options/variant: expected a string");
    }
    variant = options.at("variant").get<std::string>();
  }
  if (variant != "full" && variant != "model_i" && variant != "model_ii") {
    throw Error(ErrorKind::SchemaViolation,
                "/template/options/variant: expected full, model_i or model_ii");
  }
  const double rho_mu = s.at("rho_mu");
  const double rho_sigma = s.at("rho_sigma");
  const double sd_mu = s.at("delta_mu") / std::sqrt(1.0 - rho_mu * rho_mu);
  const double sd_log_sigma = s.at("delta_sigma") / std::sqrt(1.0 - rho_sigma * rho_sigma);

  std::vector<double> mu_states{s.at("mu_bar")};
  TransitionMatrix mu_chain;
  if (variant != "model_i") {
    const auto d = rouwenhorst(option_size(options, "n_mu", 5), s.at("mu_bar"), rho_mu, sd_mu);
    mu_states = d.states;
    mu_chain = d.transition;
  }
  std::vector<double> sigma_states{
      std::exp(s.at("sigma_bar") + 0.5 * sd_log_sigma * sd_log_sigma)};
  TransitionMatrix sigma_chain;
  if (variant != "model_ii") {
    const auto d = rouwenhorst(option_size(options, "n_sigma", 5), s.at("sigma_bar"),
                               rho_sigma, sd_log_sigma);
    sigma_states.clear();
    for (double x : d.states) sigma_states.push_back(std::exp(x));
    sigma_chain = d.transition;
  }

  ModelSpec spec;
  spec.chain = product_chain(mu_chain, sigma_chain);
  std::vector<double> location, scale;
  for (std::size_t i = 0; i < mu_states.size(); ++i) {
    for (std::size_t j = 0; j < sigma_states.size(); ++j) {
      spec.state_labels.push_back("mu" + std::to_string(i) + "_sigma" + std::to_string(j));
      location.push_back(mu_states[i]);
      scale.push_back(sigma_states[j]);
    }
  }
  spec.beta = PrimitiveSpec::constant(s.at("beta"));
  spec.ret = PrimitiveSpec::lognormal(std::move(location), std::move(scale));
  spec.income = option_primitive(options, "income", default_income());
  spec.gamma = s.at("gamma");
  return spec;
}

double parse_double(const std::string& text, const std::string& what) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::InvalidParameter, "cannot parse " + what + " '" + text + "'");
  }
  return value;
}

}  // namespace

std::vector<std::string> template_slots(const std::string& builder) {
  std::vector<std::string> names;
  for (const auto& [name, value] : defaults(builder)) names.push_back(name);
  return names;
}

ModelSpec build_model(const TemplateSpec& spec) {
  std::map<std::string, double> slots = defaults(spec.builder);
  for (const auto& [name, value] : spec.slots) {
    auto it = slots.find(name);
    if (it == slots.end()) {
      throw Error(ErrorKind::UnknownParameter,
                  "template '" + spec.builder + "' has no slot '" + name + "'");
    }
    it->second = value;
  }
  ModelSpec model = spec.builder == "ar1_discount"
                        ? build_ar1_discount(slots, spec.options)
                        : build_stochastic_return(slots, spec.options);
  model.validate();
  return model;
}

double SweepAxis::value(std::size_t i) const {
  if (count == 1) return lo;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

SweepAxis parse_axis(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 4 || parts[0].empty()) {
    throw Error(ErrorKind::InvalidParameter,
                "axis must look like name:lo:hi:count, got '" + text + "'");
  }
  SweepAxis axis;
  axis.name = parts[0];
  axis.lo = parse_double(parts[1], "axis lower bound");
  axis.hi = parse_double(parts[2], "axis upper bound");
  const double count = parse_double(parts[3], "axis count");
  if (!(count >= 1.0) || count != std::floor(count)) {
    throw Error(ErrorKind::InvalidParameter, "axis count must be a positive integer");
  }
  axis.count = static_cast<std::size_t>(count);
  return axis;
}

SweepQuantity parse_quantity(const std::string& text) {
  if (text == "G_beta") return SweepQuantity::GBeta;
  if (text == "G_betaR") return SweepQuantity::GBetaR;
  if (text == "G_R") return SweepQuantity::GR;
  if (text == "s_bar") return SweepQuantity::SBar;
  if (text == "stable") return SweepQuantity::Stable;
  throw Error(ErrorKind::InvalidParameter,
              "quantity must be one of G_beta, G_betaR, G_R, s_bar, stable; got '" + text +
                  "'");
}

std::string to_string(SweepQuantity q) {
  switch (q) {
    case SweepQuantity::GBeta: return "G_beta";
    case SweepQuantity::GBetaR: return "G_betaR";
    case SweepQuantity::GR: return "G_R";
    case SweepQuantity::SBar: return "s_bar";
    case SweepQuantity::Stable: return "stable";
  }
  return "unknown";
}

double sweep_value(const ModelSpec& spec, SweepQuantity q) {
  const std::size_t n = spec.n_states();
  const auto g_beta_r = [&] {
    const Eigen::VectorXd b = conditional_means(spec.beta, n);
    const Eigen::VectorXd r = conditional_means(spec.ret, n);
    return growth_rate(spec.chain, b.cwiseProduct(r)).value;
  };
  switch (q) {
    case SweepQuantity::GBeta:
      return growth_rate(spec.chain, conditional_means(spec.beta, n)).value;
    case SweepQuantity::GBetaR:
      return g_beta_r();
    case SweepQuantity::GR:
      return growth_rate(spec.chain, conditional_means(spec.ret, n)).value;
    case SweepQuantity::SBar:
      return savings_rate_bound(spec);
    case SweepQuantity::Stable: {
      const double s_bar = savings_rate_bound(spec);
      const double g_r = growth_rate(spec.chain, conditional_means(spec.ret, n)).value;
      return std::max({g_beta_r(), s_bar, s_bar * g_r}) < 1.0 ? 1.0 : 0.0;
    }
  }
  return 0.0;
}

SweepGrid sweep(const TemplateSpec& base, const SweepAxis& x, const SweepAxis& y,
                SweepQuantity quantity, unsigned threads) {
  const auto names = template_slots(base.builder);
  for (const auto* axis : {&x, &y}) {
    if (std::find(names.begin(), names.end(), axis->name) == names.end()) {
      throw Error(ErrorKind::UnknownParameter,
                  "template '" + base.builder + "' has no slot '" + axis->name + "'");
    }
  }
  if (x.name == y.name) {
    throw Error(ErrorKind::InvalidParameter, "sweep axes must name different slots");
  }
  SweepGrid grid{x, y, quantity, std::vector<double>(x.count * y.count, 0.0)};
  parallel_for(grid.values.size(), threads, [&](std::size_t cell) {
    TemplateSpec spec = base;
    spec.slots[x.name] = x.value(cell / y.count);
    spec.slots[y.name] = y.value(cell % y.count);
    grid.values[cell] = sweep_value(build_model(spec), quantity);
  });
  return grid;
}

std::string sweep_csv(const SweepGrid& grid) {
  std::string out = "x,y,value\n";
  for (std::size_t i = 0; i < grid.x.count; ++i) {
    for (std::size_t j = 0; j < grid.y.count; ++j) {
      out += io::format_number(grid.x.value(i));
      out += ',';
      out += io::format_number(grid.y.value(j));
      out += ',';
      out += io::format_number(grid.at(i, j));
      out += '\n';
    }
  }
  return out;
}

}  // namespace ifp
