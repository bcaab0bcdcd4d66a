#include "ifp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ifp/error.hpp"

namespace ifp::io {

namespace {

[[noreturn]] void schema(const std::string& pointer, const std::string& message) {
  throw Error(ErrorKind::SchemaViolation, (pointer.empty() ? "/" : pointer) + ": " + message);
}

const Json& member(const Json& j, const std::string& pointer, const char* key) {
  if (!j.is_object()) schema(pointer, "expected an object");
  if (!j.contains(key)) schema(pointer + "/" + key, "required field is missing");
  return j.at(key);
}

double number(const Json& j, const std::string& pointer) {
  if (!j.is_number()) schema(pointer, "expected a number");
  return j.get<double>();
}

std::vector<double> numbers(const Json& j, const std::string& pointer) {
  if (!j.is_array()) schema(pointer, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number(j[i], pointer + "/" + std::to_string(i)));
  }
  return out;
}

// Scalar or per-state array.
std::vector<double> scalar_or_array(const Json& j, const std::string& pointer) {
  if (j.is_number()) return {j.get<double>()};
  return numbers(j, pointer);
}

std::uint64_t unsigned_int(const Json& j, const std::string& pointer) {
  if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    schema(pointer, "expected a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

Json number_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

Json numbers_json(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number_or_null(x));
  return out;
}

void only_keys(const Json& j, const std::string& pointer,
               std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      schema(pointer + "/" + key, "unknown field");
    }
  }
}

std::pair<std::size_t, std::size_t> line_and_column(const std::string& text,
                                                    std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

double moment(const std::vector<double>& v, double mean, int power) {
  double s = 0.0;
  for (double x : v) s += std::pow(x - mean, power);
  return s / static_cast<double>(v.size());
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, x);
  return std::string(buffer, result.ptr);
}

PrimitiveSpec primitive_from_json(const Json& j, const std::string& pointer) {
  const Json& kind_j = member(j, pointer, "kind");
  if (!kind_j.is_string()) schema(pointer + "/kind", "expected a string");
  const std::string kind = kind_j.get<std::string>();
  if (kind == "constant") {
    only_keys(j, pointer, {"kind", "value", "values"});
    if (j.contains("value")) return PrimitiveSpec::constant(number(j.at("value"), pointer + "/value"));
    return PrimitiveSpec::constant(numbers(member(j, pointer, "values"), pointer + "/values"));
  }
  if (kind == "lognormal") {
    only_keys(j, pointer, {"kind", "m", "v"});
    return PrimitiveSpec::lognormal(scalar_or_array(member(j, pointer, "m"), pointer + "/m"),
                                    scalar_or_array(member(j, pointer, "v"), pointer + "/v"));
  }
  if (kind == "discrete") {
    only_keys(j, pointer, {"kind", "points", "probs", "per_state"});
    if (j.contains("per_state")) {
      const Json& laws = j.at("per_state");
      if (!laws.is_array()) schema(pointer + "/per_state", "expected an array");
      std::vector<DiscreteLaw> out;
      for (std::size_t i = 0; i < laws.size(); ++i) {
        const std::string p = pointer + "/per_state/" + std::to_string(i);
        out.push_back({numbers(member(laws[i], p, "points"), p + "/points"),
                       numbers(member(laws[i], p, "probs"), p + "/probs")});
      }
      return PrimitiveSpec::discrete(std::move(out));
    }
    return PrimitiveSpec::discrete(numbers(member(j, pointer, "points"), pointer + "/points"),
                                   numbers(member(j, pointer, "probs"), pointer + "/probs"));
  }
  schema(pointer + "/kind", "expected constant, lognormal or discrete, got '" + kind + "'");
}

Json primitive_to_json(const PrimitiveSpec& spec) {
  return std::visit(
      [](const auto& law) -> Json {
        using T = std::decay_t<decltype(law)>;
        Json j;
        if constexpr (std::is_same_v<T, Constant>) {
          j["kind"] = "constant";
          if (law.values.size() == 1) {
            j["value"] = law.values.front();
          } else {
            j["values"] = law.values;
          }
        } else if constexpr (std::is_same_v<T, Lognormal>) {
          j["kind"] = "lognormal";
          j["m"] = law.location.size() == 1 ? Json(law.location.front()) : Json(law.location);
          j["v"] = law.scale.size() == 1 ? Json(law.scale.front()) : Json(law.scale);
        } else {
          j["kind"] = "discrete";
          if (law.laws.size() == 1) {
            j["points"] = law.laws.front().points;
            j["probs"] = law.laws.front().probs;
          } else {
            Json laws = Json::array();
            for (const auto& l : law.laws) {
              laws.push_back(Json{{"points", l.points}, {"probs", l.probs}});
            }
            j["per_state"] = laws;
          }
        }
        return j;
      },
      spec.law);
}

ModelSpec model_from_json(const Json& j, const std::string& pointer) {
  if (!j.is_object()) schema(pointer, "expected an object");
  only_keys(j, pointer, {"states", "transition", "beta", "ret", "income", "gamma"});
  ModelSpec spec;
  const Json& states = member(j, pointer, "states");
  if (!states.is_array() || states.empty()) {
    schema(pointer + "/states", "expected a nonempty array of labels");
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!states[i].is_string()) {
      schema(pointer + "/states/" + std::to_string(i), "expected a string label");
    }
    spec.state_labels.push_back(states[i].get<std::string>());
  }
  const std::size_t n = spec.state_labels.size();

  const Json& rows = member(j, pointer, "transition");
  const std::string tp = pointer + "/transition";
  if (!rows.is_array() || rows.size() != n) {
    schema(tp, "expected " + std::to_string(n) + " rows (one per state)");
  }
  Eigen::MatrixXd p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::string rp = tp + "/" + std::to_string(i);
    const std::vector<double> row = numbers(rows[i], rp);
    if (row.size() != n) schema(rp, "expected " + std::to_string(n) + " entries");
    for (std::size_t k = 0; k < n; ++k) {
      p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
    }
  }
  try {
    spec.chain = TransitionMatrix(std::move(p));
  } catch (const Error& e) {
    schema(tp, e.detail());
  }
  auto primitive = [&](const char* key) {
    const std::string where = pointer + "/" + key;
    PrimitiveSpec out = primitive_from_json(member(j, pointer, key), where);
    try {
      validate(out, n, key);
    } catch (const Error& e) {
      schema(where, e.detail());
    }
    return out;
  };
  spec.beta = primitive("beta");
  spec.ret = primitive("ret");
  spec.income = primitive("income");
  spec.gamma = number(member(j, pointer, "gamma"), pointer + "/gamma");
  try {
    spec.validate();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InvalidParameter) throw;
    schema(pointer, e.detail());
  }
  return spec;
}

Json model_to_json(const ModelSpec& spec) {
  Json j;
  j["states"] = spec.state_labels;
  Json rows = Json::array();
  for (std::size_t i = 0; i < spec.n_states(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < spec.n_states(); ++k) row.push_back(spec.chain(i, k));
    rows.push_back(row);
  }
  j["transition"] = rows;
  j["beta"] = primitive_to_json(spec.beta);
  j["ret"] = primitive_to_json(spec.ret);
  j["income"] = primitive_to_json(spec.income);
  j["gamma"] = spec.gamma;
  return j;
}

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorKind::SchemaViolation, source + ":" + std::to_string(line) + ":" +
                                                std::to_string(column) + ": malformed JSON");
  }
}

Json read_json_file(const std::filesystem::path& path) {
  return parse_json(read_text(path), path.string());
}

RunConfig config_from_json(const Json& j) {
  if (!j.is_object()) schema("", "expected an object");
  only_keys(j, "", {"model", "template", "solver", "simulation", "tail", "seed"});
  RunConfig config;
  config.raw = j;
  if (j.contains("model") == j.contains("template")) {
    schema("", "exactly one of 'model' or 'template' is required");
  }
  if (j.contains("model")) {
    config.model = model_from_json(j.at("model"), "/model");
  } else {
    const Json& t = j.at("template");
    only_keys(t, "/template", {"builder", "slots", "options"});
    const Json& builder = member(t, "/template", "builder");
    if (!builder.is_string()) schema("/template/builder", "expected a string");
    TemplateSpec spec;
    spec.builder = builder.get<std::string>();
    if (spec.builder != "ar1_discount" && spec.builder != "stochastic_return") {
      schema("/template/builder", "expected ar1_discount or stochastic_return");
    }
    if (t.contains("slots")) {
      if (!t.at("slots").is_object()) schema("/template/slots", "expected an object");
      for (const auto& [name, value] : t.at("slots").items()) {
        spec.slots[name] = number(value, "/template/slots/" + name);
      }
    }
    if (t.contains("options")) {
      if (!t.at("options").is_object()) schema("/template/options", "expected an object");
      spec.options = t.at("options");
    }
    config.model = build_model(spec);
    config.templ = std::move(spec);
  }

  if (j.contains("seed")) config.seed = unsigned_int(j.at("seed"), "/seed");

  if (j.contains("solver")) {
    const Json& s = j.at("solver");
    only_keys(s, "/solver", {"tol_rho", "max_iter", "quad_nodes", "root_tol", "grid"});
    if (s.contains("tol_rho")) config.solver.tol_rho = number(s.at("tol_rho"), "/solver/tol_rho");
    if (s.contains("max_iter")) {
      config.solver.max_iter = static_cast<int>(unsigned_int(s.at("max_iter"), "/solver/max_iter"));
    }
    if (s.contains("quad_nodes")) {
      config.solver.quad_nodes =
          static_cast<int>(unsigned_int(s.at("quad_nodes"), "/solver/quad_nodes"));
    }
    if (s.contains("root_tol")) config.solver.root_tol = number(s.at("root_tol"), "/solver/root_tol");
    if (s.contains("grid")) {
      const Json& g = s.at("grid");
      only_keys(g, "/solver/grid", {"a_min", "a_max", "n_points"});
      if (g.contains("a_min")) config.solver.grid.a_min = number(g.at("a_min"), "/solver/grid/a_min");
      if (g.contains("a_max")) config.solver.grid.a_max = number(g.at("a_max"), "/solver/grid/a_max");
      if (g.contains("n_points")) {
        config.solver.grid.n_points = unsigned_int(g.at("n_points"), "/solver/grid/n_points");
      }
    }
  }

  config.simulation.keep_paths = false;
  if (j.contains("simulation")) {
    const Json& s = j.at("simulation");
    only_keys(s, "/simulation", {"n_paths", "horizon", "burn_in", "a0", "z0", "keep_paths"});
    auto& sim = config.simulation;
    if (s.contains("n_paths")) sim.n_paths = unsigned_int(s.at("n_paths"), "/simulation/n_paths");
    if (s.contains("horizon")) sim.horizon = unsigned_int(s.at("horizon"), "/simulation/horizon");
    if (s.contains("burn_in")) sim.burn_in = unsigned_int(s.at("burn_in"), "/simulation/burn_in");
    if (s.contains("a0")) sim.a0 = number(s.at("a0"), "/simulation/a0");
    if (s.contains("z0")) {
      const std::uint64_t z0 = unsigned_int(s.at("z0"), "/simulation/z0");
      if (z0 >= config.model.n_states()) schema("/simulation/z0", "state index out of range");
      sim.z0 = static_cast<std::size_t>(z0);
    }
    if (s.contains("keep_paths")) {
      if (!s.at("keep_paths").is_boolean()) schema("/simulation/keep_paths", "expected a boolean");
      sim.keep_paths = s.at("keep_paths").get<bool>();
    }
  }

  if (j.contains("tail")) {
    const Json& t = j.at("tail");
    only_keys(t, "/tail", {"s_min", "s_max", "n_grid", "hill_fraction", "n_boot"});
    auto& tail = config.tail;
    if (t.contains("s_min")) tail.kappa.s_min = number(t.at("s_min"), "/tail/s_min");
    if (t.contains("s_max")) tail.kappa.s_max = number(t.at("s_max"), "/tail/s_max");
    if (t.contains("n_grid")) tail.kappa.n_grid = unsigned_int(t.at("n_grid"), "/tail/n_grid");
    if (t.contains("hill_fraction")) {
      tail.hill_fraction = number(t.at("hill_fraction"), "/tail/hill_fraction");
    }
    if (t.contains("n_boot")) tail.n_boot = unsigned_int(t.at("n_boot"), "/tail/n_boot");
  }
  config.simulation.seed = config.seed;
  config.tail.seed = config.seed;
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  try {
    return config_from_json(j);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SchemaViolation) throw;
    throw Error(ErrorKind::SchemaViolation,
                path.string() + ": " + e.detail());
  }
}

std::string policy_csv(const Policy& policy) {
  std::string out = "state_index,asset,consumption\n";
  for (std::size_t z = 0; z < policy.n_states(); ++z) {
    for (std::size_t i = 0; i < policy.grid.size(); ++i) {
      out += std::to_string(z);
      out += ',';
      out += format_number(policy.grid[i]);
      out += ',';
      out += format_number(policy.consumption(static_cast<Eigen::Index>(i),
                                              static_cast<Eigen::Index>(z)));
      out += '\n';
    }
  }
  return out;
}

Json policy_sidecar(const SolveResult& result) {
  Json j;
  j["n_states"] = result.policy.n_states();
  j["n_grid"] = result.policy.grid.size();
  j["alpha"] = numbers_json(result.policy.alpha);
  j["a_bar"] = numbers_json(result.policy.a_bar);
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["trace"] = numbers_json(result.trace);
  return j;
}

PolicyFile read_policy(const std::filesystem::path& csv,
                       const std::filesystem::path& sidecar, std::size_t n_states) {
  const std::string text = read_text(csv);
  const Json side = read_json_file(sidecar);
  const std::string where = csv.string();

  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line != "state_index,asset,consumption") {
    throw Error(ErrorKind::SchemaViolation, where + ":1: unexpected header '" + line + "'");
  }
  std::vector<std::vector<std::pair<double, double>>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fail = [&](const std::string& msg) {
      throw Error(ErrorKind::SchemaViolation,
                  where + ":" + std::to_string(line_no) + ": " + msg);
    };
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
      fail("expected 3 fields");
    }
    std::size_t z = 0;
    double a = 0.0, c = 0.0;
    const char* s = line.data();
    if (std::from_chars(s, s + c1, z).ptr != s + c1 ||
        std::from_chars(s + c1 + 1, s + c2, a).ptr != s + c2 ||
        std::from_chars(s + c2 + 1, s + line.size(), c).ptr != s + line.size()) {
      fail("malformed number");
    }
    if (z != rows.size() && z + 1 != rows.size()) fail("state_index out of order");
    if (z == rows.size()) rows.emplace_back();
    rows[z].emplace_back(a, c);
  }
  if (rows.size() != n_states) {
    throw Error(ErrorKind::SchemaViolation,
                where + ": policy has " + std::to_string(rows.size()) +
                    " states but the config has " + std::to_string(n_states));
  }
  std::vector<double> points;
  for (const auto& [a, c] : rows.front()) points.push_back(a);
  for (std::size_t z = 1; z < rows.size(); ++z) {
    if (rows[z].size() != points.size()) {
      throw Error(ErrorKind::SchemaViolation, where + ": state " + std::to_string(z) +
                                                  " has a different grid size");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (rows[z][i].first != points[i]) {
        throw Error(ErrorKind::SchemaViolation,
                    where + ": state " + std::to_string(z) + " uses a different grid");
      }
    }
  }

  PolicyFile file;
  try {
    file.policy.grid = AssetGrid::from_points(points);
  } catch (const Error& e) {
    throw Error(ErrorKind::SchemaViolation, where + ": " + e.detail());
  }
  file.policy.consumption.resize(static_cast<Eigen::Index>(points.size()),
                                 static_cast<Eigen::Index>(n_states));
  for (std::size_t z = 0; z < n_states; ++z) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      file.policy.consumption(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(z)) =
          rows[z][i].second;
    }
  }

  const std::string sp = sidecar.string();
  const auto per_state = [&](const char* key, double null_value) {
    const Json& arr = member(side, sp + ":", key);
    if (!arr.is_array() || arr.size() != n_states) {
      schema(sp + ":/" + key, "expected one entry per state");
    }
    std::vector<double> out;
    for (std::size_t z = 0; z < n_states; ++z) {
      out.push_back(arr[z].is_null() ? null_value
                                     : number(arr[z], sp + ":/" + key + "/" + std::to_string(z)));
    }
    return out;
  };
  file.policy.alpha = per_state("alpha", std::numeric_limits<double>::quiet_NaN());
  file.policy.a_bar = per_state("a_bar", std::numeric_limits<double>::infinity());
  if (side.contains("trace")) {
    for (const auto& x : side.at("trace")) {
      file.trace.push_back(x.is_null() ? std::numeric_limits<double>::infinity()
                                       : x.get<double>());
    }
  }
  if (side.contains("converged") && side.at("converged").is_boolean()) {
    file.converged = side.at("converged").get<bool>();
  }
  if (side.contains("iterations") && side.at("iterations").is_number_integer()) {
    file.iterations = side.at("iterations").get<int>();
  }
  return file;
}

std::string panel_csv(const WealthPanel& panel) {
  if (!panel.config.keep_paths) {
    throw Error(ErrorKind::InvalidParameter, "full panel export needs keep_paths");
  }
  std::string out = "path,t,state,asset\n";
  for (std::size_t p = 0; p < panel.n_paths(); ++p) {
    for (std::size_t t = 0; t < panel.columns(); ++t) {
      out += std::to_string(p);
      out += ',';
      out += std::to_string(t);
      out += ',';
      out += std::to_string(panel.state(p, t));
      out += ',';
      out += format_number(panel.asset(p, t));
      out += '\n';
    }
  }
  return out;
}

std::string terminal_csv(const WealthPanel& panel) {
  const auto assets = panel.terminal_assets();
  const auto states = panel.terminal_states();
  std::string out = "path,state,asset\n";
  for (std::size_t p = 0; p < assets.size(); ++p) {
    out += std::to_string(p);
    out += ',';
    out += std::to_string(states[p]);
    out += ',';
    out += format_number(assets[p]);
    out += '\n';
  }
  return out;
}

Json panel_summary(const WealthPanel& panel) {
  const std::vector<double> a = panel.terminal_assets();
  double mean = 0.0;
  for (double x : a) mean += x;
  mean /= static_cast<double>(a.size());
  const double var = moment(a, mean, 2);
  const double sd = std::sqrt(var);

  Json j;
  j["n_paths"] = panel.n_paths();
  j["horizon"] = panel.config.horizon;
  j["burn_in"] = panel.config.burn_in;
  j["seed"] = panel.config.seed;
  j["mean"] = mean;
  j["std_dev"] = sd;
  j["skewness"] = number_or_null(sd > 0 ? moment(a, mean, 3) / (var * sd) : 0.0);
  j["kurtosis"] = number_or_null(var > 0 ? moment(a, mean, 4) / (var * var) : 0.0);
  j["min"] = *std::min_element(a.begin(), a.end());
  j["max"] = *std::max_element(a.begin(), a.end());
  Json q;
  for (const auto& [label, level] :
       std::vector<std::pair<std::string, double>>{{"1", 0.01},   {"5", 0.05},
                                                   {"25", 0.25},  {"50", 0.5},
                                                   {"75", 0.75},  {"95", 0.95},
                                                   {"99", 0.99},  {"99.9", 0.999}}) {
    q[label] = quantile(a, level);
  }
  j["quantiles"] = q;
  std::size_t diverged = 0;
  for (auto d : panel.diverged) diverged += d;
  j["diverged_paths"] = diverged;
  const std::size_t h = panel.config.horizon;
  if (h >= 1500 && panel.mean_path.size() > h) {
    j["mean_at_1500"] = panel.mean_path[1500];
  }
  j["mean_path_terminal"] = panel.mean_path.empty() ? 0.0 : panel.mean_path.back();
  return j;
}

Json growth_report_to_json(const GrowthReport& r) {
  Json j;
  j["G_beta"] = number_or_null(r.g_beta);
  j["G_betaR"] = number_or_null(r.g_beta_r);
  j["G_R"] = number_or_null(r.g_r);
  j["s_bar"] = number_or_null(r.s_bar);
  j["s_bar_G_R"] = number_or_null(r.s_bar * r.g_r);
  j["E_Y"] = number_or_null(r.e_y);
  j["E_uprime_Y"] = number_or_null(r.e_uprime_y);
  Json f;
  f["discount_growth"] = r.flags.discount_growth;
  f["discounted_return_growth"] = r.flags.discounted_return_growth;
  f["income_moments"] = r.flags.income_moments;
  f["savings_return_growth"] = r.flags.savings_return_growth;
  f["mixing"] = r.flags.mixing;
  if (r.flags.wealth_growth) f["wealth_growth"] = *r.flags.wealth_growth;
  j["flags"] = f;
  j["mixing_state"] = r.mixing_state ? Json(*r.mixing_state) : Json(nullptr);
  j["optimality_holds"] = r.optimality_holds();
  j["all_required_hold"] = r.all_required_hold();
  j["notes"] = r.notes;
  return j;
}

Json tail_report_to_json(const TailReport& r) {
  const auto opt = [](const std::optional<double>& x) {
    return x ? number_or_null(*x) : Json(nullptr);
  };
  Json j;
  j["verdict"] = r.verdict;
  j["verdict_detail"] = r.verdict_detail;
  j["kappa"] = opt(r.kappa);
  j["kappa_alpha_low"] = opt(r.kappa_alpha_low);
  j["kappa_alpha_high"] = opt(r.kappa_alpha_high);
  j["growth_condition_holds"] = r.growth_condition_holds;
  j["witness_state"] = r.witness_state ? Json(*r.witness_state) : Json(nullptr);
  j["alpha"] = numbers_json(r.alpha);
  if (r.hill) {
    j["hill"] = Json{{"estimate", number_or_null(r.hill->estimate)},
                     {"lower_5", number_or_null(r.hill->lower)},
                     {"upper_95", number_or_null(r.hill->upper)},
                     {"k", r.hill->k}};
  } else {
    j["hill"] = nullptr;
  }
  j["q999_over_median"] = opt(r.q999_over_median);
  j["notes"] = r.notes;
  Json curve = Json::array();
  for (const auto& [s, lam] : r.lambda_curve) {
    curve.push_back(Json::array({number_or_null(s), number_or_null(lam)}));
  }
  j["lambda_curve"] = curve;
  return j;
}

std::string lambda_csv(const std::vector<std::pair<double, double>>& curve) {
  std::string out = "s,lambda\n";
  for (const auto& [s, lam] : curve) {
    out += format_number(s);
    out += ',';
    out += format_number(lam);
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::MissingFile, "cannot write " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace ifp::io
