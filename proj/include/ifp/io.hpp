#pragma once

// File formats: model/config JSON, policy CSV with a JSON sidecar, wealth
// panels, summaries and tail reports. All numbers are written with
// std::to_chars (shortest round-trip, locale independent).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifp/dynamics.hpp"
#include "ifp/model.hpp"
#include "ifp/solver.hpp"
#include "ifp/tail.hpp"
#include "ifp/templates.hpp"

namespace ifp::io {

using Json = nlohmann::ordered_json;

std::string format_number(double x);

// Throws SchemaViolation; error messages carry the JSON pointer of the field.
PrimitiveSpec primitive_from_json(const Json& j, const std::string& pointer);
Json primitive_to_json(const PrimitiveSpec& spec);

ModelSpec model_from_json(const Json& j, const std::string& pointer = "");
Json model_to_json(const ModelSpec& spec);

// Parse a JSON text; syntax errors are reported with line and column.
Json parse_json(const std::string& text, const std::string& source);
Json read_json_file(const std::filesystem::path& path);

// Run configuration. Exactly one of "model" or "template" describes the
// problem; the remaining sections are optional.
struct RunConfig {
  Json raw;
  std::optional<TemplateSpec> templ;
  ModelSpec model;
  SolverConfig solver;
  SimConfig simulation;
  TailSettings tail;
  std::uint64_t seed = 0;
};

RunConfig config_from_json(const Json& j);
RunConfig load_config(const std::filesystem::path& path);

struct PolicyFile {
  Policy policy;
  std::vector<double> trace;
  bool converged = false;
  int iterations = 0;
};

// CSV columns state_index,asset,consumption; sidecar is a separate JSON file.
std::string policy_csv(const Policy& policy);
Json policy_sidecar(const SolveResult& result);
// Reads both files and checks the policy against n_states. Throws
// MissingFile or SchemaViolation.
PolicyFile read_policy(const std::filesystem::path& csv,
                       const std::filesystem::path& sidecar, std::size_t n_states);

// path,t,state,asset for every date (requires keep_paths).
std::string panel_csv(const WealthPanel& panel);
// path,state,asset at the terminal date.
std::string terminal_csv(const WealthPanel& panel);
Json panel_summary(const WealthPanel& panel);

Json growth_report_to_json(const GrowthReport& report);
Json tail_report_to_json(const TailReport& report);
std::string lambda_csv(const std::vector<std::pair<double, double>>& curve);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

}  // namespace ifp::io
