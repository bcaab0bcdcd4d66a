#pragma once

// Command-line workflows: check, solve, simulate, tail, sweep and rerun.
// Each workflow writes its outputs plus run_manifest.json into --out.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ifp::cli {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitAssumption = 2;
inline constexpr int kExitInput = 3;
inline constexpr int kExitNoConvergence = 4;
inline constexpr int kExitNotReproduced = 5;

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ifp::cli
