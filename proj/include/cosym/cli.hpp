#pragma once

// Command-line front end. Every command prints one JSON document on stdout;
// diagnostics go to stderr.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "cosym/scenario.hpp"

namespace cosym {

namespace exit_code {
constexpr int ok = 0;
constexpr int verification_failure = 2;
constexpr int cross_check_mismatch = 3;
constexpr int usage = 64;
}  // namespace exit_code

// `arg` is a file path or "builtin:<name>". Throws ScenarioError,
// UnknownScenario or std::runtime_error for unreadable files.
Scenario load_scenario(const std::string& arg);

struct ReportOptions {
  std::uint64_t seed = 0;
  std::size_t points = 64;
  std::size_t samples = 200;       // validation points
  double flow_tau = 100.0;
  double flow_tol = 1e-10;
  double drift_max = 1e-7;
  bool all = true;                 // false: validation, verification and flow only
};

struct ReportResult {
  ordered_json json;
  int status = exit_code::ok;
  std::vector<std::string> failed_sections;
};

// validation, verification, flow, actions, frequencies and oracles in one
// document. Sections that do not apply are marked "skipped".
ReportResult run_report(const Scenario& s, const ReportOptions& opts = {});

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cosym
