#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hc/core.hpp"
#include "hc/problems.hpp"

namespace hc::cli {

// Bad flags, unknown keys, incompatible method/problem pairs. Maps to exit 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string method;   // ippm-swsg, ippm-acgd, s-starbl, s-bl-adals, ref-convex, grid
  std::string problem;  // cnls, cgp2d, cgp-rand
  std::uint64_t seed = 42;
  double eps = 1e-2;
  std::optional<double> tau;     // IPPM feasibility budget, or the bundle minorant budget
  double lambda = 1.0;
  std::optional<double> eta0;
  std::optional<double> f1_star;  // S-StarBL level; looked up when absent
  std::int64_t budget = 100000000;
  std::optional<double> tol;      // band on F1 - F1* for the exit status; eps when absent
  std::optional<double> tol_f2;   // band on F2; tol when absent
  std::map<std::string, double> overrides;
  std::string name;               // file stem for artifacts
};

// Applies one key = value pair (from a config file or --set) to `cfg`.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);
// Flat `key = value` file in TOML syntax: comments, bare numbers, quoted strings, booleans.
std::vector<std::pair<std::string, std::string>> parse_flat_toml(const std::string& text);
void validate(const RunConfig& cfg);

struct RunOutput {
  RunConfig config;
  SolveReport report;
  std::optional<double> f1_star_ref;
  double wall_ms = 0.0;
  std::string error;  // non-empty when the solver threw
};

ProblemInstance make_problem(const RunConfig& cfg);
// Known optimum for the instance: the literature value for cnls/cgp2d, the
// frozen fixture for cgp-rand when one exists for the seed.
std::optional<double> known_reference(const RunConfig& cfg);
std::string fixtures_dir();

// Runs one pipeline; solver failures propagate as hc::Error.
RunOutput run(const RunConfig& cfg);

std::string trace_csv(const Trace& trace);
nlohmann::json summary_json(const RunOutput& out);
bool within_tolerance(const RunOutput& out);
// First non-inner record with f1 - ref <= tol_f1 and f2 <= tol_f2.
std::optional<std::int64_t> calls_to_tolerance(const Trace& trace, double ref, double tol_f1,
                                               double tol_f2);

std::vector<RunConfig> bench_suite(const std::string& suite, std::uint64_t seed);
// Runs a suite with up to `threads` workers; results keep suite order.
std::vector<RunOutput> run_bench(const std::vector<RunConfig>& runs, int threads);
int worker_threads();

// Full command-line entry point; returns the process exit status.
int main_entry(int argc, char** argv);

}  // namespace hc::cli
