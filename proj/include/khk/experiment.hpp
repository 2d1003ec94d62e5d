#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "khk/verify.hpp"

namespace khk {

/// Malformed or incomplete experiment configuration.  The message names the
/// offending field, or the line and column of a JSON syntax error.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct HKScanOptions {
  int max_order = 0;  // 0: 4 for Clebsch flows, 3 otherwise
  int window = 8;
};

struct VerifyOptions {
  int trials = 200;
  int orbits = 5;
};

struct ExperimentConfig {
  SystemParams params = FirstClebschParams{};
  std::optional<State> x0;  // drawn from the seed when absent
  double eps = 0.05;
  int steps = 1000;
  std::uint64_t seed = 42;
  HKScanOptions hk;
  VerifyOptions verify;

  SystemKind kind() const;
};

// Accepts the canonical form
//   {"system": {"kind": ..., "params": {...}}, "x0": [...], "eps": ..., "steps": ...,
//    "seed": ..., "hk": {"max_order": ..., "window": ...},
//    "verify": {"trials": ..., "orbits": ...}}
// and the flat form {"system": "<kind>", <params...>, "x0": [...], ...}.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Catalog defaults for a kind, used when only --system is given.
ExperimentConfig default_config(SystemKind kind);

// Canonical form: every field present, system nested, x0 only when set.
nlohmann::json to_json(const ExperimentConfig& config);

SystemParams params_from_json(SystemKind kind, const nlohmann::json& params);
nlohmann::json params_to_json(const SystemParams& params);

// The configured x0, or a regular point of the unit ball drawn from the seed.
State initial_state(const System& sys, const ExperimentConfig& config);

// step, x1..xn, Delta, then the integral and density columns.
std::vector<std::string> orbit_columns(const System& sys);

// One row per step taken (steps = 0 writes the header only).  Values use 17
// significant digits; integrals that hit a vanishing denominator are written
// as nan.  Throws SingularStep if the first step is a pole; later poles end
// the table.
void write_orbit_csv(std::ostream& os, const System& sys, const State& x0, double eps, int steps);

// 17-significant-digit, locale-independent formatting.
std::string format_double(double value);

std::vector<PropertyReport> run_verify(const System& sys, const ExperimentConfig& config);

struct HKScanEntry {
  int order = 0;
  HKNullSpaceReport report;
};

int default_max_order(SystemKind kind);
std::vector<HKScanEntry> run_hk_scan(const System& sys, const State& x0,
                                     const ExperimentConfig& config);
nlohmann::json hk_scan_json(const System& sys, const State& x0, const ExperimentConfig& config,
                            const std::vector<HKScanEntry>& scans);

// Human-readable account of each check: the statement it tests and its outcome.
void write_report(std::ostream& os, const System& sys, const ExperimentConfig& config,
                  const std::vector<PropertyReport>& reports);

enum class Command { Simulate, Verify, HKScan, Report };

Command command_from_name(std::string_view name);

// Exit codes of run_command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPole = 3;
inline constexpr int kExitIO = 4;

// Runs one command and writes its artifact (orbit.csv, verify.json,
// hkscan.json or report.txt) into out_dir.  Diagnostics go to `log`.
int run_command(const ExperimentConfig& config, Command command,
                const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace khk
