#pragma once

/// @file experiment.hpp
/// Config-driven experiments: build a family and start vector from a preset or an
/// inline description, run an engine, compute quantities, run certifications and write
/// the results. Everything in a config is validated before any file is written.
///
/// Exit codes: 0 when every requested certification passes, 1 when a check fails or a
/// computation throws after validation (reports are still written), 2 when the config
/// is invalid (nothing is written).

#include "altproj/constructions.hpp"
#include "altproj/iterates.hpp"
#include "altproj/quantities.hpp"
#include "altproj/serialization.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace altproj {

/// Schema violation, exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failed = 1;
inline constexpr int config_error = 2;
}  // namespace exit_code

enum class Mode {
  construct,  ///< family.json
  simulate,   ///< + trajectory.csv, trajectory.json
  measure,    ///< family.json, quantities.json
  certify,    ///< everything, plus certification.json and summary.json
};

Mode mode_from_string(const std::string& name);
std::string to_string(Mode mode);

/// Names accepted in "quantities" and "certify".
const std::vector<std::string>& quantity_names();
const std::vector<std::string>& certification_names();

struct ExperimentConfig {
  /// orthogonal_axes, four_lines, theorem3 (alias block), theorem5, random, inline.
  std::string construction;
  json construction_params = json::object();
  json inline_family;                    ///< set for "inline"
  std::optional<std::vector<Vector>> dictionary_atoms;

  /// "default" (the construction's own start), "random", "slow_witness" or "explicit".
  std::string x0_mode = "default";
  Vector x0;                             ///< explicit start
  std::size_t slow_witness_horizon = 50;

  bool greedy = false;                   ///< policy "greedy": over D_L, or the dictionary if given
  Policy policy = Policy::remotest();
  std::vector<double> weakness;
  RunOptions run;

  std::vector<std::string> quantities;
  std::vector<std::string> certify;

  std::optional<std::uint64_t> seed;
  SphereSearchOptions search;
  SNormOptions s_norm;
  std::size_t rate_first = 1000;
  std::size_t rate_last = 100000;

  std::filesystem::path out_dir = "out";
  json source;                           ///< the validated input, echoed into summary.json
};

/// Validates and normalizes; throws ConfigError on any schema violation, including
/// inconsistent dimensions and a missing seed for randomized steps.
ExperimentConfig parse_config(const json& j);

/// Reads and parses a JSON file; unreadable files and syntax errors are ConfigErrors.
json load_json_file(const std::filesystem::path& path);

struct ExperimentResult {
  int exit_code = exit_code::ok;
  std::vector<std::filesystem::path> files;  ///< written, in order
  json summary;                              ///< scalar outputs (also summary.json in certify mode)
  std::string error;                         ///< message of a runtime failure, if any
};

/// Runs `config` in `mode` and writes its files under config.out_dir (created if needed).
/// Throws ConfigError only for problems found before anything is written, such as a
/// construction the parameters cannot realize.
ExperimentResult run_experiment(const ExperimentConfig& config, Mode mode);

/// Sweep config: {"template": <experiment config>, "grid": {"dotted.path": [values...]},
/// "mode": "certify", "threads": n, "out": dir}. Cells are the cartesian product of the
/// grid in sorted key order, each written to out/cell_NNN; the table goes to out/sweep.json.
struct SweepResult {
  int exit_code = exit_code::ok;  ///< 0 iff every cell produced output
  json table;
  std::filesystem::path path;
};

SweepResult run_sweep(const json& sweep_config, std::optional<std::uint64_t> seed_override = {},
                      std::optional<std::filesystem::path> out_override = {});

/// Sets a value at a dotted path ("construction.params.epsilon"), creating objects on the
/// way.
void set_dotted(json& j, const std::string& path, const json& value);

}  // namespace altproj
