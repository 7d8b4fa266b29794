// Declarative experiment runner: key=value configs, CSV/JSON artifacts,
// artifact re-verification and SVG plots.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nstraj/spectral_field.hpp"

namespace nstraj {

enum class ExperimentKind {
  TaylorGreenOracle,
  RoughRun,
  HeatH2Minus,
  LoglipAudit,
  BoundsAudit,
  TrajectoryUniqueness,
  Counterexamples,
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& text);

struct InitialData {
  enum class Kind { TaylorGreen, Rough, File };
  Kind kind = Kind::TaylorGreen;
  double amplitude = 1.0;
  double decay = 0.05;
  std::uint64_t seed = 1;
  std::string path;

  /// taylor-green(amp) | rough(decay, seed) | file(path)
  std::string describe() const;
  SpectralVelocity build(const WavenumberGrid& grid) const;
  /// Same recipe with another seed (rough data only).
  InitialData with_seed(std::uint64_t seed) const;
};

InitialData parse_initial_data(const std::string& text);

/// Exit statuses of run_experiment and the CLI.
enum ExitStatus : int { kExitPass = 0, kExitAssertion = 1, kExitConfig = 2, kExitBlowUp = 3 };

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Counterexamples;
  int resolution = 64;
  double viscosity = 0.1;
  double final_time = 1.0;
  double dt = 1e-3;
  InitialData initial;
  std::string dealias = "two-thirds";
  std::string forcing = "zero";
  int per_decade = 20;
  double t_min_fraction = 1e-4;
  double snapshot_interval = 0.0;
  std::vector<double> exponents{1.0, 1.25, 1.5};
  std::vector<double> r_list{1.0, 3.0};
  std::vector<double> s_lo{1e-3, 1e-4};
  std::vector<double> epsilons{1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
  std::vector<int> substeps{1, 2, 4, 8, 16};
  int perturbation_substeps = 2;
  Vec2 start{1.0, 2.0};
  std::uint64_t validation_seed = 2;
  std::optional<double> envelope_c;
  int refined_resolution = 0;  // 0: twice the base resolution
  int fields = 100;
  int pairs = 10000;
  std::uint64_t pair_seed = 1;
  std::vector<double> gt_times{1e-3, 1e-2, 0.1, 1.0, 10.0};
  std::vector<double> gt_spread_times{0.01, 0.1, 1.0};
  double delta = 0.05;
  double branch_t0 = 1e-6;
  double branch_t1 = 0.3;
  std::string output = "nstraj-out";
  int threads = 1;

  int refined() const { return refined_resolution > 0 ? refined_resolution : 2 * resolution; }
};

/// Parses key=value lines ('#' starts a comment). Throws ConfigError naming
/// the offending field for unknown keys, unparsable values and fields the
/// chosen kind requires but the text omits.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Every field with its effective value; parse_config_text(echo) reproduces
/// the config.
std::string echo_config(const ExperimentConfig& config);

/// A hard check recorded in summary.json. When `file` is set, verify
/// recomputes `value` by reducing `column` of that CSV over the rows where
/// `where_column` equals `where_value`.
struct Assertion {
  std::string name;
  double value = 0.0;
  std::string op;  // "<", "<=", ">", ">="
  double threshold = 0.0;
  bool passed = false;
  std::string file;
  std::string column;
  std::string reduce;  // max | min | last | spread | growth | max_step_change | max_step_ratio
  std::string where_column;
  std::string where_value;
};

bool evaluate_op(double value, const std::string& op, double threshold);

struct ExperimentResult {
  int status = kExitPass;
  std::string message;
  std::filesystem::path directory;
  std::vector<Assertion> assertions;

  bool passed(const std::string& name) const;
  const Assertion& assertion(const std::string& name) const;
};

/// Resolves the artifact directory: absolute `output` as is, relative
/// `output` under $NSTRAJ_OUTPUT_ROOT when set, else under the working
/// directory.
std::filesystem::path resolve_output_directory(const ExperimentConfig& config);

/// Runs the study, writes config.echo, summary.json and the kind's CSVs.
/// Never throws for numerical blow-up (status 3, partial artifacts) or
/// invalid parameters detected while running (status 2).
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Recomputes every sourced assertion of summary.json from the CSVs and
/// re-evaluates all of them. Returns 0 when all are consistent and pass, 1
/// otherwise, 2 when the directory lacks summary.json or a referenced CSV.
int verify_artifacts(const std::filesystem::path& directory, std::ostream& report);

/// Writes SVG log-log plots for every recognised CSV in the directory and
/// returns the files written. Throws std::runtime_error listing the expected
/// files when none is present.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& directory);

}  // namespace nstraj
