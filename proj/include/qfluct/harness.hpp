#pragma once

// Declarative experiment description, orchestration of the exact and trajectory
// engines, panel presets, and file output.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qfluct/dynamics.hpp"
#include "qfluct/series.hpp"
#include "qfluct/trajectories.hpp"

namespace qfluct {

/// Invalid configuration; the message starts with the offending field path.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Engines { exact, qmc, both };
std::string to_string(Engines e);

enum class InitialKind { diagonal, coherent_thermal, gibbs, matrix };
std::string to_string(InitialKind k);

struct InitialStateSpec {
  InitialKind kind = InitialKind::diagonal;
  std::vector<double> weights{0.4, 0.275, 0.175, 0.15};  // diagonal
  double h = 0.2;                                        // coherent_thermal
  double beta = 1.0;                                     // gibbs
  Operator matrix;                                       // matrix

  bool operator==(const InitialStateSpec& o) const;
};

struct RunSpec {
  double dt = 0.002;
  double output_dt = 0.5;
  std::size_t n_traj = 100000;
  std::uint64_t seed = 1;
  Engines engines = Engines::both;
  InitialBasis initial_basis = InitialBasis::eigen;
  std::vector<double> xi;  // extra generating-function scans
  bool variant_x = false;
  DriftScheme drift = DriftScheme::rk4;
  unsigned workers = 0;
  std::size_t chunk = 512;

  bool operator==(const RunSpec&) const = default;
};

struct OutputSpec {
  std::string dir;
  bool events = true;

  bool operator==(const OutputSpec&) const = default;
};

struct ExperimentConfig {
  TwoSpinParams model;
  InitialStateSpec initial_state;
  RunSpec run;
  OutputSpec output;

  bool operator==(const ExperimentConfig&) const = default;
  bool runs_exact() const { return run.engines != Engines::qmc; }
  bool runs_qmc() const { return run.engines != Engines::exact; }
};

/// Strict JSON loading: unknown keys and constraint violations throw ConfigError.
ExperimentConfig load_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
/// Checks every constraint of an in-memory config, including the step-size bound.
void validate_config(const ExperimentConfig& cfg);

/// Canonical JSON with every default spelled out (sorted keys, two-space indent).
std::string to_json(const ExperimentConfig& cfg);
/// FNV-1a 64 of the canonical JSON with output.dir and run.workers removed, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// exp(-H0/2)/Tr with H0 = -Pi_uu/2 - Pi_dd/4 - Pi_ud/3 - h sx.1 + h 1.sx.
DensityMatrix coherent_thermal_state(double h);
DensityMatrix initial_state(const ExperimentConfig& cfg);
TimeGrid time_grid(const ExperimentConfig& cfg);

struct ExperimentResult {
  std::string config_hash;
  /// t, psi_bar_dev, ft_value, jarzynski_lhs, jarzynski_rhs, second_law_gap,
  /// mean_exp_neg_SB_exact, Q_D_a, Q_D_b, S_vn, gf_xi_<v>...; empty unless the exact engine ran.
  ResultSeries exact;
  /// Trajectory estimators; present when the QMC engine ran.
  std::optional<ResultSeries> summary;
  StateSeries density;
  std::vector<std::pair<std::uint64_t, JumpEvent>> events;
  std::string meta_json;
  std::vector<std::string> files;  // written paths, empty when output.dir is empty
};

/// Runs the requested engines in memory, then writes all files in one pass.
/// On any failure no output file is left behind.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Preset for a single panel: "a", "b", "c", "d".
ExperimentConfig panel_config(const std::string& name);

struct PanelRun {
  std::string label;  // "a", "app2/c", "app3/jump", ...
  ExperimentResult result;
};

/// Runs a preset ("a".."d", "app2", "app3"). Grouped presets write into sub-directories of `out_dir`.
std::vector<PanelRun> reproduce_panel(const std::string& name, const std::string& out_dir,
                                      std::optional<std::size_t> n_traj = std::nullopt,
                                      std::optional<std::uint64_t> seed = std::nullopt, unsigned workers = 0);

/// The (label, config) list a preset expands to, without running it.
std::vector<std::pair<std::string, ExperimentConfig>> panel_runs(const std::string& name, const std::string& out_dir,
                                                                 std::optional<std::size_t> n_traj = std::nullopt,
                                                                 std::optional<std::uint64_t> seed = std::nullopt);

std::string version();

}  // namespace qfluct
