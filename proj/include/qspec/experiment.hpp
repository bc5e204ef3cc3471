#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qspec/lattice.hpp"
#include "qspec/noise.hpp"
#include "qspec/protocol.hpp"
#include "qspec/spectroscopy.hpp"
#include "qspec/state_prep.hpp"

namespace qspec {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

// Validation failure; `path` is the dotted field path (e.g. "model.Ne").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class PrepKind { ExactFreeFermion, Dga, HubbardGround };
std::string to_string(PrepKind kind);

struct PrepConfig {
  PrepKind kind = PrepKind::Dga;
  int n_layers = 2;
  std::optional<DgaObjective> objective;  // default_objective(L) when unset
  std::uint64_t seed = 1;
  int restarts = 8;
  std::string ansatz_file;  // load angles instead of optimizing
};

struct DynamicsConfig {
  double T = 3.0;
  TrotterConfig trotter{TrotterOrder::First, 5, false};
  int time_points = 30;
};

// Either a previous run directory or a reference computed alongside the run.
struct ReferenceConfig {
  std::string name;
  std::string run_dir;
  std::string builtin;  // "exact_propagator"
};

struct AnalysisConfig {
  double omega_max = 6.0;
  bool ridge = true;
  std::vector<ReferenceConfig> references;
  int bootstrap = 200;  // resamples in shot mode, 0 disables
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  FermiHubbardModel model{9, 1.0, 3.0, 6};
  PrepConfig prep;
  CircuitLayout layout;
  DynamicsConfig dynamics;
  ExecutionConfig execution;
  std::optional<NoiseModel> noise;
  AnalysisConfig analysis;
  bool resources_only = false;
  std::string output = "qspec_out";
};

// Relative reference paths resolve against base_dir.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
// Accepts a config file or a run manifest (its embedded config is used).
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);
// FNV-1a of the canonical JSON dump.
std::string config_hash(const ExperimentConfig& config);
// Replaces every seed in the config.
void override_seed(ExperimentConfig& config, std::uint64_t seed);

struct RunManifest {
  std::string config_hash;
  nlohmann::json config;
  nlohmann::json seeds;
  nlohmann::json versions;
  std::vector<std::pair<std::string, double>> timings;  // seconds per stage
  nlohmann::json derived;

  nlohmann::json to_json() const;
};

struct Comparison {
  std::string reference;
  double ssim_time = 0.0;
  double rmse_time = 0.0;
  double ssim_qsf = 0.0;
  double rmse_qsf = 0.0;
  std::optional<BootstrapResult> ssim_qsf_bootstrap;
  std::optional<BootstrapResult> rmse_qsf_bootstrap;
};

struct RunResult {
  RunManifest manifest;
  std::optional<ProtocolRun> protocol;
  std::optional<QsfGrid> qsf;
  std::optional<SpectralRidge> ridge;
  std::optional<DgaAnsatz> ansatz;
  std::vector<Comparison> comparisons;
};

struct RunOptions {
  int threads = 1;
  bool write_files = true;
};

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// Initial state on the (all up)(all down) register plus the preparation networks when circuit-built.
struct PreparedInitial {
  Statevector state;
  std::optional<Preparation> preparation;
  std::optional<DgaAnsatz> ansatz;
};
PreparedInitial prepare_initial(const ExperimentConfig& config);

Comparison compare_grids(const std::string& name, const TimeSeriesGrid& a, const TimeSeriesGrid& b,
                         double omega_max);
// Loads timeseries.csv from both run directories.
Comparison compare_runs(const std::filesystem::path& run_a, const std::filesystem::path& run_b,
                        double omega_max = 6.0);
nlohmann::json to_json(const Comparison& c);

struct OracleReport {
  double ground_energy = 0.0;
  double gap = 0.0;
  bool degenerate = false;
  bool spin_reflection_symmetric = false;
  // max |measured - G/2| over sites and times for the linearized (ideal) quench and the unitary quench
  double quench_identity_error_ideal = 0.0;
  double quench_identity_error_unitary = 0.0;
  bool passed = false;
};
OracleReport run_oracle(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace qspec
