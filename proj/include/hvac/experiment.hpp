/*
 Copyright 2026 The hvacctl Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Experiment orchestration behind the hvacctl command line: versioned JSON
// configuration, run manifests, and the identify / pretrain / deploy /
// compare / synth-weather commands.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hvac/analysis.hpp"
#include "hvac/comfort.hpp"
#include "hvac/controller.hpp"
#include "hvac/exec.hpp"
#include "hvac/ibex.hpp"
#include "hvac/identification.hpp"
#include "hvac/mpc.hpp"
#include "hvac/plant.hpp"
#include "hvac/weather.hpp"

namespace hvac {

inline constexpr int kConfigFormatVersion = 1;
inline constexpr int kManifestFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr const char* kDataDirEnv = "HVACCTL_DATA_DIR";

struct WeatherSource {
  std::string kind = "synthetic";  // "synthetic" or "file"
  std::string path;                // file traces; relative to the config file
  int days = 32;
  std::uint64_t seed = 2;
  std::string preset = "west-lafayette-winter";
};

// Operating history of the pre-existing controller, used for identification and pretraining.
struct HistorySettings {
  int days = 30;
  double dither = 2.5;  // degC
  int block = 4;        // hours per dither level
  WeatherSource weather{"synthetic", "", 32, 1, "west-lafayette-winter"};
};

struct FaultSettings {
  std::string preset = "none";       // "none", "interruptions" or "custom"
  std::vector<FaultWindow> windows;  // used by "custom"
};

struct MpcSettings {
  EconomicWeights weights;
  ComfortTuning tuning;
  int retune_hours = 12;
};

struct RlSettings {
  IbexHyper hyper;
  std::vector<double> grid_alpha{0.05, 0.005, 0.0005};
  std::vector<double> grid_lambda{1.0, 1000.0};
  PhysicalParams init_state{5.0, 1.0, 2.0, 20.0, 1.0, 0.0};
  QuadCostParams init_cost{1.0, 0.1, 1.0};
  bool init_t_mass_from_history = true;  // mean history return temperature
  TargetSource targets = TargetSource::kLoggedSetpoint;
  int holdout_days = 0;  // trailing history days kept out of training
  bool learn_state = true;
  bool learn_cost = true;
  EconomicWeights weights;  // reward prices; w_c is replaced by hyper.fixed_w_c
  SolverConfig solver;
  double divergence_limit = 1e6;
};

struct AnalysisSettings {
  std::array<double, 2> outdoor_interval{-7.0, 5.0};  // degC
  std::array<double, 2> delta_interval{-26.0, -14.0};
  std::size_t mc_samples = 100000;
  double auc_step = 0.01;
  double curve_step = 0.1;
  int min_operating_hours = kMinOperatingHours;
  ComfortAssumptions comfort;
  int day_start = 7;
  int day_end = 23;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int utc_offset_hours = -5;
  SetpointSchedule schedule = SetpointSchedule::occupied_default();
  InputBounds bounds;
  PlantConfig plant;
  std::string controller = "baseline";  // baseline, history, mpc or rl
  double baseline_setpoint = 21.0;
  int deploy_days = 30;
  WeatherSource weather;
  FaultSettings faults;
  HistorySettings history;
  IdentifyOptions identify;
  int identify_min_days = 7;
  MpcSettings mpc;
  RlSettings rl;
  AnalysisSettings analysis;
  std::string output_dir = "runs";
  // Directory that relative paths resolve against; not serialized.
  std::filesystem::path base_dir;

  SiteClock clock() const { return SiteClock{utc_offset_hours}; }
  // Throws ConfigError on invalid values or a referenced file that does not exist.
  void validate() const;
};

// Every field is written, so the file documents all defaults in force.
std::string serialize_config(const ExperimentConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);

struct RunManifest {
  std::string command;
  std::string config_sha256;  // of config.json in the output directory
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> versions;
  std::vector<std::string> files;  // relative to the output directory
  std::map<std::string, double> metrics;
  std::vector<std::string> warnings;
  std::string started_at;  // UTC
  double wall_clock_seconds = 0.0;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest, const ExperimentConfig& config);
RunManifest read_manifest(const std::filesystem::path& path);

// Resolves a path from the config against base_dir.
std::filesystem::path resolve_path(const ExperimentConfig& config, const std::string& path);
// <output_dir>/<leaf>; a relative output_dir sits under $HVACCTL_DATA_DIR when it is set.
std::filesystem::path default_output_dir(const ExperimentConfig& config, const std::string& leaf);

// Weather for a source: generated, or loaded and validated.
std::vector<WeatherPoint> load_weather_source(const ExperimentConfig& config, const WeatherSource& source);

// Identified MPC model as persisted by identify.
struct ModelCheckpoint {
  PhysicalParams params;
  CopCurve cop;
  ExogenousGainModel qe;
  double holdout_rmse = 0.0;
  int steady_samples = 0;
  int fit_samples = 0;
};

void write_model_checkpoint(const std::filesystem::path& path, const ModelCheckpoint& model);
ModelCheckpoint read_model_checkpoint(const std::filesystem::path& path);

// A run directory holds log.csv and the weather.csv it was produced under.
struct RunData {
  InteractionLog log;
  std::vector<WeatherPoint> weather;
};

RunData read_run(const std::filesystem::path& dir);

// Writes weather.csv for the configured deployment weather source.
RunManifest cmd_synth_weather(const ExperimentConfig& config, const std::filesystem::path& out);

struct IdentifyResult {
  ModelCheckpoint model;
  double history_days = 0.0;
  RunManifest manifest;
};

// Throws DataError when the history spans fewer than identify_min_days days.
IdentifyResult cmd_identify(const ExperimentConfig& config, const std::filesystem::path& history_dir,
                            const std::filesystem::path& out);

struct GridPoint {
  double alpha_imit = 0.0;
  double lambda = 0.0;
  bool diverged = false;
  std::string message;
  PretrainResult result;
};

struct PretrainSummary {
  std::vector<GridPoint> grid;
  std::size_t selected = 0;
  double holdout_action_rms = -1.0;  // kW; negative without a holdout split
  std::size_t train_samples = 0;
  std::size_t holdout_samples = 0;
  RunManifest manifest;
};

// Runs every grid point (in parallel under Exec::kParallel) and keeps the lowest
// final action loss. init_model, when given, seeds C, R_m, R_out and T_m.
// Throws NumericalError when all points diverge.
PretrainSummary cmd_pretrain(const ExperimentConfig& config, const std::filesystem::path& history_dir,
                             const std::filesystem::path& out, const std::filesystem::path& init_model = {},
                             Exec exec = Exec::kParallel);

struct DeployResult {
  EpisodeResult episode;
  std::vector<WeatherPoint> weather;
  std::string controller;
  PhysicalParams final_state;  // rl only
  QuadCostParams final_cost;
  int scheduled_fault_hours = 0;
  RunManifest manifest;
};

// Runs the configured controller. mpc needs an identify model checkpoint and
// rl a pretrain checkpoint; baseline and history need none.
DeployResult cmd_deploy(const ExperimentConfig& config, const std::filesystem::path& checkpoint,
                        const std::filesystem::path& out);

struct SignatureSummary {
  SignatureFit fit;
  double auc = 0.0;                // kWh over the interval
  double balance_temperature = 0.0;
  std::array<double, 2> support{};  // range of the fitted regressor
  SavingsDistribution savings;     // empty for the baseline
};

struct CompareEntry {
  std::string name;
  std::vector<DailyRecord> days;
  SignatureSummary outdoor;
  SignatureSummary delta;
  PpdTable ppd_return;
  PpdTable ppd_local;
};

struct CompareReport {
  std::vector<CompareEntry> entries;  // baseline first
  std::array<double, 2> usable_outdoor{};
  std::array<double, 2> usable_delta{};
  std::vector<std::string> warnings;
  RunManifest manifest;
};

// The first run is the baseline. Throws DataError when the temperature supports
// of the runs do not overlap; a configured interval extending past the common
// support only produces a warning naming the usable interval.
CompareReport cmd_compare(const ExperimentConfig& config,
                          const std::vector<std::pair<std::string, std::filesystem::path>>& runs,
                          const std::filesystem::path& out);

}  // namespace hvac
