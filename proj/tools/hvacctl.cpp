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

// hvacctl: identify, pretrain, deploy and compare heat-pump controllers on a
// simulated house.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "hvac/csv.hpp"
#include "hvac/errors.hpp"
#include "hvac/experiment.hpp"

namespace fs = std::filesystem;
using namespace hvac;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Experiment config (JSON); defaults apply when omitted")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output directory (default <output_dir>/<command>)");
  cmd->add_option("--seed", c.seed, "Override the master seed");
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

fs::path out_dir(const Common& c, const ExperimentConfig& cfg, const std::string& leaf) {
  return c.out.empty() ? default_output_dir(cfg, leaf) : fs::path(c.out);
}

void print_manifest(const fs::path& out, const RunManifest& m) {
  std::printf("%s -> %s (%.1f s)\n", m.command.c_str(), out.string().c_str(), m.wall_clock_seconds);
  for (const auto& [k, v] : m.metrics) std::printf("  %-32s %s\n", k.c_str(), fmt6(v).c_str());
  constexpr std::size_t kShown = 5;
  for (std::size_t i = 0; i < std::min(kShown, m.warnings.size()); ++i)
    std::fprintf(stderr, "warning: %s\n", m.warnings[i].c_str());
  if (m.warnings.size() > kShown)
    std::fprintf(stderr, "warning: %zu more in %s\n", m.warnings.size() - kShown, (out / "manifest.json").string().c_str());
}

std::pair<std::string, fs::path> parse_run(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
    throw ConfigError("--run expects name=dir, got '" + spec + "'");
  return {spec.substr(0, eq), fs::path(spec.substr(eq + 1))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat-pump control experiments: identification, imitation pretraining, deployment and comparison"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Common c;

  auto* config_cmd = app.add_subcommand("config", "Write the default config with every field materialized");
  std::string config_path;
  config_cmd->add_option("path", config_path, "Destination file (stdout when omitted)");

  auto* weather_cmd = app.add_subcommand("synth-weather", "Generate the configured synthetic weather trace");
  add_common(weather_cmd, c);

  auto* identify_cmd = app.add_subcommand("identify", "Fit the MPC model to a history run");
  add_common(identify_cmd, c);
  std::string history;
  identify_cmd->add_option("--history", history, "Run directory holding log.csv and weather.csv")
      ->required()
      ->check(CLI::ExistingDirectory);

  auto* pretrain_cmd = app.add_subcommand("pretrain", "Imitation-pretrain the RL policy over the configured grid");
  add_common(pretrain_cmd, c);
  std::string model;
  bool serial = false;
  pretrain_cmd->add_option("--history", history, "Run directory holding log.csv and weather.csv")
      ->required()
      ->check(CLI::ExistingDirectory);
  pretrain_cmd->add_option("--model", model, "Identified model.json used to initialise C, R_m, R_out and T_m")
      ->check(CLI::ExistingFile);
  pretrain_cmd->add_flag("--serial", serial, "Evaluate grid points one after another");

  auto* deploy_cmd = app.add_subcommand("deploy", "Run a controller on the simulated house");
  add_common(deploy_cmd, c);
  std::string controller;
  std::string checkpoint;
  deploy_cmd->add_option("--controller", controller, "baseline, history, mpc or rl (overrides the config)")
      ->check(CLI::IsMember({"baseline", "history", "mpc", "rl"}));
  deploy_cmd->add_option("--checkpoint", checkpoint, "model.json for mpc, theta.json for rl")->check(CLI::ExistingFile);

  auto* compare_cmd = app.add_subcommand("compare", "Energy-signature comparison of runs against a baseline");
  add_common(compare_cmd, c);
  std::string baseline;
  std::vector<std::string> runs;
  compare_cmd->add_option("--baseline", baseline, "Baseline run directory")->required()->check(CLI::ExistingDirectory);
  compare_cmd->add_option("--run", runs, "Controller run as name=dir; repeatable")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (config_cmd->parsed()) {
      const auto text = serialize_config(ExperimentConfig{});
      if (config_path.empty()) {
        std::cout << text;
      } else {
        write_file_atomic(config_path, text);
      }
      return 0;
    }
    auto cfg = load(c);
    if (weather_cmd->parsed()) {
      if (c.seed) cfg.weather.seed = *c.seed;
      const auto out = out_dir(c, cfg, "weather");
      print_manifest(out, cmd_synth_weather(cfg, out));
    } else if (identify_cmd->parsed()) {
      const auto out = out_dir(c, cfg, "identify");
      print_manifest(out, cmd_identify(cfg, history, out).manifest);
    } else if (pretrain_cmd->parsed()) {
      const auto out = out_dir(c, cfg, "pretrain");
      const auto res = cmd_pretrain(cfg, history, out, model, serial ? Exec::kSerial : Exec::kParallel);
      print_manifest(out, res.manifest);
    } else if (deploy_cmd->parsed()) {
      if (!controller.empty()) cfg.controller = controller;
      const auto out = out_dir(c, cfg, cfg.controller);
      print_manifest(out, cmd_deploy(cfg, checkpoint, out).manifest);
    } else if (compare_cmd->parsed()) {
      std::vector<std::pair<std::string, fs::path>> all{{"baseline", fs::path(baseline)}};
      for (const auto& r : runs) all.push_back(parse_run(r));
      const auto out = out_dir(c, cfg, "compare");
      cmd_compare(cfg, all, out);
      std::cout << read_file(out / "report.txt");
      std::printf("report -> %s\n", out.string().c_str());
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  }
  return 0;
}
