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

// Ground-truth house: sub-stepped 2R1C plant, thermostat actuation layer, sensors,
// fault injection and the hourly closed-loop episode runner.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hvac/controller.hpp"
#include "hvac/identification.hpp"
#include "hvac/thermal.hpp"
#include "hvac/timeutil.hpp"
#include "hvac/weather.hpp"

namespace hvac {

struct PlantConfig {
  PhysicalParams true_params{6.5, 1.06, 2.04, 20.6, 1.0, 2.0};
  CopCurve cop;
  double return_offset = 0.0;  // degC
  double return_sigma = 0.05;
  double local_offset = 0.3;
  double local_sigma = 0.05;
  double local_resolution = 0.5;
  double deadband = 0.25;
  double stage2_gap = 2.0;
  double hp_capacity = 4.2;  // kW
  double bh_capacity = 5.0;
  int substep_seconds = 60;
  double internal_gain = 0.4;  // kW, square wave over [gain_start, gain_end) local hours
  int gain_start = 8;
  int gain_end = 16;
  double initial_temp = 20.0;

  void validate() const;
};

// Scales C, R_m and R_out of `nominal` by independent factors in [1 - spread, 1 + spread].
PhysicalParams perturb_params(const PhysicalParams& nominal, double spread, std::uint64_t seed);

enum class Stage { kOff = 0, kStage1 = 1, kStage2 = 2 };

struct ThermostatOutput {
  double p_hp = 0.0;
  double p_bh = 0.0;
  Stage stage = Stage::kOff;
};

ThermostatOutput thermostat_step(const PlantConfig& cfg, double setpoint, double local_temp, Stage prev);

// Forward-Euler integration over one hour with powers and weather held constant.
double plant_step(const PlantConfig& cfg, const Power& powers, const WeatherPoint& w, double x, double extra_gain = 0.0);

enum class FaultKind { kCommandDrop, kSensorGap };

struct FaultWindow {
  TimePoint start;
  TimePoint end;  // exclusive
  FaultKind kind = FaultKind::kCommandDrop;
};

struct FaultSchedule {
  std::vector<FaultWindow> windows;

  void validate() const;
  bool active(FaultKind kind, TimePoint t) const;
  // Distinct hours in [from, from + hours) touched by any fault.
  int fault_hours(TimePoint from, int hours) const;
};

// "none", or "interruptions": five windows covering roughly a quarter of the span.
FaultSchedule fault_preset(const std::string& name, TimePoint start, int hours);

struct InteractionRecord {
  TimePoint time;
  double setpoint = 0.0;
  bool readback_ok = false;
  double u_hp = std::numeric_limits<double>::quiet_NaN();
  double u_bh = std::numeric_limits<double>::quiet_NaN();
  double p_hp = 0.0;
  double p_bh = 0.0;
  double t_true = 0.0;
  double t_return = 0.0;
  double t_local = 0.0;
  double t_out = 0.0;
  double i_sol = 0.0;
  double energy_kwh = 0.0;
};

using InteractionLog = std::vector<InteractionRecord>;

void write_log_csv(const std::filesystem::path& path, const InteractionLog& log);
InteractionLog read_log_csv(const std::filesystem::path& path);

struct EpisodeOptions {
  std::size_t start_index = 0;  // first weather row
  int hours = 24;
  SiteClock clock;
  // Fires after each midnight hook with the local day that just ended.
  std::function<void(std::chrono::sys_days)> on_day_end;
};

struct EpisodeResult {
  InteractionLog log;
  int downtime_hours = 0;
  int validated_transitions = 0;
  int rejected_transitions = 0;
  double planned_energy_kwh = 0.0;  // sum of controller u_star where one was issued
};

Observation make_observation(long step, const std::vector<WeatherPoint>& weather, std::size_t index, int horizon,
                             const SiteClock& clock, const SetpointSchedule& schedule, double t_return);

// Throws DataError naming the missing hours when the trace is too short.
EpisodeResult run_episode(Controller& controller, const PlantConfig& cfg, const std::vector<WeatherPoint>& weather,
                          const SetpointSchedule& schedule, const FaultSchedule& faults, std::uint64_t seed,
                          const EpisodeOptions& options);

// Consecutive, read-back-validated log rows one hour apart become identification samples.
// Wind comes from the weather trace by timestamp. q_c = COP(T_out) P_hp + eta P_bh.
std::vector<IdentSample> log_to_samples(const InteractionLog& log, const std::vector<WeatherPoint>& weather,
                                        const SiteClock& clock, const CopCurve& cop, double eta = 1.0);

}  // namespace hvac
