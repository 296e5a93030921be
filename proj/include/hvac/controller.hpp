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

// Supervisory controller interface shared by the baseline, MPC and RL controllers.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hvac/lqr.hpp"
#include "hvac/thermal.hpp"
#include "hvac/timeutil.hpp"

namespace hvac {

struct SetpointSchedule {
  std::vector<std::pair<int, double>> entries;  // (start local hour, target degC)

  // Midnight-6 AM at 18 degC, 7 AM onwards at 20 degC.
  static SetpointSchedule occupied_default();
  static SetpointSchedule constant(double target);

  void validate() const;
  double target_at(int local_hour) const;
};

// Nearest multiple of 0.5 degC; exact ties round up.
double quantize_setpoint(double x);

struct ControllerDecision {
  std::optional<Power> u_star;
  std::optional<double> x_next_pred;
  double setpoint_command = 21.0;
  double objective = 0.0;
  int iterations = 0;
};

// Weather for hour t+l and the schedule target for the state at the end of that hour.
struct ForecastStep {
  double t_out = 0.0;
  double i_sol = 0.0;
  double wind = 0.0;
  int local_hour = 0;
  double target = 20.0;
};

struct Observation {
  long step = 0;  // hours since the start of the episode
  TimePoint time;
  int local_hour = 0;
  double t_return = 20.0;
  std::vector<ForecastStep> forecast;
};

// One hour of closed-loop data: the context the controller saw and the next observed state.
struct Transition {
  Observation obs;
  double x_next = 0.0;
  Power applied{0.0, 0.0};
  double setpoint = 0.0;
  bool readback_ok = false;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string kind() const = 0;
  virtual int horizon() const { return 24; }
  virtual ControllerDecision decide(const Observation& obs) = 0;
  // Receives the previous local day's validated transitions.
  virtual void on_midnight(std::span<const Transition> validated) { (void)validated; }
  // When true the plant applies u_star directly instead of running the thermostat.
  virtual bool direct_power() const { return false; }
};

class BaselineController final : public Controller {
 public:
  explicit BaselineController(double setpoint = 21.0) : setpoint_(setpoint) {}
  std::string kind() const override { return "baseline"; }
  int horizon() const override { return 1; }
  ControllerDecision decide(const Observation& obs) override;

 private:
  double setpoint_;
};

// Deadbeat power regulator on a known model. The target is dithered by a seeded
// offset in [-dither, dither] held for `block` hours so history data is exciting.
class HistoryController final : public Controller {
 public:
  HistoryController(PhysicalParams model, CopCurve cop, InputBounds bounds, std::uint64_t seed = 0,
                    double dither = 0.0, int block = 3)
      : model_(model), cop_(cop), bounds_(bounds), seed_(seed), dither_(dither), block_(block) {}
  std::string kind() const override { return "history"; }
  int horizon() const override { return 1; }
  bool direct_power() const override { return true; }
  ControllerDecision decide(const Observation& obs) override;

 private:
  PhysicalParams model_;
  CopCurve cop_;
  InputBounds bounds_;
  std::uint64_t seed_;
  double dither_;
  int block_;
};

ControllerDecision baseline_decide(int hour, double setpoint = 21.0);

}  // namespace hvac
