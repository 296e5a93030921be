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

#include "hvac/controller.hpp"

#include <algorithm>
#include <cmath>

#include "hvac/errors.hpp"

namespace hvac {

SetpointSchedule SetpointSchedule::occupied_default() { return {{{0, 18.0}, {7, 20.0}}}; }

SetpointSchedule SetpointSchedule::constant(double target) { return {{{0, target}}}; }

void SetpointSchedule::validate() const {
  if (entries.empty()) throw ConfigError("setpoint schedule is empty");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto [h, t] = entries[i];
    if (h < 0 || h >= 24) throw ConfigError("schedule hour outside [0, 24): " + std::to_string(h));
    if (i > 0 && h <= entries[i - 1].first) throw ConfigError("schedule hours must be strictly increasing");
    if (!(t >= 10.0 && t <= 30.0)) throw ConfigError("schedule target outside [10, 30] degC");
  }
}

double SetpointSchedule::target_at(int hour) const {
  // Entries before the first start hour wrap to the last entry of the previous day.
  double t = entries.back().second;
  for (const auto& [h, v] : entries) {
    if (h <= hour) t = v;
  }
  return t;
}

double quantize_setpoint(double x) { return std::floor(2.0 * x + 0.5) / 2.0; }

ControllerDecision baseline_decide(int hour, double setpoint) {
  (void)hour;
  ControllerDecision d;
  d.setpoint_command = quantize_setpoint(setpoint);
  return d;
}

ControllerDecision BaselineController::decide(const Observation& obs) { return baseline_decide(obs.local_hour, setpoint_); }

ControllerDecision HistoryController::decide(const Observation& obs) {
  if (obs.forecast.empty()) throw ConfigError("history controller needs a one-step forecast");
  const auto& f = obs.forecast.front();
  const auto m = discretize_zoh(continuous_matrices(model_, cop_, f.t_out), 1.0);
  const Disturbance d{model_.t_mass, f.t_out, f.i_sol};
  const double free = step_dynamics(m, obs.t_return, {0.0, 0.0}, d);
  // Heat pump first, then backup, each within its box.
  double target = f.target;
  if (dither_ > 0.0) {
    // splitmix64 of (seed, block index) mapped to [-1, 1).
    std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(obs.step / std::max(block_, 1) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    target += dither_ * (static_cast<double>(z >> 11) * 0x1.0p-52 - 1.0);
  }
  double need = target - free;
  Power u{bounds_.lo[0], bounds_.lo[1]};
  need -= m.b_u[0] * u[0] + m.b_u[1] * u[1];
  if (need > 0.0) {
    const double add_hp = std::min(bounds_.hi[0] - u[0], need / m.b_u[0]);
    u[0] += add_hp;
    need -= m.b_u[0] * add_hp;
    if (need > 0.0) u[1] += std::min(bounds_.hi[1] - u[1], need / m.b_u[1]);
  }
  ControllerDecision out;
  out.u_star = u;
  out.x_next_pred = free + m.b_u[0] * u[0] + m.b_u[1] * u[1];
  out.setpoint_command = std::clamp(quantize_setpoint(target), 10.0, 30.0);
  return out;
}

}  // namespace hvac
