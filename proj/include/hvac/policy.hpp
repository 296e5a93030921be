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

// The differentiable control policy: 2R1C matrices -> box LQR -> gradients in
// physical and cost parameter coordinates.

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hvac/lqr.hpp"
#include "hvac/thermal.hpp"

namespace hvac {

// Per-step exogenous inputs; the mass temperature is taken from theta_state.
struct ExogenousInput {
  double t_out = 0.0;
  double i_sol = 0.0;
};

struct ThetaGrad {
  double capacitance = 0.0;  // per kWh/degC
  double r_mass = 0.0;
  double r_out = 0.0;
  double t_mass = 0.0;
  double eta_backup = 0.0;
  double a_eff = 0.0;
  double o_state = 0.0;
  double r_hp = 0.0;
  double r_bh = 0.0;
  double x0 = 0.0;
  bool weakly_active = false;
};

struct PolicyOutput {
  LqrProblem problem;
  LqrSolution solution;
  std::function<ThetaGrad(const TrajectoryGrad&)> backward;
};

std::vector<LqrStep> policy_dynamics(const PhysicalParams& theta_state, const CopCurve& curve,
                                     std::span<const ExogenousInput> exo, double dt = 1.0);

PolicyOutput policy_forward_backward(const PhysicalParams& theta_state, const QuadCostParams& theta_cost,
                                     const CopCurve& curve, double x0, std::span<const ExogenousInput> exo,
                                     std::span<const double> targets, const InputBounds& bounds,
                                     const SolverConfig& solver = {}, double dt = 1.0);

}  // namespace hvac
