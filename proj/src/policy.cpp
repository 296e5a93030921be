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

#include "hvac/policy.hpp"

#include <memory>

#include "hvac/errors.hpp"

namespace hvac {

std::vector<LqrStep> policy_dynamics(const PhysicalParams& th, const CopCurve& curve,
                                     std::span<const ExogenousInput> exo, double dt) {
  th.validate();
  std::vector<LqrStep> steps(exo.size());
  for (std::size_t l = 0; l < exo.size(); ++l) {
    const auto c = continuous_matrices(th, curve, exo[l].t_out);
    const auto m = discretize_zoh(c, dt);
    steps[l].a = m.a;
    steps[l].b = {m.b_u[0], m.b_u[1]};
    steps[l].f = m.b_d[0] * th.t_mass + m.b_d[1] * exo[l].t_out + m.b_d[2] * exo[l].i_sol;
  }
  return steps;
}

namespace {

struct Captured {
  PhysicalParams theta;
  CopCurve curve;
  double dt;
  std::vector<ExogenousInput> exo;
  std::vector<double> targets;
};

ThetaGrad chain_rule(const Captured& cap, const LqrGradients& g) {
  const auto& th = cap.theta;
  const double c = th.capacitance;
  const double k_m = 1.0 / (th.r_mass * c);
  const double k_o = 1.0 / (th.r_out * c);
  const double a_c = -(k_m + k_o);
  const ZohGain z = zoh_gain(a_c, cap.dt);

  double d_phi = 0.0;
  double d_a = 0.0;
  double d_km_direct = 0.0;
  double d_ko_direct = 0.0;
  double d_c_direct = 0.0;
  ThetaGrad out;
  for (std::size_t l = 0; l < cap.exo.size(); ++l) {
    const double cop = cap.curve(cap.exo[l].t_out);
    const double t_out = cap.exo[l].t_out;
    const double i_sol = cap.exo[l].i_sol;
    const double gb0 = g.b[l][0];
    const double gb1 = g.b[l][1];
    const double gf = g.f[l];
    d_a += g.a[l];
    d_phi += gb0 * cop / c + gb1 * th.eta_backup / c + gf * (k_m * th.t_mass + k_o * t_out + th.a_eff * i_sol / c);
    d_km_direct += gf * z.phi * th.t_mass;
    d_ko_direct += gf * z.phi * t_out;
    d_c_direct += -z.phi * (gb0 * cop + gb1 * th.eta_backup + gf * th.a_eff * i_sol) / (c * c);
    out.t_mass += gf * z.phi * k_m;
    out.eta_backup += gb1 * z.phi / c;
    out.a_eff += gf * z.phi * i_sol / c;
  }
  const double d_ac = d_a * z.da + d_phi * z.dphi;
  const double d_km = -d_ac + d_km_direct;
  const double d_ko = -d_ac + d_ko_direct;
  out.capacitance = d_c_direct - d_km * k_m / c - d_ko * k_o / c;
  out.r_mass = -d_km * k_m / th.r_mass;
  out.r_out = -d_ko * k_o / th.r_out;

  out.o_state = g.o_state;
  for (std::size_t l = 0; l < cap.targets.size(); ++l) out.o_state -= g.p[l] * cap.targets[l];
  out.r_hp = g.r_hp;
  out.r_bh = g.r_bh;
  out.x0 = g.x0;
  out.weakly_active = g.weakly_active;
  return out;
}

}  // namespace

PolicyOutput policy_forward_backward(const PhysicalParams& theta_state, const QuadCostParams& theta_cost,
                                     const CopCurve& curve, double x0, std::span<const ExogenousInput> exo,
                                     std::span<const double> targets, const InputBounds& bounds,
                                     const SolverConfig& solver, double dt) {
  if (exo.empty()) throw ConfigError("policy horizon must be at least one step");
  if (exo.size() != targets.size()) throw ConfigError("policy exogenous and target sequences differ in length");
  auto cap = std::make_shared<Captured>(
      Captured{theta_state, curve, dt, {exo.begin(), exo.end()}, {targets.begin(), targets.end()}});

  PolicyOutput out;
  out.problem = make_tracking_problem(policy_dynamics(theta_state, curve, exo, dt), theta_cost, targets, x0, bounds);
  out.solution = solve_box_lqr(out.problem, solver);
  auto problem = std::make_shared<const LqrProblem>(out.problem);
  auto solution = std::make_shared<const LqrSolution>(out.solution);
  out.backward = [cap, problem, solution](const TrajectoryGrad& up) {
    return chain_rule(*cap, grad_trajectory(*problem, *solution, up));
  };
  return out;
}

}  // namespace hvac
