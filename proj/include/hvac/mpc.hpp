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

// Economic MPC: demand + energy + comfort cost, solved as an epigraph linear program.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "hvac/comfort.hpp"
#include "hvac/controller.hpp"
#include "hvac/identification.hpp"
#include "hvac/lqr.hpp"

namespace hvac {

struct EconomicWeights {
  double w_d = 0.8;   // $/kW
  double w_e = 0.15;  // $/kWh
  double w_c = 3.0;   // $/(degC h)

  void validate() const;
};

// J = w_d max_l(u_hp + u_bh) + dt sum_l [w_e (u_hp + u_bh) + w_c,l |x_{l+1} - target_l|]
double economic_cost(std::span<const Power> u, std::span<const double> x, std::span<const double> targets,
                     std::span<const double> w_c, double w_d, double w_e, double dt = 1.0);

// A subgradient of J; the demand term charges the first maximising step, and |0| has slope 0.
TrajectoryGrad economic_cost_gradient(std::span<const Power> u, std::span<const double> x,
                                      std::span<const double> targets, std::span<const double> w_c, double w_d,
                                      double w_e, double dt = 1.0);

struct MpcInstance {
  std::vector<LqrStep> dynamics;
  double x0 = 20.0;
  std::vector<double> targets;
  std::vector<double> w_c;
  double w_d = 0.8;
  double w_e = 0.15;
  InputBounds bounds;
  double dt = 1.0;

  std::size_t horizon() const { return dynamics.size(); }
  void validate() const;
};

struct MpcPlan {
  std::vector<Power> u;
  std::vector<double> x;  // x_1 .. x_L
  double objective = 0.0;
  int pivots = 0;
};

MpcPlan solve_mpc_lp(const MpcInstance& instance);

// Economic objective of an arbitrary control sequence under the instance dynamics.
double mpc_plan_cost(const MpcInstance& instance, std::span<const Power> u);

// Dynamics with predicted exogenous gains qe (kW) folded into the offset.
std::vector<LqrStep> mpc_dynamics(const PhysicalParams& p, const CopCurve& cop, std::span<const ForecastStep> forecast,
                                  std::span<const double> qe, double dt = 1.0);

struct ComfortTuning {
  std::vector<double> candidates{0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0};
  double ppd_target = 10.0;  // %
  double day_scale = 1.1;
  double night_scale = 0.2;
  int day_start = 7;  // local hours [day_start, day_end) count as day
  int day_end = 23;
  ComfortAssumptions comfort;

  double scale_at(int local_hour) const;
};

struct TuneResult {
  double base_w_c = 0.0;  // pre-scale selection
  bool met_target = false;
  std::vector<double> candidate_ppd;
  std::string warning;
};

// Per candidate, plans with the day/night scaled weight profile and averages the predicted PPD.
TuneResult tune_comfort_weight(const MpcInstance& instance, std::span<const int> state_hours,
                               const ComfortTuning& tuning);

// Mean PPD of a predicted trajectory.
double mean_ppd(std::span<const double> x, const ComfortAssumptions& comfort);

struct MpcModel {
  PhysicalParams params;
  CopCurve cop;
  ExogenousGainModel qe;
};

ControllerDecision mpc_decide(double x_t, std::span<const ForecastStep> forecast, const MpcModel& model,
                              const EconomicWeights& weights, double base_w_c, const ComfortTuning& tuning,
                              const InputBounds& bounds);

class MpcController final : public Controller {
 public:
  MpcController(MpcModel model, EconomicWeights weights, ComfortTuning tuning, InputBounds bounds,
                int retune_hours = 12);
  std::string kind() const override { return "mpc"; }
  ControllerDecision decide(const Observation& obs) override;

  double base_comfort_weight() const { return base_w_c_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  MpcInstance instance(const Observation& obs) const;

  MpcModel model_;
  EconomicWeights weights_;
  ComfortTuning tuning_;
  InputBounds bounds_;
  int retune_hours_;
  double base_w_c_ = -1.0;
  std::vector<std::string> warnings_;
};

}  // namespace hvac
