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

// Finite-horizon, input-box-constrained LQR with a scalar state and two inputs,
// solved by projected Newton on the condensed QP, and differentiated through
// its KKT conditions.
//
//   min  sum_l  1/2 O x_{l+1}^2 + p_{l+1} x_{l+1} + 1/2 u_l' diag(R_hp, R_bh) u_l
//   s.t. x_{l+1} = a_l x_l + b_l' u_l + f_l,   lo <= u_l <= hi
//
// The gradient pass solves the linearised KKT system on the free (inactive)
// coordinates only, so no backpropagation through solver iterations is needed.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hvac/thermal.hpp"

namespace hvac {

struct QuadCostParams {
  double o_state = 1.0;
  double r_hp = 0.1;
  double r_bh = 1.0;

  void validate() const;
};

struct InputBounds {
  Power lo{0.0, 0.0};
  Power hi{4.2, 5.0};

  void validate() const;
};

// One step of affine dynamics x_{l+1} = a x_l + b' u_l + f (f folds B_d d_l).
struct LqrStep {
  double a = 1.0;
  Power b{};
  double f = 0.0;
};

struct LqrProblem {
  std::vector<LqrStep> dynamics;
  QuadCostParams cost;
  std::vector<double> p;  // linear cost on x_{l+1}
  double x0 = 0.0;
  InputBounds bounds;

  std::size_t horizon() const { return dynamics.size(); }
  void validate() const;
};

// Builds p_l = -O x_target,l for setpoint tracking.
LqrProblem make_tracking_problem(std::vector<LqrStep> dynamics, const QuadCostParams& cost,
                                 std::span<const double> targets, double x0, const InputBounds& bounds);

struct SolverConfig {
  double tolerance = 1e-8;
  int max_iterations = 100;
};

// Threshold on a bound multiplier below which an active constraint counts as weakly active.
inline constexpr double kWeakActivityThreshold = 1e-8;

struct LqrSolution {
  std::vector<double> x_star;  // x_1 .. x_L
  std::vector<Power> u_star;   // u_0 .. u_{L-1}
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  std::vector<double> objective_history;  // non-increasing
  std::vector<char> active;               // per coordinate 2l+j, sits on a bound
  int weakly_active = 0;
  bool converged = false;
};

LqrSolution solve_box_lqr(const LqrProblem& problem, const SolverConfig& config = {});

std::vector<double> rollout(const LqrProblem& problem, std::span<const Power> controls);
double lqr_objective(const LqrProblem& problem, std::span<const Power> controls);

// Max-norm of the natural residual u - clamp(u - grad J(u)). Zero exactly at
// the constrained optimum; also picks up bound violations.
double kkt_residual(const LqrProblem& problem, std::span<const Power> controls);

// Upstream gradient of a scalar loss with respect to the solution trajectory.
struct TrajectoryGrad {
  std::vector<double> x;  // d loss / d x_{l+1}
  std::vector<Power> u;   // d loss / d u_l

  static TrajectoryGrad zeros(std::size_t horizon);
};

struct LqrGradients {
  std::vector<double> a;
  std::vector<Power> b;
  std::vector<double> f;
  std::vector<double> p;
  double o_state = 0.0;
  double r_hp = 0.0;
  double r_bh = 0.0;
  double x0 = 0.0;
  // Set when an active constraint had a vanishing multiplier; the derivative
  // there is one-sided and was computed with the constraint held active.
  bool weakly_active = false;
};

// Throws NumericalError when the solution did not converge.
LqrGradients grad_trajectory(const LqrProblem& problem, const LqrSolution& solution,
                             const TrajectoryGrad& upstream);

}  // namespace hvac
