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

// Grey-box identification of the MPC model: R_out from steady night data, (R_m, C) by
// regression plus a grid search over R_m, and a kernel regressor for exogenous gains.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hvac/thermal.hpp"

namespace hvac {

// One hourly transition. q_c is delivered heat, COP(T_out) P_hp + eta P_bh, in kW.
struct IdentSample {
  double t = 0.0;
  double t_next = 0.0;
  double t_out = 0.0;
  double i_sol = 0.0;
  double wind = 0.0;
  int local_hour = 0;
  double q_c = 0.0;
  long hour_index = 0;  // hours since an arbitrary origin; consecutive samples differ by one
};

// Steady: no sun and |T_{t+1} - T_t| < threshold.
bool is_steady(const IdentSample& s, double threshold = 0.1);

// Storage correction for near-steady samples once (a, R_eq) of a previous pass are known.
struct StorageCorrection {
  double a = 0.0;
  double r_eq = 0.0;
};

// Regresses q_c on [T - T_out, T, 1] over the steady subset, T taken at the hour midpoint;
// the slope on T - T_out is 1/R_out.
// The T column is dropped when indoor temperature never varies. Throws DataError with fewer
// than 10 steady samples or a collinear design.
double estimate_r_out(std::span<const IdentSample> samples, std::optional<StorageCorrection> correction = {},
                      double steady_threshold = 0.1);

struct RmCFit {
  double r_mass = 0.0;
  double capacitance = 0.0;  // kWh/degC
  double beta = 0.0;         // 1 - a
  double intercept = 0.0;
  double validation_rmse = 0.0;
};

// Per grid value: regress dT on z = w_o T_out + R_eq q_c - T (midpoint T) with an intercept;
// beta = 1 - a follows from the slope.
// Selects by one-step error on the last third. Throws ConfigError on an empty grid.
RmCFit fit_rm_c(std::span<const IdentSample> samples, double r_out, std::span<const double> grid, double dt = 1.0);

std::vector<double> linear_grid(double lo, double hi, double step);

// Kernel ridge regression with an RBF kernel on standardized features.
class ExogenousGainModel {
 public:
  static constexpr int kFeatures = 5;
  using Features = std::array<double, kFeatures>;

  static Features features(double t_out, double i_sol, double wind, int local_hour);

  void fit(const std::vector<Features>& x, const std::vector<double>& y, double lambda = 0.1, double gamma = 0.0);
  double predict(const Features& f) const;
  bool trained() const { return !alpha_.empty(); }

  // Serialization support.
  struct State {
    std::vector<Features> x;       // standardized training inputs
    std::vector<double> alpha;
    Features mean{};
    Features scale{};
    double y_mean = 0.0;
    double gamma = 0.0;
    double lambda = 0.0;
  };
  State state() const;
  static ExogenousGainModel from_state(const State& s);

 private:
  std::vector<Features> x_;
  std::vector<double> alpha_;
  Features mean_{};
  Features scale_{};
  double y_mean_ = 0.0;
  double gamma_ = 0.0;
  double lambda_ = 0.0;
};

struct IdentifiedModel {
  PhysicalParams params;  // a_eff = 0, eta = 1; gains live in the regressor
  ExogenousGainModel qe;
  double holdout_rmse = 0.0;  // one-step state RMSE, degC
  int steady_samples = 0;
  int fit_samples = 0;
};

struct IdentifyOptions {
  double rm_lo = 0.2;
  double rm_hi = 5.0;
  double rm_step = 0.02;
  int refinements = 3;
  int outer_iterations = 3;
  double steady_threshold = 0.1;
  double kernel_lambda = 0.1;
  // Relative half-width of a final R_out search scored by the one-step error over all sun-free
  // samples, with (R_m, C) profiled by the grid fit; 0 disables.
  double joint_span = 0.3;
};

// Full offline pipeline. Samples must be consecutive validated hourly transitions.
IdentifiedModel identify_model(std::span<const IdentSample> samples, const IdentifyOptions& opt = {});

// Exogenous gain implied by a transition under a given model, in kW.
double implied_gain(const IdentSample& s, const PhysicalParams& p, double dt = 1.0);

}  // namespace hvac
