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

// Lumped 2R1C thermal model of a single heated zone.
//
//   C dT/dt = (T_m - T)/R_m + (T_out - T)/R_out + COP(T_out) P_hp + eta P_bh + A_eff I_sol
//
// Units: capacitance in kWh/degC, resistances in degC/kW, powers in kW,
// irradiance in kW/m^2, time in hours.

#pragma once

#include <array>
#include <span>
#include <vector>

namespace hvac {

inline constexpr double kJoulesPerKwh = 3.6e6;

// [P_hp, P_bh] in kW.
using Power = std::array<double, 2>;

struct PhysicalParams {
  double capacitance = 6.5;  // kWh/degC
  double r_mass = 1.06;      // degC/kW
  double r_out = 2.04;       // degC/kW
  double t_mass = 20.6;      // degC
  double eta_backup = 1.0;
  double a_eff = 0.0;  // m^2, sign unconstrained

  // Throws ConfigError when C, R_m, R_out are non-positive or eta is outside (0, 2].
  void validate() const;
};

inline double capacitance_from_joules(double joules_per_degc) { return joules_per_degc / kJoulesPerKwh; }
inline double capacitance_to_joules(double kwh_per_degc) { return kwh_per_degc * kJoulesPerKwh; }

// cop(T) = max(floor, c0 + c1 T). The defaults are placeholders, not a measured curve.
struct CopCurve {
  double c0 = 3.0;
  double c1 = 0.05;
  double floor = 1.0;

  double operator()(double t_out) const;
};

double cop_at(const CopCurve& curve, double t_out);

struct Disturbance {
  double t_mass = 0.0;
  double t_out = 0.0;
  double i_sol = 0.0;  // kW/m^2, >= 0
};

struct ContinuousMatrices {
  double a_c = 0.0;                    // 1/h
  std::array<double, 2> b_uc{};        // degC per kWh of [P_hp, P_bh]
  std::array<double, 3> b_dc{};        // [T_m, T_out, I_sol]
};

struct StateSpaceMatrices {
  double a = 1.0;
  std::array<double, 2> b_u{};
  std::array<double, 3> b_d{};
};

ContinuousMatrices continuous_matrices(const PhysicalParams& p, const CopCurve& curve, double t_out);

// Zero-order-hold gains of the scalar ODE dx/dt = a_c x + v with v held for dt:
// a = exp(a_c dt), phi = (a - 1)/a_c, plus their derivatives in a_c.
struct ZohGain {
  double a = 1.0;
  double phi = 0.0;
  double da = 0.0;
  double dphi = 0.0;
};

ZohGain zoh_gain(double a_c, double dt);

StateSpaceMatrices discretize_zoh(double a_c, const std::array<double, 2>& b_uc,
                                  const std::array<double, 3>& b_dc, double dt);
StateSpaceMatrices discretize_zoh(const ContinuousMatrices& c, double dt);

double step_dynamics(const StateSpaceMatrices& m, double x, const Power& u, const Disturbance& d);

// Rolls the model forward; B_u is rebuilt from COP(T_out) at every step.
// Element l is the state after l+1 steps.
std::vector<double> predict_trajectory(const PhysicalParams& p, const CopCurve& curve, double x0,
                                       std::span<const Power> controls,
                                       std::span<const Disturbance> disturbances, double dt = 1.0);

}  // namespace hvac
