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

#include "hvac/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hvac/errors.hpp"

namespace hvac {

void PhysicalParams::validate() const {
  if (!(capacitance > 0.0)) throw ConfigError("capacitance must be positive, got " + std::to_string(capacitance));
  if (!(r_mass > 0.0)) throw ConfigError("r_mass must be positive, got " + std::to_string(r_mass));
  if (!(r_out > 0.0)) throw ConfigError("r_out must be positive, got " + std::to_string(r_out));
  if (!(eta_backup > 0.0 && eta_backup <= 2.0))
    throw ConfigError("eta_backup must lie in (0, 2], got " + std::to_string(eta_backup));
}

double CopCurve::operator()(double t_out) const { return std::max(floor, c0 + c1 * t_out); }

double cop_at(const CopCurve& curve, double t_out) { return curve(t_out); }

ContinuousMatrices continuous_matrices(const PhysicalParams& p, const CopCurve& curve, double t_out) {
  p.validate();
  const double k_mass = 1.0 / (p.r_mass * p.capacitance);
  const double k_out = 1.0 / (p.r_out * p.capacitance);
  ContinuousMatrices m;
  m.a_c = -(k_mass + k_out);
  m.b_uc = {curve(t_out) / p.capacitance, p.eta_backup / p.capacitance};
  m.b_dc = {k_mass, k_out, p.a_eff / p.capacitance};
  return m;
}

ZohGain zoh_gain(double a_c, double dt) {
  const double s = a_c * dt;
  ZohGain g;
  if (std::abs(s) < 1e-9) {
    // Integrator limit; second order keeps a and phi consistent to rounding.
    g.a = 1.0 + s + 0.5 * s * s;
    g.phi = dt * (1.0 + 0.5 * s);
    g.da = dt * (1.0 + s);
    g.dphi = dt * dt * (0.5 + s / 3.0);
    return g;
  }
  const double em1 = std::expm1(s);
  g.a = 1.0 + em1;
  g.phi = em1 / a_c;
  g.da = dt * g.a;
  if (std::abs(s) < 1e-2) {
    g.dphi = dt * dt * (0.5 + s * (1.0 / 3.0 + s * (1.0 / 8.0 + s * (1.0 / 30.0 + s / 144.0))));
  } else {
    g.dphi = (dt * g.a * a_c - em1) / (a_c * a_c);
  }
  return g;
}

StateSpaceMatrices discretize_zoh(double a_c, const std::array<double, 2>& b_uc,
                                  const std::array<double, 3>& b_dc, double dt) {
  if (!(dt > 0.0)) throw ConfigError("discretization step must be positive");
  const ZohGain g = zoh_gain(a_c, dt);
  StateSpaceMatrices m;
  m.a = g.a;
  for (std::size_t i = 0; i < 2; ++i) m.b_u[i] = g.phi * b_uc[i];
  for (std::size_t i = 0; i < 3; ++i) m.b_d[i] = g.phi * b_dc[i];
  return m;
}

StateSpaceMatrices discretize_zoh(const ContinuousMatrices& c, double dt) {
  return discretize_zoh(c.a_c, c.b_uc, c.b_dc, dt);
}

double step_dynamics(const StateSpaceMatrices& m, double x, const Power& u, const Disturbance& d) {
  return m.a * x + m.b_u[0] * u[0] + m.b_u[1] * u[1] + m.b_d[0] * d.t_mass + m.b_d[1] * d.t_out +
         m.b_d[2] * d.i_sol;
}

std::vector<double> predict_trajectory(const PhysicalParams& p, const CopCurve& curve, double x0,
                                       std::span<const Power> controls,
                                       std::span<const Disturbance> disturbances, double dt) {
  if (controls.size() != disturbances.size())
    throw ConfigError("predict_trajectory: controls and disturbances differ in length");
  if (controls.empty()) throw ConfigError("predict_trajectory: empty horizon");
  std::vector<double> out;
  out.reserve(controls.size());
  double x = x0;
  for (std::size_t l = 0; l < controls.size(); ++l) {
    const auto m = discretize_zoh(continuous_matrices(p, curve, disturbances[l].t_out), dt);
    x = step_dynamics(m, x, controls[l], disturbances[l]);
    out.push_back(x);
  }
  return out;
}

}  // namespace hvac
