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

#include "hvac/comfort.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hvac/errors.hpp"

namespace hvac {

void ComfortAssumptions::validate() const {
  if (!(met > 0.0 && clo > 0.0 && air_velocity > 0.0)) throw ConfigError("comfort met, clo and air velocity must be positive");
  if (!(rh > 0.0 && rh < 100.0)) throw ConfigError("relative humidity must lie in (0, 100)");
}

double predicted_mean_vote(double ta, double tr, const ComfortAssumptions& a) {
  const double pa = a.rh * 10.0 * std::exp(16.6536 - 4030.183 / (ta + 235.0));  // Pa
  const double icl = 0.155 * a.clo;
  const double m = a.met * 58.15;
  const double mw = m;  // no external work
  const double fcl = icl <= 0.078 ? 1.0 + 1.29 * icl : 1.05 + 0.645 * icl;
  const double hcf = 12.1 * std::sqrt(a.air_velocity);
  const double taa = ta + 273.0;
  const double tra = tr + 273.0;
  const double tcla = taa + (35.5 - ta) / (3.5 * icl + 0.1);

  const double p1 = icl * fcl;
  const double p2 = p1 * 3.96;
  const double p3 = p1 * 100.0;
  const double p4 = p1 * taa;
  const double p5 = 308.7 - 0.028 * mw + p2 * std::pow(tra / 100.0, 4);

  // Clothing surface temperature by damped fixed-point iteration.
  double xn = tcla / 100.0;
  double xf = tcla / 50.0;
  double hc = hcf;
  int n = 0;
  while (std::abs(xn - xf) > 1.5e-4) {
    xf = (xf + xn) / 2.0;
    const double hcn = 2.38 * std::pow(std::abs(100.0 * xf - taa), 0.25);
    hc = std::max(hcf, hcn);
    xn = (p5 + p4 * hc - p2 * std::pow(xf, 4)) / (100.0 + p3 * hc);
    if (++n > 150) throw NumericalError("PMV clothing temperature iteration did not converge");
  }
  const double tcl = 100.0 * xn - 273.0;

  const double hl1 = 3.05e-3 * (5733.0 - 6.99 * mw - pa);
  const double hl2 = mw > 58.15 ? 0.42 * (mw - 58.15) : 0.0;
  const double hl3 = 1.7e-5 * m * (5867.0 - pa);
  const double hl4 = 0.0014 * m * (34.0 - ta);
  const double hl5 = 3.96 * fcl * (std::pow(xn, 4) - std::pow(tra / 100.0, 4));
  const double hl6 = fcl * hc * (tcl - ta);
  const double ts = 0.303 * std::exp(-0.036 * m) + 0.028;
  return ts * (mw - hl1 - hl2 - hl3 - hl4 - hl5 - hl6);
}

double ppd_from_pmv(double pmv) {
  const double p2 = pmv * pmv;
  return 100.0 - 95.0 * std::exp(-(0.03353 * p2 * p2 + 0.2179 * p2));
}

double pmv_ppd(double t_air, const ComfortAssumptions& a) {
  if (!(t_air >= 0.0 && t_air <= 50.0)) throw ConfigError("air temperature outside [0, 50] degC: " + std::to_string(t_air));
  a.validate();
  const double tr = a.mrt_equals_air ? t_air : a.mrt;
  return ppd_from_pmv(predicted_mean_vote(t_air, tr, a));
}

}  // namespace hvac
