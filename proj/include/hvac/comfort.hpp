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

// Steady-state thermal comfort (PMV/PPD) after ISO 7730.

#pragma once

namespace hvac {

struct ComfortAssumptions {
  double met = 1.2;            // metabolic rate, met
  double clo = 1.0;            // clothing insulation, clo
  double air_velocity = 0.1;   // m/s
  double rh = 40.0;            // relative humidity, %
  bool mrt_equals_air = true;  // mean radiant temperature tracks air temperature
  double mrt = 20.0;           // used when mrt_equals_air is false

  void validate() const;
};

double predicted_mean_vote(double t_air, double t_radiant, const ComfortAssumptions& a);
double ppd_from_pmv(double pmv);

// PPD in percent. Throws ConfigError outside t_air in [0, 50] degC.
double pmv_ppd(double t_air, const ComfortAssumptions& a = {});

}  // namespace hvac
