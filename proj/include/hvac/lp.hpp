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

// Dense two-phase primal simplex for  min c'x  s.t.  A x <= b,  x >= 0.
// Bland's rule throughout, so the pivot sequence is deterministic and cannot cycle.

#pragma once

#include <vector>

namespace hvac {

struct LinearProgram {
  std::vector<double> c;
  std::vector<std::vector<double>> a;  // rows
  std::vector<double> b;
};

struct LpSolution {
  std::vector<double> x;
  double objective = 0.0;
  int pivots = 0;
};

// Throws NumericalError when infeasible, unbounded or over the pivot cap.
LpSolution solve_lp(const LinearProgram& lp, int max_pivots = 50000);

}  // namespace hvac
