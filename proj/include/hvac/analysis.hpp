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

// Evaluation: per-day aggregation, COP-corrected energy signatures, area-under-
// curve savings with Monte-Carlo intervals, and hourly comfort statistics.

#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "hvac/comfort.hpp"
#include "hvac/exec.hpp"
#include "hvac/plant.hpp"
#include "hvac/thermal.hpp"
#include "hvac/timeutil.hpp"

namespace hvac {

struct DailyRecord {
  std::chrono::sys_days date;
  int operating_hours = 0;  // rows whose command read back
  int present_hours = 0;    // rows in the log
  double e_e = 0.0;         // kWh
  double t_out_mean = 0.0;
  double t_in_mean = 0.0;   // return-air
};

inline constexpr int kMinOperatingHours = 20;

// Groups rows by local calendar day and keeps days with at least 20 operating hours.
std::vector<DailyRecord> filter_days(const InteractionLog& log, const SiteClock& clock = {},
                                     int min_hours = kMinOperatingHours);

enum class SignatureKind { kOutdoor, kDelta };

std::string to_string(SignatureKind k);
SignatureKind signature_kind_from_string(const std::string& s);

struct SignatureFit {
  double beta0 = 0.0;  // kWh
  double beta1 = 0.0;  // kWh/degC
  double cov[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  double r_squared = 0.0;
  SignatureKind kind = SignatureKind::kOutdoor;
  double t_in_ref = 0.0;  // mean indoor temperature of the fitted days (delta fits)
  int n = 0;
};

// OLS of E_e * COP(T_out_mean) on T_out_mean (outdoor) or T_out_mean - T_in_mean (delta).
// Throws DataError on fewer than 3 records or a rank-deficient design.
SignatureFit fit_signature(const std::vector<DailyRecord>& records, const CopCurve& cop, SignatureKind kind);

// -beta0 / beta1. Throws DataError when beta1 is zero.
double balance_temperature(const SignatureFit& fit);

// Outdoor temperature at which COP is evaluated for abscissa x: x itself for
// outdoor fits, x + t_in_ref for delta fits.
double signature_outdoor_temp(const SignatureFit& fit, double x);

// Composite Simpson integral of (beta0 + beta1 x) / COP over [a, b].
double auc_energy(const SignatureFit& fit, const CopCurve& cop, double a, double b, double step = 0.01);

struct SavingsDistribution {
  std::vector<double> samples;  // percent
  double mean = 0.0;
  double lo = 0.0;  // 2.5th percentile
  double hi = 0.0;  // 97.5th percentile
  double plug_in = 0.0;
  double std_error = 0.0;
};

struct MonteCarloOptions {
  std::size_t n = 100000;
  std::uint64_t seed = 0;
  double step = 0.01;
  Exec exec = Exec::kParallel;
  bool keep_samples = true;
};

// Draws are split into fixed blocks of kMonteCarloBlock with per-block seeds
// derived from the master seed, so results do not depend on the thread count.
inline constexpr std::size_t kMonteCarloBlock = 8192;

// Percent savings 100 (AUC_base - AUC_ctrl) / AUC_base under joint draws of
// both fits' beta from their normal approximations. Throws DataError when a
// covariance is not positive semidefinite.
SavingsDistribution monte_carlo_savings(const SignatureFit& base, const SignatureFit& ctrl, const CopCurve& cop,
                                        double a, double b, const MonteCarloOptions& options = {});

// Type-7 (linear interpolation) sample quantile.
double quantile(std::vector<double> values, double q);

enum class TempColumn { kReturn, kLocal };

struct PpdSummary {
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation; 0 with fewer than 2 hours
  double max = 0.0;
  double min = 0.0;
  int count = 0;
};

struct PpdTable {
  PpdSummary overall;
  PpdSummary day;
  PpdSummary night;
};

// Hourly PPD of the chosen temperature column. Day is local hours [day_start, day_end).
PpdTable ppd_stats(const InteractionLog& log, const ComfortAssumptions& assumptions, TempColumn column,
                   const SiteClock& clock = {}, int day_start = 7, int day_end = 23);

}  // namespace hvac
