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

// Hourly weather traces: CSV ingestion and a seeded synthetic generator.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hvac/timeutil.hpp"

namespace hvac {

struct WeatherPoint {
  TimePoint time;
  double t_out = 0.0;  // degC
  double i_sol = 0.0;  // kW/m^2
  double wind = 0.0;   // m/s
};

// Throws DataError naming the offending row on non-hourly spacing or negative irradiance.
void validate_weather(const std::vector<WeatherPoint>& trace, const std::string& source = "");

std::vector<WeatherPoint> load_weather_csv(const std::filesystem::path& path);
void write_weather_csv(const std::filesystem::path& path, const std::vector<WeatherPoint>& trace);

struct ClimatePreset {
  std::string name;
  double mean_t_out;      // degC
  double seasonal_amp;    // degC, slow sinusoid over the year
  double anomaly_cap;     // degC, bound on the day-to-day weather anomaly
  double diurnal_amp;     // degC
  double hourly_sigma;    // degC
  double peak_ghi;        // kW/m^2 on a clear day
  int sunrise_hour;       // local
  int sunset_hour;        // local
  double mean_wind;       // m/s

  // Every generated daily mean lies in [lo, hi].
  double daily_mean_lo() const { return mean_t_out - seasonal_amp - anomaly_cap; }
  double daily_mean_hi() const { return mean_t_out + seasonal_amp + anomaly_cap; }
};

// Known names: "west-lafayette-winter", "cold-winter", "mild-winter".
ClimatePreset climate_preset(const std::string& name);

// Trace starts at local midnight of `start_local_day` for the given site clock.
std::vector<WeatherPoint> synthesize_weather(int days, std::uint64_t seed, const ClimatePreset& preset,
                                             const SiteClock& clock = {},
                                             std::chrono::sys_days start_local_day = std::chrono::sys_days{
                                                 std::chrono::year{2025} / 1 / 6});

}  // namespace hvac
