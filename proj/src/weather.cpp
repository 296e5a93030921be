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

#include "hvac/weather.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "hvac/csv.hpp"
#include "hvac/errors.hpp"

namespace hvac {

void validate_weather(const std::vector<WeatherPoint>& trace, const std::string& source) {
  // Names rows by file line when a source is given (header is line 1).
  auto where = [&](std::size_t i) {
    return source.empty() ? "weather row " + std::to_string(i + 1) : source + ":" + std::to_string(i + 2);
  };
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!(trace[i].i_sol >= 0.0))
      throw DataError(where(i) + ": negative irradiance " + std::to_string(trace[i].i_sol));
    if (!std::isfinite(trace[i].t_out) || !std::isfinite(trace[i].wind))
      throw DataError(where(i) + ": non-finite value");
    if (i > 0) {
      const auto step = trace[i].time - trace[i - 1].time;
      if (step <= std::chrono::seconds{0})
        throw DataError(where(i) + ": timestamps not strictly increasing");
      if (step != std::chrono::hours{1})
        throw DataError(where(i) + ": gap in hourly trace after " +
                        format_rfc3339(trace[i - 1].time));
    }
  }
}

std::vector<WeatherPoint> load_weather_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::size_t c_t = table.column("timestamp");
  const std::size_t c_tout = table.column("t_out_c");
  const std::size_t c_ghi = table.column("ghi_kw_m2");
  const std::size_t c_wind = table.column("wind_ms");
  std::vector<WeatherPoint> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = r + 2;
    try {
      out.push_back({parse_rfc3339(row.at(c_t)), parse_double(row.at(c_tout)), parse_double(row.at(c_ghi)),
                     parse_double(row.at(c_wind))});
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  }
  validate_weather(out, path.string());
  return out;
}

void write_weather_csv(const std::filesystem::path& path, const std::vector<WeatherPoint>& trace) {
  std::ostringstream os;
  os << "timestamp,t_out_c,ghi_kw_m2,wind_ms\n";
  for (const auto& w : trace) {
    os << format_rfc3339(w.time) << ',' << fmt6(w.t_out) << ',' << fmt6(w.i_sol) << ',' << fmt6(w.wind) << '\n';
  }
  write_file_atomic(path, os.str());
}

ClimatePreset climate_preset(const std::string& name) {
  if (name == "west-lafayette-winter") return {name, -1.5, 2.0, 5.0, 4.0, 0.6, 0.45, 8, 17, 4.5};
  if (name == "cold-winter") return {name, -8.0, 2.0, 5.0, 4.5, 0.6, 0.40, 8, 16, 5.0};
  if (name == "mild-winter") return {name, 5.0, 2.0, 4.0, 3.5, 0.5, 0.55, 7, 17, 3.5};
  throw ConfigError("unknown climate preset '" + name + "'");
}

std::vector<WeatherPoint> synthesize_weather(int days, std::uint64_t seed, const ClimatePreset& p,
                                             const SiteClock& clock, std::chrono::sys_days start_local_day) {
  if (days < 1) throw ConfigError("synthetic weather needs at least one day");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> cloud(0.25, 1.0);
  const auto start = TimePoint{start_local_day} - std::chrono::hours{clock.utc_offset_hours};
  const double two_pi = 2.0 * std::numbers::pi;
  const std::chrono::year_month_day ymd{start_local_day};
  const double day_of_year =
      static_cast<double>((start_local_day - std::chrono::sys_days{ymd.year() / std::chrono::January / 1}).count());

  std::vector<WeatherPoint> out;
  out.reserve(static_cast<std::size_t>(days) * 24);
  double anomaly = 0.0;
  for (int d = 0; d < days; ++d) {
    anomaly = std::clamp(0.7 * anomaly + 0.5 * p.anomaly_cap * nd(rng), -p.anomaly_cap, p.anomaly_cap);
    // Coldest in late January.
    const double seasonal = -p.seasonal_amp * std::cos(two_pi * (day_of_year + d - 25.0) / 365.0);
    const double daily_mean = p.mean_t_out + seasonal + anomaly;
    const double clear = cloud(rng);

    double noise[24];
    double noise_mean = 0.0;
    for (double& v : noise) {
      v = p.hourly_sigma * nd(rng);
      noise_mean += v / 24.0;
    }
    for (int h = 0; h < 24; ++h) {
      WeatherPoint w;
      w.time = start + std::chrono::hours{d * 24 + h};
      // Warmest mid-afternoon; the diurnal term and the recentred noise average to zero.
      w.t_out = daily_mean + p.diurnal_amp * std::cos(two_pi * (h - 15) / 24.0) + noise[h] - noise_mean;
      if (h >= p.sunrise_hour && h < p.sunset_hour) {
        const double frac = (h + 0.5 - p.sunrise_hour) / (p.sunset_hour - p.sunrise_hour);
        w.i_sol = p.peak_ghi * clear * std::sin(std::numbers::pi * frac);
      }
      w.wind = std::max(0.0, p.mean_wind * (1.0 + 0.3 * nd(rng)));
      out.push_back(w);
    }
  }
  return out;
}

}  // namespace hvac
