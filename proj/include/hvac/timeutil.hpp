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

// RFC-3339 timestamps and site-local calendar arithmetic at a fixed UTC offset.

#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace hvac {

using Clock = std::chrono::system_clock;
using TimePoint = std::chrono::sys_seconds;

// Accepts "YYYY-MM-DDTHH:MM:SS" followed by "Z" or "+HH:MM"/"-HH:MM".
// Throws DataError on malformed input.
TimePoint parse_rfc3339(std::string_view text);

// Always emits UTC with a trailing "Z".
std::string format_rfc3339(TimePoint t);

struct SiteClock {
  int utc_offset_hours = -5;

  int local_hour(TimePoint t) const;
  std::chrono::sys_days local_day(TimePoint t) const;
};

std::string format_date(std::chrono::sys_days d);

}  // namespace hvac
