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

#include "hvac/timeutil.hpp"

#include <cstdio>

#include "hvac/errors.hpp"

namespace hvac {

namespace {

int digits(std::string_view s, std::size_t pos, std::size_t n) {
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (i >= s.size() || s[i] < '0' || s[i] > '9') throw DataError("malformed timestamp '" + std::string(s) + "'");
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

void expect(std::string_view s, std::size_t pos, char c) {
  if (pos >= s.size() || (s[pos] != c && !(c == 'T' && (s[pos] == 't' || s[pos] == ' '))))
    throw DataError("malformed timestamp '" + std::string(s) + "'");
}

}  // namespace

TimePoint parse_rfc3339(std::string_view s) {
  using namespace std::chrono;
  const int y = digits(s, 0, 4);
  expect(s, 4, '-');
  const int mo = digits(s, 5, 2);
  expect(s, 7, '-');
  const int d = digits(s, 8, 2);
  expect(s, 10, 'T');
  const int h = digits(s, 11, 2);
  expect(s, 13, ':');
  const int mi = digits(s, 14, 2);
  expect(s, 16, ':');
  const int sec = digits(s, 17, 2);
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  }
  int offset_min = 0;
  if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
    ++pos;
  } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    const int sign = s[pos] == '-' ? -1 : 1;
    const int oh = digits(s, pos + 1, 2);
    expect(s, pos + 3, ':');
    const int om = digits(s, pos + 4, 2);
    offset_min = sign * (oh * 60 + om);
    pos += 6;
  } else {
    throw DataError("timestamp lacks a UTC offset: '" + std::string(s) + "'");
  }
  if (pos != s.size()) throw DataError("trailing characters in timestamp '" + std::string(s) + "'");
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) throw DataError("invalid calendar time '" + std::string(s) + "'");
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} - minutes{offset_min};
}

std::string format_rfc3339(TimePoint t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
  return buf;
}

int SiteClock::local_hour(TimePoint t) const {
  using namespace std::chrono;
  const auto local = t + hours{utc_offset_hours};
  return static_cast<int>(duration_cast<hours>(local - floor<days>(local)).count());
}

std::chrono::sys_days SiteClock::local_day(TimePoint t) const {
  using namespace std::chrono;
  return floor<days>(t + hours{utc_offset_hours});
}

std::string format_date(std::chrono::sys_days d) {
  using namespace std::chrono;
  const year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace hvac
