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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hvac/controller.hpp"
#include "hvac/errors.hpp"

namespace hvac {
namespace {

TEST(Quantize, NearestHalf) {
  EXPECT_EQ(quantize_setpoint(19.74), 19.5);
  EXPECT_EQ(quantize_setpoint(19.75), 20.0);
  EXPECT_EQ(quantize_setpoint(18.0), 18.0);
  EXPECT_EQ(quantize_setpoint(-0.25), 0.0);
  EXPECT_EQ(quantize_setpoint(20.25), 20.5);
}

TEST(Quantize, AlwaysAMultipleOfHalfWithinQuarter) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(5.0, 35.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng);
    const double q = quantize_setpoint(x);
    EXPECT_EQ(std::fmod(q * 2.0, 1.0), 0.0);
    EXPECT_LE(std::abs(q - x), 0.25);
  }
}

TEST(Baseline, AlwaysTwentyOne) {
  EXPECT_EQ(baseline_decide(3).setpoint_command, 21.0);
  EXPECT_EQ(baseline_decide(14).setpoint_command, 21.0);
  for (int h = 0; h < 24; ++h) {
    const auto d = baseline_decide(h);
    EXPECT_EQ(std::fmod(d.setpoint_command * 2.0, 1.0), 0.0);
    EXPECT_FALSE(d.u_star.has_value());
    EXPECT_FALSE(d.x_next_pred.has_value());
  }
}

TEST(Schedule, OccupiedDefault) {
  const auto s = SetpointSchedule::occupied_default();
  EXPECT_EQ(s.target_at(0), 18.0);
  EXPECT_EQ(s.target_at(6), 18.0);
  EXPECT_EQ(s.target_at(7), 20.0);
  EXPECT_EQ(s.target_at(23), 20.0);
}

TEST(Schedule, HoursBeforeFirstEntryWrapToLast) {
  const SetpointSchedule s{{{6, 19.0}, {22, 17.0}}};
  EXPECT_EQ(s.target_at(2), 17.0);
  EXPECT_EQ(s.target_at(6), 19.0);
}

TEST(Schedule, Validation) {
  EXPECT_THROW((SetpointSchedule{{{7, 20.0}, {7, 18.0}}}.validate()), ConfigError);
  EXPECT_THROW((SetpointSchedule{{{0, 35.0}}}.validate()), ConfigError);
  EXPECT_THROW((SetpointSchedule{{{24, 20.0}}}.validate()), ConfigError);
  EXPECT_THROW((SetpointSchedule{}.validate()), ConfigError);
  EXPECT_NO_THROW(SetpointSchedule::occupied_default().validate());
}

TEST(History, PowersStayInBounds) {
  HistoryController c(PhysicalParams{}, CopCurve{}, InputBounds{});
  Observation obs;
  obs.forecast.push_back({-5.0, 0.0, 3.0, 12, 20.0});
  for (double t = 10.0; t < 30.0; t += 0.5) {
    obs.t_return = t;
    const auto d = c.decide(obs);
    ASSERT_TRUE(d.u_star);
    EXPECT_GE((*d.u_star)[0], 0.0);
    EXPECT_LE((*d.u_star)[0], 4.2);
    EXPECT_GE((*d.u_star)[1], 0.0);
    EXPECT_LE((*d.u_star)[1], 5.0);
    if ((*d.u_star)[1] > 0.0) EXPECT_EQ((*d.u_star)[0], 4.2);
  }
}

}  // namespace
}  // namespace hvac
