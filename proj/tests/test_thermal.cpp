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
#include <vector>

#include "hvac/errors.hpp"
#include "hvac/thermal.hpp"

using namespace hvac;

namespace {

// Fine-grained forward Euler of the continuous ODE over one hour.
double euler_hour(const PhysicalParams& p, const CopCurve& curve, double x, const Power& u, const Disturbance& d,
                  int substeps) {
  const double h = 1.0 / substeps;
  const double cop = curve(d.t_out);
  for (int i = 0; i < substeps; ++i) {
    const double q = (d.t_mass - x) / p.r_mass + (d.t_out - x) / p.r_out + cop * u[0] + p.eta_backup * u[1] +
                     p.a_eff * d.i_sol;
    x += h * q / p.capacitance;
  }
  return x;
}

}  // namespace

TEST(Cop, ConstantCurve) { EXPECT_DOUBLE_EQ(cop_at({3.0, 0.0, 1.0}, -10.0), 3.0); }

TEST(Cop, FloorClamp) { EXPECT_DOUBLE_EQ(cop_at({3.0, 0.05, 1.0}, -50.0), 1.0); }

TEST(Cop, AffineBranch) { EXPECT_NEAR(cop_at({3.0, 0.05, 1.0}, 5.0), 3.25, 1e-15); }

TEST(Continuous, FittedHouseRate) {
  PhysicalParams p;
  p.capacitance = capacitance_from_joules(2.34e7);
  const auto m = continuous_matrices(p, {}, 0.0);
  // mpmath, 50 digits
  EXPECT_NEAR(m.a_c, -0.2205526622840718, 1e-14);
  EXPECT_NEAR(m.a_c, -0.220556, 1e-5);
}

TEST(Continuous, SymmetricResistances) {
  PhysicalParams p;
  p.r_mass = p.r_out = 1.5;
  const auto m = continuous_matrices(p, {}, 0.0);
  EXPECT_DOUBLE_EQ(m.b_dc[0], m.b_dc[1]);
}

TEST(Continuous, ZeroApertureHasNoSolarGain) {
  PhysicalParams p;
  p.a_eff = 0.0;
  EXPECT_EQ(continuous_matrices(p, {}, 0.0).b_dc[2], 0.0);
}

TEST(Continuous, RejectsInvalidParams) {
  PhysicalParams p;
  p.capacitance = 0.0;
  EXPECT_THROW(continuous_matrices(p, {}, 0.0), ConfigError);
  p = {};
  p.r_mass = -1.0;
  EXPECT_THROW(continuous_matrices(p, {}, 0.0), ConfigError);
  p = {};
  p.r_out = 0.0;
  EXPECT_THROW(continuous_matrices(p, {}, 0.0), ConfigError);
  p = {};
  p.eta_backup = 2.5;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Zoh, IntegratorLimit) {
  const auto m = discretize_zoh(0.0, {0.5, 0.2}, {0.0, 0.0, 0.0}, 1.0);
  EXPECT_DOUBLE_EQ(m.a, 1.0);
  EXPECT_DOUBLE_EQ(m.b_u[0], 0.5);
  EXPECT_DOUBLE_EQ(m.b_u[1], 0.2);
}

TEST(Zoh, FittedHouseTransition) {
  const auto m = discretize_zoh(-0.2205526622840718, {0.0, 0.0}, {0.0, 0.0, 0.0}, 1.0);
  EXPECT_NEAR(m.a, 0.80208, 5e-6);
  EXPECT_NEAR(m.a, 0.8020753986269166, 1e-15);
}

TEST(Zoh, RejectsNonPositiveStep) {
  EXPECT_THROW(discretize_zoh(-0.2, {0.0, 0.0}, {0.0, 0.0, 0.0}, 0.0), ConfigError);
}

TEST(Zoh, GainDerivativesMatchFiniteDifferences) {
  for (double a_c : {-3.0, -0.22, -5e-3, -1e-7, 0.0}) {
    const double h = 1e-6;
    const auto g = zoh_gain(a_c, 1.0);
    const auto gp = zoh_gain(a_c + h, 1.0);
    const auto gm = zoh_gain(a_c - h, 1.0);
    EXPECT_NEAR(g.da, (gp.a - gm.a) / (2 * h), 1e-8) << a_c;
    EXPECT_NEAR(g.dphi, (gp.phi - gm.phi) / (2 * h), 1e-8) << a_c;
  }
}

TEST(Zoh, PropertyContractionAndEquilibriumIdentity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> cap(0.5, 20.0), res(0.2, 10.0), tout(-30.0, 20.0);
  for (int i = 0; i < 2000; ++i) {
    PhysicalParams p;
    p.capacitance = cap(rng);
    p.r_mass = res(rng);
    p.r_out = res(rng);
    const auto m = discretize_zoh(continuous_matrices(p, {}, tout(rng)), 1.0);
    ASSERT_GT(m.a, 0.0);
    ASSERT_LT(m.a, 1.0);
    ASSERT_NEAR(m.a + m.b_d[0] + m.b_d[1], 1.0, 1e-12);
  }
}

TEST(Units, JoulesRoundTrip) {
  for (double j : {1.0, 2.34e7, 3.3e9, 7.77e-3}) {
    EXPECT_NEAR(capacitance_to_joules(capacitance_from_joules(j)) / j, 1.0, 1e-9);
  }
}

TEST(Step, EquilibriumIsFixedPoint) {
  PhysicalParams p;
  p.t_mass = 20.0;
  const auto m = discretize_zoh(continuous_matrices(p, {}, 20.0), 1.0);
  EXPECT_NEAR(step_dynamics(m, 20.0, {0.0, 0.0}, {20.0, 20.0, 0.0}), 20.0, 1e-12);
}

TEST(Step, DoublingInputDoublesIncrement) {
  PhysicalParams p;
  const auto m = discretize_zoh(continuous_matrices(p, {}, 0.0), 1.0);
  const Disturbance d{20.6, 0.0, 0.2};
  const double base = step_dynamics(m, 19.0, {0.0, 0.0}, d);
  const double one = step_dynamics(m, 19.0, {1.0, 0.5}, d) - base;
  const double two = step_dynamics(m, 19.0, {2.0, 1.0}, d) - base;
  EXPECT_NEAR(two, 2.0 * one, 1e-12);
}

TEST(Step, AffineInControl) {
  PhysicalParams p;
  const auto m = discretize_zoh(continuous_matrices(p, {}, -5.0), 1.0);
  const Disturbance d{20.6, -5.0, 0.0};
  const Power u1{1.0, 3.0}, u2{4.0, 0.5};
  const double al = 0.3;
  const Power mix{al * u1[0] + (1 - al) * u2[0], al * u1[1] + (1 - al) * u2[1]};
  EXPECT_NEAR(step_dynamics(m, 18.0, mix, d),
              al * step_dynamics(m, 18.0, u1, d) + (1 - al) * step_dynamics(m, 18.0, u2, d), 1e-12);
}

TEST(Step, FittedHouseMatchesFineEuler) {
  PhysicalParams p;
  p.a_eff = 2.0;
  const CopCurve curve;
  const Disturbance d{20.6, 2.0, 0.3};
  const Power u{1.5, 0.5};
  const auto m = discretize_zoh(continuous_matrices(p, curve, d.t_out), 1.0);
  EXPECT_NEAR(step_dynamics(m, 19.5, u, d), euler_hour(p, curve, 19.5, u, d, 3600), 1e-4);
}

TEST(Predict, SingleStepEqualsStep) {
  PhysicalParams p;
  const std::vector<Power> u{{2.0, 0.0}};
  const std::vector<Disturbance> d{{20.6, -3.0, 0.0}};
  const auto traj = predict_trajectory(p, {}, 19.0, u, d);
  const auto m = discretize_zoh(continuous_matrices(p, {}, -3.0), 1.0);
  ASSERT_EQ(traj.size(), 1u);
  EXPECT_DOUBLE_EQ(traj[0], step_dynamics(m, 19.0, u[0], d[0]));
}

TEST(Predict, ConstantAtEquilibrium) {
  PhysicalParams p;
  p.t_mass = 15.0;
  const std::vector<Power> u(5, Power{0.0, 0.0});
  const std::vector<Disturbance> d(5, Disturbance{15.0, 15.0, 0.0});
  for (double x : predict_trajectory(p, {}, 15.0, u, d)) EXPECT_NEAR(x, 15.0, 1e-12);
}

TEST(Predict, ThreeStepsMatchManualComposition) {
  PhysicalParams p;
  p.a_eff = 1.2;
  const CopCurve curve{2.5, 0.07, 1.0};
  const std::vector<Power> u{{1.0, 0.0}, {4.2, 1.0}, {0.0, 0.0}};
  const std::vector<Disturbance> d{{20.6, -8.0, 0.0}, {20.6, -2.0, 0.4}, {20.6, 5.0, 0.1}};
  const auto traj = predict_trajectory(p, curve, 18.0, u, d);
  double x = 18.0;
  for (std::size_t l = 0; l < 3; ++l) {
    x = step_dynamics(discretize_zoh(continuous_matrices(p, curve, d[l].t_out), 1.0), x, u[l], d[l]);
    EXPECT_DOUBLE_EQ(traj[l], x);
  }
}

TEST(Predict, LengthMismatchThrows) {
  const std::vector<Power> u(2);
  const std::vector<Disturbance> d(3);
  EXPECT_THROW(predict_trajectory({}, {}, 20.0, u, d), ConfigError);
}
