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
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include <omp.h>

#include "hvac/errors.hpp"
#include "hvac/ibex.hpp"
#include "support/oracles.hpp"
#include "support/scenarios.hpp"

using namespace hvac;

namespace {

ImitationSample flat_sample(double x_t, double t_out, double target, int L = 24) {
  ImitationSample s;
  s.x_t = x_t;
  s.exo.assign(L, ExogenousInput{t_out, 0.0});
  s.targets.assign(L, target);
  return s;
}

// A buffer of transitions whose next states are the policy's own predictions.
std::vector<Transition> self_consistent_buffer(const PhysicalParams& ts, const QuadCostParams& tc,
                                               const PolicyContext& ctx, int n) {
  std::vector<Transition> buf;
  for (int k = 0; k < n; ++k) {
    Transition tr;
    tr.obs.step = k;
    tr.obs.t_return = 18.0 + 0.1 * k;
    for (int l = 0; l < 24; ++l) {
      ForecastStep f;
      f.t_out = -4.0 + 0.3 * ((k + l) % 9);
      f.i_sol = (k + l) % 24 >= 9 && (k + l) % 24 < 16 ? 0.3 : 0.0;
      f.target = (k + l) % 24 < 7 ? 18.0 : 20.0;
      tr.obs.forecast.push_back(f);
    }
    const auto d = ibex_decide(tr.obs.t_return, forecast_exogenous(tr.obs), forecast_targets(tr.obs), ts, tc, ctx);
    tr.x_next = *d.decision.x_next_pred;
    tr.applied = *d.decision.u_star;
    tr.readback_ok = true;
    buf.push_back(tr);
  }
  return buf;
}

// One-step policy prediction written out in closed form for an unconstrained
// box: x1 = (a x0 + f + O tgt s) / (1 + O s), s = sum b_j^2 / r_j.
double closed_form_x1(const PhysicalParams& p, const QuadCostParams& c, const CopCurve& cop, double x0,
                      const ExogenousInput& d, double tgt) {
  const double km = 1.0 / (p.r_mass * p.capacitance);
  const double ko = 1.0 / (p.r_out * p.capacitance);
  const double ac = -(km + ko);
  const double a = std::exp(ac);
  const double phi = (a - 1.0) / ac;
  const double b0 = phi * cop(d.t_out) / p.capacitance;
  const double b1 = phi * p.eta_backup / p.capacitance;
  const double f = phi * (km * p.t_mass + ko * d.t_out + p.a_eff * d.i_sol / p.capacitance);
  const double s = b0 * b0 / c.r_hp + b1 * b1 / c.r_bh;
  return (a * x0 + f + c.o_state * tgt * s) / (1.0 + c.o_state * s);
}

}  // namespace

TEST(IbexHyper, Validation) {
  IbexHyper h;
  EXPECT_NO_THROW(h.validate());
  h.alpha_cost = 0.0;
  EXPECT_THROW(h.validate(), ConfigError);
  h = {};
  h.batch_m = 0;
  EXPECT_THROW(h.validate(), ConfigError);
}

TEST(IbexDecide, HoldsTargetAtEquilibrium) {
  PhysicalParams p;
  p.a_eff = 0.0;
  const CopCurve cop;
  const double tgt = 20.0;
  const double t_out = 0.0;
  const double hold = ((tgt - p.t_mass) / p.r_mass + (tgt - t_out) / p.r_out) / cop(t_out);
  PolicyContext ctx;
  ctx.bounds.hi = {10.0, 10.0};
  const std::vector<ExogenousInput> exo(24, {t_out, 0.0});
  const std::vector<double> targets(24, tgt);
  const auto d = ibex_decide(tgt, exo, targets, p, {1.0, 1e-4, 1.0}, ctx);
  EXPECT_NEAR((*d.decision.u_star)[0], hold, 0.02);
  EXPECT_NEAR((*d.decision.u_star)[1], 0.0, 1e-3);
  EXPECT_LT(std::abs(*d.decision.x_next_pred - tgt), 0.1);
  EXPECT_DOUBLE_EQ(d.decision.setpoint_command, 20.0);
}

TEST(IbexDecide, ZeroBoundsGiveFreeResponse) {
  const PhysicalParams p;
  PolicyContext ctx;
  ctx.bounds.hi = {0.0, 0.0};
  const std::vector<ExogenousInput> exo(24, {-5.0, 0.1});
  const std::vector<double> targets(24, 20.0);
  const auto d = ibex_decide(19.3, exo, targets, p, {}, ctx);
  const Power zero{0.0, 0.0};
  const Disturbance dist{p.t_mass, -5.0, 0.1};
  const double free = predict_trajectory(p, ctx.cop, 19.3, std::span(&zero, 1), std::span(&dist, 1))[0];
  EXPECT_NEAR(*d.decision.x_next_pred, free, 1e-12);
  EXPECT_DOUBLE_EQ(d.decision.setpoint_command, quantize_setpoint(free));
}

TEST(IbexDecide, Deterministic) {
  const PhysicalParams p;
  const PolicyContext ctx;
  const std::vector<ExogenousInput> exo(24, {-3.0, 0.2});
  std::vector<double> targets(24, 20.0);
  targets[3] = 18.0;
  const auto a = ibex_decide(19.0, exo, targets, p, {}, ctx);
  const auto b = ibex_decide(19.0, exo, targets, p, {}, ctx);
  EXPECT_EQ((*a.decision.u_star)[0], (*b.decision.u_star)[0]);
  EXPECT_EQ((*a.decision.u_star)[1], (*b.decision.u_star)[1]);
  EXPECT_EQ(*a.decision.x_next_pred, *b.decision.x_next_pred);
  EXPECT_EQ(a.decision.setpoint_command, b.decision.setpoint_command);
}

TEST(IbexDecide, SetpointsAreHalfDegreesInBand) {
  const PhysicalParams p;
  const PolicyContext ctx;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> x(5.0, 35.0);
  for (int i = 0; i < 50; ++i) {
    const std::vector<ExogenousInput> exo(24, {x(rng) - 20.0, 0.0});
    const std::vector<double> targets(24, 20.0);
    const double sp = ibex_decide(x(rng), exo, targets, p, {}, ctx).decision.setpoint_command;
    EXPECT_EQ(sp * 2.0, std::round(sp * 2.0));
    EXPECT_GE(sp, 10.0);
    EXPECT_LE(sp, 30.0);
  }
}

TEST(Imitation, BatchGradientMatchesFiniteDifferences) {
  const auto data = scenario::expert_dataset(2, 0, 3);
  PhysicalParams s = data.theta_state;
  QuadCostParams c = data.theta_cost;
  scenario::perturb_init(s, c);
  std::vector<std::size_t> idx(12);
  std::iota(idx.begin(), idx.end(), 20);
  const double lambda = 10.0;
  const auto ev = imitation_batch(s, c, data.ctx, data.train, idx, lambda, Exec::kSerial);
  auto loss_at = [&](int k, double v) {
    PhysicalParams ss = s;
    QuadCostParams cc = c;
    double* fields[] = {&ss.capacitance, &ss.r_mass, &ss.r_out, &ss.t_mass, &ss.eta_backup,
                        &ss.a_eff,       &cc.o_state, &cc.r_hp, &cc.r_bh};
    *fields[k] = v;
    return imitation_batch(ss, cc, data.ctx, data.train, idx, lambda, Exec::kSerial).loss.imitation;
  };
  const double base[] = {s.capacitance, s.r_mass, s.r_out, s.t_mass, s.eta_backup, s.a_eff, c.o_state, c.r_hp, c.r_bh};
  const double analytic[] = {ev.grad.capacitance, ev.grad.r_mass, ev.grad.r_out, ev.grad.t_mass, ev.grad.eta_backup,
                             ev.grad.a_eff,       ev.grad.o_state, ev.grad.r_hp, ev.grad.r_bh};
  for (int k = 0; k < 9; ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(base[k]));
    const double fd = oracle::central_difference([&](double v) { return loss_at(k, v); }, base[k], h);
    EXPECT_LT(oracle::relative_error(analytic[k], fd, 1e-3), 1e-4) << "coordinate " << k;
  }
}

TEST(Imitation, ParallelBatchMatchesSerialBitwise) {
  const auto data = scenario::expert_dataset(2, 0, 4);
  std::vector<std::size_t> idx(data.train.size());
  std::iota(idx.begin(), idx.end(), 0);
  const auto serial = imitation_batch(data.theta_state, {0.8, 0.2, 0.5}, data.ctx, data.train, idx, 1000.0, Exec::kSerial);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(3);
  const auto par = imitation_batch(data.theta_state, {0.8, 0.2, 0.5}, data.ctx, data.train, idx, 1000.0, Exec::kParallel);
  omp_set_num_threads(saved);
  EXPECT_EQ(serial.loss.imitation, par.loss.imitation);
  EXPECT_EQ(serial.grad.capacitance, par.grad.capacitance);
  EXPECT_EQ(serial.grad.r_hp, par.grad.r_hp);
  EXPECT_EQ(serial.grad.a_eff, par.grad.a_eff);
}

TEST(Imitation, SelfImitationIsAFixedPoint) {
  const PhysicalParams s;
  const QuadCostParams c = scenario::kExpertCost;
  const PolicyContext ctx;
  std::vector<ImitationSample> data;
  for (int k = 0; k < 30; ++k) {
    auto smp = flat_sample(17.5 + 0.1 * k, -6.0 + 0.4 * k, k % 3 ? 20.0 : 18.0);
    const auto d = ibex_decide(smp.x_t, smp.exo, smp.targets, s, c, ctx);
    smp.u_t = *d.decision.u_star;
    smp.x_next = *d.decision.x_next_pred;
    data.push_back(smp);
  }
  IbexHyper h;
  h.epochs = 3;
  const auto res = imitation_pretrain(data, h, s, c, ctx);
  EXPECT_LT(res.initial.imitation, 1e-20);
  EXPECT_LT(res.final.imitation, 1e-20);
  EXPECT_EQ(res.theta_state.capacitance, s.capacitance);
  EXPECT_EQ(res.theta_state.r_out, s.r_out);
  EXPECT_EQ(res.theta_cost.r_hp, c.r_hp);
  EXPECT_EQ(res.theta_cost.o_state, c.o_state);
}

TEST(Imitation, RecoversSyntheticExpert) {
  const auto data = scenario::expert_dataset(14, 7, 7);
  PhysicalParams s = data.theta_state;
  QuadCostParams c = data.theta_cost;
  scenario::perturb_init(s, c);
  const auto res = imitation_pretrain(data.train, IbexHyper{}, s, c, data.ctx);
  ASSERT_EQ(res.epochs.size(), 50u);
  EXPECT_GE(res.initial.action / res.final.action, 10.0);
  EXPECT_LE(action_rms(res.theta_state, res.theta_cost, data.ctx, data.held_out), 0.05);
}

TEST(Imitation, LargeActionWeightMatchesActionsAtLeastAsWell) {
  // The plant disagrees with the expert's model, so matching next states pulls
  // the parameters away from the ones that reproduce the actions.
  const auto data = scenario::expert_dataset(7, 0, 9, 0.7);
  PhysicalParams s = data.theta_state;
  QuadCostParams c = data.theta_cost;
  scenario::perturb_init(s, c);
  IbexHyper h;
  h.lambda = 1.0;
  const auto weak = imitation_pretrain(data.train, h, s, c, data.ctx);
  h.lambda = 1e9;
  const auto strong = imitation_pretrain(data.train, h, s, c, data.ctx);
  EXPECT_LE(strong.final.action, weak.final.action);
}

TEST(Imitation, DivergenceAbortsWithDiagnostics) {
  const auto data = scenario::expert_dataset(1, 0, 2);
  PretrainOptions opt;
  opt.divergence_limit = 1e-9;
  try {
    imitation_pretrain(data.train, IbexHyper{}, PhysicalParams{}, {2.0, 0.5, 0.5}, data.ctx, opt);
    FAIL() << "expected divergence";
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("diverged at epoch 0"), std::string::npos);
    EXPECT_NE(msg.find("R_hp=0.5"), std::string::npos);
  }
}

TEST(Imitation, SeededAndReproducible) {
  const auto data = scenario::expert_dataset(2, 0, 5);
  PhysicalParams s = data.theta_state;
  QuadCostParams c = data.theta_cost;
  scenario::perturb_init(s, c);
  IbexHyper h;
  h.epochs = 3;
  PretrainOptions opt;
  opt.seed = 11;
  const auto a = imitation_pretrain(data.train, h, s, c, data.ctx, opt);
  opt.exec = Exec::kSerial;
  const auto b = imitation_pretrain(data.train, h, s, c, data.ctx, opt);
  EXPECT_EQ(a.theta_state.capacitance, b.theta_state.capacitance);
  EXPECT_EQ(a.theta_cost.r_bh, b.theta_cost.r_bh);
  ASSERT_EQ(a.epochs.size(), 3u);
  EXPECT_EQ(a.epochs[2].action, b.epochs[2].action);
}

TEST(Imitation, RejectsBadInput) {
  const PolicyContext ctx;
  EXPECT_THROW(imitation_pretrain({}, IbexHyper{}, {}, {}, ctx), ConfigError);
  std::vector<ImitationSample> bad{flat_sample(20.0, 0.0, 20.0)};
  bad[0].targets.pop_back();
  EXPECT_THROW(imitation_pretrain(bad, IbexHyper{}, {}, {}, ctx), ConfigError);
}

TEST(IbexUpdateState, SelfGeneratedBufferIsAFixedPoint) {
  const PhysicalParams s;
  const QuadCostParams c;
  const PolicyContext ctx;
  const auto buf = self_consistent_buffer(s, c, ctx, 24);
  const auto up = ibex_update_state(s, c, buf, IbexHyper{}, ctx);
  EXPECT_LT(up.loss_before, 1e-20);
  EXPECT_NEAR(up.theta_state.capacitance, s.capacitance, 1e-8);
  EXPECT_NEAR(up.theta_state.r_mass, s.r_mass, 1e-8);
  EXPECT_NEAR(up.theta_state.r_out, s.r_out, 1e-8);
  EXPECT_NEAR(up.theta_state.t_mass, s.t_mass, 1e-8);
  EXPECT_NEAR(up.theta_state.eta_backup, s.eta_backup, 1e-8);
  EXPECT_NEAR(up.theta_state.a_eff, s.a_eff, 1e-8);
}

TEST(IbexUpdateState, SingleStepMatchesClosedFormGradient) {
  PhysicalParams s;
  s.a_eff = 1.5;
  const QuadCostParams c{1.0, 0.3, 2.0};
  PolicyContext ctx;
  ctx.bounds.lo = {-100.0, -100.0};
  ctx.bounds.hi = {100.0, 100.0};
  Transition tr;
  tr.obs.t_return = 18.6;
  ForecastStep f;
  f.t_out = -2.0;
  f.i_sol = 0.4;
  f.target = 20.0;
  tr.obs.forecast = {f};
  tr.x_next = 19.1;
  IbexHyper h;
  h.alpha_state = 0.01;
  const auto up = ibex_update_state(s, c, std::span(&tr, 1), h, ctx);

  const ExogenousInput d{f.t_out, f.i_sol};
  const double x1 = closed_form_x1(s, c, ctx.cop, tr.obs.t_return, d, f.target);
  EXPECT_NEAR(up.loss_before, (x1 - tr.x_next) * (x1 - tr.x_next), 1e-12);
  auto expect_step = [&](double PhysicalParams::*field, double updated) {
    PhysicalParams q = s;
    const double v0 = s.*field;
    const double dx1 = oracle::central_difference(
        [&](double v) {
          q.*field = v;
          return closed_form_x1(q, c, ctx.cop, tr.obs.t_return, d, f.target);
        },
        v0, 1e-6 * std::max(1.0, std::abs(v0)));
    const double expected = v0 - h.alpha_state * 2.0 * (x1 - tr.x_next) * dx1;
    EXPECT_NEAR(updated, expected, 1e-8 + 1e-6 * std::abs(expected - v0));
  };
  expect_step(&PhysicalParams::capacitance, up.theta_state.capacitance);
  expect_step(&PhysicalParams::r_mass, up.theta_state.r_mass);
  expect_step(&PhysicalParams::r_out, up.theta_state.r_out);
  expect_step(&PhysicalParams::t_mass, up.theta_state.t_mass);
  expect_step(&PhysicalParams::eta_backup, up.theta_state.eta_backup);
  expect_step(&PhysicalParams::a_eff, up.theta_state.a_eff);
}

TEST(IbexUpdateState, ApertureMayTurnNegative) {
  PhysicalParams s;
  s.a_eff = 0.05;
  const QuadCostParams c;
  const PolicyContext ctx;
  auto buf = self_consistent_buffer(s, c, ctx, 24);
  // Sunny hours came out colder than predicted.
  for (auto& tr : buf) {
    if (tr.obs.forecast[0].i_sol > 0.0) tr.x_next -= 1.0;
  }
  IbexHyper h;
  h.alpha_state = 10.0;
  const auto up = ibex_update_state(s, c, buf, h, ctx);
  EXPECT_LT(up.theta_state.a_eff, 0.0);
  EXPECT_NO_THROW(up.theta_state.validate());
}

TEST(IbexUpdateState, ProjectionKeepsStateValid) {
  const PhysicalParams s;
  const QuadCostParams c;
  const PolicyContext ctx;
  auto buf = self_consistent_buffer(s, c, ctx, 24);
  for (auto& tr : buf) tr.x_next += 3.0;
  IbexHyper h;
  h.alpha_state = 1e6;
  const auto up = ibex_update_state(s, c, buf, h, ctx);
  EXPECT_GE(up.theta_state.capacitance, kResistanceFloor);
  EXPECT_GE(up.theta_state.r_mass, kResistanceFloor);
  EXPECT_GE(up.theta_state.r_out, kResistanceFloor);
  EXPECT_GT(up.theta_state.eta_backup, 0.0);
  EXPECT_LE(up.theta_state.eta_backup, 2.0);
}

TEST(IbexUpdateState, EmptyBufferIsANoOpWithNotice) {
  const PhysicalParams s;
  const auto up = ibex_update_state(s, {}, {}, IbexHyper{}, PolicyContext{});
  EXPECT_FALSE(up.notice.empty());
  EXPECT_EQ(up.theta_state.capacitance, s.capacitance);
}

TEST(IbexUpdateCost, ZeroRewardGradientLeavesCostUnchanged) {
  // Free response sits exactly on the target and energy is free.
  PhysicalParams p;
  p.a_eff = 0.0;
  p.t_mass = 20.0;
  PolicyContext ctx;
  const std::vector<ExogenousInput> exo(6, {20.0, 0.0});
  const std::vector<double> targets(6, 20.0);
  const QuadCostParams c{1.0, 0.1, 1.0};
  const auto d = ibex_decide(20.0, exo, targets, p, c, ctx);
  const auto up = ibex_update_cost(c, d.policy, targets, {0.0, 0.0, 3.0}, 3.0, 10.0);
  EXPECT_EQ(up.theta_cost.o_state, c.o_state);
  EXPECT_EQ(up.theta_cost.r_hp, c.r_hp);
  EXPECT_EQ(up.theta_cost.r_bh, c.r_bh);
  EXPECT_EQ(up.reward, 0.0);
}

TEST(IbexUpdateCost, TrackingWeightGradientMatchesFiniteDifferences) {
  // Weak tracking weight, cold start below target, cheap energy: raising O
  // cuts the comfort penalty faster than it adds energy cost.
  const PhysicalParams p;
  PolicyContext ctx;
  const std::vector<ExogenousInput> exo(4, {-5.0, 0.0});
  const std::vector<double> targets(4, 20.0);
  const EconomicWeights w{0.0, 0.05, 3.0};
  const QuadCostParams c{0.05, 0.1, 1.0};
  const auto reward = [&](double o) {
    const QuadCostParams cc{o, c.r_hp, c.r_bh};
    const auto d = ibex_decide(18.0, exo, targets, p, cc, ctx);
    const std::vector<double> wc(4, 3.0);
    return -economic_cost(d.policy.solution.u_star, d.policy.solution.x_star, targets, wc, w.w_d, w.w_e);
  };
  const auto d = ibex_decide(18.0, exo, targets, p, c, ctx);
  const double alpha = 1e-3;
  const auto up = ibex_update_cost(c, d.policy, targets, w, 3.0, alpha);
  const double fd = oracle::central_difference(reward, c.o_state, 1e-6);
  EXPECT_GT(fd, 0.0);
  EXPECT_GT(up.theta_cost.o_state, c.o_state);
  EXPECT_LT(oracle::relative_error(up.grad.o_state, fd), 1e-4);
  EXPECT_NEAR(up.theta_cost.o_state - c.o_state, alpha * fd, 1e-4 * alpha * std::abs(fd));
}

TEST(IbexUpdateCost, ProjectionClampsAtFloorForAnyStepSize) {
  const PhysicalParams p;
  const PolicyContext ctx;
  const std::vector<ExogenousInput> exo(24, {-8.0, 0.0});
  const std::vector<double> targets(24, 20.0);
  const QuadCostParams c;
  const auto d = ibex_decide(17.0, exo, targets, p, c, ctx);
  bool hit_floor = false;
  for (double alpha : {1e-6, 1e-3, 1.0, 1e3, 1e9}) {
    const auto up = ibex_update_cost(c, d.policy, targets, EconomicWeights{}, 3.0, alpha);
    EXPECT_GE(up.theta_cost.o_state, kCostFloor);
    EXPECT_GE(up.theta_cost.r_hp, kCostFloor);
    EXPECT_GE(up.theta_cost.r_bh, kCostFloor);
    hit_floor = hit_floor || up.theta_cost.r_hp == kCostFloor || up.theta_cost.r_bh == kCostFloor ||
                up.theta_cost.o_state == kCostFloor;
  }
  EXPECT_TRUE(hit_floor);
}

TEST(IbexUpdateCost, FirstAdamStepHasMagnitudeAlpha) {
  // Bias-corrected Adam from zero moments moves each coordinate by alpha
  // times the sign of its gradient, whatever the gradient scale.
  const PhysicalParams p;
  const PolicyContext ctx;
  const std::vector<ExogenousInput> exo(4, {-5.0, 0.0});
  const std::vector<double> targets(4, 20.0);
  const EconomicWeights w{0.0, 0.05, 3.0};
  const QuadCostParams c{0.05, 0.1, 1.0};
  const auto d = ibex_decide(18.0, exo, targets, p, c, ctx);
  AdamMoments m;
  const double alpha = 1e-3;
  const auto up = ibex_update_cost(c, d.policy, targets, w, 3.0, alpha, &m);
  EXPECT_EQ(m.t, 1);
  const double steps[] = {up.theta_cost.o_state - c.o_state, up.theta_cost.r_hp - c.r_hp, up.theta_cost.r_bh - c.r_bh};
  const double grads[] = {up.grad.o_state, up.grad.r_hp, up.grad.r_bh};
  for (int i = 0; i < 3; ++i) {
    if (std::abs(grads[i]) < 1e-6) continue;
    EXPECT_NEAR(steps[i], std::copysign(alpha, grads[i]), 1e-5 * alpha) << i;
  }
}

TEST(IbexUpdateCost, RejectsUnconvergedCache) {
  PolicyOutput out;
  out.solution.converged = false;
  const std::vector<double> targets;
  EXPECT_THROW(ibex_update_cost({}, out, targets, {}, 3.0, 1e-3), NumericalError);
}

TEST(IbexController, JournalsUpdatesAndNotices) {
  PolicyContext ctx;
  IbexController rl(PhysicalParams{}, {1.0, 0.5, 0.5}, ctx, IbexHyper{}, EconomicWeights{});
  const auto buf = self_consistent_buffer(rl.theta_state(), rl.theta_cost(), ctx, 3);
  const auto d = rl.decide(buf[0].obs);
  EXPECT_EQ(d.setpoint_command * 2.0, std::round(d.setpoint_command * 2.0));
  ASSERT_EQ(rl.journal().size(), 1u);
  EXPECT_EQ(rl.journal()[0].kind, 'c');
  rl.on_midnight({});
  EXPECT_EQ(rl.notices().size(), 1u);
  rl.on_midnight(buf);
  ASSERT_EQ(rl.journal().size(), 2u);
  EXPECT_EQ(rl.journal()[1].kind, 's');
  EXPECT_EQ(rl.journal()[1].buffer_size, 3);
}

TEST(IbexController, FrozenControllerKeepsParameters) {
  IbexController rl(PhysicalParams{}, {}, PolicyContext{}, IbexHyper{}, EconomicWeights{}, {false, false, false});
  const auto buf = self_consistent_buffer(rl.theta_state(), rl.theta_cost(), PolicyContext{}, 2);
  rl.decide(buf[0].obs);
  rl.on_midnight(buf);
  EXPECT_TRUE(rl.journal().empty());
  EXPECT_EQ(rl.theta_cost().r_hp, QuadCostParams{}.r_hp);
}

TEST(LogToImitation, SkipsUnconfirmedRowsAndGaps) {
  const auto weather = synthesize_weather(4, 1, climate_preset("mild-winter"));
  BaselineController base;
  EpisodeOptions opt;
  opt.hours = 48;
  FaultSchedule faults;
  faults.windows.push_back({weather[10].time, weather[12].time, FaultKind::kCommandDrop});
  faults.windows.push_back({weather[30].time, weather[31].time, FaultKind::kSensorGap});
  const auto sched = SetpointSchedule::occupied_default();
  const auto run = run_episode(base, PlantConfig{}, weather, sched, faults, 1, opt);
  const auto samples = log_to_imitation(run.log, weather, sched, opt.clock);
  // 47 rows; 2 unconfirmed, and the rows either side of the gap lose their successor.
  EXPECT_EQ(run.log.size(), 47u);
  EXPECT_EQ(samples.size(), 47u - 1u - 2u - 1u);
  for (const auto& s : samples) EXPECT_EQ(s.exo.size(), 24u);
}

TEST(LogToImitation, LoggedSetpointsReplaceScheduleTargets) {
  const auto weather = synthesize_weather(3, 2, climate_preset("mild-winter"));
  HistoryController hc(PhysicalParams{}, CopCurve{}, InputBounds{}, 5, 2.5, 4);
  EpisodeOptions opt;
  opt.hours = 36;
  const auto sched = SetpointSchedule::occupied_default();
  const auto run = run_episode(hc, PlantConfig{}, weather, sched, {}, 1, opt);
  const auto logged = log_to_imitation(run.log, weather, sched, opt.clock, 6, TargetSource::kLoggedSetpoint);
  const auto planned = log_to_imitation(run.log, weather, sched, opt.clock, 6);
  ASSERT_EQ(logged.size(), planned.size());
  ASSERT_EQ(logged.size(), run.log.size() - 1);
  bool differs = false;
  for (std::size_t k = 0; k < logged.size(); ++k) {
    for (std::size_t l = 0; l < 6; ++l) {
      // Past the end of the log the schedule fills in.
      const double want = k + l < run.log.size() ? run.log[k + l].setpoint : planned[k].targets[l];
      EXPECT_EQ(logged[k].targets[l], want);
      differs = differs || logged[k].targets[l] != planned[k].targets[l];
    }
  }
  EXPECT_TRUE(differs);
}

TEST(Checkpoint, RoundTripsWithJoulesConvention) {
  const auto dir = std::filesystem::temp_directory_path() / "hvac_ckpt_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "theta.json";
  IbexCheckpoint c;
  c.theta_state.capacitance = 6.5;
  c.theta_state.a_eff = -0.25;
  c.theta_cost = {1.5, 1e-6, 3.0};
  c.hyper.alpha_imit = 0.005;
  c.hyper.online_optimizer = OnlineOptimizer::kGradient;
  c.loss_history = {{0.1, 0.2, 200.1}, {0.05, 0.01, 10.05}};
  c.label = "unit";
  write_checkpoint(path, c);
  EXPECT_FALSE(std::filesystem::exists(dir / "theta.json.tmp"));
  std::ifstream in(path);
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_NE(text.find("\"capacitance_j_per_degc\": 23400000"), std::string::npos);
  const auto r = read_checkpoint(path);
  EXPECT_NEAR(r.theta_state.capacitance, 6.5, 1e-12);
  EXPECT_EQ(r.theta_state.a_eff, -0.25);
  EXPECT_EQ(r.theta_cost.r_hp, 1e-6);
  EXPECT_EQ(r.hyper.alpha_imit, 0.005);
  EXPECT_EQ(r.hyper.online_optimizer, OnlineOptimizer::kGradient);
  ASSERT_EQ(r.loss_history.size(), 2u);
  EXPECT_EQ(r.loss_history[1].imitation, 10.05);
  EXPECT_EQ(r.label, "unit");
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, RejectsMalformedAndWrongVersion) {
  const auto dir = std::filesystem::temp_directory_path() / "hvac_ckpt_bad";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "a.json") << "{\"format_version\": 1, \"theta_state\": {}}";
  EXPECT_THROW(read_checkpoint(dir / "a.json"), DataError);
  std::ofstream(dir / "b.json") << "{\"format_version\": 99}";
  try {
    read_checkpoint(dir / "b.json");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("format_version 99"), std::string::npos);
  }
  EXPECT_THROW(read_checkpoint(dir / "missing.json"), DataError);
  std::filesystem::remove_all(dir);
}
