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

#include "hvac/mpc.hpp"

#include <algorithm>
#include <cmath>

#include "hvac/errors.hpp"
#include "hvac/lp.hpp"

namespace hvac {

void EconomicWeights::validate() const {
  if (!(w_d >= 0.0 && w_e >= 0.0 && w_c >= 0.0)) throw ConfigError("economic weights must be non-negative");
}

namespace {

void check_lengths(std::size_t n, std::size_t a, std::size_t b, std::size_t c) {
  if (n == 0 || a != n || b != n || c != n) throw ConfigError("economic cost sequences differ in length");
}

}  // namespace

double economic_cost(std::span<const Power> u, std::span<const double> x, std::span<const double> targets,
                     std::span<const double> w_c, double w_d, double w_e, double dt) {
  check_lengths(u.size(), x.size(), targets.size(), w_c.size());
  double peak = u[0][0] + u[0][1];
  double j = 0.0;
  for (std::size_t l = 0; l < u.size(); ++l) {
    const double p = u[l][0] + u[l][1];
    peak = std::max(peak, p);
    j += dt * (w_e * p + w_c[l] * std::abs(x[l] - targets[l]));
  }
  return j + w_d * peak;
}

TrajectoryGrad economic_cost_gradient(std::span<const Power> u, std::span<const double> x,
                                      std::span<const double> targets, std::span<const double> w_c, double w_d,
                                      double w_e, double dt) {
  check_lengths(u.size(), x.size(), targets.size(), w_c.size());
  TrajectoryGrad g = TrajectoryGrad::zeros(u.size());
  std::size_t arg = 0;
  for (std::size_t l = 0; l < u.size(); ++l) {
    if (u[l][0] + u[l][1] > u[arg][0] + u[arg][1]) arg = l;
    const double e = x[l] - targets[l];
    g.x[l] = dt * w_c[l] * (e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0));
    g.u[l] = {dt * w_e, dt * w_e};
  }
  g.u[arg][0] += w_d;
  g.u[arg][1] += w_d;
  return g;
}

void MpcInstance::validate() const {
  const std::size_t n = dynamics.size();
  if (n == 0) throw ConfigError("MPC horizon must be at least one step");
  if (targets.size() != n || w_c.size() != n) throw ConfigError("MPC targets/weights differ in length from horizon");
  if (!(w_d >= 0.0 && w_e >= 0.0)) throw ConfigError("MPC prices must be non-negative");
  for (double w : w_c) {
    if (!(w >= 0.0)) throw ConfigError("comfort weights must be non-negative");
  }
  bounds.validate();
}

std::vector<LqrStep> mpc_dynamics(const PhysicalParams& p, const CopCurve& cop, std::span<const ForecastStep> forecast,
                                  std::span<const double> qe, double dt) {
  if (qe.size() != forecast.size()) throw ConfigError("gain forecast length differs from horizon");
  std::vector<LqrStep> out(forecast.size());
  for (std::size_t l = 0; l < forecast.size(); ++l) {
    const auto m = discretize_zoh(continuous_matrices(p, cop, forecast[l].t_out), dt);
    out[l].a = m.a;
    out[l].b = {m.b_u[0], m.b_u[1]};
    // Same ZOH gain as the backup channel per unit of heat: phi / C = b_u[1] / eta.
    out[l].f = m.b_d[0] * p.t_mass + m.b_d[1] * forecast[l].t_out + m.b_d[2] * forecast[l].i_sol +
               m.b_u[1] / p.eta_backup * qe[l];
  }
  return out;
}

double mpc_plan_cost(const MpcInstance& in, std::span<const Power> u) {
  if (u.size() != in.horizon()) throw ConfigError("plan length differs from horizon");
  std::vector<double> x(u.size());
  double s = in.x0;
  for (std::size_t l = 0; l < u.size(); ++l) {
    const auto& d = in.dynamics[l];
    s = d.a * s + d.b[0] * u[l][0] + d.b[1] * u[l][1] + d.f;
    x[l] = s;
  }
  return economic_cost(u, x, in.targets, in.w_c, in.w_d, in.w_e, in.dt);
}

MpcPlan solve_mpc_lp(const MpcInstance& in) {
  in.validate();
  const int L = static_cast<int>(in.horizon());
  const Power lo = in.bounds.lo;
  const Power width{in.bounds.hi[0] - lo[0], in.bounds.hi[1] - lo[1]};

  // State response to the shifted controls v = u - lo: x = x_lo + G v.
  std::vector<double> x_lo(static_cast<std::size_t>(L));
  std::vector<std::vector<double>> g(static_cast<std::size_t>(L), std::vector<double>(static_cast<std::size_t>(2 * L), 0.0));
  double s = in.x0;
  for (int k = 0; k < L; ++k) {
    const auto& d = in.dynamics[static_cast<std::size_t>(k)];
    s = d.a * s + d.b[0] * lo[0] + d.b[1] * lo[1] + d.f;
    x_lo[static_cast<std::size_t>(k)] = s;
    for (int m = 0; m < 2 * k; ++m) g[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)] = d.a * g[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(m)];
    g[static_cast<std::size_t>(k)][static_cast<std::size_t>(2 * k)] = d.b[0];
    g[static_cast<std::size_t>(k)][static_cast<std::size_t>(2 * k + 1)] = d.b[1];
  }

  // Variables: v (2L), e (L), D' (1) with D = D' + lo_hp + lo_bh.
  const int n = 3 * L + 1;
  const int iv = 0, ie = 2 * L, id = 3 * L;
  LinearProgram lp;
  lp.c.assign(static_cast<std::size_t>(n), 0.0);
  for (int l = 0; l < L; ++l) {
    lp.c[static_cast<std::size_t>(iv + 2 * l)] = in.dt * in.w_e;
    lp.c[static_cast<std::size_t>(iv + 2 * l + 1)] = in.dt * in.w_e;
    lp.c[static_cast<std::size_t>(ie + l)] = in.dt * in.w_c[static_cast<std::size_t>(l)];
  }
  lp.c[static_cast<std::size_t>(id)] = in.w_d;

  auto row = [&]() { return std::vector<double>(static_cast<std::size_t>(n), 0.0); };
  for (int k = 0; k < L; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    // e_k >= x_k - target_k  and  e_k >= target_k - x_k
    auto up = row();
    auto dn = row();
    for (int m = 0; m < 2 * L; ++m) {
      up[static_cast<std::size_t>(iv + m)] = g[uk][static_cast<std::size_t>(m)];
      dn[static_cast<std::size_t>(iv + m)] = -g[uk][static_cast<std::size_t>(m)];
    }
    up[static_cast<std::size_t>(ie + k)] = -1.0;
    dn[static_cast<std::size_t>(ie + k)] = -1.0;
    lp.a.push_back(std::move(up));
    lp.b.push_back(in.targets[uk] - x_lo[uk]);
    lp.a.push_back(std::move(dn));
    lp.b.push_back(x_lo[uk] - in.targets[uk]);
  }
  for (int l = 0; l < L; ++l) {
    auto r = row();
    r[static_cast<std::size_t>(iv + 2 * l)] = 1.0;
    r[static_cast<std::size_t>(iv + 2 * l + 1)] = 1.0;
    r[static_cast<std::size_t>(id)] = -1.0;
    lp.a.push_back(std::move(r));
    lp.b.push_back(0.0);
  }
  for (int m = 0; m < 2 * L; ++m) {
    auto r = row();
    r[static_cast<std::size_t>(iv + m)] = 1.0;
    lp.a.push_back(std::move(r));
    lp.b.push_back(width[static_cast<std::size_t>(m % 2)]);
  }

  const LpSolution sol = solve_lp(lp);
  MpcPlan plan;
  plan.u.resize(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) {
    for (int j = 0; j < 2; ++j) {
      const double v = std::clamp(sol.x[static_cast<std::size_t>(iv + 2 * l + j)], 0.0, width[static_cast<std::size_t>(j)]);
      plan.u[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)] = lo[static_cast<std::size_t>(j)] + v;
    }
  }
  plan.x.resize(static_cast<std::size_t>(L));
  s = in.x0;
  for (int l = 0; l < L; ++l) {
    const auto& d = in.dynamics[static_cast<std::size_t>(l)];
    s = d.a * s + d.b[0] * plan.u[static_cast<std::size_t>(l)][0] + d.b[1] * plan.u[static_cast<std::size_t>(l)][1] + d.f;
    plan.x[static_cast<std::size_t>(l)] = s;
  }
  plan.objective = economic_cost(plan.u, plan.x, in.targets, in.w_c, in.w_d, in.w_e, in.dt);
  plan.pivots = sol.pivots;
  return plan;
}

double ComfortTuning::scale_at(int hour) const { return hour >= day_start && hour < day_end ? day_scale : night_scale; }

double mean_ppd(std::span<const double> x, const ComfortAssumptions& comfort) {
  double s = 0.0;
  for (double v : x) s += pmv_ppd(std::clamp(v, 0.0, 50.0), comfort);
  return s / static_cast<double>(x.size());
}

TuneResult tune_comfort_weight(const MpcInstance& base, std::span<const int> state_hours, const ComfortTuning& t) {
  if (t.candidates.empty()) throw ConfigError("comfort weight candidate list is empty");
  if (!std::is_sorted(t.candidates.begin(), t.candidates.end()))
    throw ConfigError("comfort weight candidates must be sorted ascending");
  if (state_hours.size() != base.horizon()) throw ConfigError("tuning hours differ in length from horizon");
  TuneResult out;
  for (double c : t.candidates) {
    MpcInstance in = base;
    in.w_c.resize(in.horizon());
    for (std::size_t l = 0; l < in.horizon(); ++l) in.w_c[l] = c * t.scale_at(state_hours[l]);
    const double ppd = mean_ppd(solve_mpc_lp(in).x, t.comfort);
    out.candidate_ppd.push_back(ppd);
    if (!out.met_target && ppd < t.ppd_target) {
      out.met_target = true;
      out.base_w_c = c;
    }
  }
  if (!out.met_target) {
    out.base_w_c = t.candidates.back();
    out.warning = "no comfort weight candidate met the PPD target; using the largest";
  }
  return out;
}

namespace {

std::vector<double> predicted_gains(const MpcModel& model, std::span<const ForecastStep> forecast) {
  std::vector<double> qe(forecast.size());
  for (std::size_t l = 0; l < forecast.size(); ++l) {
    const auto& f = forecast[l];
    qe[l] = model.qe.predict(ExogenousGainModel::features(f.t_out, f.i_sol, f.wind, f.local_hour));
  }
  return qe;
}

std::vector<int> state_hours(std::span<const ForecastStep> forecast) {
  std::vector<int> h(forecast.size());
  for (std::size_t l = 0; l < forecast.size(); ++l) h[l] = (forecast[l].local_hour + 1) % 24;
  return h;
}

MpcInstance build_instance(double x_t, std::span<const ForecastStep> forecast, const MpcModel& model,
                           const EconomicWeights& w, double base_w_c, const ComfortTuning& tuning,
                           const InputBounds& bounds) {
  const auto qe = predicted_gains(model, forecast);
  MpcInstance in;
  in.dynamics = mpc_dynamics(model.params, model.cop, forecast, qe);
  in.x0 = x_t;
  in.w_d = w.w_d;
  in.w_e = w.w_e;
  in.bounds = bounds;
  const auto hours = state_hours(forecast);
  for (std::size_t l = 0; l < forecast.size(); ++l) {
    in.targets.push_back(forecast[l].target);
    in.w_c.push_back(base_w_c * tuning.scale_at(hours[l]));
  }
  return in;
}

}  // namespace

ControllerDecision mpc_decide(double x_t, std::span<const ForecastStep> forecast, const MpcModel& model,
                              const EconomicWeights& weights, double base_w_c, const ComfortTuning& tuning,
                              const InputBounds& bounds) {
  const MpcPlan plan = solve_mpc_lp(build_instance(x_t, forecast, model, weights, base_w_c, tuning, bounds));
  ControllerDecision d;
  d.u_star = plan.u.front();
  d.x_next_pred = plan.x.front();
  d.setpoint_command = std::clamp(quantize_setpoint(plan.x.front()), 10.0, 30.0);
  d.objective = plan.objective;
  d.iterations = plan.pivots;
  return d;
}

MpcController::MpcController(MpcModel model, EconomicWeights weights, ComfortTuning tuning, InputBounds bounds,
                             int retune_hours)
    : model_(std::move(model)), weights_(weights), tuning_(std::move(tuning)), bounds_(bounds),
      retune_hours_(retune_hours) {
  weights_.validate();
  bounds_.validate();
  model_.params.validate();
  if (retune_hours_ < 1) throw ConfigError("retune interval must be at least one hour");
}

MpcInstance MpcController::instance(const Observation& obs) const {
  return build_instance(obs.t_return, obs.forecast, model_, weights_, 0.0, tuning_, bounds_);
}

ControllerDecision MpcController::decide(const Observation& obs) {
  if (base_w_c_ < 0.0 || obs.local_hour % retune_hours_ == 0) {
    const auto hours = state_hours(obs.forecast);
    const TuneResult r = tune_comfort_weight(instance(obs), hours, tuning_);
    base_w_c_ = r.base_w_c;
    if (!r.warning.empty()) warnings_.push_back(format_rfc3339(obs.time) + ": " + r.warning);
  }
  return mpc_decide(obs.t_return, obs.forecast, model_, weights_, base_w_c_, tuning_, bounds_);
}

}  // namespace hvac
