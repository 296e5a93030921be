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

#include "hvac/ibex.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_map>

#include <json.hpp>

#include "hvac/errors.hpp"

namespace hvac {

namespace {

constexpr std::size_t kNumParams = 9;
using ParamVec = std::array<double, kNumParams>;

ParamVec pack(const PhysicalParams& s, const QuadCostParams& c) {
  return {s.capacitance, s.r_mass, s.r_out, s.t_mass, s.eta_backup, s.a_eff, c.o_state, c.r_hp, c.r_bh};
}

void unpack(const ParamVec& v, PhysicalParams& s, QuadCostParams& c) {
  s.capacitance = v[0];
  s.r_mass = v[1];
  s.r_out = v[2];
  s.t_mass = v[3];
  s.eta_backup = v[4];
  s.a_eff = v[5];
  c.o_state = v[6];
  c.r_hp = v[7];
  c.r_bh = v[8];
}

ParamVec grad_vec(const ThetaGrad& g) {
  return {g.capacitance, g.r_mass, g.r_out, g.t_mass, g.eta_backup, g.a_eff, g.o_state, g.r_hp, g.r_bh};
}

void accumulate(ThetaGrad& acc, const ThetaGrad& g, double w) {
  acc.capacitance += w * g.capacitance;
  acc.r_mass += w * g.r_mass;
  acc.r_out += w * g.r_out;
  acc.t_mass += w * g.t_mass;
  acc.eta_backup += w * g.eta_backup;
  acc.a_eff += w * g.a_eff;
  acc.o_state += w * g.o_state;
  acc.r_hp += w * g.r_hp;
  acc.r_bh += w * g.r_bh;
  acc.x0 += w * g.x0;
  acc.weakly_active = acc.weakly_active || g.weakly_active;
}

struct SampleTerm {
  double state = 0.0;
  double action = 0.0;
  ThetaGrad grad;
};

SampleTerm sample_term(const PhysicalParams& ts, const QuadCostParams& tc, const PolicyContext& ctx,
                       const ImitationSample& s, double lambda, bool with_grad) {
  const auto out = policy_forward_backward(ts, tc, ctx.cop, s.x_t, s.exo, s.targets, ctx.bounds, ctx.solver);
  const double dx = out.solution.x_star[0] - s.x_next;
  const Power du{out.solution.u_star[0][0] - s.u_t[0], out.solution.u_star[0][1] - s.u_t[1]};
  SampleTerm t;
  t.state = dx * dx;
  t.action = du[0] * du[0] + du[1] * du[1];
  if (with_grad) {
    auto up = TrajectoryGrad::zeros(s.exo.size());
    up.x[0] = 2.0 * dx;
    up.u[0] = {2.0 * lambda * du[0], 2.0 * lambda * du[1]};
    t.grad = out.backward(up);
  }
  return t;
}

std::vector<SampleTerm> sample_terms(const PhysicalParams& ts, const QuadCostParams& tc, const PolicyContext& ctx,
                                     std::span<const ImitationSample> data, std::span<const std::size_t> idx,
                                     double lambda, bool with_grad, Exec exec) {
  std::vector<SampleTerm> terms(idx.size());
  std::vector<std::exception_ptr> errors(idx.size());
  const auto n = static_cast<long>(idx.size());
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) {
      try {
        terms[i] = sample_term(ts, tc, ctx, data[idx[i]], lambda, with_grad);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    for (long i = 0; i < n; ++i) terms[i] = sample_term(ts, tc, ctx, data[idx[i]], lambda, with_grad);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return terms;
}

void check_sample(const ImitationSample& s, std::size_t i) {
  if (s.exo.empty() || s.exo.size() != s.targets.size())
    throw ConfigError("imitation sample " + std::to_string(i) + ": forecast and targets must be non-empty and equal length");
}

std::string fmt_params(const PhysicalParams& s, const QuadCostParams& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "C=%.6g R_m=%.6g R_out=%.6g T_m=%.6g eta=%.6g a_eff=%.6g O=%.6g R_hp=%.6g R_bh=%.6g",
                s.capacitance, s.r_mass, s.r_out, s.t_mass, s.eta_backup, s.a_eff, c.o_state, c.r_hp, c.r_bh);
  return buf;
}

}  // namespace

void IbexHyper::validate() const {
  if (!(alpha_imit > 0.0) || !(alpha_state > 0.0) || !(alpha_cost > 0.0))
    throw ConfigError("learning rates must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (batch_m < 1) throw ConfigError("batch size must be at least 1");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (!(fixed_w_c >= 0.0)) throw ConfigError("fixed_w_c must be non-negative");
  if (state_passes < 1) throw ConfigError("state_passes must be at least 1");
}

std::string to_string(OnlineOptimizer o) { return o == OnlineOptimizer::kAdam ? "adam" : "gradient"; }

OnlineOptimizer online_optimizer_from_string(const std::string& s) {
  if (s == "adam") return OnlineOptimizer::kAdam;
  if (s == "gradient") return OnlineOptimizer::kGradient;
  throw ConfigError("unknown online optimizer '" + s + "' (expected adam or gradient)");
}

std::array<double, 6> AdamMoments::direction(std::span<const double> g) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  ++t;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
  std::array<double, 6> d{};
  for (std::size_t i = 0; i < std::min(g.size(), d.size()); ++i) {
    m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
    v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
    d[i] = (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
  }
  return d;
}

QuadCostParams project_cost(QuadCostParams c) {
  c.o_state = std::max(c.o_state, kCostFloor);
  c.r_hp = std::max(c.r_hp, kCostFloor);
  c.r_bh = std::max(c.r_bh, kCostFloor);
  return c;
}

PhysicalParams project_state(PhysicalParams p) {
  p.capacitance = std::max(p.capacitance, kResistanceFloor);
  p.r_mass = std::max(p.r_mass, kResistanceFloor);
  p.r_out = std::max(p.r_out, kResistanceFloor);
  p.eta_backup = std::clamp(p.eta_backup, 1e-3, 2.0);
  return p;
}

BatchEvaluation imitation_batch(const PhysicalParams& theta_state, const QuadCostParams& theta_cost,
                                const PolicyContext& ctx, std::span<const ImitationSample> dataset,
                                std::span<const std::size_t> idx, double lambda, Exec exec) {
  if (idx.empty()) throw ConfigError("imitation batch is empty");
  const auto terms = sample_terms(theta_state, theta_cost, ctx, dataset, idx, lambda, true, exec);
  const double w = 1.0 / static_cast<double>(idx.size());
  BatchEvaluation ev;
  for (const auto& t : terms) {
    ev.loss.state += w * t.state;
    ev.loss.action += w * t.action;
    accumulate(ev.grad, t.grad, w);
    if (t.grad.weakly_active) ++ev.weakly_active;
  }
  ev.loss.imitation = ev.loss.state + lambda * ev.loss.action;
  return ev;
}

ImitationLosses evaluate_imitation(const PhysicalParams& theta_state, const QuadCostParams& theta_cost,
                                   const PolicyContext& ctx, std::span<const ImitationSample> dataset, double lambda,
                                   Exec exec) {
  if (dataset.empty()) throw ConfigError("imitation dataset is empty");
  std::vector<std::size_t> idx(dataset.size());
  std::iota(idx.begin(), idx.end(), 0);
  const auto terms = sample_terms(theta_state, theta_cost, ctx, dataset, idx, lambda, false, exec);
  const double w = 1.0 / static_cast<double>(idx.size());
  ImitationLosses l;
  for (const auto& t : terms) {
    l.state += w * t.state;
    l.action += w * t.action;
  }
  l.imitation = l.state + lambda * l.action;
  return l;
}

double action_rms(const PhysicalParams& theta_state, const QuadCostParams& theta_cost, const PolicyContext& ctx,
                  std::span<const ImitationSample> dataset) {
  return std::sqrt(0.5 * evaluate_imitation(theta_state, theta_cost, ctx, dataset, 0.0).action);
}

PretrainResult imitation_pretrain(std::span<const ImitationSample> dataset, const IbexHyper& hyper,
                                  const PhysicalParams& init_state, const QuadCostParams& init_cost,
                                  const PolicyContext& ctx, const PretrainOptions& options) {
  hyper.validate();
  init_state.validate();
  init_cost.validate();
  if (dataset.empty()) throw ConfigError("imitation dataset is empty");
  for (std::size_t i = 0; i < dataset.size(); ++i) check_sample(dataset[i], i);

  PretrainResult res;
  res.theta_state = init_state;
  res.theta_cost = init_cost;
  res.initial = evaluate_imitation(init_state, init_cost, ctx, dataset, hyper.lambda, options.exec);

  // Adam with the usual moment decay rates.
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  ParamVec m{};
  ParamVec v{};
  long t = 0;

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  const auto bm = static_cast<std::size_t>(hyper.batch_m);

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    ImitationLosses seen;
    for (std::size_t b = 0; b < order.size(); b += bm) {
      const std::span<const std::size_t> idx(order.data() + b, std::min(bm, order.size() - b));
      const auto ev = imitation_batch(res.theta_state, res.theta_cost, ctx, dataset, idx, hyper.lambda, options.exec);
      // Scaled by max(1, lambda) so the limit reads in physical units for any action weight.
      const double scaled = ev.loss.imitation / std::max(1.0, hyper.lambda);
      if (!std::isfinite(scaled) || scaled > options.divergence_limit) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "imitation pretraining diverged at epoch %d, batch %zu: scaled loss %.6g (limit %.3g); ",
                      epoch, b / bm, scaled, options.divergence_limit);
        throw NumericalError(buf + fmt_params(res.theta_state, res.theta_cost));
      }
      const double w = static_cast<double>(idx.size()) / static_cast<double>(order.size());
      seen.state += w * ev.loss.state;
      seen.action += w * ev.loss.action;
      seen.imitation += w * ev.loss.imitation;

      const ParamVec g = grad_vec(ev.grad);
      double gmax = 0.0;
      for (double gi : g) gmax = std::max(gmax, std::abs(gi));
      if (gmax < options.grad_tol) {
        ++res.skipped_steps;
        continue;
      }
      ++t;
      ParamVec p = pack(res.theta_state, res.theta_cost);
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
      for (std::size_t i = 0; i < kNumParams; ++i) {
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
        p[i] -= hyper.alpha_imit * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
      }
      unpack(p, res.theta_state, res.theta_cost);
      res.theta_state = project_state(res.theta_state);
      res.theta_cost = project_cost(res.theta_cost);
    }
    res.epochs.push_back(seen);
  }
  res.final = evaluate_imitation(res.theta_state, res.theta_cost, ctx, dataset, hyper.lambda, options.exec);
  return res;
}

std::vector<ExogenousInput> forecast_exogenous(const Observation& obs) {
  std::vector<ExogenousInput> exo;
  exo.reserve(obs.forecast.size());
  for (const auto& f : obs.forecast) exo.push_back({f.t_out, f.i_sol});
  return exo;
}

std::vector<double> forecast_targets(const Observation& obs) {
  std::vector<double> t;
  t.reserve(obs.forecast.size());
  for (const auto& f : obs.forecast) t.push_back(f.target);
  return t;
}

ImitationSample sample_from_transition(const Transition& tr) {
  ImitationSample s;
  s.x_t = tr.obs.t_return;
  s.u_t = tr.applied;
  s.x_next = tr.x_next;
  s.exo = forecast_exogenous(tr.obs);
  s.targets = forecast_targets(tr.obs);
  return s;
}

std::vector<ImitationSample> log_to_imitation(const InteractionLog& log, const std::vector<WeatherPoint>& weather,
                                              const SetpointSchedule& schedule, const SiteClock& clock, int horizon,
                                              TargetSource targets) {
  std::unordered_map<long long, std::size_t> by_time;
  for (std::size_t i = 0; i < weather.size(); ++i) by_time.emplace(weather[i].time.time_since_epoch().count(), i);
  std::unordered_map<long long, double> logged;
  if (targets == TargetSource::kLoggedSetpoint) {
    for (const auto& r : log) logged.emplace(r.time.time_since_epoch().count(), r.setpoint);
  }
  std::vector<ImitationSample> out;
  for (std::size_t k = 0; k + 1 < log.size(); ++k) {
    const auto& r = log[k];
    const auto& n = log[k + 1];
    if (!r.readback_ok || n.time - r.time != std::chrono::hours{1}) continue;
    const auto it = by_time.find(r.time.time_since_epoch().count());
    if (it == by_time.end()) throw DataError("no weather row for log time " + format_rfc3339(r.time));
    if (it->second + static_cast<std::size_t>(horizon) > weather.size()) continue;
    Transition tr;
    tr.obs = make_observation(static_cast<long>(k), weather, it->second, horizon, clock, schedule, r.t_return);
    if (targets == TargetSource::kLoggedSetpoint) {
      for (int l = 0; l < horizon; ++l) {
        const auto sp = logged.find((r.time + std::chrono::hours{l}).time_since_epoch().count());
        if (sp != logged.end()) tr.obs.forecast[static_cast<std::size_t>(l)].target = sp->second;
      }
    }
    tr.applied = {r.p_hp, r.p_bh};
    tr.x_next = n.t_return;
    out.push_back(sample_from_transition(tr));
  }
  return out;
}

IbexDecision ibex_decide(double x_t, std::span<const ExogenousInput> exo, std::span<const double> targets,
                         const PhysicalParams& theta_state, const QuadCostParams& theta_cost, const PolicyContext& ctx) {
  if (exo.empty()) throw ConfigError("ibex_decide needs a non-empty forecast");
  IbexDecision d{{}, policy_forward_backward(theta_state, theta_cost, ctx.cop, x_t, exo, targets, ctx.bounds, ctx.solver)};
  const auto& sol = d.policy.solution;
  if (!sol.converged) throw NumericalError("ibex policy solve did not converge");
  d.decision.u_star = sol.u_star[0];
  d.decision.x_next_pred = sol.x_star[0];
  d.decision.setpoint_command = std::clamp(quantize_setpoint(sol.x_star[0]), 10.0, 30.0);
  d.decision.objective = sol.objective;
  d.decision.iterations = sol.iterations;
  return d;
}

StateUpdate ibex_update_state(const PhysicalParams& theta_state, const QuadCostParams& theta_cost,
                              std::span<const Transition> buffer, const IbexHyper& hyper, const PolicyContext& ctx,
                              AdamMoments* adam) {
  StateUpdate out;
  out.theta_state = theta_state;
  if (buffer.empty()) {
    out.notice = "state update skipped: no validated transitions";
    return out;
  }
  const double w = 1.0 / static_cast<double>(buffer.size());
  for (int pass = 0; pass < hyper.state_passes; ++pass) {
    ThetaGrad g;
    double loss = 0.0;
    for (const auto& tr : buffer) {
      const auto s = sample_from_transition(tr);
      const auto pol =
          policy_forward_backward(out.theta_state, theta_cost, ctx.cop, s.x_t, s.exo, s.targets, ctx.bounds, ctx.solver);
      const double dx = pol.solution.x_star[0] - s.x_next;
      loss += w * dx * dx;
      auto up = TrajectoryGrad::zeros(s.exo.size());
      up.x[0] = 2.0 * w * dx;
      accumulate(g, pol.backward(up), 1.0);
    }
    if (pass == 0) out.loss_before = loss;
    const std::array<double, 6> raw{g.capacitance, g.r_mass, g.r_out, g.t_mass, g.eta_backup, g.a_eff};
    const auto d = adam ? adam->direction(raw) : raw;
    auto& p = out.theta_state;
    p.capacitance -= hyper.alpha_state * d[0];
    p.r_mass -= hyper.alpha_state * d[1];
    p.r_out -= hyper.alpha_state * d[2];
    p.t_mass -= hyper.alpha_state * d[3];
    p.eta_backup -= hyper.alpha_state * d[4];
    p.a_eff -= hyper.alpha_state * d[5];
    p = project_state(p);
    out.grad = g;
  }
  return out;
}

CostUpdate ibex_update_cost(const QuadCostParams& theta_cost, const PolicyOutput& cached,
                            std::span<const double> targets, const EconomicWeights& weights, double fixed_w_c,
                            double alpha_cost, AdamMoments* adam) {
  const auto& sol = cached.solution;
  if (!sol.converged) throw NumericalError("cost update needs a converged policy solution");
  if (targets.size() != sol.x_star.size()) throw ConfigError("cost update: targets do not match the horizon");
  const std::vector<double> w_c(targets.size(), fixed_w_c);
  CostUpdate out;
  out.reward = -economic_cost(sol.u_star, sol.x_star, targets, w_c, weights.w_d, weights.w_e);
  auto up = economic_cost_gradient(sol.u_star, sol.x_star, targets, w_c, weights.w_d, weights.w_e);
  for (auto& x : up.x) x = -x;
  for (auto& u : up.u) u = {-u[0], -u[1]};
  out.grad = cached.backward(up);
  out.theta_cost = theta_cost;
  const std::array<double, 3> raw{out.grad.o_state, out.grad.r_hp, out.grad.r_bh};
  std::array<double, 3> d = raw;
  if (adam) {
    const auto a = adam->direction(raw);
    std::copy_n(a.begin(), 3, d.begin());
  }
  out.theta_cost.o_state += alpha_cost * d[0];
  out.theta_cost.r_hp += alpha_cost * d[1];
  out.theta_cost.r_bh += alpha_cost * d[2];
  out.theta_cost = project_cost(out.theta_cost);
  return out;
}

IbexController::IbexController(PhysicalParams theta_state, QuadCostParams theta_cost, PolicyContext ctx,
                               IbexHyper hyper, EconomicWeights weights, IbexOptions options)
    : theta_state_(theta_state),
      theta_cost_(theta_cost),
      ctx_(ctx),
      hyper_(hyper),
      weights_(weights),
      options_(options) {
  theta_state_.validate();
  theta_cost_.validate();
  ctx_.bounds.validate();
  hyper_.validate();
  weights_.validate();
}

ControllerDecision IbexController::decide(const Observation& obs) {
  last_step_ = obs.step;
  const auto exo = forecast_exogenous(obs);
  const auto targets = forecast_targets(obs);
  auto d = ibex_decide(obs.t_return, exo, targets, theta_state_, theta_cost_, ctx_);
  if (options_.learn_cost) {
    auto* adam = hyper_.online_optimizer == OnlineOptimizer::kAdam ? &cost_moments_ : nullptr;
    theta_cost_ =
        ibex_update_cost(theta_cost_, d.policy, targets, weights_, hyper_.fixed_w_c, hyper_.alpha_cost, adam).theta_cost;
    journal_.push_back({obs.step, 'c', theta_state_, theta_cost_, 0});
  }
  return d.decision;
}

void IbexController::on_midnight(std::span<const Transition> validated) {
  if (!options_.learn_state) return;
  auto* adam = hyper_.online_optimizer == OnlineOptimizer::kAdam ? &state_moments_ : nullptr;
  const auto up = ibex_update_state(theta_state_, theta_cost_, validated, hyper_, ctx_, adam);
  if (!up.notice.empty()) {
    notices_.push_back("step " + std::to_string(last_step_) + ": " + up.notice);
    return;
  }
  theta_state_ = up.theta_state;
  journal_.push_back({last_step_, 's', theta_state_, theta_cost_, static_cast<int>(validated.size())});
}

void write_checkpoint(const std::filesystem::path& path, const IbexCheckpoint& ckpt) {
  using nlohmann::json;
  json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["kind"] = kCheckpointKind;
  j["label"] = ckpt.label;
  const auto& s = ckpt.theta_state;
  j["theta_state"] = {{"capacitance_j_per_degc", capacitance_to_joules(s.capacitance)},
                      {"r_mass_degc_per_kw", s.r_mass},
                      {"r_out_degc_per_kw", s.r_out},
                      {"t_mass_degc", s.t_mass},
                      {"eta_backup", s.eta_backup},
                      {"a_eff_m2", s.a_eff}};
  j["theta_cost"] = {{"o_state", ckpt.theta_cost.o_state}, {"r_hp", ckpt.theta_cost.r_hp}, {"r_bh", ckpt.theta_cost.r_bh}};
  const auto& h = ckpt.hyper;
  j["hyper"] = {{"alpha_imit", h.alpha_imit}, {"alpha_state", h.alpha_state}, {"alpha_cost", h.alpha_cost},
                {"lambda", h.lambda},         {"batch_m", h.batch_m},         {"epochs", h.epochs},
                {"fixed_w_c", h.fixed_w_c},   {"state_passes", h.state_passes},
                {"online_optimizer", to_string(h.online_optimizer)}};
  j["loss_history"] = json::array();
  for (const auto& l : ckpt.loss_history)
    j["loss_history"].push_back({{"state", l.state}, {"action", l.action}, {"imitation", l.imitation}});

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write checkpoint " + tmp.string());
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) throw DataError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

IbexCheckpoint read_checkpoint(const std::filesystem::path& path) {
  using nlohmann::json;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  IbexCheckpoint c;
  try {
    const json j = json::parse(in);
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion)
      throw DataError(path.string() + ": unsupported checkpoint format_version " + std::to_string(version));
    if (j.contains("kind") && j.at("kind").get<std::string>() != kCheckpointKind)
      throw DataError(path.string() + ": not an RL parameter checkpoint (kind " + j.at("kind").get<std::string>() + ")");
    c.label = j.value("label", std::string{});
    const auto& s = j.at("theta_state");
    c.theta_state.capacitance = capacitance_from_joules(s.at("capacitance_j_per_degc").get<double>());
    c.theta_state.r_mass = s.at("r_mass_degc_per_kw").get<double>();
    c.theta_state.r_out = s.at("r_out_degc_per_kw").get<double>();
    c.theta_state.t_mass = s.at("t_mass_degc").get<double>();
    c.theta_state.eta_backup = s.at("eta_backup").get<double>();
    c.theta_state.a_eff = s.at("a_eff_m2").get<double>();
    const auto& k = j.at("theta_cost");
    c.theta_cost = {k.at("o_state").get<double>(), k.at("r_hp").get<double>(), k.at("r_bh").get<double>()};
    const auto& h = j.at("hyper");
    c.hyper.alpha_imit = h.at("alpha_imit").get<double>();
    c.hyper.alpha_state = h.at("alpha_state").get<double>();
    c.hyper.alpha_cost = h.at("alpha_cost").get<double>();
    c.hyper.lambda = h.at("lambda").get<double>();
    c.hyper.batch_m = h.at("batch_m").get<int>();
    c.hyper.epochs = h.at("epochs").get<int>();
    c.hyper.fixed_w_c = h.at("fixed_w_c").get<double>();
    c.hyper.state_passes = h.at("state_passes").get<int>();
    c.hyper.online_optimizer = online_optimizer_from_string(h.at("online_optimizer").get<std::string>());
    for (const auto& l : j.at("loss_history"))
      c.loss_history.push_back({l.at("state").get<double>(), l.at("action").get<double>(), l.at("imitation").get<double>()});
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": malformed checkpoint: " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(path.string() + ": malformed checkpoint: " + e.what());
  }
  try {
    c.theta_state.validate();
    c.theta_cost.validate();
    c.hyper.validate();
  } catch (const ConfigError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return c;
}

}  // namespace hvac
