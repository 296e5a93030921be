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

// Differentiable-MPC reinforcement learning controller: offline imitation
// pretraining, then online updates of the cost weights every hour and of the
// physical parameters once a day from read-back-validated transitions.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hvac/controller.hpp"
#include "hvac/exec.hpp"
#include "hvac/lqr.hpp"
#include "hvac/mpc.hpp"
#include "hvac/plant.hpp"
#include "hvac/policy.hpp"
#include "hvac/thermal.hpp"

namespace hvac {

// Step rule for the online updates. Pretraining always uses Adam.
enum class OnlineOptimizer { kGradient, kAdam };

std::string to_string(OnlineOptimizer o);
OnlineOptimizer online_optimizer_from_string(const std::string& s);

struct IbexHyper {
  double alpha_imit = 0.05;
  double alpha_state = 1e-2;
  double alpha_cost = 1e-2;
  double lambda = 1000.0;
  int batch_m = 24;
  int epochs = 50;
  double fixed_w_c = 3.0;  // $/(degC h)
  int state_passes = 1;    // gradient steps per midnight update
  OnlineOptimizer online_optimizer = OnlineOptimizer::kAdam;

  void validate() const;
};

inline constexpr double kCostFloor = 1e-6;
inline constexpr double kResistanceFloor = 1e-3;

// Projections applied after every update: cost weights >= 1e-6; C, R_m,
// R_out >= 1e-3; eta clamped into [1e-3, 2]. T_m and a_eff are free.
QuadCostParams project_cost(QuadCostParams c);
PhysicalParams project_state(PhysicalParams p);

// One logged context: state, applied powers, the L-step forecast used by the
// policy and the observed next state.
struct ImitationSample {
  double x_t = 0.0;
  Power u_t{0.0, 0.0};
  double x_next = 0.0;
  std::vector<ExogenousInput> exo;
  std::vector<double> targets;
};

struct ImitationLosses {
  double state = 0.0;   // mean (x_{t+1} - x*_{t+1})^2, degC^2
  double action = 0.0;  // mean |u_t - u*_t|^2, kW^2
  double imitation = 0.0;
};

struct PolicyContext {
  CopCurve cop;
  InputBounds bounds;
  SolverConfig solver;
};

struct BatchEvaluation {
  ImitationLosses loss;
  ThetaGrad grad;  // of the imitation loss, averaged over the batch
  int weakly_active = 0;
};

// Losses and gradient over dataset[idx]. The parallel path computes the same
// per-sample terms and sums them in index order, so both paths agree bitwise.
BatchEvaluation imitation_batch(const PhysicalParams& theta_state, const QuadCostParams& theta_cost,
                                const PolicyContext& ctx, std::span<const ImitationSample> dataset,
                                std::span<const std::size_t> idx, double lambda, Exec exec = Exec::kParallel);

ImitationLosses evaluate_imitation(const PhysicalParams& theta_state, const QuadCostParams& theta_cost,
                                   const PolicyContext& ctx, std::span<const ImitationSample> dataset, double lambda,
                                   Exec exec = Exec::kParallel);

// sqrt(mean over samples and both inputs of (u_t - u*_t)^2), kW.
double action_rms(const PhysicalParams& theta_state, const QuadCostParams& theta_cost, const PolicyContext& ctx,
                  std::span<const ImitationSample> dataset);

struct PretrainResult {
  PhysicalParams theta_state;
  QuadCostParams theta_cost;
  ImitationLosses initial;  // full dataset, before training
  ImitationLosses final;    // full dataset, after training
  std::vector<ImitationLosses> epochs;  // batch-size-weighted means seen during each epoch
  int skipped_steps = 0;                // batches whose gradient was below grad_tol
};

struct PretrainOptions {
  std::uint64_t seed = 0;
  Exec exec = Exec::kParallel;
  double divergence_limit = 1e6;
  double grad_tol = 1e-10;  // max-abs batch gradient below which the step is skipped
};

// Adam over the nine parameters (theta_state and theta_cost) on shuffled
// mini-batches. Throws NumericalError with diagnostics when a batch loss
// divided by max(1, lambda) exceeds the divergence limit or turns non-finite.
PretrainResult imitation_pretrain(std::span<const ImitationSample> dataset, const IbexHyper& hyper,
                                  const PhysicalParams& init_state, const QuadCostParams& init_cost,
                                  const PolicyContext& ctx, const PretrainOptions& options = {});

// Policy inputs for one observation: the forecast's weather and targets.
std::vector<ExogenousInput> forecast_exogenous(const Observation& obs);
std::vector<double> forecast_targets(const Observation& obs);

ImitationSample sample_from_transition(const Transition& tr);

// Where the tracking targets of a pretraining sample come from.
// kLoggedSetpoint uses the setpoint recorded for each hour of the window and
// falls back to the schedule for hours missing from the log.
enum class TargetSource { kSchedule, kLoggedSetpoint };

// Samples from consecutive read-back rows one hour apart. The context is
// rebuilt from the weather trace and schedule as the controller would see it;
// the applied action is the logged hour-average power.
std::vector<ImitationSample> log_to_imitation(const InteractionLog& log, const std::vector<WeatherPoint>& weather,
                                              const SetpointSchedule& schedule, const SiteClock& clock,
                                              int horizon = 24, TargetSource targets = TargetSource::kSchedule);

struct IbexDecision {
  ControllerDecision decision;
  PolicyOutput policy;
};

IbexDecision ibex_decide(double x_t, std::span<const ExogenousInput> exo, std::span<const double> targets,
                         const PhysicalParams& theta_state, const QuadCostParams& theta_cost, const PolicyContext& ctx);

// Adam moments (decay 0.9 and 0.999, eps 1e-8) for up to six coordinates.
struct AdamMoments {
  std::array<double, 6> m{};
  std::array<double, 6> v{};
  long t = 0;

  // Bias-corrected direction for gradient g; advances the moments.
  std::array<double, 6> direction(std::span<const double> g);
};

struct StateUpdate {
  PhysicalParams theta_state;
  double loss_before = 0.0;
  ThetaGrad grad;  // of the last pass
  std::string notice;  // set when the buffer was empty
};

// Descent on the mean squared one-step prediction error over the buffer,
// differentiating through the policy with theta_cost held fixed. Plain
// gradient steps unless Adam moments are supplied.
StateUpdate ibex_update_state(const PhysicalParams& theta_state, const QuadCostParams& theta_cost,
                              std::span<const Transition> buffer, const IbexHyper& hyper, const PolicyContext& ctx,
                              AdamMoments* adam = nullptr);

struct CostUpdate {
  QuadCostParams theta_cost;
  double reward = 0.0;  // -J on the cached predicted trajectory
  ThetaGrad grad;       // d reward / d theta
};

// Ascent on R = -J(U*, X*) with w_c fixed for every step. Plain gradient
// steps unless Adam moments are supplied.
CostUpdate ibex_update_cost(const QuadCostParams& theta_cost, const PolicyOutput& cached,
                            std::span<const double> targets, const EconomicWeights& weights, double fixed_w_c,
                            double alpha_cost, AdamMoments* adam = nullptr);

struct IbexOptions {
  bool learn_state = true;
  bool learn_cost = true;
  bool direct_power = false;  // apply u* directly (synthetic experts)
};

struct IbexJournalEntry {
  long step = 0;
  char kind = 'c';  // 'c' cost update, 's' state update
  PhysicalParams theta_state;
  QuadCostParams theta_cost;
  int buffer_size = 0;
};

class IbexController final : public Controller {
 public:
  IbexController(PhysicalParams theta_state, QuadCostParams theta_cost, PolicyContext ctx, IbexHyper hyper,
                 EconomicWeights weights, IbexOptions options = {});
  std::string kind() const override { return "rl"; }
  ControllerDecision decide(const Observation& obs) override;
  void on_midnight(std::span<const Transition> validated) override;
  bool direct_power() const override { return options_.direct_power; }

  const PhysicalParams& theta_state() const { return theta_state_; }
  const QuadCostParams& theta_cost() const { return theta_cost_; }
  const IbexHyper& hyper() const { return hyper_; }
  const std::vector<IbexJournalEntry>& journal() const { return journal_; }
  const std::vector<std::string>& notices() const { return notices_; }

 private:
  PhysicalParams theta_state_;
  QuadCostParams theta_cost_;
  PolicyContext ctx_;
  IbexHyper hyper_;
  EconomicWeights weights_;
  IbexOptions options_;
  long last_step_ = 0;
  AdamMoments state_moments_;
  AdamMoments cost_moments_;
  std::vector<IbexJournalEntry> journal_;
  std::vector<std::string> notices_;
};

struct IbexCheckpoint {
  PhysicalParams theta_state;
  QuadCostParams theta_cost;
  IbexHyper hyper;
  std::vector<ImitationLosses> loss_history;
  std::string label;
};

inline constexpr int kCheckpointFormatVersion = 1;
inline constexpr const char* kCheckpointKind = "rl-theta";

// JSON with C stored in J/degC. Written to a temporary sibling and renamed.
void write_checkpoint(const std::filesystem::path& path, const IbexCheckpoint& ckpt);
IbexCheckpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace hvac
