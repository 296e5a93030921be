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

#include "hvac/identification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hvac/errors.hpp"

namespace hvac {

namespace {

// Least squares with a rank check; returns coefficients.
Eigen::VectorXd ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const char* what) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < x.cols()) throw DataError(std::string(what) + ": collinear regression design");
  return qr.solve(y);
}

bool is_night(const IdentSample& s) { return s.i_sol == 0.0; }

// In-sample one-step error of a fitted (R_m, C) pair over every sun-free sample.
double night_sse(std::span<const IdentSample> samples, double r_out, const RmCFit& f) {
  const double w_o = f.r_mass / (f.r_mass + r_out);
  const double r_eq = f.r_mass * r_out / (f.r_mass + r_out);
  const double gamma = f.beta / (1.0 - 0.5 * f.beta);
  double sse = 0.0;
  for (const auto& s : samples) {
    if (!is_night(s)) continue;
    const double z = w_o * s.t_out + r_eq * s.q_c - 0.5 * (s.t + s.t_next);
    const double e = (s.t_next - s.t) - gamma * z - f.intercept;
    sse += e * e;
  }
  return sse;
}

}  // namespace

bool is_steady(const IdentSample& s, double threshold) {
  return s.i_sol == 0.0 && std::abs(s.t_next - s.t) < threshold;
}

double estimate_r_out(std::span<const IdentSample> samples, std::optional<StorageCorrection> corr, double threshold) {
  std::vector<const IdentSample*> steady;
  for (const auto& s : samples) {
    if (is_steady(s, threshold)) steady.push_back(&s);
  }
  if (steady.size() < 10)
    throw DataError("R_out estimation needs at least 10 steady samples, found " + std::to_string(steady.size()));

  double t_min = std::numeric_limits<double>::infinity(), t_max = -t_min;
  for (const auto* s : steady) {
    t_min = std::min(t_min, s->t);
    t_max = std::max(t_max, s->t);
  }
  const bool use_t = t_max - t_min > 1e-9;
  const double k_store = corr && corr->r_eq > 0.0 ? (1.0 / (1.0 - corr->a) - 0.5) / corr->r_eq : 0.0;

  // Consecutive steady hours are averaged into one row weighted by run length; the
  // storage term then telescopes to the run's end-to-end temperature change.
  struct Row {
    double dx = 0.0, t = 0.0, y = 0.0;
    int m = 0;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < steady.size(); ++i) {
    const auto& s = *steady[i];
    const bool extend = i > 0 && !rows.empty() && s.hour_index == steady[i - 1]->hour_index + 1;
    if (!extend) rows.emplace_back();
    Row& r = rows.back();
    // Midpoint temperature keeps regressor noise uncorrelated with the noise in dT.
    const double tm = 0.5 * (s.t + s.t_next);
    r.dx += tm - s.t_out;
    r.t += tm;
    r.y += s.q_c - k_store * (s.t_next - s.t);
    r.m += 1;
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd x(n, use_t ? 3 : 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    const double w = std::sqrt(static_cast<double>(r.m));
    x(i, 0) = w * r.dx / r.m;
    x(i, 1) = w;
    if (use_t) x(i, 2) = w * r.t / r.m;
    y[i] = w * r.y / r.m;
  }
  const Eigen::VectorXd beta = ols(x, y, "R_out estimation");
  if (!(beta[0] > 0.0)) throw DataError("R_out estimation produced a non-positive conductance");
  return 1.0 / beta[0];
}

std::vector<double> linear_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw ConfigError("invalid grid specification");
  std::vector<double> g;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
  return g;
}

RmCFit fit_rm_c(std::span<const IdentSample> samples, double r_out, std::span<const double> grid, double dt) {
  if (grid.empty()) throw ConfigError("R_m grid is empty");
  if (!(r_out > 0.0)) throw ConfigError("R_out must be positive");
  std::vector<const IdentSample*> use;
  for (const auto& s : samples) {
    if (is_night(s)) use.push_back(&s);
  }
  if (use.size() < 12) throw DataError("R_m/C fit needs at least 12 sun-free samples, found " + std::to_string(use.size()));
  const std::size_t n_train = use.size() * 2 / 3;
  const std::size_t n_val = use.size() - n_train;

  RmCFit best;
  best.validation_rmse = std::numeric_limits<double>::infinity();
  bool any = false;
  for (double r_m : grid) {
    if (!(r_m > 0.0)) continue;
    const double w_o = r_m / (r_m + r_out);
    const double r_eq = r_m * r_out / (r_m + r_out);
    auto z_of = [&](const IdentSample& s) { return w_o * s.t_out + r_eq * s.q_c - 0.5 * (s.t + s.t_next); };
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n_train), 2);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n_train));
    for (std::size_t i = 0; i < n_train; ++i) {
      x(static_cast<Eigen::Index>(i), 0) = z_of(*use[i]);
      x(static_cast<Eigen::Index>(i), 1) = 1.0;
      y[static_cast<Eigen::Index>(i)] = use[i]->t_next - use[i]->t;
    }
    Eigen::VectorXd coef;
    try {
      coef = ols(x, y, "R_m/C fit");
    } catch (const DataError&) {
      continue;
    }
    // Regressing on the midpoint gives gamma = beta / (1 - beta/2).
    const double gamma = coef[0];
    const double beta = gamma / (1.0 + 0.5 * gamma);
    if (!(beta > 0.0 && beta < 1.0)) continue;
    double sse = 0.0;
    for (std::size_t i = n_train; i < use.size(); ++i) {
      const double pred = gamma * z_of(*use[i]) + coef[1];
      const double e = (use[i]->t_next - use[i]->t) - pred;
      sse += e * e;
    }
    const double rmse = std::sqrt(sse / static_cast<double>(n_val));
    if (rmse < best.validation_rmse) {
      best = {r_m, -dt / (r_eq * std::log(1.0 - beta)), beta, coef[1], rmse};
      any = true;
    }
  }
  if (!any) throw DataError("R_m/C fit: no grid value gave a physical fit (0 < 1 - a < 1)");
  return best;
}

ExogenousGainModel::Features ExogenousGainModel::features(double t_out, double i_sol, double wind, int hour) {
  const double ang = 2.0 * std::numbers::pi * hour / 24.0;
  return {t_out, i_sol, wind, std::sin(ang), std::cos(ang)};
}

void ExogenousGainModel::fit(const std::vector<Features>& x, const std::vector<double>& y, double lambda, double gamma) {
  if (x.empty() || x.size() != y.size()) throw DataError("gain regressor needs matching non-empty inputs");
  if (!(lambda > 0.0)) throw ConfigError("kernel ridge lambda must be positive");
  const std::size_t n = x.size();
  lambda_ = lambda;
  gamma_ = gamma > 0.0 ? gamma : 1.0 / kFeatures;
  for (int j = 0; j < kFeatures; ++j) {
    double m = 0.0;
    for (const auto& r : x) m += r[j];
    m /= static_cast<double>(n);
    double v = 0.0;
    for (const auto& r : x) v += (r[j] - m) * (r[j] - m);
    const double sd = std::sqrt(v / static_cast<double>(n));
    mean_[j] = m;
    scale_[j] = sd > 1e-12 ? sd : 1.0;
  }
  y_mean_ = 0.0;
  for (double v : y) y_mean_ += v / static_cast<double>(n);

  x_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < kFeatures; ++j) x_[i][j] = (x[i][j] - mean_[j]) / scale_[j];
  }
  Eigen::MatrixXd k(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double d2 = 0.0;
      for (int f = 0; f < kFeatures; ++f) d2 += (x_[i][f] - x_[j][f]) * (x_[i][f] - x_[j][f]);
      const double v = std::exp(-gamma_ * d2);
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      k(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
    k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += lambda_;
  }
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) rhs[static_cast<Eigen::Index>(i)] = y[i] - y_mean_;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) throw NumericalError("kernel ridge system is not positive definite");
  const Eigen::VectorXd a = llt.solve(rhs);
  alpha_.assign(a.data(), a.data() + a.size());
}

double ExogenousGainModel::predict(const Features& f) const {
  if (!trained()) return 0.0;
  Features z;
  for (int j = 0; j < kFeatures; ++j) z[j] = (f[j] - mean_[j]) / scale_[j];
  double out = y_mean_;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    double d2 = 0.0;
    for (int j = 0; j < kFeatures; ++j) d2 += (z[j] - x_[i][j]) * (z[j] - x_[i][j]);
    out += alpha_[i] * std::exp(-gamma_ * d2);
  }
  return out;
}

ExogenousGainModel::State ExogenousGainModel::state() const {
  return {x_, alpha_, mean_, scale_, y_mean_, gamma_, lambda_};
}

ExogenousGainModel ExogenousGainModel::from_state(const State& s) {
  if (s.x.size() != s.alpha.size()) throw DataError("gain regressor state is inconsistent");
  ExogenousGainModel m;
  m.x_ = s.x;
  m.alpha_ = s.alpha;
  m.mean_ = s.mean;
  m.scale_ = s.scale;
  m.y_mean_ = s.y_mean;
  m.gamma_ = s.gamma;
  m.lambda_ = s.lambda;
  return m;
}

double implied_gain(const IdentSample& s, const PhysicalParams& p, double dt) {
  const double r_eq = p.r_mass * p.r_out / (p.r_mass + p.r_out);
  const double w_m = p.r_out / (p.r_mass + p.r_out);
  const double w_o = p.r_mass / (p.r_mass + p.r_out);
  const double a = std::exp(-dt / (r_eq * p.capacitance));
  const double z = w_m * p.t_mass + w_o * s.t_out + r_eq * s.q_c - s.t;
  return ((s.t_next - s.t) / (1.0 - a) - z) / r_eq;
}

IdentifiedModel identify_model(std::span<const IdentSample> samples, const IdentifyOptions& opt) {
  if (samples.size() < 48) throw DataError("identification needs at least 48 hourly transitions");
  IdentifiedModel out;
  double t_mean = 0.0;
  for (const auto& s : samples) t_mean += s.t / static_cast<double>(samples.size());

  // Coarse grid over R_m, then successively finer grids around the incumbent.
  auto fit_refined = [&](double r_out) {
    RmCFit fit = fit_rm_c(samples, r_out, linear_grid(opt.rm_lo, opt.rm_hi, opt.rm_step));
    double step = opt.rm_step;
    for (int r = 0; r < opt.refinements; ++r) {
      const double lo = std::max(step / 10.0, fit.r_mass - step);
      const double hi = fit.r_mass + step;
      step /= 10.0;
      fit = fit_rm_c(samples, r_out, linear_grid(lo, hi, step));
    }
    return fit;
  };

  double r_out = estimate_r_out(samples, std::nullopt, opt.steady_threshold);
  for (int outer = 0; outer < opt.outer_iterations; ++outer) {
    const RmCFit f = fit_refined(r_out);
    const double r_eq = f.r_mass * r_out / (f.r_mass + r_out);
    r_out = estimate_r_out(samples, StorageCorrection{1.0 - f.beta, r_eq}, opt.steady_threshold);
  }
  RmCFit fit = fit_refined(r_out);
  if (opt.joint_span > 0.0) {
    // Profile the validation error over R_out around the steady-state estimate.
    double step = opt.joint_span / 10.0;
    double centre = r_out;
    for (int r = 0; r < opt.refinements + 1; ++r) {
      double best_r = centre;
      RmCFit best_fit = fit;
      for (int i = -10; i <= 10; ++i) {
        const double cand = centre * (1.0 + step * i);
        if (!(cand > 0.0)) continue;
        RmCFit f;
        try {
          f = fit_refined(cand);
        } catch (const DataError&) {
          continue;
        }
        if (night_sse(samples, cand, f) < night_sse(samples, best_r, best_fit)) {
          best_fit = f;
          best_r = cand;
        }
      }
      centre = best_r;
      fit = best_fit;
      step /= 10.0;
    }
    r_out = centre;
  }

  out.params.capacitance = fit.capacitance;
  out.params.r_mass = fit.r_mass;
  out.params.r_out = r_out;
  out.params.t_mass = t_mean;
  out.params.eta_backup = 1.0;
  out.params.a_eff = 0.0;

  // Exogenous gains on the first two thirds, held-out RMSE on the rest.
  const std::size_t n_train = samples.size() * 2 / 3;
  std::vector<ExogenousGainModel::Features> xf;
  std::vector<double> yf;
  for (std::size_t i = 0; i < n_train; ++i) {
    const auto& s = samples[i];
    xf.push_back(ExogenousGainModel::features(s.t_out, s.i_sol, s.wind, s.local_hour));
    yf.push_back(implied_gain(s, out.params));
  }
  out.qe.fit(xf, yf, opt.kernel_lambda);
  double sse = 0.0;
  for (std::size_t i = n_train; i < samples.size(); ++i) {
    const auto& s = samples[i];
    auto c = continuous_matrices(out.params, CopCurve{1.0, 0.0, 1.0}, s.t_out);
    const auto m = discretize_zoh(c, 1.0);
    const double qe = out.qe.predict(ExogenousGainModel::features(s.t_out, s.i_sol, s.wind, s.local_hour));
    // q_c already includes COP, so feed it through the unit-efficiency channel.
    const double pred = step_dynamics(m, s.t, {0.0, s.q_c + qe}, {out.params.t_mass, s.t_out, 0.0});
    sse += (pred - s.t_next) * (pred - s.t_next);
  }
  out.holdout_rmse = std::sqrt(sse / static_cast<double>(samples.size() - n_train));
  for (const auto& s : samples) out.steady_samples += is_steady(s, opt.steady_threshold) ? 1 : 0;
  out.fit_samples = static_cast<int>(samples.size());
  return out;
}

}  // namespace hvac
