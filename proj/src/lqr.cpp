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

#include "hvac/lqr.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "hvac/errors.hpp"

namespace hvac {

void QuadCostParams::validate() const {
  if (!(o_state > 0.0 && r_hp > 0.0 && r_bh > 0.0))
    throw ConfigError("quadratic cost weights must be positive");
}

void InputBounds::validate() const {
  for (std::size_t j = 0; j < 2; ++j) {
    if (!(lo[j] <= hi[j])) throw ConfigError("infeasible input bounds: min exceeds max");
  }
}

void LqrProblem::validate() const {
  if (dynamics.empty()) throw ConfigError("LQR horizon must be at least one step");
  if (p.size() != dynamics.size()) throw ConfigError("LQR linear cost length differs from horizon");
  cost.validate();
  bounds.validate();
}

LqrProblem make_tracking_problem(std::vector<LqrStep> dynamics, const QuadCostParams& cost,
                                 std::span<const double> targets, double x0, const InputBounds& bounds) {
  if (targets.size() != dynamics.size()) throw ConfigError("target sequence length differs from horizon");
  LqrProblem prob;
  prob.dynamics = std::move(dynamics);
  prob.cost = cost;
  prob.x0 = x0;
  prob.bounds = bounds;
  prob.p.resize(targets.size());
  for (std::size_t k = 0; k < targets.size(); ++k) prob.p[k] = -cost.o_state * targets[k];
  return prob;
}

TrajectoryGrad TrajectoryGrad::zeros(std::size_t horizon) {
  TrajectoryGrad g;
  g.x.assign(horizon, 0.0);
  g.u.assign(horizon, Power{0.0, 0.0});
  return g;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Condensed QP 1/2 u'Hu + g'u + const, with x = x_free + G u.
struct Condensed {
  MatrixXd G;
  VectorXd x_free;
  MatrixXd H;
  VectorXd g;
  VectorXd lo;
  VectorXd hi;
};

Condensed condense(const LqrProblem& prob) {
  const auto n = static_cast<Eigen::Index>(prob.horizon());
  Condensed c;
  c.G = MatrixXd::Zero(n, 2 * n);
  c.x_free.resize(n);
  double x = prob.x0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& s = prob.dynamics[static_cast<std::size_t>(k)];
    x = s.a * x + s.f;
    c.x_free[k] = x;
  }
  for (Eigen::Index l = 0; l < n; ++l) {
    const auto& s = prob.dynamics[static_cast<std::size_t>(l)];
    c.G(l, 2 * l) = s.b[0];
    c.G(l, 2 * l + 1) = s.b[1];
    for (Eigen::Index k = l + 1; k < n; ++k) {
      const double a = prob.dynamics[static_cast<std::size_t>(k)].a;
      c.G(k, 2 * l) = a * c.G(k - 1, 2 * l);
      c.G(k, 2 * l + 1) = a * c.G(k - 1, 2 * l + 1);
    }
  }
  const double o = prob.cost.o_state;
  c.H = o * c.G.transpose() * c.G;
  for (Eigen::Index l = 0; l < n; ++l) {
    c.H(2 * l, 2 * l) += prob.cost.r_hp;
    c.H(2 * l + 1, 2 * l + 1) += prob.cost.r_bh;
  }
  VectorXd lin(n);
  for (Eigen::Index k = 0; k < n; ++k) lin[k] = o * c.x_free[k] + prob.p[static_cast<std::size_t>(k)];
  c.g = c.G.transpose() * lin;
  c.lo.resize(2 * n);
  c.hi.resize(2 * n);
  for (Eigen::Index l = 0; l < n; ++l) {
    for (int j = 0; j < 2; ++j) {
      c.lo[2 * l + j] = prob.bounds.lo[static_cast<std::size_t>(j)];
      c.hi[2 * l + j] = prob.bounds.hi[static_cast<std::size_t>(j)];
    }
  }
  return c;
}

double quad_value(const Condensed& c, const VectorXd& u) { return 0.5 * u.dot(c.H * u) + c.g.dot(u); }

VectorXd project(const Condensed& c, const VectorXd& u) { return u.cwiseMax(c.lo).cwiseMin(c.hi); }

double natural_residual(const Condensed& c, const VectorXd& u, const VectorXd& grad) {
  return (u - project(c, u - grad)).lpNorm<Eigen::Infinity>();
}

std::vector<Power> to_powers(const VectorXd& u) {
  std::vector<Power> out(static_cast<std::size_t>(u.size() / 2));
  for (std::size_t l = 0; l < out.size(); ++l) {
    out[l] = {u[static_cast<Eigen::Index>(2 * l)], u[static_cast<Eigen::Index>(2 * l + 1)]};
  }
  return out;
}

std::vector<Eigen::Index> free_indices(const std::vector<char>& clamped) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < clamped.size(); ++i) {
    if (!clamped[i]) idx.push_back(static_cast<Eigen::Index>(i));
  }
  return idx;
}

// Solves H_FF z = rhs_F for the free block.
VectorXd solve_free(const MatrixXd& H, const std::vector<Eigen::Index>& free, const VectorXd& rhs) {
  const auto nf = static_cast<Eigen::Index>(free.size());
  MatrixXd hff(nf, nf);
  VectorXd r(nf);
  for (Eigen::Index i = 0; i < nf; ++i) {
    r[i] = rhs[free[static_cast<std::size_t>(i)]];
    for (Eigen::Index j = 0; j < nf; ++j) hff(i, j) = H(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
  }
  Eigen::LLT<MatrixXd> llt(hff);
  if (llt.info() != Eigen::Success) throw NumericalError("free-subspace Hessian is not positive definite");
  return llt.solve(r);
}

}  // namespace

std::vector<double> rollout(const LqrProblem& prob, std::span<const Power> controls) {
  if (controls.size() != prob.horizon()) throw ConfigError("control sequence length differs from horizon");
  std::vector<double> xs(controls.size());
  double x = prob.x0;
  for (std::size_t l = 0; l < controls.size(); ++l) {
    const auto& s = prob.dynamics[l];
    x = s.a * x + s.b[0] * controls[l][0] + s.b[1] * controls[l][1] + s.f;
    xs[l] = x;
  }
  return xs;
}

double lqr_objective(const LqrProblem& prob, std::span<const Power> controls) {
  const auto xs = rollout(prob, controls);
  double j = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    j += 0.5 * prob.cost.o_state * xs[k] * xs[k] + prob.p[k] * xs[k];
    j += 0.5 * (prob.cost.r_hp * controls[k][0] * controls[k][0] + prob.cost.r_bh * controls[k][1] * controls[k][1]);
  }
  return j;
}

double kkt_residual(const LqrProblem& prob, std::span<const Power> controls) {
  const auto xs = rollout(prob, controls);
  const std::size_t n = xs.size();
  // Adjoint sweep: mu_k = dJ/dx_k including downstream effects.
  double mu = 0.0;
  double res = 0.0;
  for (std::size_t l = n; l-- > 0;) {
    mu = prob.cost.o_state * xs[l] + prob.p[l] + (l + 1 < n ? prob.dynamics[l + 1].a * mu : 0.0);
    const auto& s = prob.dynamics[l];
    const double r[2] = {prob.cost.r_hp, prob.cost.r_bh};
    for (std::size_t j = 0; j < 2; ++j) {
      const double u = controls[l][j];
      const double grad = r[j] * u + s.b[j] * mu;
      const double proj = std::clamp(u - grad, prob.bounds.lo[j], prob.bounds.hi[j]);
      res = std::max(res, std::abs(u - proj));
    }
  }
  return res;
}

LqrSolution solve_box_lqr(const LqrProblem& prob, const SolverConfig& config) {
  prob.validate();
  const Condensed c = condense(prob);
  const auto nu = c.g.size();

  // Start from the projection of the unconstrained minimiser.
  Eigen::LLT<MatrixXd> llt(c.H);
  if (llt.info() != Eigen::Success) throw NumericalError("condensed LQR Hessian is not positive definite");
  VectorXd u = project(c, llt.solve(-c.g));

  LqrSolution sol;
  std::vector<char> clamped(static_cast<std::size_t>(nu), 0);
  double value = quad_value(c, u);
  double residual = 0.0;
  constexpr double kArmijo = 1e-4;

  int it = 0;
  for (; it <= config.max_iterations; ++it) {
    const VectorXd grad = c.H * u + c.g;
    residual = natural_residual(c, u, grad);
    sol.objective_history.push_back(value);
    if (residual <= config.tolerance) break;
    if (it == config.max_iterations) break;

    for (Eigen::Index i = 0; i < nu; ++i) {
      const bool fixed = c.lo[i] == c.hi[i];
      clamped[static_cast<std::size_t>(i)] =
          fixed || (u[i] <= c.lo[i] && grad[i] > 0.0) || (u[i] >= c.hi[i] && grad[i] < 0.0);
    }
    const auto free = free_indices(clamped);
    if (free.empty()) break;
    const VectorXd dz = solve_free(c.H, free, grad);
    VectorXd dir = VectorXd::Zero(nu);
    for (std::size_t i = 0; i < free.size(); ++i) dir[free[i]] = -dz[static_cast<Eigen::Index>(i)];

    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      const VectorXd cand = project(c, u + step * dir);
      const double v = quad_value(c, cand);
      if (v <= value + kArmijo * grad.dot(cand - u)) {
        u = cand;
        value = v;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }

  // Polish: one exact Newton solve on the identified free set.
  {
    std::vector<char> on_bound(static_cast<std::size_t>(nu), 0);
    for (Eigen::Index i = 0; i < nu; ++i) on_bound[static_cast<std::size_t>(i)] = u[i] <= c.lo[i] || u[i] >= c.hi[i];
    const auto free = free_indices(on_bound);
    if (!free.empty()) {
      const VectorXd grad = c.H * u + c.g;
      const VectorXd dz = solve_free(c.H, free, grad);
      VectorXd cand = u;
      bool inside = true;
      for (std::size_t i = 0; i < free.size(); ++i) {
        const auto k = free[i];
        cand[k] = u[k] - dz[static_cast<Eigen::Index>(i)];
        if (cand[k] <= c.lo[k] || cand[k] >= c.hi[k]) inside = false;
      }
      if (inside) {
        const double v = quad_value(c, cand);
        const double r = natural_residual(c, cand, c.H * cand + c.g);
        if (r <= residual && v <= value) {
          u = cand;
          value = v;
          residual = r;
          sol.objective_history.back() = std::min(sol.objective_history.back(), v);
        }
      }
    }
  }

  const VectorXd grad = c.H * u + c.g;
  sol.iterations = it;
  sol.kkt_residual = residual;
  sol.converged = residual <= config.tolerance;
  sol.u_star = to_powers(u);
  sol.x_star = rollout(prob, sol.u_star);
  sol.objective = lqr_objective(prob, sol.u_star);
  sol.active.assign(static_cast<std::size_t>(nu), 0);
  for (Eigen::Index i = 0; i < nu; ++i) {
    const bool act = u[i] <= c.lo[i] || u[i] >= c.hi[i];
    sol.active[static_cast<std::size_t>(i)] = act;
    if (act && c.lo[i] < c.hi[i] && std::abs(grad[i]) < kWeakActivityThreshold) ++sol.weakly_active;
  }
  if (!sol.converged) {
    throw NumericalError("box LQR did not converge in " + std::to_string(config.max_iterations) +
                         " iterations (kkt residual " + std::to_string(residual) + ")");
  }
  return sol;
}

LqrGradients grad_trajectory(const LqrProblem& prob, const LqrSolution& sol, const TrajectoryGrad& up) {
  if (!sol.converged) throw NumericalError("cannot differentiate a non-converged LQR solution");
  const std::size_t n = prob.horizon();
  if (up.x.size() != n || up.u.size() != n) throw ConfigError("upstream gradient has wrong horizon");

  const Condensed c = condense(prob);
  const auto& xs = sol.x_star;
  const auto& us = sol.u_star;

  // Total derivative of the loss w.r.t. u through the dynamics.
  VectorXd dl_du(static_cast<Eigen::Index>(2 * n));
  double lam = 0.0;
  for (std::size_t l = n; l-- > 0;) {
    lam = up.x[l] + (l + 1 < n ? prob.dynamics[l + 1].a * lam : 0.0);
    for (std::size_t j = 0; j < 2; ++j) {
      dl_du[static_cast<Eigen::Index>(2 * l + j)] = up.u[l][j] + prob.dynamics[l].b[j] * lam;
    }
  }

  // w = -H_FF^{-1} (dl/du)_F, zero on active coordinates.
  const auto free = free_indices(sol.active);
  VectorXd w = VectorXd::Zero(static_cast<Eigen::Index>(2 * n));
  if (!free.empty()) {
    const VectorXd z = solve_free(c.H, free, dl_du);
    for (std::size_t i = 0; i < free.size(); ++i) w[free[i]] = -z[static_cast<Eigen::Index>(i)];
  }

  // Tangent of the trajectory along w.
  std::vector<double> dx(n);
  {
    double d = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      const auto& s = prob.dynamics[l];
      d = s.a * d + s.b[0] * w[static_cast<Eigen::Index>(2 * l)] + s.b[1] * w[static_cast<Eigen::Index>(2 * l + 1)];
      dx[l] = d;
    }
  }

  // Reverse pass over  Psi = sum gx_k x_k + sum (O x_k + p_k) dx_k + sum u' R w,
  // holding u and w fixed; its parameter gradient is the implicit KKT gradient.
  LqrGradients out;
  out.a.assign(n, 0.0);
  out.b.assign(n, Power{0.0, 0.0});
  out.f.assign(n, 0.0);
  out.p.assign(n, 0.0);
  out.weakly_active = sol.weakly_active > 0;
  const double o = prob.cost.o_state;
  double xbar = 0.0;
  double dxbar = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    // Adjoints of x_{k+1} and dx_{k+1}.
    const double a_next = k + 1 < n ? prob.dynamics[k + 1].a : 0.0;
    xbar = up.x[k] + o * dx[k] + a_next * xbar;
    dxbar = o * xs[k] + prob.p[k] + a_next * dxbar;
    const double x_prev = k == 0 ? prob.x0 : xs[k - 1];
    const double dx_prev = k == 0 ? 0.0 : dx[k - 1];
    out.a[k] = xbar * x_prev + dxbar * dx_prev;
    for (std::size_t j = 0; j < 2; ++j) {
      out.b[k][j] = xbar * us[k][j] + dxbar * w[static_cast<Eigen::Index>(2 * k + j)];
    }
    out.f[k] = xbar;
    out.p[k] = dx[k];
    out.o_state += xs[k] * dx[k];
    out.r_hp += us[k][0] * w[static_cast<Eigen::Index>(2 * k)];
    out.r_bh += us[k][1] * w[static_cast<Eigen::Index>(2 * k + 1)];
  }
  out.x0 = prob.dynamics[0].a * xbar;
  return out;
}

}  // namespace hvac
