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

#include "hvac/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <random>

#include <Eigen/Dense>

#include "hvac/errors.hpp"

namespace hvac {

std::vector<DailyRecord> filter_days(const InteractionLog& log, const SiteClock& clock, int min_hours) {
  std::map<std::chrono::sys_days, DailyRecord> days;
  for (const auto& r : log) {
    const auto d = clock.local_day(r.time);
    auto& rec = days[d];
    rec.date = d;
    ++rec.present_hours;
    if (r.readback_ok) ++rec.operating_hours;
    rec.e_e += r.energy_kwh;
    rec.t_out_mean += r.t_out;
    rec.t_in_mean += r.t_return;
  }
  std::vector<DailyRecord> out;
  for (auto& [d, rec] : days) {
    rec.t_out_mean /= rec.present_hours;
    rec.t_in_mean /= rec.present_hours;
    if (rec.operating_hours >= min_hours) out.push_back(rec);
  }
  return out;
}

std::string to_string(SignatureKind k) { return k == SignatureKind::kOutdoor ? "outdoor" : "delta"; }

SignatureKind signature_kind_from_string(const std::string& s) {
  if (s == "outdoor") return SignatureKind::kOutdoor;
  if (s == "delta") return SignatureKind::kDelta;
  throw ConfigError("unknown signature kind '" + s + "' (expected outdoor or delta)");
}

SignatureFit fit_signature(const std::vector<DailyRecord>& records, const CopCurve& cop, SignatureKind kind) {
  const auto n = static_cast<Eigen::Index>(records.size());
  if (n < 3) throw DataError("signature fit needs at least 3 days, got " + std::to_string(n));
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  double t_in = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    x(i, 0) = 1.0;
    x(i, 1) = kind == SignatureKind::kOutdoor ? r.t_out_mean : r.t_out_mean - r.t_in_mean;
    y(i) = r.e_e * cop(r.t_out_mean);
    t_in += r.t_in_mean / static_cast<double>(n);
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < 2) throw DataError("signature regressor is constant; the design is rank deficient");
  const Eigen::Vector2d beta = qr.solve(y);
  const Eigen::VectorXd resid = y - x * beta;
  const double rss = resid.squaredNorm();
  const double tss = (y.array() - y.mean()).square().sum();

  SignatureFit f;
  f.beta0 = beta(0);
  f.beta1 = beta(1);
  f.kind = kind;
  f.t_in_ref = t_in;
  f.n = static_cast<int>(n);
  f.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;
  const double sigma2 = n > 2 ? rss / static_cast<double>(n - 2) : 0.0;
  const Eigen::Matrix2d cov = sigma2 * (x.transpose() * x).inverse();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) f.cov[i][j] = 0.5 * (cov(i, j) + cov(j, i));
  }
  return f;
}

double balance_temperature(const SignatureFit& fit) {
  if (fit.beta1 == 0.0) throw DataError("balance temperature undefined: beta1 is zero");
  return -fit.beta0 / fit.beta1;
}

double signature_outdoor_temp(const SignatureFit& fit, double x) {
  return fit.kind == SignatureKind::kOutdoor ? x : x + fit.t_in_ref;
}

namespace {

// Integrals of 1/COP and x/COP; AUC(beta) = beta0 I0 + beta1 I1.
struct AucBasis {
  double i0 = 0.0;
  double i1 = 0.0;
};

AucBasis auc_basis(const SignatureFit& fit, const CopCurve& cop, double a, double b, double step) {
  if (!(a < b)) throw ConfigError("AUC interval must satisfy a < b");
  if (!(step > 0.0)) throw ConfigError("AUC quadrature step must be positive");
  auto m = static_cast<long>(std::ceil((b - a) / step - 1e-9));
  if (m % 2) ++m;
  m = std::max(m, 2L);
  const double h = (b - a) / static_cast<double>(m);
  AucBasis s;
  for (long k = 0; k <= m; ++k) {
    const double x = a + h * static_cast<double>(k);
    const double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double inv = 1.0 / cop(signature_outdoor_temp(fit, x));
    s.i0 += w * inv;
    s.i1 += w * x * inv;
  }
  s.i0 *= h / 3.0;
  s.i1 *= h / 3.0;
  return s;
}

// Symmetric square root factor of a 2x2 covariance; rejects negative eigenvalues.
Eigen::Matrix2d cov_factor(const SignatureFit& f, const char* which) {
  Eigen::Matrix2d c;
  c << f.cov[0][0], f.cov[0][1], f.cov[1][0], f.cov[1][1];
  if (!c.allFinite() || std::abs(c(0, 1) - c(1, 0)) > 1e-12 * (1.0 + c.cwiseAbs().maxCoeff()))
    throw DataError(std::string(which) + " covariance is not symmetric");
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(c);
  const Eigen::Vector2d ev = es.eigenvalues();
  const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < -tol) throw DataError(std::string(which) + " covariance is not positive semidefinite");
  return es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double auc_energy(const SignatureFit& fit, const CopCurve& cop, double a, double b, double step) {
  const auto s = auc_basis(fit, cop, a, b, step);
  return fit.beta0 * s.i0 + fit.beta1 * s.i1;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw ConfigError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

SavingsDistribution monte_carlo_savings(const SignatureFit& base, const SignatureFit& ctrl, const CopCurve& cop,
                                        double a, double b, const MonteCarloOptions& opt) {
  if (opt.n < 1) throw ConfigError("Monte-Carlo sample count must be at least 1");
  const auto sb = auc_basis(base, cop, a, b, opt.step);
  const auto sc = auc_basis(ctrl, cop, a, b, opt.step);
  const Eigen::Matrix2d lb = cov_factor(base, "baseline");
  const Eigen::Matrix2d lc = cov_factor(ctrl, "controller");

  SavingsDistribution out;
  const double auc_b = base.beta0 * sb.i0 + base.beta1 * sb.i1;
  const double auc_c = ctrl.beta0 * sc.i0 + ctrl.beta1 * sc.i1;
  out.plug_in = 100.0 * (auc_b - auc_c) / auc_b;

  std::vector<double> samples(opt.n);
  const std::size_t blocks = (opt.n + kMonteCarloBlock - 1) / kMonteCarloBlock;
  auto run_block = [&](std::size_t blk) {
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                      static_cast<std::uint32_t>(blk), static_cast<std::uint32_t>(blk >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> z;
    const std::size_t end = std::min(opt.n, (blk + 1) * kMonteCarloBlock);
    for (std::size_t i = blk * kMonteCarloBlock; i < end; ++i) {
      const Eigen::Vector2d zb(z(rng), z(rng));
      const Eigen::Vector2d zc(z(rng), z(rng));
      const Eigen::Vector2d bb = Eigen::Vector2d(base.beta0, base.beta1) + lb * zb;
      const Eigen::Vector2d bc = Eigen::Vector2d(ctrl.beta0, ctrl.beta1) + lc * zc;
      const double ab = bb(0) * sb.i0 + bb(1) * sb.i1;
      const double ac = bc(0) * sc.i0 + bc(1) * sc.i1;
      samples[i] = 100.0 * (ab - ac) / ab;
    }
  };
  const auto nb = static_cast<long>(blocks);
  if (opt.exec == Exec::kParallel) {
#pragma omp parallel for schedule(static)
    for (long blk = 0; blk < nb; ++blk) run_block(static_cast<std::size_t>(blk));
  } else {
    for (long blk = 0; blk < nb; ++blk) run_block(static_cast<std::size_t>(blk));
  }

  double sum = 0.0;
  for (double s : samples) sum += s;
  out.mean = sum / static_cast<double>(opt.n);
  double ss = 0.0;
  for (double s : samples) ss += (s - out.mean) * (s - out.mean);
  out.std_error = opt.n > 1 ? std::sqrt(ss / static_cast<double>(opt.n - 1) / static_cast<double>(opt.n)) : 0.0;
  out.lo = quantile(samples, 0.025);
  out.hi = quantile(samples, 0.975);
  // Guard the ordering against rounding when every draw is the plug-in value.
  out.lo = std::min(out.lo, out.mean);
  out.hi = std::max(out.hi, out.mean);
  if (opt.keep_samples) out.samples = std::move(samples);
  return out;
}

namespace {

PpdSummary summarize(const std::vector<double>& v) {
  PpdSummary s;
  s.count = static_cast<int>(v.size());
  if (v.empty()) {
    s.mean = s.std_dev = s.max = s.min = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std_dev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  s.max = *std::max_element(v.begin(), v.end());
  s.min = *std::min_element(v.begin(), v.end());
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

}  // namespace

PpdTable ppd_stats(const InteractionLog& log, const ComfortAssumptions& assumptions, TempColumn column,
                   const SiteClock& clock, int day_start, int day_end) {
  assumptions.validate();
  std::vector<double> all;
  std::vector<double> day;
  std::vector<double> night;
  for (const auto& r : log) {
    const double t = column == TempColumn::kReturn ? r.t_return : r.t_local;
    const double p = pmv_ppd(t, assumptions);
    const int h = clock.local_hour(r.time);
    all.push_back(p);
    (h >= day_start && h < day_end ? day : night).push_back(p);
  }
  return {summarize(all), summarize(day), summarize(night)};
}

}  // namespace hvac
