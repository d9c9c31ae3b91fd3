#include "kramers/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "kramers/rng.hpp"

namespace kramers {

double mean_of(std::span<const double> xs) {
  if (xs.empty()) throw ValidationError("mean of empty sample");
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

double variance_of(std::span<const double> xs) {
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() > 1 ? xs.size() - 1 : 1);
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

namespace {

std::size_t bootstrap_index(const CounterStream& st, std::uint32_t rep,
                            std::uint32_t draw, std::size_t n) {
  const double u = st.uniform(rep, draw);
  std::size_t i = static_cast<std::size_t>(u * static_cast<double>(n));
  return std::min(i, n - 1);
}

BootstrapCI percentile_ci(std::vector<double>& stats) {
  std::sort(stats.begin(), stats.end());
  return {quantile_sorted(stats, 0.025), quantile_sorted(stats, 0.975)};
}

}  // namespace

StrongErrorResult strong_error_sup(const CoupledRunResult& run,
                                   const Domain& domain, double alpha,
                                   int n_bootstrap, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw ValidationError("strong_error_sup: alpha must lie in (0, 2]");
  }
  if (run.fine_pos.rows() != run.coarse_pos.rows() ||
      run.fine_pos.cols() != run.coarse_pos.cols()) {
    throw AlignmentError("strong_error_sup: snapshot grids do not match");
  }
  const int s_count = static_cast<int>(run.fine_pos.rows());
  const std::size_t n = run.diverged.size();
  const int d = run.dim;

  StrongErrorResult out;
  out.valid.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) out.valid[i] = run.diverged[i] ? 0 : 1;
  out.n_valid = 0;
  for (auto v : out.valid) out.n_valid += v;
  if (out.n_valid == 0) throw ValidationError("strong_error_sup: no valid paths");

  out.pow_diff = Eigen::MatrixXd::Zero(s_count, n);
  out.per_snapshot = Eigen::VectorXd::Zero(s_count);
  for (int s = 0; s < s_count; ++s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!out.valid[i]) continue;
      const double dist = domain.distance(run.fine_at(s, i), run.coarse_at(s, i));
      const double powed = std::pow(dist, alpha);
      out.pow_diff(s, i) = powed;
      acc += powed;
    }
    out.per_snapshot(s) = acc / static_cast<double>(out.n_valid);
  }
  out.value = out.per_snapshot.maxCoeff();
  (void)d;

  if (n_bootstrap > 0) {
    const CounterStream st(seed, StreamPurpose::Bootstrap, 0);
    std::vector<double> stats(n_bootstrap);
    std::vector<std::size_t> valid_idx;
    valid_idx.reserve(out.n_valid);
    for (std::size_t i = 0; i < n; ++i) {
      if (out.valid[i]) valid_idx.push_back(i);
    }
    Eigen::VectorXd col_sum(s_count);
    for (int b = 0; b < n_bootstrap; ++b) {
      col_sum.setZero();
      for (std::size_t k = 0; k < valid_idx.size(); ++k) {
        const std::size_t pick =
            valid_idx[bootstrap_index(st, static_cast<std::uint32_t>(b),
                                      static_cast<std::uint32_t>(k),
                                      valid_idx.size())];
        col_sum += out.pow_diff.col(pick);
      }
      stats[b] = (col_sum / static_cast<double>(valid_idx.size())).maxCoeff();
    }
    out.ci = percentile_ci(stats);
  }
  return out;
}

double wasserstein_alpha_1d(std::span<const double> a, std::span<const double> b,
                            double alpha, const Domain& domain) {
  if (a.empty() || b.empty()) {
    throw ValidationError("wasserstein_alpha_1d: empty samples");
  }
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw ValidationError("wasserstein_alpha_1d: alpha must lie in (0, 2]");
  }
  std::vector<double> xs(a.begin(), a.end());
  std::vector<double> ys(b.begin(), b.end());
  if (domain.is_torus()) {
    for (double& x : xs) x = domain.wrap(x);
    for (double& y : ys) y = domain.wrap(y);
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  // Unequal sample counts: deterministic resampling by evenly spaced order
  // statistics of the larger sample.
  if (xs.size() != ys.size()) {
    const std::size_t n = std::min(xs.size(), ys.size());
    auto thin = [n](std::vector<double>& v) {
      if (v.size() == n) return;
      std::vector<double> out(n);
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = v[(i * v.size() + v.size() / 2) / n];
      }
      v = std::move(out);
    };
    thin(xs);
    thin(ys);
  }
  const std::size_t n = xs.size();

  auto finish = [alpha](double mean_cost) {
    return alpha > 1.0 ? std::pow(mean_cost, 1.0 / alpha) : mean_cost;
  };

  if (!domain.is_torus()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += std::pow(std::abs(xs[i] - ys[i]), alpha);
    }
    return finish(acc / static_cast<double>(n));
  }
  // Torus: minimize the sorted coupling over cyclic shifts.
  double best = 1e300;
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = i + k;
      if (j >= n) j -= n;
      acc += std::pow(std::abs(domain.displacement(xs[i], ys[j])), alpha);
      if (acc >= best) break;  // partial sums only grow
    }
    best = std::min(best, acc);
  }
  return finish(best / static_cast<double>(n));
}

TrajAverageResult traj_average_error(const CoupledRunResult& run,
                                     std::size_t obs_index, double r,
                                     int n_bootstrap, std::uint64_t seed) {
  if (obs_index >= static_cast<std::size_t>(run.fine_avg.rows())) {
    throw ValidationError("traj_average_error: observable index out of range");
  }
  if (!(r >= 1.0)) throw ValidationError("traj_average_error: r must be >= 1");
  const std::size_t n = run.diverged.size();
  std::vector<double> vals;
  vals.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (run.diverged[i]) continue;
    vals.push_back(std::pow(
        std::abs(run.fine_avg(obs_index, i) - run.coarse_avg(obs_index, i)), r));
  }
  if (vals.empty()) throw ValidationError("traj_average_error: no valid paths");
  TrajAverageResult out;
  out.per_traj = Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
  out.value = mean_of(vals);
  if (n_bootstrap > 0) {
    const CounterStream st(seed, StreamPurpose::Bootstrap, 1);
    std::vector<double> stats(n_bootstrap);
    for (int b = 0; b < n_bootstrap; ++b) {
      double acc = 0.0;
      for (std::size_t k = 0; k < vals.size(); ++k) {
        acc += vals[bootstrap_index(st, static_cast<std::uint32_t>(b),
                                    static_cast<std::uint32_t>(k), vals.size())];
      }
      stats[b] = acc / static_cast<double>(vals.size());
    }
    out.ci = percentile_ci(stats);
  }
  return out;
}

namespace {

void loglog_fit(std::span<const double> xs, std::span<const double> ys,
                double& slope, double& intercept, double& residual_rms) {
  const std::size_t n = xs.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(xs[i]);
    const double ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  slope = (n * sxy - sx * sy) / denom;
  intercept = (sy - slope * sx) / n;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double resid = std::log(ys[i]) - (intercept + slope * std::log(xs[i]));
    rss += resid * resid;
  }
  residual_rms = std::sqrt(rss / n);
}

void check_rate_inputs(std::span<const double> lambdas,
                       std::span<const double> errors) {
  if (lambdas.size() != errors.size()) {
    throw ValidationError("fit_rate: size mismatch");
  }
  if (lambdas.size() < 4) throw ValidationError("fit_rate: need >= 4 lambdas");
  for (std::size_t i = 0; i + 1 < lambdas.size(); ++i) {
    if (!(lambdas[i] < lambdas[i + 1])) {
      throw ValidationError("fit_rate: lambdas must be strictly increasing");
    }
  }
  if (lambdas.back() < 10.0 * lambdas.front()) {
    throw ValidationError("fit_rate: lambdas must span at least one decade");
  }
  for (double e : errors) {
    if (!(e > 0.0)) throw ValidationError("fit_rate: errors must be positive");
  }
}

}  // namespace

RateFit fit_rate(std::span<const double> lambdas, std::span<const double> errors,
                 int n_bootstrap, std::uint64_t seed) {
  check_rate_inputs(lambdas, errors);
  RateFit fit;
  fit.lambdas.assign(lambdas.begin(), lambdas.end());
  fit.errors.assign(errors.begin(), errors.end());
  loglog_fit(lambdas, errors, fit.slope, fit.intercept, fit.residual_rms);
  if (n_bootstrap > 0) {
    const std::size_t n = lambdas.size();
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) {
      resid[i] = std::log(errors[i]) - (fit.intercept + fit.slope * std::log(lambdas[i]));
    }
    const CounterStream st(seed, StreamPurpose::Bootstrap, 2);
    std::vector<double> slopes(n_bootstrap);
    std::vector<double> ys(n);
    for (int b = 0; b < n_bootstrap; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        const double rp = resid[bootstrap_index(
            st, static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(i), n)];
        ys[i] = std::exp(fit.intercept + fit.slope * std::log(lambdas[i]) + rp);
      }
      double s2, i2, r2;
      loglog_fit(lambdas, ys, s2, i2, r2);
      slopes[b] = s2;
    }
    fit.confidence_halfwidth = percentile_ci(slopes).halfwidth();
  }
  return fit;
}

RateFit fit_rate_with_trajectories(
    std::span<const double> lambdas,
    const std::vector<const StrongErrorResult*>& per_lambda, int n_bootstrap,
    std::uint64_t seed) {
  if (lambdas.size() != per_lambda.size()) {
    throw ValidationError("fit_rate_with_trajectories: size mismatch");
  }
  std::vector<double> errors(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    errors[i] = per_lambda[i]->value;
  }
  RateFit fit = fit_rate(lambdas, errors, 0, seed);
  std::vector<double> slopes(n_bootstrap);
  std::vector<double> boot_errors(lambdas.size());
  for (int b = 0; b < n_bootstrap; ++b) {
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      const StrongErrorResult& se = *per_lambda[l];
      const CounterStream st(seed, StreamPurpose::Bootstrap,
                             1000 + l);  // one stream per lambda
      std::vector<std::size_t> valid_idx;
      for (std::size_t i = 0; i < se.valid.size(); ++i) {
        if (se.valid[i]) valid_idx.push_back(i);
      }
      Eigen::VectorXd col_sum = Eigen::VectorXd::Zero(se.pow_diff.rows());
      for (std::size_t k = 0; k < valid_idx.size(); ++k) {
        const std::size_t pick =
            valid_idx[bootstrap_index(st, static_cast<std::uint32_t>(b),
                                      static_cast<std::uint32_t>(k),
                                      valid_idx.size())];
        col_sum += se.pow_diff.col(pick);
      }
      boot_errors[l] =
          (col_sum / static_cast<double>(valid_idx.size())).maxCoeff();
    }
    double s2, i2, r2;
    loglog_fit(lambdas, boot_errors, s2, i2, r2);
    slopes[b] = s2;
  }
  fit.confidence_halfwidth = percentile_ci(slopes).halfwidth();
  return fit;
}

IncrementMomentResult increment_moment(const RowMatrixXd& positions,
                                       std::span<const double> snap_times,
                                       int dim, const Domain& domain,
                                       double gamma,
                                       std::span<const int> lag_steps) {
  if (!(gamma > 2.0)) {
    throw ValidationError("increment_moment: gamma must exceed 2");
  }
  if (lag_steps.size() < 4) {
    throw ConfigError("increment_moment: need at least 4 lags");
  }
  const int s_count = static_cast<int>(positions.rows());
  const std::size_t n = static_cast<std::size_t>(positions.cols()) / dim;
  IncrementMomentResult out;
  for (int lag : lag_steps) {
    if (lag < 1 || lag >= s_count) {
      throw ConfigError("increment_moment: lag outside the snapshot grid");
    }
    double acc = 0.0;
    std::size_t count = 0;
    for (int s = 0; s + lag < s_count; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::span<const double> a{positions.data() +
                                            (s * positions.cols() + i * dim),
                                        static_cast<std::size_t>(dim)};
        const std::span<const double> b{
            positions.data() + ((s + lag) * positions.cols() + i * dim),
            static_cast<std::size_t>(dim)};
        acc += std::pow(domain.distance(a, b), gamma);
        ++count;
      }
    }
    out.lag_times.push_back((snap_times[lag] - snap_times[0]));
    out.moments.push_back(acc / static_cast<double>(count));
  }
  double intercept, rms;
  loglog_fit(out.lag_times, out.moments, out.slope, intercept, rms);
  return out;
}

}  // namespace kramers
