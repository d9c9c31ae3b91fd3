#pragma once

#include <Eigen/Dense>

#include "kramers/coupled.hpp"

namespace kramers {

struct BootstrapCI {
  double lo = 0.0;
  double hi = 0.0;
  double halfwidth() const { return 0.5 * (hi - lo); }
};

/// sup_{t <= T} E|X^lambda_t - X_t|^alpha over the saved snapshot grid
/// (a lower bound on the continuous-time sup; documented in the README).
struct StrongErrorResult {
  double value = 0.0;
  BootstrapCI ci;
  Eigen::VectorXd per_snapshot;  // mean |diff|^alpha at each snapshot
  Eigen::MatrixXd pow_diff;      // S x N, per-trajectory |diff|^alpha
  std::vector<std::uint8_t> valid;
  std::size_t n_valid = 0;
};

StrongErrorResult strong_error_sup(const CoupledRunResult& run,
                                   const Domain& domain, double alpha,
                                   int n_bootstrap = 1000,
                                   std::uint64_t seed = 777);

/// Exact 1D Wasserstein-alpha distance between empirical measures via the
/// sorted coupling; on the torus the sorted coupling is minimized over all
/// cyclic shifts. For alpha in (0,1] the transport cost E d^alpha is
/// returned (a metric for concave costs); for alpha in (1,2] its 1/alpha
/// power.
double wasserstein_alpha_1d(std::span<const double> a, std::span<const double> b,
                            double alpha, const Domain& domain);

struct TrajAverageResult {
  double value = 0.0;
  BootstrapCI ci;
  Eigen::VectorXd per_traj;  // |avg_fine - avg_coarse|^r, valid trajectories
};

/// E| (1/T) int phi(X^lambda) - (1/T) int phi(X) |^r from the stored
/// trapezoid time averages of a registered observable.
TrajAverageResult traj_average_error(const CoupledRunResult& run,
                                     std::size_t obs_index, double r,
                                     int n_bootstrap = 1000,
                                     std::uint64_t seed = 778);

struct IncrementMomentResult {
  std::vector<double> lag_times;
  std::vector<double> moments;  // E|X_t - X_s|^gamma at each lag
  double slope = 0.0;           // log-log regression slope
};

/// Moment table of |X_{s+lag} - X_s|^gamma over a snapshot matrix
/// (S x N*dim), averaged over admissible start times and trajectories.
IncrementMomentResult increment_moment(const RowMatrixXd& positions,
                                       std::span<const double> snap_times,
                                       int dim, const Domain& domain,
                                       double gamma,
                                       std::span<const int> lag_steps);

/// Log-log regression result for error-vs-lambda decay.
struct RateFit {
  std::vector<double> lambdas;
  std::vector<double> errors;
  double slope = 0.0;
  double intercept = 0.0;  // in log space
  double residual_rms = 0.0;
  double confidence_halfwidth = 0.0;
};

/// Least squares on (log lambda, log error). Requires at least 4 lambdas
/// spanning a decade, strictly increasing, with positive errors. The CI uses
/// a residual bootstrap with a fixed sub-seed.
RateFit fit_rate(std::span<const double> lambdas, std::span<const double> errors,
                 int n_bootstrap = 1000, std::uint64_t seed = 779);

/// fit_rate with the per-lambda trajectory data retained: the confidence
/// halfwidth comes from resampling trajectories within each lambda.
RateFit fit_rate_with_trajectories(
    std::span<const double> lambdas,
    const std::vector<const StrongErrorResult*>& per_lambda, int n_bootstrap,
    std::uint64_t seed);

// Small statistics helpers shared by the experiment drivers.
double mean_of(std::span<const double> xs);
double variance_of(std::span<const double> xs);
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace kramers
