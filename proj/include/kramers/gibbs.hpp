#pragma once

#include <Eigen/Dense>
#include <functional>

#include "kramers/matrix_field.hpp"
#include "kramers/potential.hpp"

namespace kramers {

/// Equilibrium measure mu ~ exp(-beta H) with H(q,p) = V(q) + U(p), and its
/// marginals kappa (momentum) and nu (position).
struct GibbsSpec {
  Domain domain;
  double beta = 1.0;
  PotentialPtr V;
  KineticEnergy U;

  double hamiltonian(std::span<const double> q, std::span<const double> p) const;
  double unnormalized_density(std::span<const double> q,
                              std::span<const double> p) const;

  /// Momentum covariance M / beta; quadratic U only.
  Eigen::MatrixXd kappa_covariance() const;

  /// Checks positivity/finiteness of the unnormalized density at sampled
  /// states.
  void validate(int n_samples, std::uint64_t seed) const;
};

/// Partial average with respect to kappa at fixed position:
///   (Pi_0 f)(q) = integral f(q, p) kappa(dp),
/// by tensorized Gauss-Hermite adapted to the covariance M/beta. Requires
/// quadratic U; other kinetic energies raise UnsupportedError.
double pi0_project(
    const std::function<double(std::span<const double>, std::span<const double>)>& f,
    const GibbsSpec& gibbs, std::span<const double> q, int quad_order = 16);

/// Quadrature value of Pi_0(D'(q)[grad U(p)] p), component-wise.
Eigen::VectorXd pi0_noise_drift(const MatrixField& field, const GibbsSpec& gibbs,
                                std::span<const double> q, int quad_order = 16);

/// Max-norm residual of the centering identity
///   Pi_0(D'(q)[grad U(p)] p) = (1/beta) div D(q).
double noise_drift_identity_check(const MatrixField& field, const GibbsSpec& gibbs,
                                  std::span<const double> q, int quad_order = 16);

/// nu-average of a position observable. Torus domains integrate one period
/// per coordinate with a tensor trapezoid rule; Euclidean domains require a
/// quadratic V (Gauss-Hermite on the Gaussian nu).
double nu_average(const GibbsSpec& gibbs,
                  const std::function<double(std::span<const double>)>& f,
                  int points_per_dim = 2048);

}  // namespace kramers
