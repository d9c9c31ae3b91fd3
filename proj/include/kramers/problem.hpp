#pragma once

#include "kramers/gibbs.hpp"

namespace kramers {

/// A full dynamics instance: domain, potential V, kinetic energy U, the
/// matrix fields used by the various dynamics families, and the inverse
/// temperature. Immutable after construction; safe to share across threads.
struct ProblemSpec {
  Domain domain;
  double beta = 1.0;
  PotentialPtr V;
  KineticEnergy U;

  /// Inverse friction profile D (underdamped/overdamped family).
  MatrixFieldPtr D;

  /// Effective coarse-grained field A (optional; A(z) v dynamics).
  MatrixFieldPtr A;

  /// Position-dependent mass and friction fields (optional; mass family).
  MatrixFieldPtr mass;
  MatrixFieldPtr friction;

  int dim() const { return domain.dim; }
  GibbsSpec gibbs() const { return GibbsSpec{domain, beta, V, U}; }

  /// E(q) = V(q) + (1/(2 beta)) log det M(q), the configurational energy of
  /// the mass-matrix Hamiltonian.
  double mass_energy(std::span<const double> q) const;
  void mass_energy_gradient(std::span<const double> q, std::span<double> out) const;

  /// H_M(q,p) = 1/2 p^T M^{-1}(q) p + E(q).
  double mass_hamiltonian(std::span<const double> q,
                          std::span<const double> p) const;

  void check_consistent() const;
};

/// Default verification problem: X = 2 pi torus, V = cos q, D = 2 + sin q,
/// U = p^2/2, beta = 1. Satisfies smoothness, uniform ellipticity (M_D = 3)
/// and the quadratic-kinetic assumption.
ProblemSpec default_problem();

/// Default problem plus the effective field A = 1 + 0.3 cos z.
ProblemSpec default_cg_problem();

/// 1D mass-matrix problem on the 2 pi torus: w = cos q, mass m given by a
/// diagonal trig field, friction sigma constant by default.
ProblemSpec default_mass_problem(double mass_offset = 2.0, double mass_cos = 0.0,
                                 double mass_sin = 1.0, double sigma = 1.0);

}  // namespace kramers
