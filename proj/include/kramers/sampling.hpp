#pragma once

#include "kramers/problem.hpp"
#include "kramers/state.hpp"

namespace kramers {

struct BurnInDiagnostics {
  bool used = false;
  bool stabilized = false;
  std::vector<double> window_means;
};

struct SampleDiagnostics {
  double acceptance_rate = 1.0;
  BurnInDiagnostics burnin;
};

/// N approximately-i.i.d. samples from mu = nu (x) kappa. Momenta are exact
/// Gaussians N(0, M/beta) (quadratic U required). Positions are exact for
/// quadratic V on R^d (Gaussian) and for torus domains (rejection from the
/// uniform proposal); other Euclidean potentials fall back to an overdamped
/// burn-in whose observable stabilization is recorded.
EnsembleState sample_gibbs(const GibbsSpec& gibbs, std::size_t n,
                           std::uint64_t seed, SampleDiagnostics* diag = nullptr);

/// Samples from the mass-dependent Gibbs measure mu_M: the position marginal
/// is exactly nu, and p | q ~ N(0, M(q)/beta).
EnsembleState sample_gibbs_mass(const ProblemSpec& prob, std::size_t n,
                                std::uint64_t seed,
                                SampleDiagnostics* diag = nullptr);

/// Deterministic per-trajectory draw from mu used by the coupled runs: a pure
/// function of (seed, trajectory), so initial conditions are shared across
/// lambda values and independent of ensemble size or thread count.
void draw_initial_state(const GibbsSpec& gibbs, std::uint64_t seed,
                        std::uint64_t trajectory, std::span<double> q,
                        std::span<double> p);

/// Minimum of V over the torus cell (grid scan; used by rejection sampling).
double torus_potential_min(const GibbsSpec& gibbs);

}  // namespace kramers
