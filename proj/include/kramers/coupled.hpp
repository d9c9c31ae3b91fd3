#pragma once

#include <Eigen/Dense>
#include <functional>

#include "kramers/noise.hpp"
#include "kramers/sampling.hpp"
#include "kramers/state.hpp"

namespace kramers {

/// Snapshot matrices store one snapshot per row with contiguous
/// (trajectory, coordinate) slices, so rows can be sliced as spans.
using RowMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Maps lambda to the number of fine substeps per coarse interval:
///   r(lambda) = max(1, ceil(4 lambda^2 coarse_dt / reference_dt)),
/// i.e. the fine step is about reference_dt / (4 lambda^2); the rescaled
/// drift is O(lambda^2), so this keeps the explicit scheme resolved uniformly
/// in lambda.
struct RefineRule {
  double reference_dt = 0.125;
  int operator()(double lambda, double coarse_dt) const;
};

/// A registered position observable (Lipschitz built-ins for trajectory
/// averages).
struct Observable {
  std::string name;
  std::function<double(std::span<const double>)> f;
};

Observable cos_observable(const Domain& domain);
Observable sin_observable(const Domain& domain);
Observable potential_observable(const PotentialPtr& v);
Observable clipped_abs_observable();  // min(|q|, 1)

struct CoupledOptions {
  std::size_t n_traj = 1000;
  double horizon = 1.0;
  double coarse_dt = 1.0 / 1024.0;
  RefineRule refine;
  int snapshots = 32;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware default
  double divergence_budget = 1e-3;
  std::vector<Observable> observables;
};

/// Paired fine/coarse trajectories for one lambda. Snapshot matrices are
/// (snapshots) x (n_traj * dim); time averages are (n_obs) x (n_traj).
struct CoupledRunResult {
  double lambda = 0.0;
  int dim = 1;
  double coarse_dt = 0.0;
  int refine_factor = 1;
  std::vector<double> snap_times;
  RowMatrixXd fine_pos;
  RowMatrixXd coarse_pos;
  Eigen::MatrixXd fine_avg;
  Eigen::MatrixXd coarse_avg;
  std::vector<std::uint8_t> diverged;
  std::size_t n_diverged = 0;

  std::span<const double> fine_at(int snap, std::size_t traj) const {
    return {fine_pos.data() + (snap * fine_pos.cols() + traj * dim),
            static_cast<std::size_t>(dim)};
  }
  std::span<const double> coarse_at(int snap, std::size_t traj) const {
    return {coarse_pos.data() + (snap * coarse_pos.cols() + traj * dim),
            static_cast<std::size_t>(dim)};
  }
};

/// Shared-noise pair per trajectory: one warm-start draw from mu used by both
/// fidelities, the rescaled kinetic dynamics on the fine grid, the overdamped
/// limit on the coarse grid, driven by the same CoupledNoise. Fails when more
/// than `divergence_budget` of the ensemble diverges.
CoupledRunResult simulate_coupled_single(const ProblemSpec& prob, double lambda,
                                         const CoupledOptions& opts);

std::vector<CoupledRunResult> simulate_coupled(const ProblemSpec& prob,
                                               std::span<const double> lambdas,
                                               const CoupledOptions& opts);

enum class DynamicsFamily { Overdamped, Underdamped, CgKinetic, MassLangevin };

struct EnsembleRunOptions {
  double horizon = 1.0;
  double dt = 1e-3;
  double lambda = 1.0;
  bool rescaled = false;
  bool use_baoab = false;  // kinetic sampling only
  bool include_divergence_drift = true;
  int snapshots = 0;  // 0 = final state only
  std::uint64_t seed = 0;
  int threads = 0;
  double divergence_budget = 1e-3;
};

struct EnsembleRunResult {
  std::vector<double> snap_times;
  RowMatrixXd positions;  // snapshots x (n * dim), wrapped on torus
  EnsembleState final_state;
  std::vector<std::uint8_t> diverged;
  std::size_t n_diverged = 0;
};

/// Advance an ensemble of one dynamics family from the given initial state.
EnsembleRunResult simulate_ensemble(const ProblemSpec& prob,
                                    DynamicsFamily family,
                                    const EnsembleState& initial,
                                    const EnsembleRunOptions& opts);

}  // namespace kramers
