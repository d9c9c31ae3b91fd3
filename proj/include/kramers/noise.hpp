#pragma once

#include <cstdint>
#include <span>

#include "kramers/rng.hpp"

namespace kramers {

/// Hierarchical Brownian increments shared between a fine-grid kinetic run
/// and a coarse-grid overdamped run of the same trajectory.
///
/// Fine increments over h = coarse_dt / refine_factor are generated from the
/// counter-based stream; the coarse increment over each interval is derived
/// by summing its fine increments in substep order, so the identity
/// coarse = sum(fine) holds bitwise.
struct CoupledNoise {
  std::uint64_t master_seed = 0;
  double coarse_dt = 0.0;
  int refine_factor = 1;
  double horizon = 0.0;
  int dim = 1;
  std::uint64_t trajectory_id = 0;

  CoupledNoise(std::uint64_t seed, double coarse_dt_, int refine, double horizon_,
               int dim_, std::uint64_t traj);

  double fine_dt() const { return coarse_dt / refine_factor; }
  int coarse_steps() const;

  /// Increment of W over fine interval (step, substep); N(0, fine_dt * Id).
  void fine_increment(std::uint32_t coarse_step, std::uint32_t substep,
                      std::span<double> out) const;

  /// Sum of the interval's fine increments, in substep order.
  void coarse_increment(std::uint32_t coarse_step, std::span<double> out) const;

 private:
  CounterStream stream_;
  double fine_std_ = 0.0;
};

}  // namespace kramers
