#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kramers/domain.hpp"

namespace kramers {

/// Flat arrays of positions (and momenta, for kinetic dynamics) for N
/// trajectories, plus the per-trajectory RNG stream identifiers.
struct EnsembleState {
  std::size_t n_traj = 0;
  int dim = 1;
  std::vector<double> positions;          // n_traj * dim, row-major
  std::vector<double> momenta;            // empty for overdamped states
  std::vector<std::uint64_t> traj_ids;
  double time = 0.0;
  double lambda = 0.0;

  static EnsembleState make(std::size_t n, int dim, bool kinetic);

  bool has_momenta() const { return !momenta.empty(); }
  std::span<double> position(std::size_t i) {
    return {positions.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  std::span<const double> position(std::size_t i) const {
    return {positions.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  std::span<double> momentum(std::size_t i) {
    return {momenta.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  std::span<const double> momentum(std::size_t i) const {
    return {momenta.data() + i * dim, static_cast<std::size_t>(dim)};
  }

  /// All entries finite; on the torus, positions in [0, L).
  void check_invariants(const Domain& domain) const;
};

}  // namespace kramers
