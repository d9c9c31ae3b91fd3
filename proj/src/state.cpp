#include "kramers/state.hpp"

#include <cmath>

namespace kramers {

EnsembleState EnsembleState::make(std::size_t n, int dim, bool kinetic) {
  EnsembleState s;
  s.n_traj = n;
  s.dim = dim;
  s.positions.assign(n * dim, 0.0);
  if (kinetic) s.momenta.assign(n * dim, 0.0);
  s.traj_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.traj_ids[i] = i;
  return s;
}

void EnsembleState::check_invariants(const Domain& domain) const {
  for (double x : positions) {
    if (!std::isfinite(x)) throw ValidationError("ensemble position not finite");
    if (domain.is_torus() && (x < 0.0 || x >= domain.length)) {
      throw ValidationError("torus position outside [0, L)");
    }
  }
  for (double p : momenta) {
    if (!std::isfinite(p)) throw ValidationError("ensemble momentum not finite");
  }
}

}  // namespace kramers
