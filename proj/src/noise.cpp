#include "kramers/noise.hpp"

#include <cmath>

#include "kramers/common.hpp"

namespace kramers {

CoupledNoise::CoupledNoise(std::uint64_t seed, double coarse_dt_, int refine,
                           double horizon_, int dim_, std::uint64_t traj)
    : master_seed(seed),
      coarse_dt(coarse_dt_),
      refine_factor(refine),
      horizon(horizon_),
      dim(dim_),
      trajectory_id(traj),
      stream_(seed, StreamPurpose::PathNoise, traj) {
  if (!(coarse_dt > 0.0)) throw ValidationError("coupled noise: coarse_dt <= 0");
  if (refine < 1) throw ValidationError("coupled noise: refine_factor < 1");
  if (dim < 1) throw ValidationError("coupled noise: dim < 1");
  fine_std_ = std::sqrt(fine_dt());
}

int CoupledNoise::coarse_steps() const {
  return static_cast<int>(std::llround(horizon / coarse_dt));
}

void CoupledNoise::fine_increment(std::uint32_t coarse_step, std::uint32_t substep,
                                  std::span<double> out) const {
  if (dim == 1) {
    out[0] = fine_std_ * stream_.normal1(coarse_step, substep);
    return;
  }
  stream_.normals(coarse_step, substep, out);
  for (double& x : out) x *= fine_std_;
}

void CoupledNoise::coarse_increment(std::uint32_t coarse_step,
                                    std::span<double> out) const {
  for (double& x : out) x = 0.0;
  std::vector<double> fine(dim);
  for (int r = 0; r < refine_factor; ++r) {
    fine_increment(coarse_step, static_cast<std::uint32_t>(r), fine);
    for (int i = 0; i < dim; ++i) out[i] += fine[i];
  }
}

}  // namespace kramers
