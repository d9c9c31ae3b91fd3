#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>

namespace kramers {

/// Philox 4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Every random number in the toolkit is a pure function of
/// (seed, purpose, trajectory, step, substep, block), so ensembles are
/// reproducible and independent of evaluation order or thread count.
namespace philox {

std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                   std::array<std::uint32_t, 2> key);

}  // namespace philox

/// Distinguishes independent stream families derived from one master seed.
enum class StreamPurpose : std::uint32_t {
  PathNoise = 0,
  InitialConditions = 1,
  Bootstrap = 2,
  BurnIn = 3,
};

/// One logical RNG stream: fixed (seed, purpose, trajectory), addressed by
/// (step, substep, block).
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, StreamPurpose purpose,
                std::uint64_t trajectory);

  /// Two independent N(0,1) draws from one Philox block.
  std::pair<double, double> normal_pair(std::uint32_t step,
                                        std::uint32_t substep,
                                        std::uint32_t block) const;

  /// Fill `out` with independent N(0,1) draws for index (step, substep).
  void normals(std::uint32_t step, std::uint32_t substep,
               std::span<double> out) const;

  /// Single N(0,1) draw; consecutive `substep` values share Philox blocks
  /// pairwise, so scalar streams cost half a block per draw.
  double normal1(std::uint32_t step, std::uint32_t substep) const;

  /// Uniform draw in (0,1].
  double uniform(std::uint32_t step, std::uint32_t substep) const;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t traj_;
};

}  // namespace kramers
