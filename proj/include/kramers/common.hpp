#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace kramers {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AlignmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A trajectory left the admissible region (non-finite or beyond the
/// coordinate cap). Carries the step index at which it happened.
struct DivergedError : std::runtime_error {
  std::size_t step_index;
  std::size_t trajectory;
  DivergedError(std::size_t step, std::size_t traj);
};

/// Coordinate magnitude beyond which a trajectory counts as diverged.
inline constexpr double kDivergenceCap = 1e8;

/// Numerically robust sum with a fixed association order, so results do not
/// depend on how work was scheduled.
double pairwise_sum(std::span<const double> xs);

/// Chunked parallel map over [0, n). The body receives disjoint [begin, end)
/// ranges; outputs must go to per-index slots so thread count cannot change
/// results.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

int default_thread_count();

}  // namespace kramers
