#include "kramers/rng.hpp"

#include <cmath>

namespace kramers {
namespace philox {
namespace {

constexpr std::uint32_t kW32A = 0x9E3779B9u;
constexpr std::uint32_t kW32B = 0xBB67AE85u;
constexpr std::uint32_t kM4x32A = 0xD2511F53u;
constexpr std::uint32_t kM4x32B = 0xCD9E8D57u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                    std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

inline void round_once(std::array<std::uint32_t, 4>& c,
                       std::array<std::uint32_t, 2>& k) {
  std::uint32_t lo0, hi0, lo1, hi1;
  mulhilo(kM4x32A, c[0], lo0, hi0);
  mulhilo(kM4x32B, c[2], lo1, hi1);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  k[0] += kW32A;
  k[1] += kW32B;
}

}  // namespace

std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                   std::array<std::uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) round_once(counter, key);
  return counter;
}

}  // namespace philox

namespace {

inline double u64_to_unit(std::uint64_t x) {
  // (0,1]: 53-bit mantissa, never zero so log() below is safe.
  return (static_cast<double>(x >> 11) + 1.0) * 0x1p-53;
}

inline std::uint64_t join(std::uint32_t lo, std::uint32_t hi) {
  return static_cast<std::uint64_t>(hi) << 32 | lo;
}

}  // namespace

CounterStream::CounterStream(std::uint64_t seed, StreamPurpose purpose,
                             std::uint64_t trajectory)
    : key_{static_cast<std::uint32_t>(seed) ^
               (static_cast<std::uint32_t>(purpose) * 0x9E3779B9u),
           static_cast<std::uint32_t>(seed >> 32) ^
               static_cast<std::uint32_t>(trajectory >> 32)},
      traj_(static_cast<std::uint32_t>(trajectory)) {}

std::pair<double, double> CounterStream::normal_pair(std::uint32_t step,
                                                     std::uint32_t substep,
                                                     std::uint32_t blk) const {
  const auto out = philox::block({blk, substep, step, traj_}, key_);
  const double u1 = u64_to_unit(join(out[0], out[1]));
  const double u2 = u64_to_unit(join(out[2], out[3]));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

void CounterStream::normals(std::uint32_t step, std::uint32_t substep,
                            std::span<double> out) const {
  std::uint32_t blk = 0;
  std::size_t i = 0;
  while (i < out.size()) {
    const auto [a, b] = normal_pair(step, substep, blk++);
    out[i++] = a;
    if (i < out.size()) out[i++] = b;
  }
}

double CounterStream::normal1(std::uint32_t step, std::uint32_t substep) const {
  const auto [a, b] = normal_pair(step, substep / 2, 0);
  return (substep & 1u) == 0 ? a : b;
}

double CounterStream::uniform(std::uint32_t step, std::uint32_t substep) const {
  const auto out = philox::block({0, substep, step, traj_}, key_);
  return u64_to_unit(join(out[0], out[1]));
}

}  // namespace kramers
