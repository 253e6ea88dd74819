#pragma once

// Counter-based random streams (Philox 4x32-10).  Every chain owns the stream
// (seed, stream_id); draws depend only on (seed, stream_id, draw index), so a
// run is bit-reproducible no matter how chains are scheduled across threads.

#include <array>
#include <cmath>
#include <cstdint>

namespace coulomb {

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& ctr, std::array<std::uint32_t, 2>& key) {
  constexpr std::uint32_t kMulA = 0xD2511F53u;
  constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0), hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1), hi1 = static_cast<std::uint32_t>(p1 >> 32);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  key[0] += 0x9E3779B9u;  // Weyl constants
  key[1] += 0xBB67AE85u;
}

inline std::array<std::uint32_t, 4> philox10(std::uint64_t seed, std::uint64_t stream,
                                             std::uint64_t counter) {
  std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                      static_cast<std::uint32_t>(seed >> 32)};
  for (int r = 0; r < 10; ++r) philox_round(ctr, key);
  return ctr;
}

}  // namespace detail

class rng_stream {
public:
  rng_stream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_(stream_id) {}

  std::uint32_t next_u32() {
    if (idx_ == 4) refill();
    return block_[idx_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // uniform on (0,1): 53 random bits, zero excluded so log() stays finite.
  double uniform() {
    const std::uint64_t bits = next_u64() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double cauchy() { return std::tan(3.14159265358979323846 * (uniform() - 0.5)); }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    return n ? next_u64() % n : 0;  // modulo bias irrelevant at our sizes
  }

private:
  void refill() {
    block_ = detail::philox10(seed_, stream_, counter_++);
    idx_ = 0;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int idx_ = 4;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace coulomb
