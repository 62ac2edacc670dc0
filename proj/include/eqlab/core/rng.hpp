#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace eqlab {

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based Philox4x32-10 stream. The key is the seed, and the 128-bit
// counter is (stream id, block index), so distinct stream ids never overlap.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  std::uint64_t next_u64();
  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  int sign() { return (next_u64() >> 63) ? -1 : 1; }

  // Independent stream sharing this seed; distinct ids give distinct streams.
  RngStream child(std::uint64_t id) const;

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace eqlab
