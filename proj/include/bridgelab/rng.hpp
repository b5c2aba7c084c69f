#pragma once

// Counter-based normal streams on Philox4x32-10.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace bridgelab {

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds.
inline PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += W0;
    key[1] += W1;
  }
  return ctr;
}

/// Independent standard-normal sequence for (seed, stream). Element i is a
/// pure function of (seed, stream, i); sequential reads are buffered.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  /// Uniform on (0, 1) from two 32-bit words, 52-bit resolution.
  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>(x >> 12) * 0x1.0p-52 + 0x1.0p-53;
  }

  /// Normal number `index` of this stream.
  double normal(std::uint64_t index) {
    const std::uint64_t block = index >> 1;
    if (block != cached_block_) fill(block);
    return cache_[index & 1];
  }

  /// Next normal in sequence.
  double next() { return normal(position_++); }
  std::uint64_t position() const { return position_; }

 private:
  void fill(std::uint64_t block) {
    const PhiloxBlock out = philox4x32_10(
        {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32), stream_lo_, stream_hi_},
        key_);
    const double u1 = to_unit(out[0], out[1]);
    const double u2 = to_unit(out[2], out[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cache_ = {r * std::cos(angle), r * std::sin(angle)};
    cached_block_ = block;
  }

  PhiloxKey key_;
  std::uint32_t stream_lo_, stream_hi_;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  std::array<double, 2> cache_{};
  std::uint64_t position_ = 0;
};

}  // namespace bridgelab
