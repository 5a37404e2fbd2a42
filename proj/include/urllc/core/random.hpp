// SPDX-License-Identifier: Apache-2.0
//
// Philox4x32-10 counter-based generator and the stream helpers built on it.
// Every random quantity in the library is a pure function of
// (seed, stream, counter), so parallel runs reproduce serial ones exactly.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>

namespace urllc {

struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMulA = 0xD2511F53u;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85u;

  static constexpr Counter block(Counter c, Key k) noexcept {
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        k[0] += kWeylA;
        k[1] += kWeylB;
      }
      const std::uint64_t p0 = std::uint64_t{kMulA} * c[0];
      const std::uint64_t p1 = std::uint64_t{kMulB} * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
           static_cast<std::uint32_t>(p0)};
    }
    return c;
  }
};

// splitmix64 finalizer; used to derive child seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed ^ mix64(index + 0x632BE59BD9B4E019ull));
}

// 53-bit double in [0, 1).
constexpr double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
  return static_cast<double>((std::uint64_t{hi} >> 5) * 67108864ull + (lo >> 6)) *
         0x1.0p-53;
}

// Random access: one uniform per (seed, stream, index).
inline double uniform_at(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t index) noexcept {
  const auto r = Philox4x32::block(
      {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
       static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  return to_unit(r[0], r[1]);
}

// Sequential stream over counters (index, stream). Satisfies
// UniformRandomBitGenerator so it can also feed <random> distributions.
class CounterStream {
 public:
  using result_type = std::uint32_t;

  CounterStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  double uniform() noexcept {
    const auto hi = (*this)();
    const auto lo = (*this)();
    return to_unit(hi, lo);
  }

  double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }

  // Standard normal by Box-Muller; the second variate is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u = 1.0 - uniform();
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double a = 2.0 * std::numbers::pi * v;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Circularly symmetric complex normal with E|z|^2 = var.
  std::complex<double> complex_normal(double var = 1.0) noexcept {
    const double s = std::sqrt(var / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

  std::uint64_t blocks_used() const noexcept { return counter_; }

 private:
  void refill() noexcept {
    buf_ = Philox4x32::block(
        {static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
         static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
        key_);
    ++counter_;
    pos_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  Philox4x32::Counter buf_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace urllc
