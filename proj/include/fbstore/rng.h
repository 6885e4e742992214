#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace fbstore {

/// Identifies one reproducible random stream: `seed` selects the experiment,
/// `stream` the replication. Identical pairs give bit-identical output.
struct Seed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  friend bool operator==(const Seed&, const Seed&) = default;
};

/// Philox4x32-10 counter-based generator. The output block for a given
/// (key, counter) pair does not depend on how many blocks were drawn before,
/// so streams can be consumed from any thread in any order.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox4x32(Seed seed) noexcept
      : key_{static_cast<std::uint32_t>(seed.seed),
             static_cast<std::uint32_t>(seed.seed >> 32)},
        stream_(seed.stream) {}

  Block block(std::uint64_t index) const noexcept {
    Block ctr{static_cast<std::uint32_t>(index),
              static_cast<std::uint32_t>(index >> 32),
              static_cast<std::uint32_t>(stream_),
              static_cast<std::uint32_t>(stream_ >> 32)};
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
};

/// Standard normal variates from a Philox stream via Box-Muller.
/// Each counter block yields exactly two variates.
class NormalStream {
 public:
  explicit NormalStream(Seed seed) noexcept : gen_(seed) {}

  void fill(std::span<double> out) noexcept {
    std::size_t i = 0;
    if (has_spare_ && !out.empty()) {
      out[i++] = spare_;
      has_spare_ = false;
    }
    for (; i + 1 < out.size(); i += 2) {
      const auto [a, b] = pair();
      out[i] = a;
      out[i + 1] = b;
    }
    if (i < out.size()) {
      const auto [a, b] = pair();
      out[i] = a;
      spare_ = b;
      has_spare_ = true;
    }
  }

  double next() noexcept {
    double v;
    fill(std::span<double>(&v, 1));
    return v;
  }

 private:
  static double open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = (std::uint64_t{hi} << 32 | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  std::array<double, 2> pair() noexcept {
    const auto blk = gen_.block(counter_++);
    const double u1 = open_unit(blk[0], blk[1]);
    const double u2 = open_unit(blk[2], blk[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  Philox4x32 gen_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fbstore
