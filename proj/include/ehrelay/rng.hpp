#ifndef EHRELAY_RNG_HPP
#define EHRELAY_RNG_HPP

// Counter-based random streams. Every Monte Carlo trial owns the stream
// keyed by (seed, trial index), so results do not depend on how trials are
// split across workers.

#include <array>
#include <cmath>
#include <cstdint>

namespace ehrelay {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Counter single_round(const Counter& ctr, const Key& key) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
};

/// Stream of variates for one trial: block counter runs over the third
/// counter word, the trial index fills the first two.
class TrialStream {
 public:
  TrialStream(std::uint64_t seed, std::uint64_t trial)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        trial_lo_(static_cast<std::uint32_t>(trial)),
        trial_hi_(static_cast<std::uint32_t>(trial >> 32)) {}

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform on (0, 1] with 53 random bits.
  double uniform_open0() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Exponential variate with the given rate (mean 1/rate).
  double exponential(double rate) { return -std::log(uniform_open0()) / rate; }

 private:
  void refill() {
    buf_ = Philox4x32::generate({trial_lo_, trial_hi_, block_++, 0u}, key_);
    pos_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t trial_lo_;
  std::uint32_t trial_hi_;
  std::uint32_t block_ = 0;
  Philox4x32::Counter buf_{};
  int pos_ = 4;
};

}  // namespace ehrelay

#endif  // EHRELAY_RNG_HPP
