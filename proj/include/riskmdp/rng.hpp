#pragma once

#include <array>
#include <cstdint>

namespace riskmdp {

/// Philox4x32-10 counter-based generator, bit-compatible with Random123's philox4x32.
class Philox4x32 {
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

  private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

/**
 * Substream for one simulation run. Block i of run r under seed s is
 * Philox4x32-10(counter = (r lo, r hi, i, 0), key = (s lo, s hi)), so streams do not
 * depend on how runs are scheduled.
 */
class RunStream {
  public:
    RunStream(std::uint64_t seed, std::uint64_t run)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          run_lo_(static_cast<std::uint32_t>(run)), run_hi_(static_cast<std::uint32_t>(run >> 32)) {}

    std::uint32_t next_u32() {
        if (used_ == 4) {
            buf_ = Philox4x32::block({run_lo_, run_hi_, block_++, 0u}, key_);
            used_ = 0;
        }
        return buf_[used_++];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() {
        const std::uint64_t a = next_u32() >> 5, b = next_u32() >> 6;
        return static_cast<double>(a * 67108864u + b) * 0x1.0p-53;
    }

  private:
    Philox4x32::Key key_;
    std::uint32_t run_lo_, run_hi_;
    std::uint32_t block_ = 0;
    Philox4x32::Counter buf_{};
    int used_ = 4;
};

} // namespace riskmdp
