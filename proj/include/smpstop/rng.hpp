#pragma once

#include <cstdint>

namespace smpstop {

// Counter-based uniform source. The k-th draw of stream r is a pure function
// of (seed, r, k): replications can be reproduced, reordered, or resampled in
// isolation without touching shared state.
class RandomStream {
  public:
    RandomStream(std::uint64_t seed, std::uint64_t stream)
        : base_(mix(seed ^ mix(kGolden + stream))), counter_(0) {}

    std::uint64_t next_u64() { return mix(base_ + kGolden * ++counter_); }

    // Uniform draw in the open interval (0,1); never returns an endpoint, so
    // inverse-CDF sampling cannot produce 0 or infinity.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

  private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t base_;
    std::uint64_t counter_;
};

}  // namespace smpstop
