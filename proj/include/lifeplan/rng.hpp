#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lifeplan {

// Counter-based random stream: each (seed, stream) pair indexes an
// independent sequence, and the k-th draw is a pure function of
// (seed, stream, k). Streams can therefore be partitioned across paths (or
// workers) with results independent of evaluation order.
//
// The mixer is the 64-bit finalizer used by splitmix64, applied to a Weyl
// sequence offset by hashes of the seed and stream ids.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : base_(mix(seed + 0x9e3779b97f4a7c15ULL) ^
                mix(stream + 0xbf58476d1ce4e5b9ULL)),
          counter_(0) {}

    // Next 64 uniformly distributed bits.
    std::uint64_t next_u64() noexcept {
        return mix(base_ + 0x9e3779b97f4a7c15ULL * ++counter_);
    }

    // Uniform draw in the open interval (0, 1).
    double next_uniform() noexcept {
        // 53-bit mantissa, offset by half a ulp so 0 is never produced.
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal draw via Box-Muller; pairs are generated together and
    // the spare is cached.
    double next_normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    static std::uint64_t mix(std::uint64_t x) noexcept {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return x;
    }

    std::uint64_t base_;
    std::uint64_t counter_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace lifeplan
