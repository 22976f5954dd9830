#pragma once

#include <cstdint>
#include <random>

namespace linematch {

inline constexpr const char* kRngName = "mt19937_64/splitmix64-v1";

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// seed for one trial: splitmix64 chain over (master, a, b)
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // 53-bit uniform in [0,1)
    double uniform() noexcept { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    std::uint64_t next() noexcept { return eng_(); }
    // uniform integer in [lo, hi]
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) noexcept;

private:
    std::mt19937_64 eng_;
};

}  // namespace linematch
