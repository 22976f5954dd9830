#include "linematch/rng.hpp"

namespace linematch {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ a);
    return splitmix64(h ^ (b * 0xd1b54a32d192ed03ULL));
}

std::uint64_t Rng::between(std::uint64_t lo, std::uint64_t hi) noexcept {
    std::uint64_t span = hi - lo + 1;
    if (span == 0) return eng_();
    std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % span;
    std::uint64_t v;
    do {
        v = eng_();
    } while (v >= limit);
    return lo + v % span;
}

}  // namespace linematch
