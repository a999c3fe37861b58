#pragma once

#include <cstdint>
#include <random>

namespace hpmab {

/// splitmix64 finalizer; good avalanche, cheap, stable across platforms.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Purpose tags for derived rng streams. Keeping selection, inference and
/// simulation on separate streams is what makes the equation-reduction
/// comparisons (gamma=0, sigma_gp=0) bit-exact across policy variants.
enum class RngUse : std::uint64_t {
    data_gen = 1,
    select = 2,
    prior_init = 3,
    mh_chain = 4,
    gap_fill = 5,
    tie_break = 6,
};

/// Derives independent std::mt19937_64 streams from a master seed and a
/// handful of identifying words (repetition, cell, visit, purpose).
struct StreamSeeder {
    std::uint64_t master = 0;

    [[nodiscard]] StreamSeeder child(std::uint64_t tag) const {
        return StreamSeeder{mix64(master ^ mix64(tag))};
    }

    [[nodiscard]] std::uint64_t derive(std::uint64_t a, std::uint64_t b = 0,
                                       std::uint64_t c = 0) const {
        std::uint64_t s = master;
        s = mix64(s ^ mix64(a + 0x100));
        s = mix64(s ^ mix64(b + 0x200));
        s = mix64(s ^ mix64(c + 0x300));
        return s;
    }

    [[nodiscard]] std::mt19937_64 stream(RngUse use, std::uint64_t a = 0,
                                         std::uint64_t b = 0) const {
        return std::mt19937_64(derive(static_cast<std::uint64_t>(use), a, b));
    }
};

} // namespace hpmab
