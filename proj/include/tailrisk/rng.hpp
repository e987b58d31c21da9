#pragma once

// Deterministic random number generation. Samplers are built on inverse-CDF
// transforms of mt19937_64 uniforms so that streams are bit-exact for a given
// seed regardless of standard-library distribution internals.

#include <cstdint>
#include <random>

#include "tailrisk/math/special.hpp"

namespace tailrisk {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Derive an independent stream for a (model, origin) style sub-task.
    static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
        // splitmix64 over the packed key
        std::uint64_t z = base ^ (a * 0x9E3779B97F4A7C15ULL) ^ (b * 0xBF58476D1CE4E5B9ULL);
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on (0, 1), endpoints excluded.
    double u01() {
        std::uint64_t r = gen_();
        return (static_cast<double>(r >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double normal() { return math::norm_inv(u01()); }

    double student_t(double nu) { return math::t_inv(u01(), nu); }

    // Laplace(0, scale); scale 1 gives variance 2.
    double laplace(double scale = 1.0) {
        double u = u01() - 0.5;
        return -scale * std::copysign(std::log1p(-2.0 * std::fabs(u)), u);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    std::uint64_t next_u64() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

}  // namespace tailrisk
