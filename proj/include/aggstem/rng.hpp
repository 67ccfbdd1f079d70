#ifndef AGGSTEM_RNG_HPP
#define AGGSTEM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "aggstem/vec3.hpp"

namespace aggstem {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}
} // namespace detail

// Seeded random stream with cheap child-stream derivation. Children are
// keyed by (seed, index), so work items can be processed in any order or
// on any thread and still consume identical draw sequences. All variate
// transforms are implemented here (not via std:: distributions, whose
// algorithms are unspecified), so a given seed fixes the exact sequence.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : seed_(seed) {
        std::uint64_t s = seed;
        engine_.seed(detail::splitmix64(s));
    }

    std::uint64_t seed() const { return seed_; }

    // Independent stream derived from (seed, index); does not disturb
    // this stream's state.
    RandomStream child(std::uint64_t index) const {
        return RandomStream(detail::splitmix64(seed_ + 0x9E3779B97F4A7C15ULL * (index + 1)));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Uniform integer in [0, n), n >= 1.
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Standard normal via Box-Muller; consumes exactly two u64 draws.
    double normal() {
        double u1 = 1.0 - uniform01(); // (0, 1]
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi_ * u2);
    }

    double lognormal(double mu_ln, double sigma_ln) {
        return std::exp(mu_ln + sigma_ln * normal());
    }

    // Uniform direction on the unit sphere: z uniform in [-1,1], azimuth
    // uniform in [0,2pi).
    Vec3 unit_vector() {
        double z = 1.0 - 2.0 * uniform01();
        double phi = 2.0 * pi_ * uniform01();
        double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        return {s * std::cos(phi), s * std::sin(phi), z};
    }

    // Poisson counts. Knuth product method for small means, transformed
    // rejection (PTRS) for the mid range, Gaussian approximation above
    // 1e6 where the relative error is negligible.
    std::int64_t poisson(double lambda) {
        if (!(lambda > 0.0)) return 0;
        if (lambda < 30.0) {
            const double limit = std::exp(-lambda);
            double prod = uniform01();
            std::int64_t k = 0;
            while (prod > limit) {
                ++k;
                prod *= uniform01();
            }
            return k;
        }
        if (lambda <= 1e6) return poisson_ptrs(lambda);
        double g = lambda + std::sqrt(lambda) * normal();
        return g < 0.0 ? 0 : static_cast<std::int64_t>(std::llround(g));
    }

private:
    std::int64_t poisson_ptrs(double lambda) {
        // Hoermann (1993), algorithm PTRS.
        const double slam = std::sqrt(lambda);
        const double loglam = std::log(lambda);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            double u = uniform01() - 0.5;
            double v = uniform01();
            double us = 0.5 - std::fabs(u);
            double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
                kf * loglam - lambda - std::lgamma(kf + 1.0)) {
                return static_cast<std::int64_t>(kf);
            }
        }
    }

    static constexpr double pi_ = 3.14159265358979323846;
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace aggstem

#endif
