#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace projeq {

/// Named random streams so independent consumers never share draws.
enum class Stream : std::uint64_t {
    Test = 1,
    Init = 2,
    Data = 3,
    Shuffle = 4,
    Eval = 5,
    Verify = 6,
    Flip = 7,
    Rotation = 8,
};

/// Deterministic generator keyed by (stream, seed, index).
///
/// The key is expanded through std::seed_seq into a mt19937_64 state; both
/// algorithms are fixed by the standard, so draws are identical on every
/// conforming platform. Normals use Box-Muller on the uniform draws rather
/// than std::normal_distribution, whose algorithm is unspecified.
class Rng {
public:
    explicit Rng(std::uint64_t seed, Stream stream = Stream::Test, std::uint64_t index = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(static_cast<std::uint64_t>(stream)),
                          static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    double normal(double mean, double std) { return mean + std * normal(); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace projeq
