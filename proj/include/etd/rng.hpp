#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace etd {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Independent stream seed for (master, stream). Used everywhere a component
/// needs its own generator, e.g. one per adversarial vector in a batch.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master + 0x9E3779B97F4A7C15ull * (stream + 1));
}

/// mt19937_64 plus fixed uniform/normal transforms. The std distributions are
/// implementation-defined, so the transforms live here to keep every draw
/// reproducible across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    /// Standard Box-Muller without the cached spare; one draw costs two
    /// engine steps, and the stream stays independent of call history.
    double normal(double mean, double stddev) {
        double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        double u2 = uniform01();
        double radius = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * radius * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t bounded(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace etd
