#ifndef LONGMEM_RNG_HPP
#define LONGMEM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace longmem::rng {

inline std::uint64_t splitmix64(std::uint64_t state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Independent sub-stream seed for trial or coordinate `index`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
}

/// Deterministic standard-normal stream. The uniform and Gaussian transforms
/// are spelled out here so the sequence depends only on the seed, not on the
/// standard library's distribution implementations.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    /// Uniform on (0, 1].
    double next_uniform() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace longmem::rng

#endif
