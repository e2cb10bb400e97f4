#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace polykr {

namespace detail {

// splitmix64 finalizer; used to decorrelate seeds and substream keys.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t root, std::uint64_t key) {
    return splitmix64(root ^ splitmix64(key + 0x632BE59BD9B4E019ULL));
}

}  // namespace detail

// Deterministic random stream. Uniform doubles are built from raw engine
// bits (not std::uniform_real_distribution), so sequences are identical
// across platforms and compilers. Substreams derive from the root seed,
// not the current state, so they can be handed out in any order.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed)
        : root_(seed), engine_(detail::splitmix64(seed)) {}

    std::uint64_t next() { return engine_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1]
    double uniform_open() { return 1.0 - uniform(); }

    // standard normal via Box-Muller (pairs cached)
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        cached_ = radius * std::sin(angle);
        have_cached_ = true;
        return radius * std::cos(angle);
    }

    RngStream substream(std::uint64_t key) const {
        return RngStream(detail::mix_seed(root_, key));
    }

    std::uint64_t root_seed() const { return root_; }

private:
    std::uint64_t root_;
    std::mt19937_64 engine_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace polykr
