#pragma once

#include <cstdint>
#include <cmath>

namespace dynab {

// Counter-based 64-bit generator: SplitMix64 finalizer applied to
// key + ctr * golden-gamma.  Stateless apart from the counter, so any
// sample index can be generated out of order; parallel loops derive
// one stream per task and results do not depend on scheduling.
class Prng {
public:
    explicit Prng(std::uint64_t key, std::uint64_t ctr = 0) : key_(key), ctr_(ctr) {}

    static std::uint64_t mix(std::uint64_t x) {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return x;
    }

    std::uint64_t next_u64() {
        std::uint64_t x = key_ + (ctr_++) * 0x9e3779b97f4a7c15ULL;
        return mix(x);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; consumes two uniforms per call.
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    std::uint64_t key() const { return key_; }

    // Deterministic stream splitting: derive(root, tag) is independent of
    // the order in which streams are consumed.
    static std::uint64_t derive(std::uint64_t root, std::uint64_t tag) {
        return mix(root ^ mix(tag + 0x9e3779b97f4a7c15ULL));
    }

private:
    std::uint64_t key_;
    std::uint64_t ctr_;
};

}  // namespace dynab
