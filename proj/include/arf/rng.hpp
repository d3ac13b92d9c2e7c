#pragma once

#include <cstdint>
#include <random>

#include "arf/vec.hpp"

namespace arf {

// Seeded RNG with explicitly-coded distributions. std::uniform_real_distribution
// is implementation-defined, so uniforms are derived from the raw engine output
// directly; identical seeds give identical streams for any standard-conforming
// mt19937_64.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // [0, 1)
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        return std::uint64_t(uniform() * double(n)) % n;
    }

    Vec3 unit_vector() {
        const double z = uniform(-1.0, 1.0);
        const double phi = uniform(0.0, 2.0 * 3.14159265358979323846);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        return {r * std::cos(phi), r * std::sin(phi), z};
    }

    std::uint64_t raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

}  // namespace arf
