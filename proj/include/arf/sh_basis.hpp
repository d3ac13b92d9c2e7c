#pragma once

#include <span>
#include <utility>
#include <vector>

#include "arf/errors.hpp"
#include "arf/vec.hpp"

namespace arf {

// Real spherical harmonics in the graphics convention: fully orthonormalized,
// Condon-Shortley phase absorbed (all basis polynomials carry positive leading
// constants). Flat index i = l(l+1) + m.

inline constexpr int kMaxShDegree = 8;

// 1/(2*sqrt(pi)), the constant degree-0 basis value.
inline constexpr double kShY00 = 0.28209479177387814;

struct Direction {
    Direction(double x, double y, double z);
    explicit Direction(const Vec3& v) : Direction(v.x, v.y, v.z) {}

    Vec3 vec() const { return {x, y, z}; }
    Direction flipped() const;

    double x, y, z;
};

struct SHBasisValues {
    std::vector<double> values;  // length (degree+1)^2, flat index l(l+1)+m
    int degree = 0;
};

inline int num_sh_coeffs(int degree) {
    if (degree < 0) throw ConfigError("num_sh_coeffs: degree must be non-negative");
    return (degree + 1) * (degree + 1);
}

inline int sh_flat_index(int l, int m) { return l * (l + 1) + m; }

// Writes (degree+1)^2 values into out. Throws ConfigError above kMaxShDegree.
void eval_sh_basis_into(const Direction& d, int degree, double* out);

SHBasisValues eval_sh_basis(const Direction& d, int degree);

// (degree-0 value, view of the l >= 1 tail). Concatenation reconstructs the input.
inline std::pair<double, std::span<const double>> split_isotropic(const SHBasisValues& basis) {
    return {basis.values[0],
            std::span<const double>(basis.values.data() + 1, basis.values.size() - 1)};
}

}  // namespace arf
