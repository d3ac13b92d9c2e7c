#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "arf/rng.hpp"
#include "arf/sh_basis.hpp"

using namespace arf;

namespace {

constexpr double kPi = 3.14159265358979323846;

double factorial_d(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= double(i);
    return f;
}

// Independent route: std::assoc_legendre (Condon-Shortley-free in libstdc++)
// with the orthonormalization constant assembled from factorials.
double sh_oracle(int l, int m, double theta, double phi) {
    const int am = m < 0 ? -m : m;
    const double k = std::sqrt((2.0 * l + 1.0) / (4.0 * kPi) * factorial_d(l - am) /
                               factorial_d(l + am));
    const double p = std::assoc_legendre(unsigned(l), unsigned(am), std::cos(theta));
    if (m > 0) return std::sqrt(2.0) * k * p * std::cos(m * phi);
    if (m < 0) return std::sqrt(2.0) * k * p * std::sin(am * phi);
    return k * p;
}

}  // namespace

TEST_CASE("coefficient counts and flat indexing") {
    CHECK(num_sh_coeffs(0) == 1);
    CHECK(num_sh_coeffs(3) == 16);
    CHECK(num_sh_coeffs(4) == 25);
    CHECK_THROWS_AS(num_sh_coeffs(-1), ConfigError);
    CHECK(sh_flat_index(0, 0) == 0);
    CHECK(sh_flat_index(1, -1) == 1);
    CHECK(sh_flat_index(2, 0) == 6);
    CHECK(sh_flat_index(3, -3) == 9);
}

TEST_CASE("degree bounds and direction validation") {
    const Direction up(0, 0, 1);
    std::vector<double> out(100);
    CHECK_THROWS_AS(eval_sh_basis_into(up, kMaxShDegree + 1, out.data()), ConfigError);
    CHECK_THROWS_AS(eval_sh_basis_into(up, -1, out.data()), ConfigError);
    CHECK_THROWS_AS(Direction(0, 0, 0), InputError);
    CHECK_THROWS_AS(Direction(std::nan(""), 0, 1), InputError);
    const Direction d(0, 0, 2.0);
    CHECK(d.z == 1.0);
}

TEST_CASE("known values at the pole") {
    const auto b0 = eval_sh_basis(Direction(0, 0, 1), 0);
    CHECK(b0.values.size() == 1);
    CHECK(b0.values[0] == 0.28209479177387814);

    const auto b1 = eval_sh_basis(Direction(0, 0, 1), 1);
    CHECK(b1.values.size() == 4);
    CHECK(b1.values[std::size_t(sh_flat_index(1, 0))] == 0.4886025119029199);
    CHECK(b1.values[std::size_t(sh_flat_index(1, -1))] == 0.0);
    CHECK(b1.values[std::size_t(sh_flat_index(1, 1))] == 0.0);
}

TEST_CASE("degree 0 is the same constant in every direction, bit for bit") {
    Rng rng(21);
    for (int i = 0; i < 100; ++i) {
        const auto b = eval_sh_basis(Direction(rng.unit_vector()), 0);
        CHECK(b.values[0] == 0.28209479177387814);
    }
}

TEST_CASE("all degrees match the special-function oracle") {
    Rng rng(22);
    for (int trial = 0; trial < 50; ++trial) {
        const double theta = std::acos(rng.uniform(-1.0, 1.0));
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        const Direction d(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                          std::cos(theta));
        const auto b = eval_sh_basis(d, kMaxShDegree);
        for (int l = 0; l <= kMaxShDegree; ++l)
            for (int m = -l; m <= l; ++m) {
                const double want = sh_oracle(l, m, theta, phi);
                const double got = b.values[std::size_t(sh_flat_index(l, m))];
                CHECK(got == doctest::Approx(want).epsilon(1e-9).scale(1.0));
            }
    }
}

TEST_CASE("antipodal parity is (-1)^l") {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const Direction d(rng.unit_vector());
        const auto b = eval_sh_basis(d, kMaxShDegree);
        const auto bf = eval_sh_basis(d.flipped(), kMaxShDegree);
        for (int l = 0; l <= kMaxShDegree; ++l) {
            const double sign = (l % 2 == 0) ? 1.0 : -1.0;
            for (int m = -l; m <= l; ++m) {
                const std::size_t i = std::size_t(sh_flat_index(l, m));
                CHECK(bf.values[i] == doctest::Approx(sign * b.values[i]).epsilon(1e-12).scale(1.0));
            }
        }
    }
}

TEST_CASE("monte carlo orthonormality") {
    // Gram matrix over uniform sphere samples; orthonormal basis gives the
    // identity as the sample count grows.
    Rng rng(2024);
    const int n_samples = 1000000;

    SUBCASE("degree 3, tight tolerance") {
        const int dim = num_sh_coeffs(3);
        std::vector<double> gram(std::size_t(dim) * std::size_t(dim), 0.0);
        std::vector<double> y(static_cast<std::size_t>(dim));
        for (int s = 0; s < n_samples; ++s) {
            eval_sh_basis_into(Direction(rng.unit_vector()), 3, y.data());
            for (int i = 0; i < dim; ++i)
                for (int j = i; j < dim; ++j)
                    gram[std::size_t(i) * std::size_t(dim) + std::size_t(j)] +=
                        y[std::size_t(i)] * y[std::size_t(j)];
        }
        double worst = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j) {
                const double mean = gram[std::size_t(i) * std::size_t(dim) + std::size_t(j)] *
                                    (4.0 * kPi / double(n_samples));
                worst = std::max(worst, std::abs(mean - (i == j ? 1.0 : 0.0)));
            }
        CHECK(worst < 5e-3);
    }

    SUBCASE("degree 8, looser tolerance") {
        const int dim = num_sh_coeffs(kMaxShDegree);
        std::vector<double> diag(std::size_t(dim), 0.0);
        std::vector<double> y(static_cast<std::size_t>(dim));
        for (int s = 0; s < n_samples / 4; ++s) {
            eval_sh_basis_into(Direction(rng.unit_vector()), kMaxShDegree, y.data());
            for (int i = 0; i < dim; ++i) diag[std::size_t(i)] += y[std::size_t(i)] * y[std::size_t(i)];
        }
        for (int i = 0; i < dim; ++i) {
            const double mean = diag[std::size_t(i)] * (4.0 * kPi / double(n_samples / 4));
            CHECK(mean == doctest::Approx(1.0).epsilon(0.03));
        }
    }
}

TEST_CASE("isotropic split reconstructs the basis") {
    const auto b = eval_sh_basis(Direction(0.3, -0.5, 0.81), 3);
    const auto [iso, tail] = split_isotropic(b);
    CHECK(iso == b.values[0]);
    REQUIRE(tail.size() == b.values.size() - 1);
    for (std::size_t i = 0; i < tail.size(); ++i) CHECK(tail[i] == b.values[i + 1]);

    const auto b0 = eval_sh_basis(Direction(0, 1, 0), 0);
    CHECK(split_isotropic(b0).second.empty());
}
