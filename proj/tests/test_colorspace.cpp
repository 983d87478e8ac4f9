#include <doctest.h>

#include <random>

#include "csk/colorspace.hpp"

using namespace csk;

TEST_CASE("primaries map to the matrix columns bit-exactly") {
    const auto red = rgb_to_xy({1, 0, 0});
    CHECK(red.x == 0.4124);
    CHECK(red.y == 0.2126);

    const auto green = rgb_to_xy({0, 1, 0});
    CHECK(green.x == 0.3576);
    CHECK(green.y == 0.7152);

    const auto blue = rgb_to_xy({0, 0, 1});
    CHECK(blue.x == 0.1805);
    CHECK(blue.y == 0.0722);
}

TEST_CASE("zero input maps to the origin") {
    const auto p = rgb_to_xy({0, 0, 0});
    CHECK(p.x == 0.0);
    CHECK(p.y == 0.0);
}

TEST_CASE("rgb_to_xy is linear") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> c(0.0, 0.5);
    for (int trial = 0; trial < 10000; ++trial) {
        const RgbIntensity p(u(rng), u(rng), u(rng));
        const RgbIntensity q(u(rng), u(rng), u(rng));
        const double a = c(rng);
        const double b = c(rng);
        const RgbIntensity mix(a * p.r + b * q.r, a * p.g + b * q.g, a * p.b + b * q.b);
        const auto lhs = rgb_to_xy(mix);
        const auto fp = rgb_to_xy(p);
        const auto fq = rgb_to_xy(q);
        CHECK(lhs.x == doctest::Approx(a * fp.x + b * fq.x).epsilon(0).scale(1).margin(1e-12));
        CHECK(lhs.y == doctest::Approx(a * fp.y + b * fq.y).epsilon(0).scale(1).margin(1e-12));
    }
}

TEST_CASE("normalized chromaticity of equal-energy input is the white point") {
    // Oracle: sum the three matrix columns and normalize by the total.
    const Eigen::Vector3d xyz = rgb_to_xyz_matrix() * Eigen::Vector3d::Ones();
    const double expected_x = xyz.x() / xyz.sum();
    const double expected_y = xyz.y() / xyz.sum();

    const auto p = rgb_to_xy_chromaticity({1, 1, 1});
    CHECK(p.x == doctest::Approx(expected_x).margin(1e-15));
    CHECK(p.y == doctest::Approx(expected_y).margin(1e-15));
    CHECK(p.x == doctest::Approx(0.3127).margin(1e-3));
    CHECK(p.y == doctest::Approx(0.3290).margin(1e-3));
}

TEST_CASE("normalized chromaticity of blue matches the normalized column") {
    // Oracle: normalize the blue column (0.1805, 0.0722, 0.9505).
    const double sum = 0.1805 + 0.0722 + 0.9505;
    const auto p = rgb_to_xy_chromaticity({0, 0, 1});
    CHECK(p.x == doctest::Approx(0.1805 / sum).margin(1e-15));
    CHECK(p.y == doctest::Approx(0.0722 / sum).margin(1e-15));
    CHECK(p.x == doctest::Approx(0.1500).margin(1e-3));
    CHECK(p.y == doctest::Approx(0.0600).margin(1e-3));
}

TEST_CASE("normalized chromaticity is scale invariant") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::uniform_real_distribution<double> ks(0.01, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const RgbIntensity rgb(u(rng), u(rng), u(rng));
        const double k = ks(rng);
        const RgbIntensity scaled(k * rgb.r, k * rgb.g, k * rgb.b);
        const auto a = rgb_to_xy_chromaticity(rgb);
        const auto b = rgb_to_xy_chromaticity(scaled);
        CHECK(a.x == doctest::Approx(b.x).margin(1e-12));
        CHECK(a.y == doctest::Approx(b.y).margin(1e-12));
    }
}

TEST_CASE("zero input has no normalized chromaticity") {
    CHECK_THROWS_AS(rgb_to_xy_chromaticity({0, 0, 0}), std::domain_error);
}

TEST_CASE("out-of-range channels are rejected at construction") {
    CHECK_THROWS_AS(RgbIntensity(-0.1, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(RgbIntensity(0, 1.1, 0), std::invalid_argument);
    CHECK_THROWS_AS(RgbIntensity(0, 0, std::nan("")), std::invalid_argument);
}
