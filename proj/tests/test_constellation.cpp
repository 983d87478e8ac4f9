#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "csk/constellation.hpp"

using namespace csk;

namespace {

// Independent lattice enumeration used as the construction oracle: all
// (i, j, k) with i + j + k = n - 1 over (blue, red, green), rows from the
// blue vertex, red before green within a row.
std::vector<std::array<int, 3>> enumerate_lattice(int n) {
    std::vector<std::array<int, 3>> sites;
    for (int row = 0; row < n; ++row)
        for (int t = 0; t <= row; ++t) sites.push_back({n - 1 - row, row - t, t});
    return sites;
}

}  // namespace

TEST_CASE("entry zero sits on the blue vertex") {
    const auto c = CskConstellation::build(512, 100);
    CHECK(c.entries()[0].chroma.x == 0.1805);
    CHECK(c.entries()[0].chroma.y == 0.0722);
    CHECK(c.entries()[0].rgb_drive == RgbIntensity{0, 0, 1});
}

TEST_CASE("the 512-point build keeps the first 512 of 528 lattice sites") {
    const auto sites = enumerate_lattice(32);
    CHECK(sites.size() == 528);

    const auto c = CskConstellation::build(512, 100);
    REQUIRE(c.entries().size() == 512);
    for (int s = 0; s < 512; ++s) {
        const auto& site = sites[static_cast<std::size_t>(s)];
        const auto& e = c.entries()[static_cast<std::size_t>(s)];
        CHECK(e.rgb_drive.b == std::round(site[0] / 31.0 * 99.0) / 99.0);
        CHECK(e.rgb_drive.r == std::round(site[1] / 31.0 * 99.0) / 99.0);
        CHECK(e.rgb_drive.g == std::round(site[2] / 31.0 * 99.0) / 99.0);
    }

    std::set<std::pair<double, double>> chromas;
    for (const auto& e : c.entries()) chromas.insert({e.chroma.x, e.chroma.y});
    CHECK(chromas.size() == 512);
}

TEST_CASE("the 4-point build is verifiable by hand") {
    const auto c = CskConstellation::build(4, 100);
    REQUIRE(c.entries().size() == 4);
    CHECK(c.bits_per_symbol() == 2);
    // 3-row lattice over /2 weights: blue vertex, the two row-1 sites, then
    // the red end of row 2; quantization maps 0.5 to 50/99.
    const double half = std::round(0.5 * 99.0) / 99.0;
    CHECK(c.entries()[0].rgb_drive == RgbIntensity{0, 0, 1});
    CHECK(c.entries()[1].rgb_drive == RgbIntensity{half, 0, half});
    CHECK(c.entries()[2].rgb_drive == RgbIntensity{0, half, half});
    CHECK(c.entries()[3].rgb_drive == RgbIntensity{1, 0, 0});

    // Oracle: minimum distance from the four chroma points directly.
    double expected = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            expected = std::min(expected,
                                std::hypot(c.entries()[a].chroma.x - c.entries()[b].chroma.x,
                                           c.entries()[a].chroma.y - c.entries()[b].chroma.y));
    CHECK(c.min_distance() == expected);
    CHECK(expected > 0.0);
}

TEST_CASE("bit labels, drives, and chroma points are all one-to-one") {
    const auto c = CskConstellation::build(512, 100);
    std::set<int> labels;
    std::set<std::array<double, 3>> drives;
    std::set<std::pair<double, double>> chromas;
    for (const auto& e : c.entries()) {
        labels.insert(bits_to_index(e.bits));
        drives.insert({e.rgb_drive.r, e.rgb_drive.g, e.rgb_drive.b});
        chromas.insert({e.chroma.x, e.chroma.y});
        CHECK(bits_to_index(e.bits) == e.symbol_index);
    }
    CHECK(labels.size() == 512);
    CHECK(drives.size() == 512);
    CHECK(chromas.size() == 512);
}

TEST_CASE("every chroma point lies inside the primary triangle") {
    const auto c = CskConstellation::build(512, 100);
    const Eigen::Vector2d vr(0.4124, 0.2126);
    const Eigen::Vector2d vg(0.3576, 0.7152);
    const Eigen::Vector2d vb(0.1805, 0.0722);
    Eigen::Matrix2d basis;
    basis.col(0) = vr - vb;
    basis.col(1) = vg - vb;
    for (const auto& e : c.entries()) {
        const Eigen::Vector2d rel = e.chroma.vec() - vb;
        const Eigen::Vector2d ab = basis.fullPivLu().solve(rel);
        const double a = ab[0], b = ab[1], cc = 1.0 - a - b;
        CHECK(a >= -1e-9);
        CHECK(b >= -1e-9);
        CHECK(cc >= -1e-9);
        CHECK(a <= 1.0 + 1e-9);
        CHECK(b <= 1.0 + 1e-9);
        CHECK(cc <= 1.0 + 1e-9);
    }
}

TEST_CASE("drive channels sit on the quantization grid") {
    for (int steps : {100, 64}) {
        const auto c = CskConstellation::build(512, steps);
        for (const auto& e : c.entries()) {
            for (double v : {e.rgb_drive.r, e.rgb_drive.g, e.rgb_drive.b}) {
                const double scaled = v * (steps - 1);
                CHECK(scaled == doctest::Approx(std::round(scaled)).margin(1e-9));
            }
        }
    }
}

TEST_CASE("modulate is a table lookup and round-trips through hard demodulation") {
    const auto c = CskConstellation::build(512, 100);
    CHECK(c.modulate(index_to_bits(0, 9)) == RgbIntensity{0, 0, 1});
    CHECK(c.modulate(index_to_bits(511, 9)) == c.entries()[511].rgb_drive);

    for (int s = 0; s < 512; ++s) {
        const auto bits = index_to_bits(s, 9);
        const auto drive = c.modulate(bits);
        const auto decision = c.hard_demodulate(rgb_to_xy(drive));
        CHECK(decision.symbol_index == s);
        CHECK(decision.bits == bits);
    }
}

TEST_CASE("hard demodulation is a strict nearest-neighbor rule") {
    const auto c = CskConstellation::build(512, 100);
    SUBCASE("self-match at zero distance") {
        for (int s : {0, 1, 17, 255, 511})
            CHECK(c.hard_demodulate(c.entry(s).chroma).symbol_index == s);
    }
    SUBCASE("perturbed midpoints resolve to the nearer entry") {
        const auto& a = c.entry(0).chroma;
        const auto& b = c.entry(1).chroma;
        const ChromaticityPoint mid{(a.x + b.x) / 2, (a.y + b.y) / 2};
        const ChromaticityPoint toward_a{mid.x + 1e-9 * (a.x - mid.x),
                                         mid.y + 1e-9 * (a.y - mid.y)};
        const ChromaticityPoint toward_b{mid.x + 1e-9 * (b.x - mid.x),
                                         mid.y + 1e-9 * (b.y - mid.y)};
        CHECK(c.hard_demodulate(toward_a).symbol_index == 0);
        CHECK(c.hard_demodulate(toward_b).symbol_index == 1);
    }
    SUBCASE("exact distance ties break toward the smaller index") {
        // Find a midpoint whose computed squared distances tie bit-for-bit.
        bool found = false;
        for (int s = 0; s < 511 && !found; ++s) {
            const auto& a = c.entry(s).chroma;
            const auto& b = c.entry(s + 1).chroma;
            const ChromaticityPoint mid{(a.x + b.x) / 2, (a.y + b.y) / 2};
            const double da = (mid.x - a.x) * (mid.x - a.x) + (mid.y - a.y) * (mid.y - a.y);
            const double db = (mid.x - b.x) * (mid.x - b.x) + (mid.y - b.y) * (mid.y - b.y);
            if (da == db) {
                const auto d = c.hard_demodulate(mid);
                const double dn = (mid.x - c.entry(d.symbol_index).chroma.x) *
                                      (mid.x - c.entry(d.symbol_index).chroma.x) +
                                  (mid.y - c.entry(d.symbol_index).chroma.y) *
                                      (mid.y - c.entry(d.symbol_index).chroma.y);
                if (dn == da) {  // the pair is actually nearest; the tie must break low
                    CHECK(d.symbol_index == s);
                    found = true;
                }
            }
        }
        CHECK(found);
    }
}

TEST_CASE("minimum distance is positive and matches an exhaustive scan") {
    const auto c = CskConstellation::build(512, 100);
    double expected = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 512; ++a)
        for (int b = a + 1; b < 512; ++b)
            expected = std::min(expected, std::hypot(c.entry(a).chroma.x - c.entry(b).chroma.x,
                                                     c.entry(a).chroma.y - c.entry(b).chroma.y));
    CHECK(c.min_distance() == expected);
    CHECK(c.min_distance() > 0.0);
}

TEST_CASE("construction rejects bad arguments") {
    CHECK_THROWS_AS(CskConstellation::build(500, 100), std::invalid_argument);  // not a power of 2
    CHECK_THROWS_AS(CskConstellation::build(2, 100), std::invalid_argument);    // below minimum
    CHECK_THROWS_AS(CskConstellation::build(512, 8), std::invalid_argument);    // too few steps
}
