#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "csk/ingest.hpp"

using namespace csk;

namespace {

RawFrame random_frame(int w, int h, BayerPattern pattern, std::uint64_t seed, int max_value) {
    RawFrame f;
    f.width = w;
    f.height = h;
    f.pattern = pattern;
    f.samples.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> u(0, max_value);
    for (auto& s : f.samples) s = static_cast<std::uint16_t>(u(rng));
    return f;
}

RawFrame rotate_180(const RawFrame& f) {
    RawFrame r = f;
    std::reverse(r.samples.begin(), r.samples.end());
    switch (f.pattern) {
        case BayerPattern::RGGB: r.pattern = BayerPattern::BGGR; break;
        case BayerPattern::BGGR: r.pattern = BayerPattern::RGGB; break;
        case BayerPattern::GRBG: r.pattern = BayerPattern::GBRG; break;
        case BayerPattern::GBRG: r.pattern = BayerPattern::GRBG; break;
    }
    return r;
}

}  // namespace

TEST_CASE("a saturated frame extracts to full-scale white") {
    RawFrame f;
    f.width = 8;
    f.height = 8;
    f.samples.assign(64, 4095);
    const RgbIntensity rgb = extract_rgb(f, {0, 0, 8, 8});
    CHECK(rgb.r == 1.0);
    CHECK(rgb.g == 1.0);
    CHECK(rgb.b == 1.0);
}

TEST_CASE("a single RGGB quad extracts site-wise means") {
    // Oracle by hand: R = 4095, both G sites 0, B = 4095.
    RawFrame f;
    f.width = 2;
    f.height = 2;
    f.samples = {4095, 0, 0, 4095};
    const RgbIntensity rgb = extract_rgb(f, {0, 0, 2, 2});
    CHECK(rgb.r == 1.0);
    CHECK(rgb.g == 0.0);
    CHECK(rgb.b == 1.0);
}

TEST_CASE("synthesized frames recover their drive within half a code") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto pattern :
         {BayerPattern::RGGB, BayerPattern::BGGR, BayerPattern::GRBG, BayerPattern::GBRG}) {
        for (int trial = 0; trial < 50; ++trial) {
            const RgbIntensity drive(u(rng), u(rng), u(rng));
            const RawFrame f = synthesize_uniform_frame(drive, 16, 12, pattern);
            const RgbIntensity out = extract_rgb(f, {0, 0, 16, 12});
            CHECK(std::abs(out.r - drive.r) <= 1.0 / 4095.0);
            CHECK(std::abs(out.g - drive.g) <= 1.0 / 4095.0);
            CHECK(std::abs(out.b - drive.b) <= 1.0 / 4095.0);
        }
    }
}

TEST_CASE("extraction is invariant under 180-degree rotation with relabeling") {
    for (auto pattern : {BayerPattern::RGGB, BayerPattern::GRBG}) {
        const RawFrame f = random_frame(12, 10, pattern, 5, 4095);
        const RawFrame r = rotate_180(f);
        const RgbIntensity a = extract_rgb(f, {0, 0, 12, 10});
        const RgbIntensity b = extract_rgb(r, {0, 0, 12, 10});
        CHECK(a.r == doctest::Approx(b.r).margin(1e-12));
        CHECK(a.g == doctest::Approx(b.g).margin(1e-12));
        CHECK(a.b == doctest::Approx(b.b).margin(1e-12));
    }
}

TEST_CASE("extraction is additive over pixel-wise frame sums") {
    const RawFrame f1 = random_frame(8, 8, BayerPattern::RGGB, 31, 2000);
    const RawFrame f2 = random_frame(8, 8, BayerPattern::RGGB, 32, 2000);
    RawFrame sum = f1;
    for (std::size_t i = 0; i < sum.samples.size(); ++i)
        sum.samples[i] = static_cast<std::uint16_t>(f1.samples[i] + f2.samples[i]);
    const RegionOfInterest roi{2, 2, 4, 4};
    const RgbIntensity a = extract_rgb(f1, roi);
    const RgbIntensity b = extract_rgb(f2, roi);
    const RgbIntensity s = extract_rgb(sum, roi);
    CHECK(s.r == doctest::Approx(a.r + b.r).margin(1e-12));
    CHECK(s.g == doctest::Approx(a.g + b.g).margin(1e-12));
    CHECK(s.b == doctest::Approx(a.b + b.b).margin(1e-12));
}

TEST_CASE("led area fraction counts lit pixels") {
    RawFrame dark;
    dark.width = 4;
    dark.height = 4;
    dark.samples.assign(16, 0);
    CHECK(led_area_fraction(dark, 0.5) == 0.0);

    RawFrame lit = dark;
    lit.samples.assign(16, 4095);
    CHECK(led_area_fraction(lit, 0.5) == 1.0);

    // Exactly one quarter of the pixels saturated.
    RawFrame quarter = dark;
    for (int i = 0; i < 4; ++i) quarter.samples[static_cast<std::size_t>(i)] = 4095;
    CHECK(led_area_fraction(quarter, 0.5) == 0.25);
}

TEST_CASE("the raw container round-trips bit-exactly") {
    const auto path = std::filesystem::temp_directory_path() / "csk_ingest_roundtrip.occr";
    const RawFrame f = random_frame(10, 6, BayerPattern::GBRG, 77, 4095);
    write_raw_frame(f, path);
    const RawFrame g = read_raw_frame(path);
    CHECK(g.width == f.width);
    CHECK(g.height == f.height);
    CHECK(g.pattern == f.pattern);
    CHECK(g.samples == f.samples);
    std::filesystem::remove(path);
}

TEST_CASE("malformed frames and containers are rejected") {
    RawFrame odd;
    odd.width = 3;
    odd.height = 2;
    odd.samples.assign(6, 0);
    CHECK_THROWS_AS(odd.validate(), std::invalid_argument);

    RawFrame oversized;
    oversized.width = 2;
    oversized.height = 2;
    oversized.samples = {0, 0, 0, 4096};
    CHECK_THROWS_AS(oversized.validate(), std::invalid_argument);

    RawFrame ok;
    ok.width = 4;
    ok.height = 4;
    ok.samples.assign(16, 1);
    CHECK_THROWS_AS(extract_rgb(ok, {0, 0, 1, 2}), std::invalid_argument);   // w < 2
    CHECK_THROWS_AS(extract_rgb(ok, {2, 2, 4, 4}), std::invalid_argument);   // out of bounds
    CHECK_THROWS_AS(led_area_fraction(ok, 1.5), std::invalid_argument);

    const auto path = std::filesystem::temp_directory_path() / "csk_ingest_badmagic.occr";
    {
        std::FILE* fp = std::fopen(path.string().c_str(), "wb");
        REQUIRE(fp != nullptr);
        std::fputs("NOPE", fp);
        std::fclose(fp);
    }
    CHECK_THROWS(read_raw_frame(path));
    std::filesystem::remove(path);
}
