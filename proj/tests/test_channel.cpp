#include <doctest.h>

#include <cmath>
#include <vector>

#include "csk/channel.hpp"
#include "csk/constellation.hpp"

using namespace csk;

TEST_CASE("quantization rounds onto the 12-bit grid") {
    // Oracle: round(0.5 * 4095) / 4095.
    CHECK(quantize(0.5, 12) == std::round(0.5 * 4095.0) / 4095.0);
    CHECK(quantize(0.5, 12) == doctest::Approx(0.50012).margin(5e-5));
    CHECK(quantize(1.7, 12) == 1.0);
    CHECK(quantize(-0.3, 12) == 0.0);
    CHECK(quantize(1.0, 12) == 1.0);
    CHECK(quantize(0.0, 12) == 0.0);
}

TEST_CASE("quantization is idempotent") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.5, 1.5);
    for (int i = 0; i < 10000; ++i) {
        const double v = u(rng);
        const double q = quantize(v, 12);
        CHECK(quantize(q, 12) == q);
    }
}

TEST_CASE("the impairment-free channel reduces to pure quantization") {
    ChannelParams params;
    params.crosstalk = Eigen::Matrix3d::Identity();
    params.nonlinearity_gamma = 1.0;
    params.noise_sigma0 = 0.0;
    NoiseSource noise(1, {0});

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const RgbIntensity s(u(rng), u(rng), u(rng));
        const RgbIntensity out = transmit(s, params, noise);
        CHECK(out.r == quantize(s.r, 12));
        CHECK(out.g == quantize(s.g, 12));
        CHECK(out.b == quantize(s.b, 12));
    }

    const RgbIntensity blue = transmit({0, 0, 1}, params, noise);
    CHECK(blue == RgbIntensity{0, 0, 1});
}

TEST_CASE("noise scales as one over the square root of the LED count") {
    const int n = 100000;
    auto std_dev_at = [&](int led_count) {
        ChannelParams params;
        params.crosstalk = Eigen::Matrix3d::Identity();
        params.nonlinearity_gamma = 1.0;
        params.noise_sigma0 = 0.05;
        params.led_count = led_count;
        params.adc_bits = 16;
        NoiseSource noise(42, {static_cast<std::uint64_t>(led_count)});
        const RgbIntensity mid(0.5, 0.5, 0.5);
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const RgbIntensity out = transmit(mid, params, noise);
            const double d = out.g - 0.5;
            sum += d;
            sum2 += d * d;
        }
        const double mean = sum / n;
        return std::sqrt(sum2 / n - mean * mean);
    };

    const double s25 = std_dev_at(25);
    const double s1 = std_dev_at(1);
    CHECK(s25 == doctest::Approx(0.01).epsilon(0.05));
    CHECK(s1 == doctest::Approx(0.05).epsilon(0.05));
}

TEST_CASE("identical seeds reproduce identical output sequences") {
    ChannelParams params;
    params.noise_sigma0 = 0.05;
    std::vector<RgbIntensity> a, b;
    for (int run = 0; run < 2; ++run) {
        NoiseSource noise(99, {7});
        auto& out = run == 0 ? a : b;
        for (int i = 0; i < 100; ++i)
            out.push_back(transmit({0.25, 0.5, 0.75}, params, noise));
    }
    CHECK(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("the default crosstalk matrix is a diagonally dominant leakage pattern") {
    const Eigen::Matrix3d h = default_crosstalk();
    for (int r = 0; r < 3; ++r) {
        // Oracle: sum the stated rows.
        CHECK(h.row(r).sum() == doctest::Approx(1.0).margin(1e-12));
        double off = 0.0;
        for (int c = 0; c < 3; ++c)
            if (c != r) off += h(r, c);
        CHECK(h(r, r) > off);
    }
    CHECK_FALSE(h.isApprox(Eigen::Matrix3d::Identity()));
}

TEST_CASE("crosstalk alone already misclassifies some symbols") {
    // Oracle: run all 512 symbols through H and the nearest-neighbor demap.
    const auto c = CskConstellation::build(512, 100);
    ChannelParams params;  // default crosstalk, gamma 1.3, no noise
    NoiseSource noise(1, {0});
    int mismatches = 0;
    for (int s = 0; s < 512; ++s) {
        const RgbIntensity rx = transmit(c.entry(s).rgb_drive, params, noise);
        if (c.hard_demodulate(rgb_to_xy(rx)).symbol_index != s) ++mismatches;
    }
    CHECK(mismatches > 0);
}

TEST_CASE("hard-decision symbol errors do not grow with the LED count") {
    const auto c = CskConstellation::build(512, 100);
    const std::vector<int> led_counts = {1, 4, 16, 64};
    const int symbols = 20000;

    std::vector<double> ser;
    std::vector<double> stderr_of;
    for (int led : led_counts) {
        ChannelParams params;
        params.crosstalk = Eigen::Matrix3d::Identity();
        params.nonlinearity_gamma = 1.0;
        params.noise_sigma0 = 0.08;
        params.led_count = led;
        NoiseSource noise(2024, {static_cast<std::uint64_t>(led)});
        std::mt19937_64 sym_rng(17);
        std::uniform_int_distribution<int> pick(0, 511);
        int errors = 0;
        for (int i = 0; i < symbols; ++i) {
            const int s = pick(sym_rng);
            const RgbIntensity rx = transmit(c.entry(s).rgb_drive, params, noise);
            if (c.hard_demodulate(rgb_to_xy(rx)).symbol_index != s) ++errors;
        }
        const double p = static_cast<double>(errors) / symbols;
        ser.push_back(p);
        stderr_of.push_back(std::sqrt(std::max(p * (1 - p), 1e-9) / symbols));
    }
    for (std::size_t i = 1; i < ser.size(); ++i) {
        const double slack = 2.0 * std::hypot(stderr_of[i - 1], stderr_of[i]);
        CHECK(ser[i] <= ser[i - 1] + slack);
    }
}

TEST_CASE("invalid channel parameters are rejected") {
    ChannelParams params;
    params.crosstalk(0, 0) = 0.1;  // diagonal no longer dominates
    CHECK_THROWS_AS(params.validate(), std::invalid_argument);

    ChannelParams led;
    led.led_count = 65;
    CHECK_THROWS_AS(led.validate(), std::invalid_argument);

    ChannelParams gamma;
    gamma.nonlinearity_gamma = 0.0;
    CHECK_THROWS_AS(gamma.validate(), std::invalid_argument);

    ChannelParams defaults;
    CHECK_NOTHROW(defaults.validate());
}
