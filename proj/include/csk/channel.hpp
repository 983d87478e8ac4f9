#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "csk/colorspace.hpp"
#include "csk/random.hpp"

namespace csk {

// Documented default spectral-crosstalk matrix: strictly diagonally dominant
// leakage between the RGB filter channels, rows summing to one.
Eigen::Matrix3d default_crosstalk();

// Parametric optical-link and sensor surrogate: crosstalk, memoryless
// per-channel nonlinearity, Gaussian noise shrinking with the LED count,
// clipping, and uniform ADC quantization.
struct ChannelParams {
    Eigen::Matrix3d crosstalk = default_crosstalk();
    double nonlinearity_gamma = 1.3;
    double noise_sigma0 = 0.0;
    int led_count = 25;
    int adc_bits = 12;
    std::uint64_t seed = 0;

    // Per-channel noise standard deviation after spatial averaging over the LEDs.
    double noise_sigma() const;

    void validate() const;  // throws std::invalid_argument
};

// Clip to [0, 1], then round to the nearest of 2^bits uniform levels.
double quantize(double v, int bits);

// One symbol through the channel. Draws exactly three Gaussians per call when
// noise_sigma0 > 0 and none otherwise, so stream alignment is reproducible.
RgbIntensity transmit(const RgbIntensity& drive, const ChannelParams& params, NoiseSource& noise);

}  // namespace csk
