#include "csk/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace csk {

Eigen::Matrix3d default_crosstalk() {
    Eigen::Matrix3d h;
    h << 0.80, 0.15, 0.05,
         0.10, 0.80, 0.10,
         0.02, 0.12, 0.86;
    return h;
}

double ChannelParams::noise_sigma() const {
    return noise_sigma0 / std::sqrt(static_cast<double>(led_count));
}

void ChannelParams::validate() const {
    for (int r = 0; r < 3; ++r) {
        double off = 0.0;
        for (int c = 0; c < 3; ++c) {
            if (!(crosstalk(r, c) >= 0.0))
                throw std::invalid_argument("ChannelParams: crosstalk gains must be nonnegative");
            if (c != r) off += crosstalk(r, c);
        }
        if (!(crosstalk(r, r) > off))
            throw std::invalid_argument("ChannelParams: crosstalk diagonal must dominate its row");
        if (!(crosstalk.row(r).sum() <= 1.2))
            throw std::invalid_argument("ChannelParams: crosstalk row sum exceeds 1.2");
    }
    if (!(nonlinearity_gamma > 0.0))
        throw std::invalid_argument("ChannelParams: nonlinearity exponent must be positive");
    if (!(noise_sigma0 >= 0.0))
        throw std::invalid_argument("ChannelParams: noise sigma must be nonnegative");
    if (led_count < 1 || led_count > 64)
        throw std::invalid_argument("ChannelParams: led_count outside [1, 64]");
    if (adc_bits < 8 || adc_bits > 16)
        throw std::invalid_argument("ChannelParams: adc_bits outside [8, 16]");
}

double quantize(double v, int bits) {
    const double levels = static_cast<double>((1 << bits) - 1);
    const double clipped = std::min(1.0, std::max(0.0, v));
    return std::round(clipped * levels) / levels;
}

RgbIntensity transmit(const RgbIntensity& drive, const ChannelParams& params, NoiseSource& noise) {
    Eigen::Vector3d v = params.crosstalk * drive.vec();
    if (params.nonlinearity_gamma != 1.0)
        v = v.array().pow(params.nonlinearity_gamma);
    if (params.noise_sigma0 > 0.0) {
        const double sigma = params.noise_sigma();
        for (int i = 0; i < 3; ++i) v[i] += sigma * noise.gaussian();
    }
    for (int i = 0; i < 3; ++i) v[i] = quantize(v[i], params.adc_bits);
    return RgbIntensity::from_vec(v);
}

}  // namespace csk
