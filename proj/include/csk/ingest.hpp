#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "csk/colorspace.hpp"

namespace csk {

enum class BayerPattern : std::uint16_t { RGGB = 0, BGGR = 1, GRBG = 2, GBRG = 3 };

// One 12-bit raw Bayer frame, row-major, no demosaicing applied anywhere.
struct RawFrame {
    static constexpr int kMaxSample = 4095;

    int width = 0;
    int height = 0;
    BayerPattern pattern = BayerPattern::RGGB;
    std::vector<std::uint16_t> samples;

    std::uint16_t at(int x, int y) const {
        return samples[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                       static_cast<std::size_t>(x)];
    }

    // Color of the Bayer site at pixel (x, y): 0 = R, 1 = G, 2 = B.
    int site_color(int x, int y) const;

    void validate() const;  // throws std::invalid_argument
};

struct RegionOfInterest {
    int x0 = 0;
    int y0 = 0;
    int w = 0;
    int h = 0;

    void validate_for(const RawFrame& frame) const;  // throws std::invalid_argument
};

// Demosaic-free per-channel means over the ROI, normalized to [0, 1]. Both
// green sites pool into one estimate; no interpolation across color sites.
RgbIntensity extract_rgb(const RawFrame& frame, const RegionOfInterest& roi);

// Fraction of pixels whose normalized sample exceeds the threshold.
double led_area_fraction(const RawFrame& frame, double threshold);

// Uniform test/replay frame: every site holds its channel's drive level,
// rounded to the 12-bit grid.
RawFrame synthesize_uniform_frame(const RgbIntensity& drive, int width, int height,
                                  BayerPattern pattern);

// Raw container: 16-byte header (magic "OCCR", version u16, pattern u16,
// width u32, height u32, all little-endian) followed by little-endian 16-bit
// samples with the 12-bit data in the low bits.
void write_raw_frame(const RawFrame& frame, const std::filesystem::path& path);
RawFrame read_raw_frame(const std::filesystem::path& path);

}  // namespace csk
