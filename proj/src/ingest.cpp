#include "csk/ingest.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace csk {

namespace {

// Site colors for quad positions (y&1)*2 + (x&1), per pattern.
constexpr std::array<std::array<int, 4>, 4> kSiteColor = {{
    {0, 1, 1, 2},  // RGGB
    {2, 1, 1, 0},  // BGGR
    {1, 0, 2, 1},  // GRBG
    {1, 2, 0, 1},  // GBRG
}};

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

int RawFrame::site_color(int x, int y) const {
    return kSiteColor[static_cast<std::size_t>(pattern)][static_cast<std::size_t>((y & 1) * 2 + (x & 1))];
}

void RawFrame::validate() const {
    if (width <= 0 || height <= 0 || (width % 2) != 0 || (height % 2) != 0)
        throw std::invalid_argument("RawFrame: width and height must be positive and even");
    if (samples.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw std::invalid_argument("RawFrame: sample count does not match dimensions");
    for (std::uint16_t s : samples)
        if (s > kMaxSample) throw std::invalid_argument("RawFrame: sample exceeds 12-bit range");
}

void RegionOfInterest::validate_for(const RawFrame& frame) const {
    if (w < 2 || h < 2) throw std::invalid_argument("RegionOfInterest: w and h must be >= 2");
    if (x0 < 0 || y0 < 0 || x0 + w > frame.width || y0 + h > frame.height)
        throw std::invalid_argument("RegionOfInterest: rectangle outside frame bounds");
}

RgbIntensity extract_rgb(const RawFrame& frame, const RegionOfInterest& roi) {
    frame.validate();
    roi.validate_for(frame);

    std::array<double, 3> sums{0.0, 0.0, 0.0};
    std::array<std::int64_t, 3> counts{0, 0, 0};
    for (int y = roi.y0; y < roi.y0 + roi.h; ++y) {
        for (int x = roi.x0; x < roi.x0 + roi.w; ++x) {
            const int c = frame.site_color(x, y);
            sums[static_cast<std::size_t>(c)] += frame.at(x, y);
            counts[static_cast<std::size_t>(c)] += 1;
        }
    }
    for (int c = 0; c < 3; ++c)
        if (counts[static_cast<std::size_t>(c)] == 0)
            throw std::invalid_argument("extract_rgb: ROI contains no sites of one color");

    return {sums[0] / counts[0] / RawFrame::kMaxSample,
            sums[1] / counts[1] / RawFrame::kMaxSample,
            sums[2] / counts[2] / RawFrame::kMaxSample};
}

double led_area_fraction(const RawFrame& frame, double threshold) {
    frame.validate();
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("led_area_fraction: threshold must lie in (0, 1)");
    std::int64_t lit = 0;
    for (std::uint16_t s : frame.samples)
        if (s / static_cast<double>(RawFrame::kMaxSample) > threshold) ++lit;
    return static_cast<double>(lit) / static_cast<double>(frame.samples.size());
}

RawFrame synthesize_uniform_frame(const RgbIntensity& drive, int width, int height,
                                  BayerPattern pattern) {
    RawFrame f;
    f.width = width;
    f.height = height;
    f.pattern = pattern;
    f.samples.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    const std::array<double, 3> levels{drive.r, drive.g, drive.b};
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            f.samples[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(x)] = static_cast<std::uint16_t>(
                std::lround(levels[static_cast<std::size_t>(f.site_color(x, y))] * RawFrame::kMaxSample));
    f.validate();
    return f;
}

void write_raw_frame(const RawFrame& frame, const std::filesystem::path& path) {
    frame.validate();
    std::string blob;
    blob.reserve(16 + frame.samples.size() * 2);
    blob += "OCCR";
    put_u16(blob, 1);  // version
    put_u16(blob, static_cast<std::uint16_t>(frame.pattern));
    put_u32(blob, static_cast<std::uint32_t>(frame.width));
    put_u32(blob, static_cast<std::uint32_t>(frame.height));
    for (std::uint16_t s : frame.samples) put_u16(blob, s);

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("write_raw_frame: cannot open " + path.string());
    os.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!os) throw std::runtime_error("write_raw_frame: write failed for " + path.string());
}

RawFrame read_raw_frame(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_raw_frame: cannot open " + path.string());
    std::string blob((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (blob.size() < 16) throw std::runtime_error("read_raw_frame: truncated header");
    const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
    if (std::memcmp(p, "OCCR", 4) != 0) throw std::runtime_error("read_raw_frame: bad magic");
    const std::uint16_t version = get_u16(p + 4);
    if (version != 1) throw std::runtime_error("read_raw_frame: unsupported version");
    const std::uint16_t pattern = get_u16(p + 6);
    if (pattern > 3) throw std::runtime_error("read_raw_frame: unknown Bayer pattern tag");

    RawFrame f;
    f.pattern = static_cast<BayerPattern>(pattern);
    f.width = static_cast<int>(get_u32(p + 8));
    f.height = static_cast<int>(get_u32(p + 12));
    const std::size_t expected = 16 + static_cast<std::size_t>(f.width) *
                                          static_cast<std::size_t>(f.height) * 2;
    if (blob.size() != expected)
        throw std::runtime_error("read_raw_frame: payload size does not match dimensions");
    f.samples.resize(static_cast<std::size_t>(f.width) * static_cast<std::size_t>(f.height));
    for (std::size_t i = 0; i < f.samples.size(); ++i) f.samples[i] = get_u16(p + 16 + 2 * i);
    f.validate();
    return f;
}

}  // namespace csk
