#include "csk/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

namespace csk {

int bits_to_index(std::span<const std::uint8_t> bits) {
    int v = 0;
    for (std::uint8_t b : bits) {
        if (b > 1) throw std::invalid_argument("bits_to_index: element not in {0, 1}");
        v = (v << 1) | b;
    }
    return v;
}

SymbolBits index_to_bits(int index, int bit_count) {
    if (index < 0 || (bit_count < 31 && index >= (1 << bit_count)))
        throw std::invalid_argument("index_to_bits: index out of range");
    SymbolBits bits(static_cast<std::size_t>(bit_count));
    for (int b = 0; b < bit_count; ++b)
        bits[static_cast<std::size_t>(b)] =
            static_cast<std::uint8_t>((index >> (bit_count - 1 - b)) & 1);
    return bits;
}

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

double quantize_level(double w, int steps) {
    return std::round(w * (steps - 1)) / (steps - 1);
}

}  // namespace

CskConstellation CskConstellation::build(int order, int steps) {
    if (order < 4 || !is_power_of_two(order))
        throw std::invalid_argument("CskConstellation: order must be a power of two >= 4");

    // Smallest n with n(n+1)/2 >= order.
    int n = 1;
    while (n * (n + 1) / 2 < order) ++n;
    if (steps < n)
        throw std::invalid_argument("CskConstellation: steps smaller than the lattice row count");

    int bits_per_symbol = 0;
    while ((1 << bits_per_symbol) < order) ++bits_per_symbol;

    CskConstellation c;
    c.order_ = order;
    c.bits_per_symbol_ = bits_per_symbol;
    c.steps_ = steps;
    c.entries_.reserve(static_cast<std::size_t>(order));

    // Barycentric lattice {(i, j, k) : i + j + k = n - 1} over the (B, R, G)
    // vertices. Rows sweep from the pure-blue vertex toward the red-green
    // edge; within a row, from red toward green. The first `order` sites are
    // kept, in enumeration order.
    const double denom = static_cast<double>(n - 1);
    int index = 0;
    for (int row = 0; row < n && index < order; ++row) {
        const int i = n - 1 - row;  // blue weight
        for (int t = 0; t <= row && index < order; ++t) {
            const int j = row - t;  // red weight
            const int k = t;        // green weight
            const RgbIntensity drive(quantize_level(j / denom, steps),
                                     quantize_level(k / denom, steps),
                                     quantize_level(i / denom, steps));
            ConstellationEntry e;
            e.symbol_index = index;
            e.bits = index_to_bits(index, bits_per_symbol);
            e.rgb_drive = drive;
            e.chroma = rgb_to_xy(drive);
            c.entries_.push_back(std::move(e));
            ++index;
        }
    }

    std::set<std::array<double, 3>> drives;
    std::set<std::array<double, 2>> chromas;
    for (const auto& e : c.entries_) {
        drives.insert({e.rgb_drive.r, e.rgb_drive.g, e.rgb_drive.b});
        chromas.insert({e.chroma.x, e.chroma.y});
    }
    if (drives.size() != c.entries_.size() || chromas.size() != c.entries_.size())
        throw std::runtime_error(
            "CskConstellation: quantization to the requested steps merges lattice points");

    return c;
}

const ConstellationEntry& CskConstellation::entry(int symbol_index) const {
    if (symbol_index < 0 || symbol_index >= order_)
        throw std::out_of_range("CskConstellation: symbol index out of range");
    return entries_[static_cast<std::size_t>(symbol_index)];
}

RgbIntensity CskConstellation::modulate(std::span<const std::uint8_t> bits) const {
    if (static_cast<int>(bits.size()) != bits_per_symbol_)
        throw std::invalid_argument("modulate: bit label length mismatch");
    return entries_[static_cast<std::size_t>(bits_to_index(bits))].rgb_drive;
}

HardDecision CskConstellation::hard_demodulate(const ChromaticityPoint& p) const {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw std::invalid_argument("hard_demodulate: non-finite point");
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (const auto& e : entries_) {
        const double dx = p.x - e.chroma.x;
        const double dy = p.y - e.chroma.y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {  // strict: ties keep the smaller index
            best_d2 = d2;
            best = e.symbol_index;
        }
    }
    return {best, entries_[static_cast<std::size_t>(best)].bits};
}

double CskConstellation::min_distance() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < entries_.size(); ++a) {
        for (std::size_t b = a + 1; b < entries_.size(); ++b) {
            const double dx = entries_[a].chroma.x - entries_[b].chroma.x;
            const double dy = entries_[a].chroma.y - entries_[b].chroma.y;
            best = std::min(best, std::hypot(dx, dy));
        }
    }
    return best;
}

Eigen::AlignedBox2d CskConstellation::chroma_bounds() const {
    Eigen::AlignedBox2d box;
    for (const auto& e : entries_) box.extend(e.chroma.vec());
    return box;
}

void CskConstellation::write_csv(std::ostream& os) const {
    os << "index,bits,r,g,b,x,y\n";
    char buf[512];
    for (const auto& e : entries_) {
        std::string bits;
        for (std::uint8_t b : e.bits) bits.push_back(b ? '1' : '0');
        std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.symbol_index,
                      bits.c_str(), e.rgb_drive.r, e.rgb_drive.g, e.rgb_drive.b, e.chroma.x,
                      e.chroma.y);
        os << buf;
    }
}

}  // namespace csk
