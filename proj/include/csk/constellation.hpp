#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "csk/colorspace.hpp"

namespace csk {

// Fixed-length bit label, most-significant bit first.
using SymbolBits = std::vector<std::uint8_t>;

int bits_to_index(std::span<const std::uint8_t> bits);
SymbolBits index_to_bits(int index, int bit_count);

struct ConstellationEntry {
    int symbol_index = 0;
    SymbolBits bits;
    RgbIntensity rgb_drive;
    ChromaticityPoint chroma;
};

struct HardDecision {
    int symbol_index = 0;
    SymbolBits bits;
};

// M-ary CSK symbol table on a triangular barycentric lattice over the RGB
// drive simplex, enumerated from the blue vertex. Immutable after build().
class CskConstellation {
  public:
    // order: power of two >= 4; steps: per-channel emission quantization levels.
    static CskConstellation build(int order = 512, int steps = 100);

    int order() const { return order_; }
    int bits_per_symbol() const { return bits_per_symbol_; }
    int steps() const { return steps_; }
    const std::vector<ConstellationEntry>& entries() const { return entries_; }
    const ConstellationEntry& entry(int symbol_index) const;

    RgbIntensity modulate(std::span<const std::uint8_t> bits) const;

    // Nearest neighbor in (x, y); ties broken toward the smaller symbol index.
    HardDecision hard_demodulate(const ChromaticityPoint& p) const;

    // Minimum pairwise chroma distance, by exhaustive scan.
    double min_distance() const;

    // Axis-aligned bounds of the chroma points (the equalizer input range).
    Eigen::AlignedBox2d chroma_bounds() const;

    // Table export: index, bits, r, g, b, x, y.
    void write_csv(std::ostream& os) const;

  private:
    CskConstellation() = default;

    int order_ = 0;
    int bits_per_symbol_ = 0;
    int steps_ = 0;
    std::vector<ConstellationEntry> entries_;
};

}  // namespace csk
