#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace csk {

struct DecodeResult {
    std::vector<std::uint8_t> bits;       // n hard decisions
    std::vector<std::uint8_t> info_bits;  // first k decisions
    bool converged = false;               // true iff every parity check is satisfied
    int iterations_used = 0;
};

// Systematic LDPC code: sparse parity checks plus an encoder schedule. Codes
// come either from repeat-accumulate address-table files (long codes) or from
// plain adjacency files (small test codes). Immutable after construction.
class LdpcCode {
  public:
    // Text adjacency: first line "n m", then m lines of 0-based column
    // indices, one per check row. The last m columns must form an invertible
    // parity part.
    static LdpcCode from_adjacency_file(const std::filesystem::path& path);

    // Repeat-accumulate address table: first non-comment line "n k", then
    // k/360 lines of parity addresses in [0, n-k). Bit r*360+t of group r
    // accumulates into parity (a + t*(n-k)/360) mod (n-k) for each listed a;
    // the parity part is the standard staircase.
    static LdpcCode from_table_file(const std::filesystem::path& path);

    // Named long code: rate in {1/4, 1/3, 2/5, 1/2, 3/5, 2/3, 3/4, 4/5, 5/6,
    // 8/9, 9/10} at n = 64800, resolved to a table file under data_dir.
    static LdpcCode build(const std::string& rate, int n, const std::filesystem::path& data_dir);

    static const std::vector<std::string>& supported_rates();

    int block_length() const { return n_; }
    int info_length() const { return k_; }
    int check_count() const { return m_; }
    double rate() const { return static_cast<double>(k_) / n_; }

    std::vector<std::uint8_t> encode(std::span<const std::uint8_t> info) const;
    bool parity_ok(std::span<const std::uint8_t> bits) const;

    // Flooding normalized min-sum (factor 0.75) with early exit once all
    // checks are satisfied. Positive LLR means bit 0.
    DecodeResult decode(std::span<const double> llrs, int max_iters = kDefaultMaxIters) const;

    static constexpr double kMinSumNormalization = 0.75;
    static constexpr int kDefaultMaxIters = 50;

  private:
    LdpcCode() = default;
    void build_check_structure(std::vector<std::vector<int>> rows);

    int n_ = 0;
    int k_ = 0;
    int m_ = 0;

    // Check adjacency, CSR over checks.
    std::vector<int> check_ptr_;
    std::vector<int> check_vars_;

    // Encoder: accumulate info bits into parities, then prefix-XOR (staircase
    // codes), or per-parity info lists from Gauss-Jordan elimination.
    bool staircase_ = false;
    std::vector<std::pair<int, int>> accumulate_terms_;  // (parity index, info index)
    std::vector<std::vector<int>> parity_schedule_;
};

// Hamming distance and length of two equal-length bit sequences.
std::pair<std::int64_t, std::int64_t> ber_count(std::span<const std::uint8_t> sent,
                                                std::span<const std::uint8_t> decoded);

}  // namespace csk
