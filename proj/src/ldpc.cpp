#include "csk/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace csk {

namespace {

std::vector<std::string> read_content_lines(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("LdpcCode: cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(is, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;
        lines.push_back(line);
    }
    return lines;
}

std::vector<int> parse_ints(const std::string& line, const char* what) {
    std::istringstream ss(line);
    std::vector<int> vals;
    long long v;
    while (ss >> v) {
        if (v < 0 || v > std::numeric_limits<int>::max())
            throw std::runtime_error(std::string("LdpcCode: value out of range in ") + what);
        vals.push_back(static_cast<int>(v));
    }
    std::string trailing;
    if (ss.clear(), ss >> trailing)
        throw std::runtime_error(std::string("LdpcCode: non-numeric token in ") + what);
    return vals;
}

}  // namespace

void LdpcCode::build_check_structure(std::vector<std::vector<int>> rows) {
    m_ = static_cast<int>(rows.size());
    k_ = n_ - m_;

    std::vector<char> column_used(static_cast<std::size_t>(n_), 0);
    std::size_t edges = 0;
    for (auto& row : rows) {
        std::sort(row.begin(), row.end());
        if (std::adjacent_find(row.begin(), row.end()) != row.end())
            throw std::runtime_error("LdpcCode: duplicate column in a check row");
        if (row.size() < 2)
            throw std::runtime_error("LdpcCode: a check row has fewer than 2 entries");
        for (int c : row) {
            if (c < 0 || c >= n_) throw std::runtime_error("LdpcCode: column index out of range");
            column_used[static_cast<std::size_t>(c)] = 1;
        }
        edges += row.size();
    }
    for (char used : column_used)
        if (!used) throw std::runtime_error("LdpcCode: a column participates in no check");

    check_ptr_.assign(static_cast<std::size_t>(m_) + 1, 0);
    check_vars_.clear();
    check_vars_.reserve(edges);
    for (int r = 0; r < m_; ++r) {
        check_ptr_[static_cast<std::size_t>(r)] = static_cast<int>(check_vars_.size());
        for (int c : rows[static_cast<std::size_t>(r)]) check_vars_.push_back(c);
    }
    check_ptr_[static_cast<std::size_t>(m_)] = static_cast<int>(check_vars_.size());
}

LdpcCode LdpcCode::from_adjacency_file(const std::filesystem::path& path) {
    const auto lines = read_content_lines(path);
    if (lines.empty()) throw std::runtime_error("LdpcCode: empty adjacency file " + path.string());
    const auto header = parse_ints(lines[0], "adjacency header");
    if (header.size() != 2) throw std::runtime_error("LdpcCode: adjacency header must be 'n m'");
    const int n = header[0];
    const int m = header[1];
    if (n < 3 || m < 1 || m >= n)
        throw std::runtime_error("LdpcCode: invalid adjacency dimensions");
    if (lines.size() != static_cast<std::size_t>(m) + 1)
        throw std::runtime_error("LdpcCode: adjacency row count does not match header");

    LdpcCode code;
    code.n_ = n;
    std::vector<std::vector<int>> rows;
    rows.reserve(static_cast<std::size_t>(m));
    for (int r = 0; r < m; ++r) rows.push_back(parse_ints(lines[static_cast<std::size_t>(r) + 1], "adjacency row"));
    code.build_check_structure(std::move(rows));

    // Gauss-Jordan over GF(2) on the parity columns; rows become the
    // back-substitution schedule p_i = xor of scheduled info bits.
    const int k = code.k_;
    const std::size_t words = static_cast<std::size_t>((n + 63) / 64);
    std::vector<std::vector<std::uint64_t>> bitrows(
        static_cast<std::size_t>(m), std::vector<std::uint64_t>(words, 0));
    for (int r = 0; r < m; ++r)
        for (int e = code.check_ptr_[static_cast<std::size_t>(r)];
             e < code.check_ptr_[static_cast<std::size_t>(r) + 1]; ++e) {
            const int c = code.check_vars_[static_cast<std::size_t>(e)];
            bitrows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c) / 64] ^=
                (std::uint64_t{1} << (c % 64));
        }

    auto test_bit = [&](int r, int c) {
        return (bitrows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c) / 64] >>
                (c % 64)) & 1;
    };
    for (int pivot = 0; pivot < m; ++pivot) {
        const int col = k + pivot;
        int found = -1;
        for (int r = pivot; r < m; ++r)
            if (test_bit(r, col)) {
                found = r;
                break;
            }
        if (found < 0)
            throw std::runtime_error("LdpcCode: parity part is rank deficient, cannot encode");
        std::swap(bitrows[static_cast<std::size_t>(pivot)], bitrows[static_cast<std::size_t>(found)]);
        for (int r = 0; r < m; ++r) {
            if (r == pivot || !test_bit(r, col)) continue;
            for (std::size_t w = 0; w < words; ++w)
                bitrows[static_cast<std::size_t>(r)][w] ^= bitrows[static_cast<std::size_t>(pivot)][w];
        }
    }
    code.parity_schedule_.assign(static_cast<std::size_t>(m), {});
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < k; ++c)
            if (test_bit(r, c)) code.parity_schedule_[static_cast<std::size_t>(r)].push_back(c);

    return code;
}

LdpcCode LdpcCode::from_table_file(const std::filesystem::path& path) {
    const auto lines = read_content_lines(path);
    if (lines.empty()) throw std::runtime_error("LdpcCode: empty table file " + path.string());
    const auto header = parse_ints(lines[0], "table header");
    if (header.size() != 2) throw std::runtime_error("LdpcCode: table header must be 'n k'");
    const int n = header[0];
    const int k = header[1];
    const int m = n - k;
    if (n <= 0 || k <= 0 || m <= 0 || k % 360 != 0 || m % 360 != 0)
        throw std::runtime_error("LdpcCode: table dimensions must be positive multiples of 360");
    const int rows = k / 360;
    const int q = m / 360;
    if (lines.size() != static_cast<std::size_t>(rows) + 1)
        throw std::runtime_error("LdpcCode: table row count does not match header");

    LdpcCode code;
    code.n_ = n;
    code.staircase_ = true;

    std::vector<std::vector<int>> checks(static_cast<std::size_t>(m));
    code.accumulate_terms_.clear();
    for (int r = 0; r < rows; ++r) {
        const auto addresses = parse_ints(lines[static_cast<std::size_t>(r) + 1], "table row");
        if (addresses.empty()) throw std::runtime_error("LdpcCode: empty table row");
        for (int a : addresses)
            if (a < 0 || a >= m)
                throw std::runtime_error("LdpcCode: parity address out of range");
        for (int t = 0; t < 360; ++t) {
            const int bit = r * 360 + t;
            for (int a : addresses) {
                const int parity = (a + t * q) % m;
                checks[static_cast<std::size_t>(parity)].push_back(bit);
                code.accumulate_terms_.emplace_back(parity, bit);
            }
        }
    }
    // Staircase parity part: check j covers p_j and p_{j-1}.
    for (int j = 0; j < m; ++j) {
        checks[static_cast<std::size_t>(j)].push_back(k + j);
        if (j > 0) checks[static_cast<std::size_t>(j)].push_back(k + j - 1);
    }
    code.build_check_structure(std::move(checks));
    return code;
}

const std::vector<std::string>& LdpcCode::supported_rates() {
    static const std::vector<std::string> rates = {"1/4", "1/3", "2/5", "1/2", "3/5", "2/3",
                                                   "3/4", "4/5", "5/6", "8/9", "9/10"};
    return rates;
}

LdpcCode LdpcCode::build(const std::string& rate, int n, const std::filesystem::path& data_dir) {
    const auto& rates = supported_rates();
    if (std::find(rates.begin(), rates.end(), rate) == rates.end())
        throw std::invalid_argument("LdpcCode: unknown rate " + rate);
    const auto slash = rate.find('/');
    const int num = std::stoi(rate.substr(0, slash));
    const int den = std::stoi(rate.substr(slash + 1));
    if (n % den != 0) throw std::invalid_argument("LdpcCode: length not divisible by rate denominator");

    std::string name = "n" + std::to_string(n) + "_r" + std::to_string(num) + "_" +
                       std::to_string(den) + ".txt";
    LdpcCode code = from_table_file(data_dir / name);
    if (static_cast<std::int64_t>(code.k_) * den != static_cast<std::int64_t>(code.n_) * num)
        throw std::runtime_error("LdpcCode: table file rate does not match " + rate);
    return code;
}

std::vector<std::uint8_t> LdpcCode::encode(std::span<const std::uint8_t> info) const {
    if (static_cast<int>(info.size()) != k_)
        throw std::invalid_argument("LdpcCode::encode: information length mismatch");
    for (std::uint8_t b : info)
        if (b > 1) throw std::invalid_argument("LdpcCode::encode: bits must be 0 or 1");

    std::vector<std::uint8_t> cw(static_cast<std::size_t>(n_), 0);
    std::copy(info.begin(), info.end(), cw.begin());

    if (staircase_) {
        for (const auto& [parity, bit] : accumulate_terms_)
            cw[static_cast<std::size_t>(k_ + parity)] ^= cw[static_cast<std::size_t>(bit)];
        for (int j = 1; j < m_; ++j)
            cw[static_cast<std::size_t>(k_ + j)] ^= cw[static_cast<std::size_t>(k_ + j - 1)];
    } else {
        for (int j = 0; j < m_; ++j) {
            std::uint8_t p = 0;
            for (int c : parity_schedule_[static_cast<std::size_t>(j)])
                p ^= cw[static_cast<std::size_t>(c)];
            cw[static_cast<std::size_t>(k_ + j)] = p;
        }
    }
    return cw;
}

bool LdpcCode::parity_ok(std::span<const std::uint8_t> bits) const {
    if (static_cast<int>(bits.size()) != n_)
        throw std::invalid_argument("LdpcCode::parity_ok: length mismatch");
    for (int r = 0; r < m_; ++r) {
        std::uint8_t acc = 0;
        for (int e = check_ptr_[static_cast<std::size_t>(r)];
             e < check_ptr_[static_cast<std::size_t>(r) + 1]; ++e)
            acc ^= bits[static_cast<std::size_t>(check_vars_[static_cast<std::size_t>(e)])];
        if (acc) return false;
    }
    return true;
}

DecodeResult LdpcCode::decode(std::span<const double> llrs, int max_iters) const {
    if (static_cast<int>(llrs.size()) != n_)
        throw std::invalid_argument("LdpcCode::decode: LLR length mismatch");
    if (max_iters < 1) throw std::invalid_argument("LdpcCode::decode: max_iters must be >= 1");
    for (double v : llrs)
        if (!std::isfinite(v)) throw std::invalid_argument("LdpcCode::decode: non-finite LLR");

    const std::size_t edges = check_vars_.size();
    std::vector<double> c2v(edges, 0.0);
    std::vector<double> v2c(edges, 0.0);
    std::vector<double> total(static_cast<std::size_t>(n_), 0.0);

    DecodeResult result;
    result.bits.assign(static_cast<std::size_t>(n_), 0);

    for (int iter = 1; iter <= max_iters; ++iter) {
        // Variable update: totals, then extrinsic messages to each check.
        for (int v = 0; v < n_; ++v) total[static_cast<std::size_t>(v)] = llrs[static_cast<std::size_t>(v)];
        for (std::size_t e = 0; e < edges; ++e)
            total[static_cast<std::size_t>(check_vars_[e])] += c2v[e];
        for (std::size_t e = 0; e < edges; ++e)
            v2c[e] = total[static_cast<std::size_t>(check_vars_[e])] - c2v[e];

        // Check update: normalized min-sum with the two smallest magnitudes.
        for (int r = 0; r < m_; ++r) {
            const int begin = check_ptr_[static_cast<std::size_t>(r)];
            const int end = check_ptr_[static_cast<std::size_t>(r) + 1];
            double min1 = std::numeric_limits<double>::infinity();
            double min2 = std::numeric_limits<double>::infinity();
            int argmin = begin;
            int sign = 1;
            for (int e = begin; e < end; ++e) {
                const double v = v2c[static_cast<std::size_t>(e)];
                const double mag = std::abs(v);
                if (v < 0.0) sign = -sign;
                if (mag < min1) {
                    min2 = min1;
                    min1 = mag;
                    argmin = e;
                } else if (mag < min2) {
                    min2 = mag;
                }
            }
            for (int e = begin; e < end; ++e) {
                const double v = v2c[static_cast<std::size_t>(e)];
                const double excl_mag = (e == argmin) ? min2 : min1;
                const int excl_sign = (v < 0.0) ? -sign : sign;
                c2v[static_cast<std::size_t>(e)] =
                    kMinSumNormalization * excl_sign * excl_mag;
            }
        }

        // Decision and parity test on the updated beliefs.
        for (int v = 0; v < n_; ++v) total[static_cast<std::size_t>(v)] = llrs[static_cast<std::size_t>(v)];
        for (std::size_t e = 0; e < edges; ++e)
            total[static_cast<std::size_t>(check_vars_[e])] += c2v[e];
        for (int v = 0; v < n_; ++v)
            result.bits[static_cast<std::size_t>(v)] = total[static_cast<std::size_t>(v)] < 0.0 ? 1 : 0;

        result.iterations_used = iter;
        if (parity_ok(result.bits)) {
            result.converged = true;
            break;
        }
    }

    result.info_bits.assign(result.bits.begin(), result.bits.begin() + k_);
    return result;
}

std::pair<std::int64_t, std::int64_t> ber_count(std::span<const std::uint8_t> sent,
                                                std::span<const std::uint8_t> decoded) {
    if (sent.size() != decoded.size())
        throw std::invalid_argument("ber_count: sequence length mismatch");
    std::int64_t errors = 0;
    for (std::size_t i = 0; i < sent.size(); ++i)
        if ((sent[i] != 0) != (decoded[i] != 0)) ++errors;
    return {errors, static_cast<std::int64_t>(sent.size())};
}

}  // namespace csk
