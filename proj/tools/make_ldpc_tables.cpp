// Generates the repeat-accumulate parity-address tables under data/ldpc/.
//
// Each table follows the standard long-frame layout: one line of parity
// addresses per 360-bit information group; bit t of group r accumulates into
// parity (a + t*q) mod (n-k) for each listed address a. Bit-node degree
// profiles and the resulting check-node degrees match the DVB-S2 normal-frame
// codes rate for rate; the addresses themselves are drawn from a fixed seed,
// so regenerating the files is reproducible.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "csk/ldpc.hpp"
#include "csk/random.hpp"

namespace {

struct RateSpec {
    int num;
    int den;
    int high_rows;   // leading groups with the high bit degree
    int high_degree; // remaining groups have degree 3
};

// Bit-degree profiles chosen so every check node sees the DVB-S2 normal-frame
// row weight for its rate (4, 5, 6, 7, 11, 10, 14, 18, 22, 27, 30).
const std::vector<RateSpec> kRates = {
    {1, 4, 15, 12}, {1, 3, 20, 12}, {2, 5, 24, 12}, {1, 2, 36, 8},
    {3, 5, 36, 12}, {2, 3, 12, 13}, {3, 4, 15, 12}, {4, 5, 18, 11},
    {5, 6, 15, 13}, {8, 9, 20, 4},  {9, 10, 18, 4},
};

constexpr int kBlockLength = 64800;
constexpr std::uint64_t kTableSeed = 0x0cc5a17e;

void write_table(const RateSpec& spec, const std::filesystem::path& dir) {
    const int n = kBlockLength;
    const int k = n / spec.den * spec.num;
    const int m = n - k;
    const int rows = k / 360;

    std::mt19937_64 rng = csk::derive_stream(
        kTableSeed, {static_cast<std::uint64_t>(spec.num), static_cast<std::uint64_t>(spec.den)});
    std::uniform_int_distribution<int> pick(0, m - 1);

    std::vector<std::vector<int>> table(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) {
        const int degree = r < spec.high_rows ? spec.high_degree : 3;
        std::set<int> addresses;
        while (static_cast<int>(addresses.size()) < degree) addresses.insert(pick(rng));
        table[static_cast<std::size_t>(r)].assign(addresses.begin(), addresses.end());
    }

    // Check 0 only sees parity bit 0 from the staircase. It gains an
    // information edge iff some address is divisible by q, since
    // (a + t q) mod m sweeps the whole residue class of a modulo q.
    const int q = m / 360;
    bool check0_covered = false;
    for (int r = 0; r < rows && !check0_covered; ++r)
        for (int a : table[static_cast<std::size_t>(r)])
            if (a % q == 0) {
                check0_covered = true;
                break;
            }
    if (!check0_covered) table[0][0] = 0;

    const std::string name = "n" + std::to_string(n) + "_r" + std::to_string(spec.num) + "_" +
                             std::to_string(spec.den) + ".txt";
    std::ofstream os(dir / name, std::ios::trunc);
    os << "# repeat-accumulate parity address table\n";
    os << "# n k, then one line of addresses per 360-bit information group\n";
    os << n << ' ' << k << '\n';
    for (const auto& row : table) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? " " : "") << row[i];
        os << '\n';
    }
    os.close();

    // Round-trip sanity: the generated table must load and encode.
    const csk::LdpcCode code = csk::LdpcCode::from_table_file(dir / name);
    std::vector<std::uint8_t> info(static_cast<std::size_t>(code.info_length()));
    std::uniform_int_distribution<int> coin(0, 1);
    for (auto& b : info) b = static_cast<std::uint8_t>(coin(rng));
    if (!code.parity_ok(code.encode(info)))
        throw std::runtime_error("generated table fails encode verification: " + name);
    std::cout << name << ": n=" << code.block_length() << " k=" << code.info_length()
              << " q=" << q << " ok\n";
}

}  // namespace

int main(int argc, char** argv) {
    std::filesystem::path dir = argc > 1 ? argv[1] : "data/ldpc";
    std::filesystem::create_directories(dir);
    try {
        for (const auto& spec : kRates) write_table(spec, dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
