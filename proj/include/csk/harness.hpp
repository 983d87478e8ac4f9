#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "csk/channel.hpp"
#include "csk/constellation.hpp"
#include "csk/equalizer.hpp"
#include "csk/ldpc.hpp"

namespace csk {

enum class ColorspaceMode { Eq1, Chromaticity };

struct SweepConfig {
    std::vector<int> led_counts = {1, 4, 9, 16, 25, 36, 49, 64};
    std::vector<int> hidden_units = {64, 256};
    std::vector<int> hidden_layers = {3, 5};
    std::vector<std::string> code_rates = {"9/10", "1/2", "1/4"};
    int blocks_per_point = 3;
    std::int64_t eval_bits = 100000;
    bool include_baseline = true;  // emit hard-decision rows with N_u = N_h = 0
    int coded_hidden_units = 256;   // architecture of the shared coded-sweep model
    int coded_hidden_layers = 5;
};

struct ExperimentConfig {
    int constellation_order = 512;
    int constellation_steps = 100;
    ChannelParams channel;
    SweepConfig sweep;
    TrainingConfig training;
    int train_led_count = 25;  // operating point of the shared coded-sweep model
    ColorspaceMode colorspace_mode = ColorspaceMode::Eq1;
    double llr_max = kDefaultLlrMax;
    int max_decode_iters = LdpcCode::kDefaultMaxIters;
    std::uint64_t master_seed = 1;
    std::filesystem::path ldpc_data_dir = "data/ldpc";
    std::filesystem::path output_dir = "out";
    // Elapsed time is not seed-reproducible; disable to make re-runs
    // byte-identical.
    bool record_wall_time = true;

    static ExperimentConfig from_json_file(const std::filesystem::path& path);
    static ExperimentConfig from_json_text(const std::string& text);
    std::string to_json_text() const;

    // "desk" pins the fast defaults (300 epochs, 1e5 eval bits); "paper"
    // restores the full protocol (5000 epochs, 2e6 eval bits).
    void apply_profile(const std::string& profile);

    void validate() const;
};

struct BerRecord {
    int led_count = 0;
    int hidden_units = 0;   // 0 marks the hard-decision baseline
    int hidden_layers = 0;
    std::string rate = "-";  // "-" for uncoded records
    bool coded = false;
    std::int64_t bit_errors = 0;
    std::int64_t bits_total = 0;
    double ber = 0.0;
    double wall_time_s = 0.0;
};

// Stable column order: led_count, N_u, N_h, rate, coded, bit_errors,
// bits_total, ber, wall_time_s. Doubles carry 17 significant digits.
void write_records_csv(const std::vector<BerRecord>& records, const std::filesystem::path& path);
void write_records_json(const std::vector<BerRecord>& records, const std::filesystem::path& path);
std::vector<BerRecord> read_records_csv(const std::filesystem::path& path);
std::vector<BerRecord> read_records_json(const std::filesystem::path& path);

// One simulated symbol stream: true symbols plus their received chromaticities.
struct SymbolBatch {
    std::vector<int> symbols;
    Eigen::Matrix2Xd received;
};

ChromaticityPoint convert_received(const RgbIntensity& rgb, ColorspaceMode mode);

SymbolBatch simulate_symbols(const CskConstellation& constellation, const ChannelParams& channel,
                             ColorspaceMode mode, std::int64_t count, NoiseSource& noise,
                             std::mt19937_64& symbol_rng);

// Uniformly drawn labeled samples through the configured channel, for
// supervised training. Training and evaluation use disjoint derived streams.
TrainingSet generate_training_set(const ExperimentConfig& config, int led_count);

// Train the equalizer for one (led_count, N_u, N_h) grid point.
TrainResult train_equalizer(const ExperimentConfig& config, int led_count, int hidden_units,
                            int hidden_layers);

// Per-bit errors of hard posterior thresholding against the true labels.
std::pair<std::int64_t, std::int64_t> count_nn_bit_errors(const MlpModel& model,
                                                          const CskConstellation& constellation,
                                                          const SymbolBatch& batch);
std::pair<std::int64_t, std::int64_t> count_hard_bit_errors(const CskConstellation& constellation,
                                                            const SymbolBatch& batch);

std::vector<BerRecord> run_uncoded_sweep(const ExperimentConfig& config, int workers = 1);
std::vector<BerRecord> run_coded_sweep(const ExperimentConfig& config, int workers = 1,
                                       const MlpModel* model = nullptr);

struct CalibrationResult {
    double sigma0 = 0.0;
    double achieved_ber = 0.0;
    bool target_met = false;  // false when the target lies below the floor
};

// Bisection on noise_sigma0 for a target hard-decision uncoded BER at one
// led_count. The hard-decision BER has a deterministic floor at sigma0 = 0;
// when the target lies below it the search reports the floor instead.
CalibrationResult calibrate_sigma0_hard(const ExperimentConfig& config, double target_ber,
                                        int led_count, std::int64_t eval_bits,
                                        double sigma_lo = 0.0, double sigma_hi = 0.5);

// Run indices 0..count-1 through fn on a fixed-size pool; fn must only touch
// its own index's state, so the schedule never changes results.
void parallel_for_index(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace csk
