#include "csk/harness.hpp"

#include <json.hpp>

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <future>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "csk/random.hpp"

namespace csk {

using nlohmann::json;

namespace {

// Seed-path tags partitioning the derived random streams.
constexpr std::uint64_t kTagTrainData = 1;
constexpr std::uint64_t kTagTrainSeed = 2;
constexpr std::uint64_t kTagUncodedEval = 3;
constexpr std::uint64_t kTagCodedEval = 4;
constexpr std::uint64_t kTagCalibration = 5;

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Optimizer optimizer_from_string(const std::string& s) {
    if (s == "adam") return Optimizer::Adam;
    if (s == "sgd") return Optimizer::Sgd;
    throw std::invalid_argument("config: unknown optimizer tag " + s);
}

std::string to_string(Optimizer o) { return o == Optimizer::Adam ? "adam" : "sgd"; }

ColorspaceMode colorspace_mode_from_string(const std::string& s) {
    if (s == "eq1") return ColorspaceMode::Eq1;
    if (s == "chromaticity") return ColorspaceMode::Chromaticity;
    throw std::invalid_argument("config: unknown colorspace mode " + s);
}

std::string to_string(ColorspaceMode m) {
    return m == ColorspaceMode::Eq1 ? "eq1" : "chromaticity";
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return from_json_text(ss.str());
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    const json j = json::parse(text);
    ExperimentConfig c;

    if (j.contains("constellation")) {
        const auto& jc = j.at("constellation");
        c.constellation_order = jc.value("order", c.constellation_order);
        c.constellation_steps = jc.value("steps", c.constellation_steps);
    }
    if (j.contains("channel")) {
        const auto& jc = j.at("channel");
        if (jc.contains("crosstalk")) {
            const auto& rows = jc.at("crosstalk");
            if (!rows.is_array() || rows.size() != 3)
                throw std::invalid_argument("config: crosstalk must be a 3x3 array");
            for (int r = 0; r < 3; ++r) {
                if (!rows[r].is_array() || rows[r].size() != 3)
                    throw std::invalid_argument("config: crosstalk must be a 3x3 array");
                for (int col = 0; col < 3; ++col)
                    c.channel.crosstalk(r, col) = rows[r][col].get<double>();
            }
        }
        c.channel.nonlinearity_gamma = jc.value("gamma", c.channel.nonlinearity_gamma);
        c.channel.noise_sigma0 = jc.value("noise_sigma0", c.channel.noise_sigma0);
        c.channel.adc_bits = jc.value("adc_bits", c.channel.adc_bits);
    }
    if (j.contains("sweep")) {
        const auto& js = j.at("sweep");
        c.sweep.led_counts = js.value("led_counts", c.sweep.led_counts);
        c.sweep.hidden_units = js.value("hidden_units", c.sweep.hidden_units);
        c.sweep.hidden_layers = js.value("hidden_layers", c.sweep.hidden_layers);
        c.sweep.code_rates = js.value("code_rates", c.sweep.code_rates);
        c.sweep.blocks_per_point = js.value("blocks_per_point", c.sweep.blocks_per_point);
        c.sweep.eval_bits = js.value("eval_bits", c.sweep.eval_bits);
        c.sweep.include_baseline = js.value("include_baseline", c.sweep.include_baseline);
        c.sweep.coded_hidden_units = js.value("coded_hidden_units", c.sweep.coded_hidden_units);
        c.sweep.coded_hidden_layers = js.value("coded_hidden_layers", c.sweep.coded_hidden_layers);
    }
    if (j.contains("training")) {
        const auto& jt = j.at("training");
        c.training.sample_count = jt.value("sample_count", c.training.sample_count);
        c.training.epochs = jt.value("epochs", c.training.epochs);
        c.training.batch_size = jt.value("batch_size", c.training.batch_size);
        c.training.learning_rate = jt.value("learning_rate", c.training.learning_rate);
        if (jt.contains("optimizer"))
            c.training.optimizer = optimizer_from_string(jt.at("optimizer").get<std::string>());
    }
    c.train_led_count = j.value("train_led_count", c.train_led_count);
    if (j.contains("colorspace_mode"))
        c.colorspace_mode = colorspace_mode_from_string(j.at("colorspace_mode").get<std::string>());
    c.llr_max = j.value("llr_max", c.llr_max);
    c.max_decode_iters = j.value("max_decode_iters", c.max_decode_iters);
    c.master_seed = j.value("seed", c.master_seed);
    if (j.contains("ldpc_data_dir")) c.ldpc_data_dir = j.at("ldpc_data_dir").get<std::string>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    c.record_wall_time = j.value("record_wall_time", c.record_wall_time);

    c.validate();
    return c;
}

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["constellation"] = {{"order", constellation_order}, {"steps", constellation_steps}};
    json rows = json::array();
    for (int r = 0; r < 3; ++r)
        rows.push_back({channel.crosstalk(r, 0), channel.crosstalk(r, 1), channel.crosstalk(r, 2)});
    j["channel"] = {{"crosstalk", rows},
                    {"gamma", channel.nonlinearity_gamma},
                    {"noise_sigma0", channel.noise_sigma0},
                    {"adc_bits", channel.adc_bits}};
    j["sweep"] = {{"led_counts", sweep.led_counts},
                  {"hidden_units", sweep.hidden_units},
                  {"hidden_layers", sweep.hidden_layers},
                  {"code_rates", sweep.code_rates},
                  {"blocks_per_point", sweep.blocks_per_point},
                  {"eval_bits", sweep.eval_bits},
                  {"include_baseline", sweep.include_baseline},
                  {"coded_hidden_units", sweep.coded_hidden_units},
                  {"coded_hidden_layers", sweep.coded_hidden_layers}};
    j["training"] = {{"sample_count", training.sample_count},
                     {"epochs", training.epochs},
                     {"batch_size", training.batch_size},
                     {"learning_rate", training.learning_rate},
                     {"optimizer", to_string(training.optimizer)}};
    j["train_led_count"] = train_led_count;
    j["colorspace_mode"] = to_string(colorspace_mode);
    j["llr_max"] = llr_max;
    j["max_decode_iters"] = max_decode_iters;
    j["seed"] = master_seed;
    j["ldpc_data_dir"] = ldpc_data_dir.string();
    j["output_dir"] = output_dir.string();
    j["record_wall_time"] = record_wall_time;
    return j.dump(2);
}

void ExperimentConfig::apply_profile(const std::string& profile) {
    if (profile == "desk") {
        training.epochs = 300;
        sweep.eval_bits = 100000;
    } else if (profile == "paper") {
        training.epochs = 5000;
        sweep.eval_bits = 2000000;
    } else {
        throw std::invalid_argument("config: unknown profile " + profile);
    }
}

void ExperimentConfig::validate() const {
    channel.validate();
    if (sweep.led_counts.empty() || sweep.hidden_units.empty() || sweep.hidden_layers.empty())
        throw std::invalid_argument("config: sweep lists must be nonempty");
    for (int led : sweep.led_counts)
        if (led < 1 || led > 64) throw std::invalid_argument("config: led_count outside [1, 64]");
    if (sweep.blocks_per_point < 1)
        throw std::invalid_argument("config: blocks_per_point must be >= 1");
    if (sweep.eval_bits < 1) throw std::invalid_argument("config: eval_bits must be >= 1");
    if (training.sample_count < 1 || training.epochs < 1 || training.batch_size < 1)
        throw std::invalid_argument("config: training sizes must be positive");
    if (!(llr_max > 0.0)) throw std::invalid_argument("config: llr_max must be positive");
    if (max_decode_iters < 1) throw std::invalid_argument("config: max_decode_iters must be >= 1");
}

void write_records_csv(const std::vector<BerRecord>& records, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("write_records_csv: cannot open " + path.string());
    os << "led_count,N_u,N_h,rate,coded,bit_errors,bits_total,ber,wall_time_s\n";
    for (const auto& r : records) {
        os << r.led_count << ',' << r.hidden_units << ',' << r.hidden_layers << ',' << r.rate
           << ',' << (r.coded ? 1 : 0) << ',' << r.bit_errors << ',' << r.bits_total << ','
           << format_g17(r.ber) << ',' << format_g17(r.wall_time_s) << '\n';
    }
    if (!os) throw std::runtime_error("write_records_csv: write failed for " + path.string());
}

void write_records_json(const std::vector<BerRecord>& records, const std::filesystem::path& path) {
    json arr = json::array();
    for (const auto& r : records)
        arr.push_back({{"led_count", r.led_count},
                       {"N_u", r.hidden_units},
                       {"N_h", r.hidden_layers},
                       {"rate", r.rate},
                       {"coded", r.coded},
                       {"bit_errors", r.bit_errors},
                       {"bits_total", r.bits_total},
                       {"ber", r.ber},
                       {"wall_time_s", r.wall_time_s}});
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("write_records_json: cannot open " + path.string());
    os << arr.dump(2) << '\n';
    if (!os) throw std::runtime_error("write_records_json: write failed for " + path.string());
}

std::vector<BerRecord> read_records_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_records_csv: cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_records_csv: missing header");
    std::vector<BerRecord> records;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        BerRecord r;
        auto next = [&]() {
            if (!std::getline(ss, field, ','))
                throw std::runtime_error("read_records_csv: truncated row");
            return field;
        };
        r.led_count = std::stoi(next());
        r.hidden_units = std::stoi(next());
        r.hidden_layers = std::stoi(next());
        r.rate = next();
        r.coded = std::stoi(next()) != 0;
        r.bit_errors = std::stoll(next());
        r.bits_total = std::stoll(next());
        r.ber = std::stod(next());
        r.wall_time_s = std::stod(next());
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<BerRecord> read_records_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_records_json: cannot open " + path.string());
    json arr = json::parse(is);
    std::vector<BerRecord> records;
    for (const auto& jr : arr) {
        BerRecord r;
        r.led_count = jr.at("led_count").get<int>();
        r.hidden_units = jr.at("N_u").get<int>();
        r.hidden_layers = jr.at("N_h").get<int>();
        r.rate = jr.at("rate").get<std::string>();
        r.coded = jr.at("coded").get<bool>();
        r.bit_errors = jr.at("bit_errors").get<std::int64_t>();
        r.bits_total = jr.at("bits_total").get<std::int64_t>();
        r.ber = jr.at("ber").get<double>();
        r.wall_time_s = jr.at("wall_time_s").get<double>();
        records.push_back(std::move(r));
    }
    return records;
}

ChromaticityPoint convert_received(const RgbIntensity& rgb, ColorspaceMode mode) {
    if (mode == ColorspaceMode::Eq1) return rgb_to_xy(rgb);
    // A clipped all-dark triple has no chromaticity; map it to the origin so
    // noisy pipelines keep running.
    if (rgb.r == 0.0 && rgb.g == 0.0 && rgb.b == 0.0) return {0.0, 0.0};
    return rgb_to_xy_chromaticity(rgb);
}

SymbolBatch simulate_symbols(const CskConstellation& constellation, const ChannelParams& channel,
                             ColorspaceMode mode, std::int64_t count, NoiseSource& noise,
                             std::mt19937_64& symbol_rng) {
    std::uniform_int_distribution<int> pick(0, constellation.order() - 1);
    SymbolBatch batch;
    batch.symbols.resize(static_cast<std::size_t>(count));
    batch.received.resize(2, static_cast<Eigen::Index>(count));
    for (std::int64_t i = 0; i < count; ++i) {
        const int sym = pick(symbol_rng);
        batch.symbols[static_cast<std::size_t>(i)] = sym;
        const RgbIntensity rx = transmit(constellation.entry(sym).rgb_drive, channel, noise);
        const ChromaticityPoint p = convert_received(rx, mode);
        batch.received.col(static_cast<Eigen::Index>(i)) = p.vec();
    }
    return batch;
}

TrainingSet generate_training_set(const ExperimentConfig& config, int led_count) {
    const CskConstellation constellation =
        CskConstellation::build(config.constellation_order, config.constellation_steps);
    ChannelParams channel = config.channel;
    channel.led_count = led_count;

    std::mt19937_64 symbol_rng = derive_stream(
        config.master_seed, {kTagTrainData, static_cast<std::uint64_t>(led_count), 0});
    NoiseSource noise(config.master_seed,
                      {kTagTrainData, static_cast<std::uint64_t>(led_count), 1});
    const SymbolBatch batch =
        simulate_symbols(constellation, channel, config.colorspace_mode,
                         config.training.sample_count, noise, symbol_rng);

    const int m = constellation.bits_per_symbol();
    TrainingSet set;
    set.points = batch.received;
    set.labels.resize(m, static_cast<Eigen::Index>(batch.symbols.size()));
    for (std::size_t i = 0; i < batch.symbols.size(); ++i)
        for (int b = 0; b < m; ++b)
            set.labels(b, static_cast<Eigen::Index>(i)) =
                (batch.symbols[i] >> (m - 1 - b)) & 1 ? 1.0 : 0.0;
    return set;
}

TrainResult train_equalizer(const ExperimentConfig& config, int led_count, int hidden_units,
                            int hidden_layers) {
    const CskConstellation constellation =
        CskConstellation::build(config.constellation_order, config.constellation_steps);
    const TrainingSet data = generate_training_set(config, led_count);
    TrainingConfig tc = config.training;
    tc.seed = derive_seed(config.master_seed,
                          {kTagTrainSeed, static_cast<std::uint64_t>(led_count),
                           static_cast<std::uint64_t>(hidden_units),
                           static_cast<std::uint64_t>(hidden_layers)});
    const InputTransform transform = InputTransform::from_bounds(constellation.chroma_bounds());
    return train(data, hidden_units, hidden_layers, tc, transform);
}

std::pair<std::int64_t, std::int64_t> count_nn_bit_errors(const MlpModel& model,
                                                          const CskConstellation& constellation,
                                                          const SymbolBatch& batch) {
    const int m = constellation.bits_per_symbol();
    const Eigen::MatrixXd posteriors = model.forward_batch(batch.received);
    std::int64_t errors = 0;
    for (std::size_t i = 0; i < batch.symbols.size(); ++i) {
        const int sym = batch.symbols[i];
        for (int b = 0; b < m; ++b) {
            const int truth = (sym >> (m - 1 - b)) & 1;
            const int decided = posteriors(b, static_cast<Eigen::Index>(i)) > 0.5 ? 1 : 0;
            if (truth != decided) ++errors;
        }
    }
    return {errors, static_cast<std::int64_t>(batch.symbols.size()) * m};
}

std::pair<std::int64_t, std::int64_t> count_hard_bit_errors(const CskConstellation& constellation,
                                                            const SymbolBatch& batch) {
    const int m = constellation.bits_per_symbol();
    std::int64_t errors = 0;
    for (std::size_t i = 0; i < batch.symbols.size(); ++i) {
        const ChromaticityPoint p{batch.received(0, static_cast<Eigen::Index>(i)),
                                  batch.received(1, static_cast<Eigen::Index>(i))};
        const HardDecision d = constellation.hard_demodulate(p);
        errors += std::popcount(static_cast<unsigned>(batch.symbols[i] ^ d.symbol_index));
    }
    return {errors, static_cast<std::int64_t>(batch.symbols.size()) * m};
}

void parallel_for_index(std::size_t count, int workers,
                        const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n = std::min(static_cast<std::size_t>(workers), count);
    pool.reserve(n);
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<BerRecord> run_uncoded_sweep(const ExperimentConfig& config, int workers) {
    config.validate();
    const CskConstellation constellation =
        CskConstellation::build(config.constellation_order, config.constellation_steps);
    const int m = constellation.bits_per_symbol();
    const std::int64_t symbols_per_point = (config.sweep.eval_bits + m - 1) / m;

    struct Arch {
        int units;
        int layers;
    };
    std::vector<Arch> archs;
    for (int nu : config.sweep.hidden_units)
        for (int nh : config.sweep.hidden_layers) archs.push_back({nu, nh});
    const std::size_t slots = archs.size() + (config.sweep.include_baseline ? 1 : 0);

    struct Point {
        int led;
        int slot;  // archs.size() marks the baseline
    };
    std::vector<Point> grid;
    for (int led : config.sweep.led_counts)
        for (std::size_t s = 0; s < slots; ++s) grid.push_back({led, static_cast<int>(s)});

    // Shared trained models, one per (led, arch), computed once regardless of
    // which worker reaches the point first.
    std::map<std::tuple<int, int, int>, std::shared_future<std::shared_ptr<const MlpModel>>> cache;
    std::mutex cache_mutex;
    auto model_for = [&](int led, const Arch& a) -> std::shared_ptr<const MlpModel> {
        const auto key = std::make_tuple(led, a.units, a.layers);
        std::promise<std::shared_ptr<const MlpModel>> promise;
        std::shared_future<std::shared_ptr<const MlpModel>> f;
        bool owner = false;
        {
            std::lock_guard<std::mutex> lock(cache_mutex);
            auto it = cache.find(key);
            if (it == cache.end()) {
                f = promise.get_future().share();
                cache.emplace(key, f);
                owner = true;
            } else {
                f = it->second;
            }
        }
        if (owner) {
            // Train outside the lock; the result depends only on the key.
            try {
                promise.set_value(std::make_shared<const MlpModel>(
                    train_equalizer(config, led, a.units, a.layers).model));
            } catch (...) {
                promise.set_exception(std::current_exception());
            }
        }
        return f.get();
    };

    std::vector<BerRecord> records(grid.size());
    parallel_for_index(grid.size(), workers, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        const Point pt = grid[i];
        ChannelParams channel = config.channel;
        channel.led_count = pt.led;

        std::mt19937_64 symbol_rng =
            derive_stream(config.master_seed, {kTagUncodedEval, static_cast<std::uint64_t>(i), 0});
        NoiseSource noise(config.master_seed, {kTagUncodedEval, static_cast<std::uint64_t>(i), 1});
        const SymbolBatch batch = simulate_symbols(constellation, channel, config.colorspace_mode,
                                                   symbols_per_point, noise, symbol_rng);

        BerRecord r;
        r.led_count = pt.led;
        r.coded = false;
        std::pair<std::int64_t, std::int64_t> counts;
        if (pt.slot == static_cast<int>(archs.size())) {
            counts = count_hard_bit_errors(constellation, batch);
        } else {
            const Arch a = archs[static_cast<std::size_t>(pt.slot)];
            r.hidden_units = a.units;
            r.hidden_layers = a.layers;
            counts = count_nn_bit_errors(*model_for(pt.led, a), constellation, batch);
        }
        r.bit_errors = counts.first;
        r.bits_total = counts.second;
        r.ber = static_cast<double>(counts.first) / static_cast<double>(counts.second);
        r.wall_time_s = config.record_wall_time ? elapsed_s(t0) : 0.0;
        records[i] = std::move(r);
    });
    return records;
}

std::vector<BerRecord> run_coded_sweep(const ExperimentConfig& config, int workers,
                                       const MlpModel* model) {
    config.validate();
    const CskConstellation constellation =
        CskConstellation::build(config.constellation_order, config.constellation_steps);
    const int m = constellation.bits_per_symbol();

    MlpModel trained;
    if (model == nullptr) {
        trained = train_equalizer(config, config.train_led_count, config.sweep.coded_hidden_units,
                                  config.sweep.coded_hidden_layers)
                      .model;
        model = &trained;
    }

    std::vector<LdpcCode> codes;
    codes.reserve(config.sweep.code_rates.size());
    for (const auto& rate : config.sweep.code_rates)
        codes.push_back(LdpcCode::build(rate, 64800, config.ldpc_data_dir));

    struct Point {
        int led;
        std::size_t rate_index;
    };
    std::vector<Point> grid;
    for (int led : config.sweep.led_counts)
        for (std::size_t ri = 0; ri < codes.size(); ++ri) grid.push_back({led, ri});

    std::vector<BerRecord> records(grid.size());
    parallel_for_index(grid.size(), workers, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        const Point pt = grid[i];
        const LdpcCode& code = codes[pt.rate_index];
        ChannelParams channel = config.channel;
        channel.led_count = pt.led;

        const int n = code.block_length();
        const int k = code.info_length();
        const int symbols_per_block = (n + m - 1) / m;

        std::int64_t errors = 0;
        for (int block = 0; block < config.sweep.blocks_per_point; ++block) {
            std::mt19937_64 info_rng =
                derive_stream(config.master_seed, {kTagCodedEval, static_cast<std::uint64_t>(i),
                                                   static_cast<std::uint64_t>(block), 0});
            NoiseSource noise(config.master_seed, {kTagCodedEval, static_cast<std::uint64_t>(i),
                                                   static_cast<std::uint64_t>(block), 1});

            std::vector<std::uint8_t> info(static_cast<std::size_t>(k));
            std::uniform_int_distribution<int> coin(0, 1);
            for (auto& b : info) b = static_cast<std::uint8_t>(coin(info_rng));
            const std::vector<std::uint8_t> codeword = code.encode(info);

            // Consecutive bit groups map onto symbols; the final partial
            // group is zero-padded and the pad bits never reach the decoder.
            Eigen::Matrix2Xd received(2, symbols_per_block);
            for (int s = 0; s < symbols_per_block; ++s) {
                int sym = 0;
                for (int b = 0; b < m; ++b) {
                    const int pos = s * m + b;
                    const int bit = pos < n ? codeword[static_cast<std::size_t>(pos)] : 0;
                    sym = (sym << 1) | bit;
                }
                const RgbIntensity rx =
                    transmit(constellation.entry(sym).rgb_drive, channel, noise);
                received.col(s) = convert_received(rx, config.colorspace_mode).vec();
            }

            const Eigen::MatrixXd posteriors = model->forward_batch(received);
            std::vector<double> llrs(static_cast<std::size_t>(n));
            for (int s = 0; s < symbols_per_block; ++s) {
                const Eigen::VectorXd llr = compute_llr(posteriors.col(s), config.llr_max);
                for (int b = 0; b < m; ++b) {
                    const int pos = s * m + b;
                    if (pos < n) llrs[static_cast<std::size_t>(pos)] = llr[b];
                }
            }

            const DecodeResult decoded = code.decode(llrs, config.max_decode_iters);
            errors += ber_count(info, decoded.info_bits).first;
        }

        BerRecord r;
        r.led_count = pt.led;
        r.hidden_units = model->hidden_units();
        r.hidden_layers = model->hidden_layers();
        r.rate = config.sweep.code_rates[pt.rate_index];
        r.coded = true;
        r.bit_errors = errors;
        r.bits_total = static_cast<std::int64_t>(config.sweep.blocks_per_point) * k;
        r.ber = static_cast<double>(errors) / static_cast<double>(r.bits_total);
        r.wall_time_s = config.record_wall_time ? elapsed_s(t0) : 0.0;
        records[i] = std::move(r);
    });
    return records;
}

CalibrationResult calibrate_sigma0_hard(const ExperimentConfig& config, double target_ber,
                                        int led_count, std::int64_t eval_bits, double sigma_lo,
                                        double sigma_hi) {
    const CskConstellation constellation =
        CskConstellation::build(config.constellation_order, config.constellation_steps);
    const int m = constellation.bits_per_symbol();
    const std::int64_t symbols = (eval_bits + m - 1) / m;

    // Common random numbers: the same symbol and noise draws at every probe
    // keep the empirical BER monotone in sigma0.
    auto ber_at = [&](double sigma0) {
        ChannelParams channel = config.channel;
        channel.led_count = led_count;
        channel.noise_sigma0 = sigma0;
        std::mt19937_64 symbol_rng = derive_stream(
            config.master_seed, {kTagCalibration, static_cast<std::uint64_t>(led_count), 0});
        NoiseSource noise(config.master_seed,
                          {kTagCalibration, static_cast<std::uint64_t>(led_count), 1});
        const SymbolBatch batch = simulate_symbols(constellation, channel, config.colorspace_mode,
                                                   symbols, noise, symbol_rng);
        const auto counts = count_hard_bit_errors(constellation, batch);
        return static_cast<double>(counts.first) / static_cast<double>(counts.second);
    };

    CalibrationResult result;
    const double floor_ber = ber_at(sigma_lo);
    if (floor_ber >= target_ber) {
        result.sigma0 = sigma_lo;
        result.achieved_ber = floor_ber;
        result.target_met = false;
        return result;
    }
    double hi_ber = ber_at(sigma_hi);
    if (hi_ber < target_ber) {
        result.sigma0 = sigma_hi;
        result.achieved_ber = hi_ber;
        result.target_met = false;
        return result;
    }
    double lo = sigma_lo;
    double hi = sigma_hi;
    for (int iter = 0; iter < 40 && (hi - lo) > 1e-6; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (ber_at(mid) < target_ber)
            lo = mid;
        else
            hi = mid;
    }
    result.sigma0 = hi;
    result.achieved_ber = ber_at(hi);
    result.target_met = true;
    return result;
}

}  // namespace csk
