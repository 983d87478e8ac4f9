// csksim: end-to-end CSK simulation driver.
//
//   constellation  export the symbol table as CSV
//   train          train the neural equalizer, write a model file
//   uncoded        uncoded BER sweep over LED count and architecture
//   coded          LDPC-coded BER sweep over LED count and code rate
//   replay         run recorded raw frames through the receive chain
//   calibrate      search the noise level for a target hard-decision BER

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "csk/harness.hpp"
#include "csk/ingest.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string profile;
    int workers = 1;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--config", opt.config_path, "JSON experiment configuration");
    cmd->add_option("--seed", opt.seed, "master seed (overrides the config)");
    cmd->add_option("--out", opt.out_dir, "output directory (overrides the config)");
    cmd->add_option("--profile", opt.profile, "desk|paper parameter profile")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--workers", opt.workers, "worker thread count")->check(CLI::PositiveNumber);
}

csk::ExperimentConfig load_config(const CommonOptions& opt) {
    csk::ExperimentConfig config;
    if (!opt.config_path.empty())
        config = csk::ExperimentConfig::from_json_file(opt.config_path);
    if (!opt.profile.empty()) config.apply_profile(opt.profile);
    if (opt.seed) config.master_seed = *opt.seed;
    if (!opt.out_dir.empty()) config.output_dir = opt.out_dir;
    return config;
}

void report_records(const std::vector<csk::BerRecord>& records, const fs::path& dir,
                    const std::string& stem) {
    fs::create_directories(dir);
    csk::write_records_csv(records, dir / (stem + ".csv"));
    csk::write_records_json(records, dir / (stem + ".json"));
    for (const auto& r : records) {
        std::cout << "led=" << r.led_count;
        if (r.hidden_units > 0)
            std::cout << " nn=(" << r.hidden_units << "," << r.hidden_layers << ")";
        else if (!r.coded)
            std::cout << " hard-decision";
        if (r.coded) std::cout << " rate=" << r.rate;
        std::cout << " ber=" << r.ber;
        if (r.bit_errors == 0)
            std::cout << " (0 errors in " << r.bits_total << " measured bits)";
        std::cout << '\n';
    }
    std::cout << "wrote " << (dir / (stem + ".csv")).string() << " and .json\n";
}

int cmd_constellation(const CommonOptions& opt) {
    const auto config = load_config(opt);
    const auto constellation =
        csk::CskConstellation::build(config.constellation_order, config.constellation_steps);
    fs::create_directories(config.output_dir);
    const fs::path path = config.output_dir / "constellation.csv";
    std::ofstream os(path, std::ios::trunc);
    constellation.write_csv(os);
    std::cout << "order " << constellation.order() << ", min distance "
              << constellation.min_distance() << ", wrote " << path.string() << '\n';
    return 0;
}

int cmd_train(const CommonOptions& opt, const std::string& model_out, int units, int layers,
              int led_count) {
    auto config = load_config(opt);
    const int nu = units > 0 ? units : config.sweep.coded_hidden_units;
    const int nh = layers > 0 ? layers : config.sweep.coded_hidden_layers;
    const int led = led_count > 0 ? led_count : config.train_led_count;

    const csk::TrainResult result = csk::train_equalizer(config, led, nu, nh);
    const fs::path path = model_out.empty()
                              ? config.output_dir / "equalizer.occm"
                              : fs::path(model_out);
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    result.model.save(path);
    std::cout << "trained (" << nu << "," << nh << ") at led_count " << led << ": best loss "
              << result.best_loss << " at epoch " << result.best_epoch << ", wrote "
              << path.string() << '\n';
    return 0;
}

int cmd_uncoded(const CommonOptions& opt) {
    const auto config = load_config(opt);
    const auto records = csk::run_uncoded_sweep(config, opt.workers);
    report_records(records, config.output_dir, "uncoded");
    return 0;
}

int cmd_coded(const CommonOptions& opt, const std::string& model_path) {
    const auto config = load_config(opt);
    std::optional<csk::MlpModel> model;
    if (!model_path.empty()) model = csk::MlpModel::load(model_path);
    const auto records =
        csk::run_coded_sweep(config, opt.workers, model ? &*model : nullptr);
    report_records(records, config.output_dir, "coded");
    return 0;
}

int cmd_replay(const CommonOptions& opt, const std::string& frames_dir, const std::string& roi_spec,
               const std::string& model_path) {
    const auto config = load_config(opt);
    const auto constellation =
        csk::CskConstellation::build(config.constellation_order, config.constellation_steps);

    csk::RegionOfInterest roi;
    if (std::sscanf(roi_spec.c_str(), "%d,%d,%d,%d", &roi.x0, &roi.y0, &roi.w, &roi.h) != 4)
        throw std::runtime_error("replay: --roi must be x0,y0,w,h");

    std::optional<csk::MlpModel> model;
    if (!model_path.empty()) model = csk::MlpModel::load(model_path);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(frames_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".occr")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("replay: no .occr frames in " + frames_dir);

    fs::create_directories(config.output_dir);
    const fs::path out = config.output_dir / "replay.csv";
    std::ofstream os(out, std::ios::trunc);
    os << "frame,file,r,g,b,x,y,hard_symbol,hard_bits";
    if (model) os << ",nn_symbol,nn_bits";
    os << '\n';

    int index = 0;
    for (const auto& file : files) {
        const csk::RawFrame frame = csk::read_raw_frame(file);
        const csk::RgbIntensity rgb = csk::extract_rgb(frame, roi);
        const csk::ChromaticityPoint p = csk::convert_received(rgb, config.colorspace_mode);
        const csk::HardDecision hard = constellation.hard_demodulate(p);

        auto bits_string = [](const csk::SymbolBits& bits) {
            std::string s;
            for (auto b : bits) s.push_back(b ? '1' : '0');
            return s;
        };
        char buf[256];
        std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%s", index,
                      file.filename().string().c_str(), rgb.r, rgb.g, rgb.b, p.x, p.y,
                      hard.symbol_index, bits_string(hard.bits).c_str());
        os << buf;
        if (model) {
            const Eigen::VectorXd posteriors = model->forward(p);
            csk::SymbolBits bits(static_cast<std::size_t>(posteriors.size()));
            for (Eigen::Index b = 0; b < posteriors.size(); ++b)
                bits[static_cast<std::size_t>(b)] = posteriors[b] > 0.5 ? 1 : 0;
            os << ',' << csk::bits_to_index(bits) << ',' << bits_string(bits);
        }
        os << '\n';
        ++index;
    }
    std::cout << "replayed " << index << " frames, wrote " << out.string() << '\n';
    return 0;
}

int cmd_calibrate(const CommonOptions& opt, double target_ber, int led_count,
                  std::int64_t eval_bits) {
    const auto config = load_config(opt);
    const int led = led_count > 0 ? led_count : config.train_led_count;
    const auto result = csk::calibrate_sigma0_hard(config, target_ber, led, eval_bits);
    std::cout << "sigma0 " << result.sigma0 << " achieves hard-decision ber "
              << result.achieved_ber << " at led_count " << led
              << (result.target_met ? "" : " (target outside the reachable range)") << '\n';
    fs::create_directories(config.output_dir);
    std::ofstream os(config.output_dir / "calibration.json", std::ios::trunc);
    os << "{\n  \"sigma0\": " << result.sigma0 << ",\n  \"achieved_ber\": " << result.achieved_ber
       << ",\n  \"led_count\": " << led << ",\n  \"target_met\": "
       << (result.target_met ? "true" : "false") << "\n}\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"512-ary color-shift-keying camera link simulator"};
    app.require_subcommand(1);

    CommonOptions opt;

    auto* constellation = app.add_subcommand("constellation", "export the symbol table");
    add_common(constellation, opt);

    auto* train = app.add_subcommand("train", "train the neural equalizer");
    add_common(train, opt);
    std::string model_out;
    int train_units = 0, train_layers = 0, train_led = 0;
    train->add_option("--model-out", model_out, "model file path");
    train->add_option("--units", train_units, "hidden units");
    train->add_option("--layers", train_layers, "hidden layers");
    train->add_option("--led", train_led, "training led_count operating point");

    auto* uncoded = app.add_subcommand("uncoded", "uncoded BER sweep");
    add_common(uncoded, opt);

    auto* coded = app.add_subcommand("coded", "LDPC-coded BER sweep");
    add_common(coded, opt);
    std::string model_path;
    coded->add_option("--model", model_path, "equalizer model file (trains in-run when absent)");

    auto* replay = app.add_subcommand("replay", "ingest raw frames through the receive chain");
    add_common(replay, opt);
    std::string frames_dir, roi_spec = "0,0,2,2", replay_model;
    replay->add_option("--frames", frames_dir, "directory of .occr frames")->required();
    replay->add_option("--roi", roi_spec, "region of interest x0,y0,w,h");
    replay->add_option("--model", replay_model, "equalizer model for soft demodulation");

    auto* calibrate = app.add_subcommand("calibrate", "search sigma0 for a target hard BER");
    add_common(calibrate, opt);
    double target_ber = 1e-2;
    int cal_led = 0;
    std::int64_t cal_bits = 100000;
    calibrate->add_option("--target-ber", target_ber, "hard-decision BER target");
    calibrate->add_option("--led", cal_led, "led_count operating point");
    calibrate->add_option("--bits", cal_bits, "evaluation bit budget");

    CLI11_PARSE(app, argc, argv);

    try {
        if (constellation->parsed()) return cmd_constellation(opt);
        if (train->parsed()) return cmd_train(opt, model_out, train_units, train_layers, train_led);
        if (uncoded->parsed()) return cmd_uncoded(opt);
        if (coded->parsed()) return cmd_coded(opt, model_path);
        if (replay->parsed()) return cmd_replay(opt, frames_dir, roi_spec, replay_model);
        if (calibrate->parsed()) return cmd_calibrate(opt, target_ber, cal_led, cal_bits);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
