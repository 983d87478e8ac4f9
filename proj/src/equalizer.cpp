#include "csk/equalizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "csk/random.hpp"

namespace csk {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
    return z.unaryExpr([](double v) { return sigmoid(v); });
}

double clamp_posterior(double p) {
    return std::min(1.0 - kPosteriorEpsilon, std::max(kPosteriorEpsilon, p));
}

// Forward pass keeping pre-activations for backprop. activations[0] is the
// transformed input; activations.back() holds posteriors.
struct ForwardTrace {
    std::vector<Eigen::MatrixXd> activations;
};

ForwardTrace forward_trace(const MlpModel& m, const Eigen::Matrix2Xd& pts) {
    ForwardTrace t;
    t.activations.reserve(m.weights.size() + 1);
    t.activations.push_back(m.transform.apply(pts));
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        Eigen::MatrixXd z = (m.weights[l] * t.activations.back()).colwise() + m.biases[l];
        if (l + 1 < m.weights.size())
            t.activations.push_back(z.cwiseMax(0.0));
        else
            t.activations.push_back(sigmoid(z));
    }
    return t;
}

double bce_of_posteriors(const Eigen::MatrixXd& p, const Eigen::MatrixXd& labels) {
    const auto pc = p.unaryExpr([](double v) { return clamp_posterior(v); });
    const Eigen::ArrayXXd pa = pc.array();
    const Eigen::ArrayXXd ta = labels.array();
    const double total = -(ta * pa.log() + (1.0 - ta) * (1.0 - pa).log()).sum();
    return total / static_cast<double>(p.size());
}

struct Gradients {
    std::vector<Eigen::MatrixXd> dw;
    std::vector<Eigen::VectorXd> db;
};

// Loss and exact analytic gradients of mean BCE on the batch.
double backprop(const MlpModel& m, const Eigen::Matrix2Xd& pts, const Eigen::MatrixXd& labels,
                Gradients& g) {
    const ForwardTrace t = forward_trace(m, pts);
    const Eigen::MatrixXd& posteriors = t.activations.back();
    const double loss = bce_of_posteriors(posteriors, labels);

    const std::size_t layer_count = m.weights.size();
    g.dw.resize(layer_count);
    g.db.resize(layer_count);

    // d(mean BCE)/d(output pre-activation) through the sigmoid.
    Eigen::MatrixXd dz = (posteriors - labels) / static_cast<double>(posteriors.size());
    for (std::size_t l = layer_count; l-- > 0;) {
        g.dw[l].noalias() = dz * t.activations[l].transpose();
        g.db[l] = dz.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd da = m.weights[l].transpose() * dz;
            // ReLU gate: the stored activation is zero exactly where the unit was off.
            dz = da.cwiseProduct(
                t.activations[l].unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
        }
    }
    return loss;
}

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

double get_f64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

}  // namespace

InputTransform InputTransform::from_bounds(const Eigen::AlignedBox2d& box) {
    InputTransform t;
    for (int i = 0; i < 2; ++i) {
        const double extent = box.max()[i] - box.min()[i];
        if (extent > 0.0) {
            t.scale[i] = 2.0 / extent;
            t.offset[i] = -(box.min()[i] + box.max()[i]) / 2.0;
        }
    }
    return t;
}

MlpModel MlpModel::init(int hidden_units, int hidden_layers, std::uint64_t seed,
                        const InputTransform& transform, int output_dim) {
    if (hidden_units < 1 || hidden_layers < 1 || output_dim < 1)
        throw std::invalid_argument("MlpModel: architecture dimensions must be positive");

    MlpModel m;
    m.transform = transform;

    std::mt19937_64 rng(seed);
    std::vector<int> dims;
    dims.push_back(2);
    for (int l = 0; l < hidden_layers; ++l) dims.push_back(hidden_units);
    dims.push_back(output_dim);

    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int fan_in = dims[l];
        const int fan_out = dims[l + 1];
        const double bound = std::sqrt(1.0 / fan_in);
        std::uniform_real_distribution<double> u(-bound, bound);
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int c = 0; c < fan_in; ++c)  // column-major fill, matches flat order
            for (int r = 0; r < fan_out; ++r) w(r, c) = u(rng);
        m.weights.push_back(std::move(w));
        m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return m;
}

void MlpModel::validate() const {
    if (weights.size() < 2 || weights.size() != biases.size())
        throw std::invalid_argument("MlpModel: missing layers");
    if (weights.front().cols() != 2)
        throw std::invalid_argument("MlpModel: input dimension must be 2");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (biases[l].size() != weights[l].rows())
            throw std::invalid_argument("MlpModel: bias size mismatch");
        if (l > 0 && weights[l].cols() != weights[l - 1].rows())
            throw std::invalid_argument("MlpModel: layer dimensions do not chain");
        if (!weights[l].allFinite() || !biases[l].allFinite())
            throw std::invalid_argument("MlpModel: non-finite parameter");
    }
}

Eigen::VectorXd MlpModel::forward(const ChromaticityPoint& p) const {
    Eigen::Matrix2Xd pts(2, 1);
    pts.col(0) = p.vec();
    return forward_batch(pts).col(0);
}

Eigen::MatrixXd MlpModel::forward_batch(const Eigen::Matrix2Xd& pts) const {
    if (!pts.allFinite()) throw std::invalid_argument("forward: non-finite input");
    return forward_trace(*this, pts).activations.back();
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l)
        n += static_cast<std::size_t>(weights[l].size()) + static_cast<std::size_t>(biases[l].size());
    return n;
}

double MlpModel::parameter(std::size_t flat_index) const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const std::size_t wn = static_cast<std::size_t>(weights[l].size());
        if (flat_index < wn) return weights[l].data()[flat_index];
        flat_index -= wn;
        const std::size_t bn = static_cast<std::size_t>(biases[l].size());
        if (flat_index < bn) return biases[l][static_cast<Eigen::Index>(flat_index)];
        flat_index -= bn;
    }
    throw std::out_of_range("MlpModel::parameter: index out of range");
}

void MlpModel::set_parameter(std::size_t flat_index, double value) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const std::size_t wn = static_cast<std::size_t>(weights[l].size());
        if (flat_index < wn) {
            weights[l].data()[flat_index] = value;
            return;
        }
        flat_index -= wn;
        const std::size_t bn = static_cast<std::size_t>(biases[l].size());
        if (flat_index < bn) {
            biases[l][static_cast<Eigen::Index>(flat_index)] = value;
            return;
        }
        flat_index -= bn;
    }
    throw std::out_of_range("MlpModel::set_parameter: index out of range");
}

void MlpModel::save(const std::filesystem::path& path) const {
    validate();
    std::string blob;
    blob += "OCCM";
    put_u16(blob, 1);  // version
    put_u16(blob, static_cast<std::uint16_t>(activation));
    put_u32(blob, static_cast<std::uint32_t>(hidden_layers()));
    put_u32(blob, static_cast<std::uint32_t>(hidden_units()));
    put_u32(blob, static_cast<std::uint32_t>(input_dim()));
    put_u32(blob, static_cast<std::uint32_t>(output_dim()));
    put_f64(blob, transform.scale[0]);
    put_f64(blob, transform.scale[1]);
    put_f64(blob, transform.offset[0]);
    put_f64(blob, transform.offset[1]);
    const std::size_t n = parameter_count();
    for (std::size_t i = 0; i < n; ++i) put_f64(blob, parameter(i));

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("MlpModel::save: cannot open " + path.string());
    os.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!os) throw std::runtime_error("MlpModel::save: write failed for " + path.string());
}

MlpModel MlpModel::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("MlpModel::load: cannot open " + path.string());
    std::string blob((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (blob.size() < 24 + 32) throw std::runtime_error("MlpModel::load: truncated header");
    const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
    if (std::memcmp(p, "OCCM", 4) != 0) throw std::runtime_error("MlpModel::load: bad magic");
    if (get_u16(p + 4) != 1) throw std::runtime_error("MlpModel::load: unsupported version");
    const std::uint16_t activation = get_u16(p + 6);
    if (activation != 0) throw std::runtime_error("MlpModel::load: unknown activation tag");
    const int hidden_layers = static_cast<int>(get_u32(p + 8));
    const int hidden_units = static_cast<int>(get_u32(p + 12));
    const int input_dim = static_cast<int>(get_u32(p + 16));
    const int output_dim = static_cast<int>(get_u32(p + 20));
    if (input_dim != 2 || hidden_layers < 1 || hidden_units < 1 || output_dim < 1)
        throw std::runtime_error("MlpModel::load: invalid architecture header");

    MlpModel m;
    m.activation = static_cast<Activation>(activation);
    m.transform.scale[0] = get_f64(p + 24);
    m.transform.scale[1] = get_f64(p + 32);
    m.transform.offset[0] = get_f64(p + 40);
    m.transform.offset[1] = get_f64(p + 48);

    std::vector<int> dims;
    dims.push_back(input_dim);
    for (int l = 0; l < hidden_layers; ++l) dims.push_back(hidden_units);
    dims.push_back(output_dim);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        m.weights.emplace_back(Eigen::MatrixXd::Zero(dims[l + 1], dims[l]));
        m.biases.emplace_back(Eigen::VectorXd::Zero(dims[l + 1]));
    }

    const std::size_t n = m.parameter_count();
    if (blob.size() != 56 + 8 * n)
        throw std::runtime_error("MlpModel::load: payload size does not match architecture");
    for (std::size_t i = 0; i < n; ++i) m.set_parameter(i, get_f64(p + 56 + 8 * i));
    m.validate();
    return m;
}

double bce_loss(const MlpModel& model, const Eigen::Matrix2Xd& pts, const Eigen::MatrixXd& labels) {
    return bce_of_posteriors(forward_trace(model, pts).activations.back(), labels);
}

Eigen::VectorXd bce_loss_gradients(const MlpModel& model, const Eigen::Matrix2Xd& pts,
                                   const Eigen::MatrixXd& labels) {
    Gradients g;
    backprop(model, pts, labels, g);
    Eigen::VectorXd flat(static_cast<Eigen::Index>(model.parameter_count()));
    Eigen::Index at = 0;
    for (std::size_t l = 0; l < g.dw.size(); ++l) {
        std::copy(g.dw[l].data(), g.dw[l].data() + g.dw[l].size(), flat.data() + at);
        at += g.dw[l].size();
        std::copy(g.db[l].data(), g.db[l].data() + g.db[l].size(), flat.data() + at);
        at += g.db[l].size();
    }
    return flat;
}

double gradient_check(const MlpModel& model, const Eigen::Matrix2Xd& pts,
                      const Eigen::MatrixXd& labels, const GradientCheckOptions& options) {
    const Eigen::VectorXd analytic = bce_loss_gradients(model, pts, labels);

    std::vector<std::size_t> indices(model.parameter_count());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    std::mt19937_64 rng(options.seed);
    std::shuffle(indices.begin(), indices.end(), rng);
    const std::size_t count =
        std::min(indices.size(), static_cast<std::size_t>(std::max(1, options.sample_params)));

    MlpModel probe = model;
    double worst = 0.0;
    for (std::size_t s = 0; s < count; ++s) {
        const std::size_t idx = indices[s];
        const double saved = probe.parameter(idx);
        probe.set_parameter(idx, saved + options.step);
        const double lp = bce_loss(probe, pts, labels);
        probe.set_parameter(idx, saved - options.step);
        const double lm = bce_loss(probe, pts, labels);
        probe.set_parameter(idx, saved);

        const double numeric = (lp - lm) / (2.0 * options.step);
        const double a = analytic[static_cast<Eigen::Index>(idx)];
        // Floor keeps finite-difference roundoff on near-zero gradients from
        // registering as relative error.
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-4});
        worst = std::max(worst, rel);
    }
    return worst;
}

TrainResult train(const TrainingSet& data, int hidden_units, int hidden_layers,
                  const TrainingConfig& config, const InputTransform& transform) {
    const Eigen::Index sample_count = data.points.cols();
    if (sample_count == 0) throw std::invalid_argument("train: empty dataset");
    if (data.labels.cols() != sample_count)
        throw std::invalid_argument("train: label count does not match sample count");
    if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (config.batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");

    const int output_dim = static_cast<int>(data.labels.rows());
    MlpModel model = MlpModel::init(hidden_units, hidden_layers, config.seed, transform, output_dim);

    // Full-batch fallback when the configured batch exceeds the dataset.
    const Eigen::Index batch =
        std::min<Eigen::Index>(config.batch_size, sample_count);

    std::mt19937_64 rng = derive_stream(config.seed, {0x7261696eULL});
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(sample_count));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});

    // Adam moments, laid out like the flat parameter order per layer.
    std::vector<Eigen::MatrixXd> mw, vw;
    std::vector<Eigen::VectorXd> mb, vb;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        mw.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
        vw.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
        mb.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
        vb.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    }
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double adam_eps = 1e-8;
    std::int64_t step = 0;

    TrainResult result;
    result.best_loss = std::numeric_limits<double>::infinity();
    result.epoch_loss.reserve(static_cast<std::size_t>(config.epochs));

    Eigen::Matrix2Xd bpts;
    Eigen::MatrixXd blabels;
    Gradients g;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(perm.begin(), perm.end(), rng);
        double epoch_total = 0.0;

        for (Eigen::Index start = 0; start < sample_count; start += batch) {
            const Eigen::Index size = std::min(batch, sample_count - start);
            bpts.resize(2, size);
            blabels.resize(output_dim, size);
            for (Eigen::Index i = 0; i < size; ++i) {
                bpts.col(i) = data.points.col(perm[static_cast<std::size_t>(start + i)]);
                blabels.col(i) = data.labels.col(perm[static_cast<std::size_t>(start + i)]);
            }

            const double loss = backprop(model, bpts, blabels, g);
            epoch_total += loss * static_cast<double>(size);

            ++step;
            if (config.optimizer == Optimizer::Adam) {
                const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step));
                const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step));
                for (std::size_t l = 0; l < model.weights.size(); ++l) {
                    mw[l] = beta1 * mw[l] + (1.0 - beta1) * g.dw[l];
                    vw[l].array() =
                        beta2 * vw[l].array() + (1.0 - beta2) * g.dw[l].array().square();
                    model.weights[l].array() -=
                        config.learning_rate * (mw[l].array() / corr1) /
                        ((vw[l].array() / corr2).sqrt() + adam_eps);
                    mb[l] = beta1 * mb[l] + (1.0 - beta1) * g.db[l];
                    vb[l].array() =
                        beta2 * vb[l].array() + (1.0 - beta2) * g.db[l].array().square();
                    model.biases[l].array() -=
                        config.learning_rate * (mb[l].array() / corr1) /
                        ((vb[l].array() / corr2).sqrt() + adam_eps);
                }
            } else {
                for (std::size_t l = 0; l < model.weights.size(); ++l) {
                    model.weights[l] -= config.learning_rate * g.dw[l];
                    model.biases[l] -= config.learning_rate * g.db[l];
                }
            }
        }

        const double epoch_loss = epoch_total / static_cast<double>(sample_count);
        if (!std::isfinite(epoch_loss)) throw TrainingDivergence(epoch);
        result.epoch_loss.push_back(epoch_loss);
        if (epoch_loss < result.best_loss) {
            result.best_loss = epoch_loss;
            result.best_epoch = epoch;
            result.model = model;
        }
    }
    return result;
}

Eigen::VectorXd compute_llr(const Eigen::VectorXd& posteriors, double l_max) {
    Eigen::VectorXd llr(posteriors.size());
    for (Eigen::Index i = 0; i < posteriors.size(); ++i) {
        const double p = clamp_posterior(posteriors[i]);
        llr[i] = std::clamp(std::log((1.0 - p) / p), -l_max, l_max);
    }
    return llr;
}

}  // namespace csk
