#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "csk/colorspace.hpp"

namespace csk {

enum class Activation : std::uint16_t { Relu = 0 };
enum class Optimizer { Adam, Sgd };

// Affine map taking raw chromaticity into the network's input range; stored
// with the model so inference sees the same coordinates as training.
struct InputTransform {
    Eigen::Vector2d scale{1.0, 1.0};
    Eigen::Vector2d offset{0.0, 0.0};

    Eigen::Vector2d apply(const Eigen::Vector2d& p) const {
        return (p + offset).cwiseProduct(scale);
    }
    Eigen::Matrix2Xd apply(const Eigen::Matrix2Xd& pts) const {
        return (pts.colwise() + offset).array().colwise() * scale.array();
    }

    // Map the box onto [-1, 1]^2 (degenerate axes pass through unscaled).
    static InputTransform from_bounds(const Eigen::AlignedBox2d& box);
};

// Fully connected 2 -> (N_u x N_h) -> M network with rectified-linear hidden
// units and per-output logistic sigmoid; output k estimates P(bit_k = 1 | x, y).
class MlpModel {
  public:
    std::vector<Eigen::MatrixXd> weights;  // out x in, one per affine layer
    std::vector<Eigen::VectorXd> biases;
    InputTransform transform;
    Activation activation = Activation::Relu;

    MlpModel() = default;

    // Fan-in-scaled uniform weights, zero biases, seeded and reproducible.
    static MlpModel init(int hidden_units, int hidden_layers, std::uint64_t seed,
                         const InputTransform& transform, int output_dim = 9);

    int input_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.front().cols()); }
    int output_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.back().rows()); }
    int hidden_layers() const { return static_cast<int>(weights.size()) - 1; }
    int hidden_units() const {
        return weights.size() < 2 ? 0 : static_cast<int>(weights.front().rows());
    }

    Eigen::VectorXd forward(const ChromaticityPoint& p) const;
    Eigen::MatrixXd forward_batch(const Eigen::Matrix2Xd& pts) const;  // M x B posteriors

    // Flat parameter view, layer-major (W column-major, then b, per layer).
    std::size_t parameter_count() const;
    double parameter(std::size_t flat_index) const;
    void set_parameter(std::size_t flat_index, double value);

    void validate() const;  // throws on inconsistent layer chaining

    // Binary model container, little-endian: magic "OCCM", version u16,
    // activation u16, hidden layers u32, hidden units u32, input dim u32,
    // output dim u32, the input transform (4 doubles), then parameters in
    // flat order.
    void save(const std::filesystem::path& path) const;
    static MlpModel load(const std::filesystem::path& path);
};

struct TrainingConfig {
    int sample_count = 15000;
    int epochs = 5000;
    int batch_size = 4096;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::Adam;
    std::uint64_t seed = 0;
};

struct TrainingSet {
    Eigen::Matrix2Xd points;  // 2 x N chromaticities
    Eigen::MatrixXd labels;   // M x N bits as 0/1 values
};

// Raised when an epoch produces a non-finite loss.
struct TrainingDivergence : std::runtime_error {
    int epoch;
    explicit TrainingDivergence(int epoch_)
        : std::runtime_error("training diverged at epoch " + std::to_string(epoch_)),
          epoch(epoch_) {}
};

struct TrainResult {
    MlpModel model;  // parameters of the best recorded epoch
    double best_loss = 0.0;
    int best_epoch = 0;
    std::vector<double> epoch_loss;
};

// Mini-batch backpropagation on mean binary cross-entropy over all output
// bits; returns the parameters achieving the best recorded epoch loss.
TrainResult train(const TrainingSet& data, int hidden_units, int hidden_layers,
                  const TrainingConfig& config, const InputTransform& transform);

// Mean binary cross-entropy of the model on a batch, and its exact gradient
// in flat parameter order. Shared by the trainer and the gradient check.
double bce_loss(const MlpModel& model, const Eigen::Matrix2Xd& pts, const Eigen::MatrixXd& labels);
Eigen::VectorXd bce_loss_gradients(const MlpModel& model, const Eigen::Matrix2Xd& pts,
                                   const Eigen::MatrixXd& labels);

struct GradientCheckOptions {
    int sample_params = 64;   // random parameter subset size
    double step = 1e-6;       // central difference step
    std::uint64_t seed = 0;
};

// Max relative error between analytic gradients and central finite
// differences over a random parameter subset.
double gradient_check(const MlpModel& model, const Eigen::Matrix2Xd& pts,
                      const Eigen::MatrixXd& labels, const GradientCheckOptions& options = {});

// Per-bit log-likelihood ratios ln((1 - p)/p), positive when bit 0 is more
// likely, clipped to +-l_max. Posteriors are epsilon-clamped first.
Eigen::VectorXd compute_llr(const Eigen::VectorXd& posteriors, double l_max = 25.0);

inline constexpr double kPosteriorEpsilon = 1e-12;
inline constexpr double kDefaultLlrMax = 25.0;

}  // namespace csk
