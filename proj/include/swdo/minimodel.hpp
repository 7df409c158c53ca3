#ifndef SWDO_MINIMODEL_HPP
#define SWDO_MINIMODEL_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "swdo/core.hpp"
#include "swdo/image.hpp"

namespace swdo {

/// Non-finite activation or weight; the message names the layer.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The eight tuned hyperparameters.
struct ModelConfig {
    int filters_size = 64;
    int kernel_size = 3;
    double lr = 1e-3;
    double l2_reg = 1e-4;
    double l1_reg = 1e-4;
    int batch_size = 32;
    int epochs = 10;
    double att_reg_weight = 1e-4;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Rounds to the nearest odd integer; ties go up (4 -> 5).
int nearest_odd(double k);

/// Copy with kernel_size forced odd.
ModelConfig normalized(ModelConfig c);

/// Throws ConfigError if any field is outside its tuning bounds. With
/// `desk_scale` only positivity/sign constraints are enforced.
void validate(const ModelConfig& c, bool desk_scale = false);

std::string describe(const ModelConfig& c);

/// Input geometry plus the attention token width.
struct ModelShape {
    int channels = 1;
    int height = 32;
    int width = 32;
    int attention_dim = 4;
};

/// Sizes of the intermediate maps for a config and shape.
struct LayerDims {
    int conv_rows, conv_cols; ///< valid cross-correlation output
    int crop_rows, crop_cols; ///< after the even crop
    int band_rows, band_cols; ///< each DWT sub-band
    int tokens;               ///< band_rows * band_cols
    int token_width;          ///< 4 * filters
    int attention_dim;
};

LayerDims layer_dims(const ModelConfig& c, const ModelShape& s);

/// All trainable parameters.
///   conv_kernels: (C*k*k) x F, row c*k*k + u*k + v holds K[f][c](u, v)
///   wq, wk, wv:   (4F) x d attention projections
///   dense:        tokens*d head weights over the row-major flattened attention output
struct ModelWeights {
    Eigen::MatrixXd conv_kernels;
    Eigen::VectorXd conv_bias;
    Eigen::MatrixXd wq, wk, wv;
    Eigen::VectorXd dense;
    double dense_bias = 0.0;

    /// Exact equality, shapes included.
    friend bool operator==(const ModelWeights& a, const ModelWeights& b);
};

inline constexpr std::array<const char*, 7> weight_group_names{"conv_kernels", "conv_bias", "wq", "wk", "wv", "dense",
                                                                "dense_bias"};

/// Number of scalars in each group, in weight_group_names order.
std::array<Eigen::Index, 7> group_sizes(const ModelWeights& w);

/// Flat view in group order and its inverse.
Eigen::VectorXd pack(const ModelWeights& w);
void unpack(const Eigen::VectorXd& flat, ModelWeights& w);

/// All-zero weights of the right shapes.
ModelWeights zero_weights(const ModelConfig& c, const ModelShape& s);

/// Uniform in +-sqrt(6 / (fan_in + fan_out)) per group, biases zero.
ModelWeights init_weights(const ModelConfig& c, const ModelShape& s, std::uint64_t seed);

/// Valid cross-correlation of a plane stack with kernels laid out as in
/// ModelWeights::conv_kernels, plus per-filter bias. No cropping.
std::vector<Plane<double>> conv2d_valid(const std::vector<Plane<double>>& input, const Eigen::MatrixXd& kernels,
                                        const Eigen::VectorXd& bias, int kernel_size);

/// Crops to even size, dropping the last row/column when odd.
Plane<double> crop_even(const Plane<double>& p);

/// Single-head attention: A = softmax(Q K^T / sqrt(d)), output A V.
struct AttentionResult {
    Eigen::MatrixXd q, k, v, attn, out;
};

AttentionResult attention_forward(const Eigen::MatrixXd& tokens, const Eigen::MatrixXd& wq, const Eigen::MatrixXd& wk,
                                  const Eigen::MatrixXd& wv);

inline constexpr double prob_epsilon = 1e-7;

/// Probability of melanoma for one image, clipped to [eps, 1 - eps].
double predict(const ModelConfig& c, const ModelWeights& w, const Image& img);

std::vector<double> forward(const ModelConfig& c, const ModelWeights& w, std::span<const LabeledImage> batch);

/// Sum of the three penalty terms.
double regularization(const ModelConfig& c, const ModelWeights& w);

/// Mean cross-entropy plus regularization.
double bce_loss(std::span<const double> probs, std::span<const int> labels, const ModelConfig& c,
                const ModelWeights& w);

/// Loss on a batch and its exact gradient.
struct LossGradient {
    double loss = 0.0;
    ModelWeights grad;
    std::vector<double> probs;
};

LossGradient backward(const ModelConfig& c, const ModelWeights& w, std::span<const LabeledImage> batch);

/// Per-group max |analytic - numeric| divided by the group's largest
/// gradient magnitude, numeric gradients from central differences.
std::array<double, 7> gradient_check(const ModelConfig& c, const ModelWeights& w, std::span<const LabeledImage> batch,
                                     double step = 1e-5);

/// base_lr * 0.95^epoch.
double lr_schedule(int epoch, double base_lr);

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;     ///< mean batch loss during the epoch
    double train_accuracy = 0.0; ///< running accuracy during the epoch
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainResult {
    ModelWeights weights; ///< snapshot with the best validation accuracy
    int best_epoch = 0;
    double best_val_accuracy = 0.0;
    std::vector<EpochRecord> history;
};

/// Plain mini-batch gradient descent. Deterministic in (config, data, seed).
TrainResult train(const ModelConfig& c, std::span<const LabeledImage> train_set,
                  std::span<const LabeledImage> val_set, std::uint64_t seed, int attention_dim = 4);

ModelShape shape_of(std::span<const LabeledImage> data, int attention_dim = 4);

/// Writes `<prefix>.bin` (little-endian float64, groups in order) and
/// `<prefix>.json` (shapes, config, seed).
void save_weights(const std::filesystem::path& prefix, const ModelWeights& w, const ModelConfig& c,
                  const ModelShape& s, std::uint64_t seed);

struct LoadedModel {
    ModelWeights weights;
    ModelConfig config;
    ModelShape shape;
    std::uint64_t seed = 0;
};

LoadedModel load_weights(const std::filesystem::path& prefix);

} // namespace swdo

#endif
