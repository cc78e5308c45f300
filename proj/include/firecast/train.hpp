#pragma once

#include "firecast/model.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace firecast {

/// One supervised window: the input block and the t_out months of burnt
/// area (node x t_out) that follow it.
struct TrainingWindow {
    FeatureTensor input;
    Mat target;
};

/// Mean squared error over all N x t_out entries, on unclamped predictions.
double mse_loss(const Mat& pred, const Mat& target);

/**
 * Reverse-mode gradient of mse_loss(forward_raw(...), target) with respect
 * to every parameter, by backpropagation through time and through the
 * graph convolution. Returns the loss; `grad` is resized to the canonical
 * layout. Throws NumericError naming the first bad index if any gradient
 * coordinate is non-finite.
 */
double backward(const GcnLstmModel& model, const NormalizedAdjacency& a_hat,
                const FeatureTensor& x, const Mat& target, Vec& grad);

/**
 * Gradient of one scalar output F[target_node, horizon] (raw head output)
 * with respect to the input tensor. Same reverse machinery as backward,
 * seeded with an indicator instead of the loss residual. The result is
 * flat in FeatureTensor order (node, feature, step).
 */
std::vector<double> input_gradient(const GcnLstmModel& model, const NormalizedAdjacency& a_hat,
                                   const FeatureTensor& x, int target_node, int horizon);

struct AdamState {
    Vec m;  // first moment
    Vec v;  // second moment
    long step = 0;
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState create(Eigen::Index param_count, double lr = 0.001);
};

/// Bias-corrected Adam update in place.
void adam_step(Vec& params, const Vec& grad, AdamState& state);

struct TrainConfig {
    int epochs = 1000;
    int batch_size = 12;  // training windows per optimizer step
    int patience = 50;    // non-improving epochs tolerated before stopping
    double lr = 0.001;
    double clip_norm = 5.0;  // global-norm gradient clip; 0 disables
    std::uint64_t seed = 0;
    int threads = 1;
    int checkpoint_every = 0;  // epochs between checkpoints; 0 disables
    std::filesystem::path checkpoint_dir;
    std::filesystem::path log_path;  // append-only CSV; empty disables

    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
    long elapsed_ms = 0;
};

struct TrainResult {
    GcnLstmModel best_model;
    int best_epoch = 0;
    double best_val_mse = 0.0;
    std::vector<EpochStats> history;
};

/**
 * Mini-batch Adam training with early stopping. Windows are shuffled each
 * epoch (seeded); batch gradients are averaged over the batch's windows and
 * reduced in window order, so a fixed seed fixes the whole loss history.
 * Validation MSE is tracked per epoch and the parameters from the best
 * epoch are returned; when `val` is empty the training MSE stands in for
 * model selection and early stopping.
 */
TrainResult train(const GcnLstmModel& initial, const NormalizedAdjacency& a_hat,
                  const std::vector<TrainingWindow>& training,
                  const std::vector<TrainingWindow>& val, const TrainConfig& config);

struct GridCandidate {
    ModelConfig config;
    double val_mse = 0.0;
    int best_epoch = 0;
};

struct GridSearchResult {
    ModelConfig best_config;
    GcnLstmModel best_model;
    double best_val_mse = 0.0;
    std::vector<GridCandidate> candidates;
};

/**
 * Trains every (layers, width) combination — width sets both the
 * graph-convolution output and the LSTM hidden size — and keeps the
 * configuration with the lowest validation MSE.
 */
GridSearchResult grid_search(const ModelConfig& base, const std::vector<int>& widths,
                             const std::vector<int>& layer_counts,
                             const NormalizedAdjacency& a_hat,
                             const std::vector<TrainingWindow>& training,
                             const std::vector<TrainingWindow>& val, const TrainConfig& config);

}  // namespace firecast
