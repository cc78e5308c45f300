#pragma once

#include "firecast/graph.hpp"
#include "firecast/grid.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace firecast {

enum class Activation { Sigmoid, Relu, Tanh, Identity };

Activation activation_from_name(const std::string& name);
std::string activation_name(Activation a);

struct ModelConfig {
    int input_features = kFeatureCount;
    int gcn_out = 16;     // graph-convolution output width
    int lstm_layers = 1;  // 1 or 2 stacked cells
    int lstm_hidden = 16;
    int t_in = 12;   // input window, months
    int t_out = 12;  // prediction horizon, months
    Activation gcn_activation = Activation::Sigmoid;

    void validate() const;
    int lstm_input_width(int layer) const { return layer == 0 ? gcn_out : lstm_hidden; }
};

/**
 * Byte offsets of every parameter block inside the flat vector. The
 * canonical layout, in order, is:
 *
 *   w_gcn                D x gcn_out, row-major
 *   per LSTM layer l:    w_f, b_f, w_i, b_i, w_c, b_c, w_o, b_o
 *                        (each w is hidden x (input_l + hidden) row-major,
 *                         input_0 = gcn_out, input_l = hidden for l > 0)
 *   w_out                t_out x hidden, row-major
 *   b_out                t_out
 *
 * Optimizers, checkpoints and gradient checks all address parameters by
 * index into this layout.
 */
struct ParamLayout {
    explicit ParamLayout(const ModelConfig& config);

    std::size_t total = 0;
    std::size_t w_gcn = 0;
    struct GateOffsets {
        std::size_t w_f, b_f, w_i, b_i, w_c, b_c, w_o, b_o;
    };
    std::vector<GateOffsets> layers;
    std::size_t w_out = 0;
    std::size_t b_out = 0;
};

/// Mutable views of one LSTM layer's gate parameters inside the flat vector.
struct LstmLayerParams {
    ConstMatMap w_f, w_i, w_c, w_o;
    ConstVecMap b_f, b_i, b_c, b_o;
};

struct GcnLstmModel {
    ModelConfig config;
    Vec params;

    ParamLayout layout() const { return ParamLayout(config); }
    ConstMatMap w_gcn() const;
    LstmLayerParams layer(int l) const;
    ConstMatMap w_out() const;
    ConstVecMap b_out() const;
};

/// Glorot-uniform weights, zero biases except forget-gate bias = 1;
/// deterministic under seed (single stream drawn in canonical layout order).
GcnLstmModel init_parameters(const ModelConfig& config, std::uint64_t seed);

/// Z = activation(A_hat * X * W), the single graph-convolution layer.
Mat gcn_forward(const NormalizedAdjacency& a_hat, const Mat& x, const Mat& w_gcn,
                Activation activation);

/// One LSTM cell update for a single node's state.
std::pair<Vec, Vec> lstm_step(const Vec& z, const Vec& h_prev, const Vec& c_prev,
                              const LstmLayerParams& p);

/**
 * Forward intermediates kept for the reverse pass. All per-step matrices
 * are node x width.
 */
struct ForwardTape {
    std::vector<Mat> gcn_mixed;  // per t: A_hat * X_t      (N x D)
    std::vector<Mat> gcn_pre;    // per t: (A_hat * X_t) W  (N x K)
    std::vector<Mat> gcn_out;    // per t: activation(pre)  (N x K)
    struct LstmStep {
        Mat f, i, g, o, c, tanh_c, h;
    };
    std::vector<std::vector<LstmStep>> lstm;  // [layer][t]
    Mat raw_pred;  // N x t_out before clamping
};

/// Full forward pass. Returns the raw head output; fills `tape` when given.
Mat forward_raw(const GcnLstmModel& model, const NormalizedAdjacency& a_hat,
                const FeatureTensor& x, ForwardTape* tape = nullptr);

/// Forward pass with predictions clamped to [0, 1] (burnt fraction bounds).
Mat forward(const GcnLstmModel& model, const NormalizedAdjacency& a_hat, const FeatureTensor& x);

inline Mat clamp01(Mat m) { return m.cwiseMax(0.0).cwiseMin(1.0); }

/// Checkpoint: `<stem>.json` (config) + `<stem>.f64` (flat little-endian
/// parameters in the canonical layout); round-trips bit-exactly.
void write_checkpoint(const std::filesystem::path& dir, const std::string& stem,
                      const GcnLstmModel& model);
GcnLstmModel read_checkpoint(const std::filesystem::path& dir, const std::string& stem);

}  // namespace firecast
