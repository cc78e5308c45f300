#pragma once

#include "firecast/train.hpp"

#include <array>
#include <vector>

namespace firecast {

/// Integrated-gradients settings. The baseline is the all-zeros tensor in
/// normalized space unless a custom baseline is supplied.
struct IgConfig {
    int steps = 50;        // midpoint Riemann resolution for the path integral
    int target_node = 0;   // node whose prediction is attributed
    int horizon = 0;       // month within the prediction block, 0-based
    const FeatureTensor* baseline = nullptr;  // null means all zeros
};

/// Attribution scores, same shape as the input tensor.
using AttributionMap = FeatureTensor;

/**
 * Midpoint-rule path integral underlying integrated gradients:
 *
 *   G_i = (X_i - B_i) * (1/steps) * sum_k gradient_at(B + (k - 1/2)/steps (X - B))_i
 *
 * `gradient_at` returns dF/dX flat in FeatureTensor order. Exposed so the
 * quadrature can be exercised against analytic gradient fields.
 */
AttributionMap integrate_path(
    const FeatureTensor& x, const FeatureTensor& baseline, int steps,
    const std::function<std::vector<double>(const FeatureTensor&)>& gradient_at);

/**
 * Integrated gradients of one scalar prediction (target node, horizon)
 * against every input entry:
 *
 *   G_i = (X_i - B_i) * (1/steps) * sum_k dF(B + (k - 1/2)/steps (X - B)) / dX_i
 *
 * The gradient targets the raw head output, so the completeness identity
 * sum(G) = F(X) - F(B) holds up to quadrature error.
 */
AttributionMap integrated_gradients(const GcnLstmModel& model, const NormalizedAdjacency& a_hat,
                                    const FeatureTensor& x, const IgConfig& config);

struct BoxStats {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

/// Box-plot statistics with linearly interpolated quartiles.
BoxStats box_stats(std::vector<double> values);

struct FeatureImportance {
    std::vector<int> sampled_nodes;
    // One attribution total (summed over source nodes and input months) per
    // sampled node, per feature.
    std::array<std::vector<double>, kFeatureCount> samples;
    std::array<BoxStats, kFeatureCount> stats;
};

/**
 * Runs integrated gradients for `sample_size` seeded-sampled target nodes
 * at the given horizon, each against a seeded-chosen window from `dataset`,
 * and aggregates each run into one scalar per input feature.
 */
FeatureImportance feature_importance(const GcnLstmModel& model, const NormalizedAdjacency& a_hat,
                                     const std::vector<FeatureTensor>& dataset, int sample_size,
                                     int horizon, int steps, std::uint64_t seed);

/// Attribution per source node (summed over features and input months) for
/// one target prediction. Inflate through the land mask for a spatial map.
Vec node_attribution(const GcnLstmModel& model, const NormalizedAdjacency& a_hat,
                     const FeatureTensor& x, int target_node, int horizon, int steps);

}  // namespace firecast
