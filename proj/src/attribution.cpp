#include "firecast/attribution.hpp"

#include <algorithm>
#include <cmath>

namespace firecast {

AttributionMap integrate_path(
    const FeatureTensor& x, const FeatureTensor& baseline, int steps,
    const std::function<std::vector<double>(const FeatureTensor&)>& gradient_at) {
    if (steps < 1) throw ConfigError("integrate_path: steps must be >= 1");
    const std::size_t flat_size = x.flat().size();
    if (baseline.flat().size() != flat_size) {
        throw ShapeError("integrate_path: baseline shape mismatch");
    }

    std::vector<double> grad_sum(flat_size, 0.0);
    FeatureTensor probe(x.nodes(), x.steps());
    for (int k = 1; k <= steps; ++k) {
        const double alpha = (static_cast<double>(k) - 0.5) / static_cast<double>(steps);
        for (std::size_t i = 0; i < flat_size; ++i) {
            probe.flat()[i] = baseline.flat()[i] + alpha * (x.flat()[i] - baseline.flat()[i]);
        }
        const std::vector<double> g = gradient_at(probe);
        if (g.size() != flat_size) throw ShapeError("integrate_path: gradient shape mismatch");
        for (std::size_t i = 0; i < flat_size; ++i) grad_sum[i] += g[i];
    }

    AttributionMap result(x.nodes(), x.steps());
    for (std::size_t i = 0; i < flat_size; ++i) {
        result.flat()[i] =
            (x.flat()[i] - baseline.flat()[i]) * grad_sum[i] / static_cast<double>(steps);
    }
    return result;
}

AttributionMap integrated_gradients(const GcnLstmModel& model, const NormalizedAdjacency& a_hat,
                                    const FeatureTensor& x, const IgConfig& config) {
    if (config.target_node < 0 || config.target_node >= x.nodes()) {
        throw RangeError("integrated_gradients: target node out of range");
    }
    if (config.horizon < 0 || config.horizon >= model.config.t_out) {
        throw RangeError("integrated_gradients: horizon out of range");
    }
    const FeatureTensor baseline =
        config.baseline ? *config.baseline : FeatureTensor(x.nodes(), x.steps());
    return integrate_path(x, baseline, config.steps, [&](const FeatureTensor& probe) {
        return input_gradient(model, a_hat, probe, config.target_node, config.horizon);
    });
}

BoxStats box_stats(std::vector<double> values) {
    if (values.empty()) throw ShapeError("box_stats: empty sample");
    std::sort(values.begin(), values.end());
    auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        if (lo + 1 >= values.size()) return values.back();
        return values[lo] + frac * (values[lo + 1] - values[lo]);
    };
    return BoxStats{values.front(), quantile(0.25), quantile(0.5), quantile(0.75), values.back()};
}

FeatureImportance feature_importance(const GcnLstmModel& model, const NormalizedAdjacency& a_hat,
                                     const std::vector<FeatureTensor>& dataset, int sample_size,
                                     int horizon, int steps, std::uint64_t seed) {
    if (dataset.empty()) throw ConfigError("feature_importance: empty dataset");
    const int n = dataset.front().nodes();
    if (sample_size < 1 || sample_size > n) {
        throw ConfigError("feature_importance: sample_size must be in [1, node_count]");
    }

    Rng rng(seed);
    FeatureImportance out;
    out.sampled_nodes = rng.sample_without_replacement(n, sample_size);
    std::vector<std::size_t> window_of(out.sampled_nodes.size());
    for (auto& w : window_of) w = static_cast<std::size_t>(rng.below(dataset.size()));

    for (std::size_t s = 0; s < out.sampled_nodes.size(); ++s) {
        IgConfig cfg;
        cfg.steps = steps;
        cfg.target_node = out.sampled_nodes[s];
        cfg.horizon = horizon;
        const AttributionMap g = integrated_gradients(model, a_hat, dataset[window_of[s]], cfg);
        for (int f = 0; f < kFeatureCount; ++f) {
            double total = 0.0;
            for (int node = 0; node < g.nodes(); ++node) {
                for (int k = 0; k < g.steps(); ++k) total += g.at(node, f, k);
            }
            out.samples[static_cast<std::size_t>(f)].push_back(total);
        }
    }
    for (int f = 0; f < kFeatureCount; ++f) {
        out.stats[static_cast<std::size_t>(f)] = box_stats(out.samples[static_cast<std::size_t>(f)]);
    }
    return out;
}

Vec node_attribution(const GcnLstmModel& model, const NormalizedAdjacency& a_hat,
                     const FeatureTensor& x, int target_node, int horizon, int steps) {
    IgConfig cfg;
    cfg.steps = steps;
    cfg.target_node = target_node;
    cfg.horizon = horizon;
    const AttributionMap g = integrated_gradients(model, a_hat, x, cfg);
    Vec per_node = Vec::Zero(x.nodes());
    for (int node = 0; node < x.nodes(); ++node) {
        double total = 0.0;
        for (int f = 0; f < kFeatureCount; ++f) {
            for (int k = 0; k < x.steps(); ++k) total += g.at(node, f, k);
        }
        per_node[node] = total;
    }
    return per_node;
}

}  // namespace firecast
