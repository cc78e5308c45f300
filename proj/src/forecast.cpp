#include "firecast/forecast.hpp"

namespace firecast {

Mat rollout(const GcnLstmModel& model, const NormalizedAdjacency& a_hat,
            const std::array<Mat, kClimateFeatureCount>& climate, const FeatureTensor& seed,
            const RolloutPlan& plan, const Mat* observed_fire) {
    const ModelConfig& cfg = model.config;
    if (cfg.t_in != kMonthsPerYear || cfg.t_out != kMonthsPerYear) {
        throw ConfigError("rollout: the yearly protocol requires t_in = t_out = 12");
    }
    if (seed.steps() != kMonthsPerYear) {
        throw RangeError("rollout: seed tensor must span 12 months");
    }
    if (plan.years < 1) throw RangeError("rollout: years must be >= 1");
    if (plan.start < kMonthsPerYear) {
        throw RangeError("rollout: start must leave room for the seed window");
    }
    const int horizon_end = plan.start + kMonthsPerYear * plan.years;
    for (const Mat& c : climate) {
        if (c.cols() < horizon_end) {
            throw RangeError("rollout: climate series cover " + std::to_string(c.cols()) +
                             " months, plan needs " + std::to_string(horizon_end));
        }
        if (c.rows() != seed.nodes()) throw ShapeError("rollout: climate node count mismatch");
    }
    if (observed_fire && observed_fire->cols() < horizon_end) {
        throw RangeError("rollout: observed fire does not cover the plan horizon");
    }

    const int n = seed.nodes();
    Mat out(n, kMonthsPerYear * plan.years);
    Mat fed_fire;  // fire months fed into the next block's input

    for (int block = 0; block < plan.years; ++block) {
        FeatureTensor x(n, kMonthsPerYear);
        if (block == 0) {
            x = seed;
        } else {
            const int t0 = plan.start + kMonthsPerYear * (block - 1);
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < kMonthsPerYear; ++k) {
                    for (int f = 0; f < kClimateFeatureCount; ++f) {
                        x.at(i, f, k) = climate[static_cast<std::size_t>(f)](i, t0 + k);
                    }
                    x.at(i, kBurntArea, k) = observed_fire ? (*observed_fire)(i, t0 + k)
                                                           : fed_fire(i, k);
                }
            }
        }
        const Mat pred = forward(model, a_hat, x);
        out.middleCols(kMonthsPerYear * block, kMonthsPerYear) = pred;
        fed_fire = pred;  // clamped feedback keeps inputs in the training range
    }
    return out;
}

}  // namespace firecast
