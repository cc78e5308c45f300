#pragma once

#include "firecast/model.hpp"
#include "firecast/train.hpp"

#include <array>

namespace firecast {

/**
 * Autoregressive yearly rollout: each 12-month block is predicted from the
 * previous block's predicted fire plus observed climate.
 */
struct RolloutPlan {
    int start = 0;  // month index where prediction begins; the seed window ends here
    int years = 0;  // number of 12-month blocks to predict
};

inline constexpr int kMonthsPerYear = 12;

/**
 * Rolls the model forward plan.years blocks from a seed window covering
 * months [plan.start - 12, plan.start). Block 0 consumes observed fire;
 * every later block consumes the previous block's clamped predictions,
 * while climate channels always come from the observed series. Returns
 * node x (12 * years) predictions in [0, 1].
 *
 * When `observed_fire` is non-null the predicted fire feedback is replaced
 * by the observed series (teacher forcing), which makes every block an
 * independent forward pass.
 */
Mat rollout(const GcnLstmModel& model, const NormalizedAdjacency& a_hat,
            const std::array<Mat, kClimateFeatureCount>& climate, const FeatureTensor& seed,
            const RolloutPlan& plan, const Mat* observed_fire = nullptr);

}  // namespace firecast
