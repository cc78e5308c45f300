#pragma once

#include "firecast/grid.hpp"

#include <array>
#include <vector>

namespace firecast {

/**
 * Deterministic desk-scale data generator mirroring the structure of the
 * simulation archive: one synthetic continent per hemisphere, four shared
 * climate series, and several fire ensemble members driven by the same
 * climate but perturbed per member.
 */
struct SynthConfig {
    GridSpec grid{12, 16};
    int months = 120;
    int ensemble_count = 3;
    std::uint64_t seed = 7;
    int phase_offset = 6;  // months between northern and southern fire seasons
    double noise = 0.05;   // climate observation noise; also scales the
                           // year-to-year modulation of the fire season

    void validate() const;
};

struct SynthData {
    LandMask mask;
    std::array<Mat, kClimateFeatureCount> climate;  // observed node series, [0, 1]
    std::vector<EnsembleMember> members;            // fire node series, (0, 1)
    std::vector<int> continent;                     // 0 = north, 1 = south per node
};

/**
 * Seasonal construction: every node carries a semiannual component shared
 * across the globe plus an annual component whose phase differs by
 * `phase_offset` months between hemispheres, so all fire correlations stay
 * positive while same-continent pairs correlate far more strongly than
 * cross-hemisphere ones. The annual component's strength drifts from year
 * to year (persistent, per continent, amplitude tied to `noise`), which is
 * what makes neighbouring nodes informative: the drift is only visible
 * through noisy climate observations.
 *
 * Temperature and lightning peak in local summer, humidity and rainfall in
 * local winter, and each member's fire is a logistic response to
 * (T + L - Hum - R) on the noise-free signal plus a per-member offset.
 * With noise = 0 every series is exactly 12-month periodic.
 *
 * Member roles: the last member holds the validation tail, the
 * second-to-last is the test member, all others are plain training members.
 */
SynthData generate(const SynthConfig& config);

/// Role layout used by generate(); exposed for the pipeline and tests.
MemberRole synth_member_role(int index, int ensemble_count);

}  // namespace firecast
