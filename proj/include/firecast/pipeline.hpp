#pragma once

#include "firecast/attribution.hpp"
#include "firecast/community.hpp"
#include "firecast/forecast.hpp"
#include "firecast/metrics.hpp"
#include "firecast/synth.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace firecast {

/**
 * Run configuration, loaded from a JSON file. Every field has the
 * experiment-protocol default pre-filled, so an empty object {} runs the
 * whole pipeline. Unknown keys are rejected at load.
 */
struct RunConfig {
    struct Paths {
        std::filesystem::path data_dir = "data";
        std::filesystem::path output_dir = "out";
    } paths;

    SynthConfig synth;

    struct Graph {
        double quantile = 0.10;
    } graph;

    struct Model {
        std::vector<int> widths = {16, 32, 64};  // hyperparameter grid
        std::vector<int> layers = {1, 2};
        int t_in = 12;
        int t_out = 12;
        std::string activation = "sigmoid";
        bool identity_adjacency = false;  // plain-LSTM baseline configuration
    } model;

    struct Train {
        double lr = 0.001;
        int epochs = 1000;
        int batch = 12;
        int patience = 50;
        std::uint64_t seed = 1;
        double clip_norm = 5.0;
        int checkpoint_every = 0;
        double validation_split = 0.2;  // tail fraction of the validation member
    } train;

    struct Louvain {
        double gamma = 1.06;
        std::uint64_t seed = 1;
    } louvain;

    struct Ig {
        int steps = 50;
        int sample = 500;              // clamped to the node count at run time
        std::vector<int> horizons = {1, 11};  // 1-based months into the future
        std::uint64_t seed = 1;
    } ig;

    void validate() const;
};

/// Parses and validates a config file; unknown keys anywhere are an error.
/// FIRECAST_DATA_DIR supplies the data dir when the file does not set one.
RunConfig load_config(const std::filesystem::path& path);
RunConfig default_config();

/// Overrides every stage seed at once (the --seed flag).
void override_seeds(RunConfig& config, std::uint64_t seed);

/// Data-directory contents shared by the commands, normalized per variable
/// with statistics pooled over the training members.
struct PreparedData {
    LandMask mask;
    std::array<Mat, kClimateFeatureCount> climate;  // normalized node series
    std::vector<EnsembleMember> members;            // normalized fire
    std::array<NormalizationParams, kFeatureCount> norm;  // per feature channel
    int months = 0;

    const EnsembleMember& member_with_role(MemberRole role) const;
};

PreparedData prepare_data(const std::filesystem::path& data_dir);

/// Sliding windows for training and validation per the 80/20 tail split of
/// the validation member.
struct WindowSets {
    std::vector<TrainingWindow> training;
    std::vector<TrainingWindow> validation;
};
WindowSets build_windows(const PreparedData& data, int t_in, int t_out, double validation_split);

// Pipeline commands. Each reads its inputs from the configured directories,
// writes deterministic outputs, and throws with a diagnostic naming the
// missing artifact when a prerequisite has not been produced yet.
void cmd_synth(const RunConfig& config);
void cmd_build_graph(const RunConfig& config, int threads = 1);
void cmd_train(const RunConfig& config, int threads = 1);
void cmd_predict(const RunConfig& config);
void cmd_eval(const RunConfig& config, bool land_only = false);
void cmd_communities(const RunConfig& config);
void cmd_attribute(const RunConfig& config);

}  // namespace firecast
