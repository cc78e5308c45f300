#pragma once

#include "firecast/graph.hpp"
#include "firecast/grid.hpp"

#include <filesystem>
#include <vector>

namespace firecast {

/// Community assignment per node; ids are contiguous 0..community_count-1.
struct Partition {
    std::vector<int> assignment;
    int community_count = 0;

    static Partition single_community(int node_count);
    static Partition singletons(int node_count);
    /// Renumbers arbitrary labels to contiguous ids in first-appearance order.
    static Partition from_labels(const std::vector<int>& labels);
};

struct LouvainConfig {
    double gamma = 1.06;  // resolution; larger values favour smaller communities
    std::uint64_t seed = 0;
    double min_gain = 1e-7;  // modularity gain below which a move is rejected
};

/**
 * Modularity Q = (1/2m) sum_ij (A_ij - gamma k_i k_j / 2m) delta(c_i, c_j)
 * with weighted degrees k and total edge weight m. Throws on an edgeless
 * graph (m = 0 leaves Q undefined).
 */
double modularity(const WildfireGraph& g, const Partition& p, double gamma);

struct LouvainResult {
    Partition partition;
    double q = 0.0;
    std::vector<double> phase_history;  // Q after each aggregation phase
};

/**
 * Louvain heuristic: local node moves in seeded-shuffle order, accepting a
 * move only when the modularity gain exceeds config.min_gain, alternated
 * with graph aggregation until a full phase yields no improvement.
 * Zero-degree nodes never move; they end up together in one default
 * community. Deterministic under config.seed.
 */
LouvainResult louvain(const WildfireGraph& g, const LouvainConfig& config);

/// Inflates community ids onto the grid; ocean cells carry `sentinel`.
Mat community_map(const Partition& p, const LandMask& mask, double sentinel = -1.0);

/// CSV "node,community" plus a "community,size,internal_weight" summary.
void write_partition(const std::filesystem::path& path, const Partition& p);
void write_community_summary(const std::filesystem::path& path, const WildfireGraph& g,
                             const Partition& p);
Partition read_partition(const std::filesystem::path& path);

}  // namespace firecast
