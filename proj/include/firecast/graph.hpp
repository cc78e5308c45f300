#pragma once

#include "firecast/common.hpp"

#include <filesystem>
#include <vector>

namespace firecast {

/**
 * Correlation-weighted undirected graph over land nodes. Each undirected
 * edge is stored exactly once with i < j; the diagonal is implicitly zero
 * (self-loops appear only in the normalized form). Every stored weight is
 * strictly greater than the threshold tau.
 */
struct WildfireGraph {
    int node_count = 0;
    double tau = 0.0;
    std::vector<int> edge_i;  // i < j per edge
    std::vector<int> edge_j;
    std::vector<double> edge_w;

    std::size_t edge_count() const { return edge_w.size(); }

    /// Weighted degree k_i = sum_j A_ij per node.
    std::vector<double> weighted_degrees() const;

    /// Total edge weight m = (1/2) sum_ij A_ij.
    double total_weight() const;
};

/**
 * Symmetric degree-rescaled adjacency with self-loops,
 * D^{-1/2} (A + I) D^{-1/2}, stored as CSR with rows sorted by column so
 * row traversal (and therefore multiplication) is deterministic.
 */
struct NormalizedAdjacency {
    int node_count = 0;
    std::vector<int> row_ptr;
    std::vector<int> col_idx;
    std::vector<double> values;

    /// Sparse-times-dense product: returns (N x N) * (N x C).
    Mat multiply(const Mat& x) const;

    double coeff(int i, int j) const;

    static NormalizedAdjacency identity(int n);
};

/// Sample Pearson correlation of two equal-length series; zero-variance
/// series correlate 0 by definition (keeps desert/ocean-edge nodes finite).
double pearson_r(const Vec& x, const Vec& y);

/**
 * All pairwise correlations r(v_i, v_j) for i < j over the rows of a
 * node x time matrix, in lexicographic (i, j) order. Rows are partitioned
 * over `threads` workers; each pair lands in its own slot so the result is
 * identical for any worker count.
 */
std::vector<double> pairwise_correlations(const Mat& node_series, int threads = 1);

/// Empirical q-quantile (nearest-rank) of the i < j pairwise correlation
/// multiset.
double compute_threshold(const Mat& node_series, double quantile, int threads = 1);

/// Nearest-rank quantile of an unsorted sample: smallest value v such that
/// at least ceil(q * n) samples are <= v.
double nearest_rank_quantile(std::vector<double> values, double q);

/// a_ij = r(v_i, v_j) wherever r > tau and i != j; symmetric, stored sparse.
WildfireGraph build_adjacency(const Mat& node_series, double tau, int threads = 1);

NormalizedAdjacency normalize_adjacency(const WildfireGraph& g);

/// Plain-text edge list: header "N <count> tau <value>" then "i j weight"
/// lines, weights serialized with 17 significant digits.
void write_graph(const std::filesystem::path& path, const WildfireGraph& g);
WildfireGraph read_graph(const std::filesystem::path& path);

}  // namespace firecast
