#include "firecast/graph.hpp"

#include "firecast/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace firecast {

namespace {

// Centered rows and their L2 norms; r_ij is then a scaled dot product.
struct CenteredSeries {
    Mat centered;
    Vec norm;
};

CenteredSeries center_rows(const Mat& node_series) {
    CenteredSeries out;
    out.centered = node_series;
    out.norm.resize(node_series.rows());
    for (Eigen::Index i = 0; i < node_series.rows(); ++i) {
        const double mean = node_series.row(i).mean();
        out.centered.row(i).array() -= mean;
        out.norm[i] = out.centered.row(i).norm();
    }
    return out;
}

inline double pair_r(const CenteredSeries& cs, Eigen::Index i, Eigen::Index j) {
    const double denom = cs.norm[i] * cs.norm[j];
    if (denom == 0.0) return 0.0;
    const double r = cs.centered.row(i).dot(cs.centered.row(j)) / denom;
    return std::clamp(r, -1.0, 1.0);
}

// Lexicographic index of pair (i, j), i < j, among all N-choose-2 pairs.
inline std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n) {
    return i * (n - 1) - i * (i - 1) / 2 + (j - i - 1);
}

}  // namespace

std::vector<double> WildfireGraph::weighted_degrees() const {
    std::vector<double> k(static_cast<std::size_t>(node_count), 0.0);
    for (std::size_t e = 0; e < edge_count(); ++e) {
        k[static_cast<std::size_t>(edge_i[e])] += edge_w[e];
        k[static_cast<std::size_t>(edge_j[e])] += edge_w[e];
    }
    return k;
}

double WildfireGraph::total_weight() const {
    double m = 0.0;
    for (double w : edge_w) m += w;
    return m;
}

Mat NormalizedAdjacency::multiply(const Mat& x) const {
    if (x.rows() != node_count) {
        throw ShapeError("NormalizedAdjacency::multiply: row count mismatch");
    }
    Mat out = Mat::Zero(node_count, x.cols());
    for (int i = 0; i < node_count; ++i) {
        auto row = out.row(i);
        for (int p = row_ptr[static_cast<std::size_t>(i)];
             p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
            row += values[static_cast<std::size_t>(p)] * x.row(col_idx[static_cast<std::size_t>(p)]);
        }
    }
    return out;
}

double NormalizedAdjacency::coeff(int i, int j) const {
    for (int p = row_ptr[static_cast<std::size_t>(i)];
         p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
        if (col_idx[static_cast<std::size_t>(p)] == j) return values[static_cast<std::size_t>(p)];
    }
    return 0.0;
}

NormalizedAdjacency NormalizedAdjacency::identity(int n) {
    NormalizedAdjacency a;
    a.node_count = n;
    a.row_ptr.resize(static_cast<std::size_t>(n) + 1);
    a.col_idx.resize(static_cast<std::size_t>(n));
    a.values.assign(static_cast<std::size_t>(n), 1.0);
    for (int i = 0; i <= n; ++i) a.row_ptr[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < n; ++i) a.col_idx[static_cast<std::size_t>(i)] = i;
    return a;
}

double pearson_r(const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw ShapeError("pearson_r: series lengths differ");
    if (x.size() < 2) throw ShapeError("pearson_r: need at least 2 samples");
    const double mx = x.mean();
    const double my = y.mean();
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (Eigen::Index t = 0; t < x.size(); ++t) {
        const double dx = x[t] - mx;
        const double dy = y[t] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> pairwise_correlations(const Mat& node_series, int threads) {
    const std::size_t n = static_cast<std::size_t>(node_series.rows());
    if (n < 2) throw ShapeError("pairwise_correlations: need at least 2 nodes");
    if (node_series.cols() < 2) throw ShapeError("pairwise_correlations: need at least 2 samples");
    const CenteredSeries cs = center_rows(node_series);
    std::vector<double> r(n * (n - 1) / 2);
    parallel_for(n - 1, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            double* slot = r.data() + pair_index(i, i + 1, n);
            for (std::size_t j = i + 1; j < n; ++j) {
                *slot++ = pair_r(cs, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
        }
    });
    return r;
}

double nearest_rank_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ShapeError("nearest_rank_quantile: empty sample");
    if (!(q > 0.0 && q < 1.0)) throw RangeError("nearest_rank_quantile: q must be in (0, 1)");
    std::sort(values.begin(), values.end());
    const double rank = std::ceil(q * static_cast<double>(values.size()));
    std::size_t idx = rank <= 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
    idx = std::min(idx, values.size() - 1);
    return values[idx];
}

double compute_threshold(const Mat& node_series, double quantile, int threads) {
    if (node_series.rows() < 2) throw ShapeError("compute_threshold: need at least 2 nodes");
    return nearest_rank_quantile(pairwise_correlations(node_series, threads), quantile);
}

WildfireGraph build_adjacency(const Mat& node_series, double tau, int threads) {
    const std::size_t n = static_cast<std::size_t>(node_series.rows());
    if (n < 1) throw ShapeError("build_adjacency: empty node set");
    const CenteredSeries cs = center_rows(node_series);

    // Per-row buckets filled independently, then concatenated in row order.
    std::vector<std::vector<std::pair<int, double>>> rows(n);
    if (n >= 2) {
        parallel_for(n - 1, threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double r =
                        pair_r(cs, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                    if (r > tau) rows[i].emplace_back(static_cast<int>(j), r);
                }
            }
        });
    }

    WildfireGraph g;
    g.node_count = static_cast<int>(n);
    g.tau = tau;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [j, w] : rows[i]) {
            g.edge_i.push_back(static_cast<int>(i));
            g.edge_j.push_back(j);
            g.edge_w.push_back(w);
        }
    }
    return g;
}

NormalizedAdjacency normalize_adjacency(const WildfireGraph& g) {
    const std::size_t n = static_cast<std::size_t>(g.node_count);
    // Degrees of A + I; the self-loop guarantees every degree >= 1.
    std::vector<double> deg(n, 1.0);
    std::vector<int> row_len(n, 1);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        deg[static_cast<std::size_t>(g.edge_i[e])] += g.edge_w[e];
        deg[static_cast<std::size_t>(g.edge_j[e])] += g.edge_w[e];
        ++row_len[static_cast<std::size_t>(g.edge_i[e])];
        ++row_len[static_cast<std::size_t>(g.edge_j[e])];
    }

    NormalizedAdjacency a;
    a.node_count = g.node_count;
    a.row_ptr.resize(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) a.row_ptr[i + 1] = a.row_ptr[i] + row_len[i];
    a.col_idx.resize(static_cast<std::size_t>(a.row_ptr[n]));
    a.values.resize(a.col_idx.size());

    std::vector<int> cursor(a.row_ptr.begin(), a.row_ptr.end() - 1);
    auto emit = [&](int i, int j, double w) {
        const auto p = static_cast<std::size_t>(cursor[static_cast<std::size_t>(i)]++);
        a.col_idx[p] = j;
        a.values[p] = w / std::sqrt(deg[static_cast<std::size_t>(i)] *
                                    deg[static_cast<std::size_t>(j)]);
    };
    // Edges arrive sorted by (i, j); interleave the diagonal so each CSR row
    // stays column-sorted.
    std::vector<std::vector<std::pair<int, double>>> lower(n);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        lower[static_cast<std::size_t>(g.edge_j[e])].emplace_back(g.edge_i[e], g.edge_w[e]);
    }
    std::size_t upper_cursor = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [j, w] : lower[i]) emit(static_cast<int>(i), j, w);
        emit(static_cast<int>(i), static_cast<int>(i), 1.0);
        while (upper_cursor < g.edge_count() &&
               g.edge_i[upper_cursor] == static_cast<int>(i)) {
            emit(static_cast<int>(i), g.edge_j[upper_cursor], g.edge_w[upper_cursor]);
            ++upper_cursor;
        }
    }
    return a;
}

void write_graph(const std::filesystem::path& path, const WildfireGraph& g) {
    std::ostringstream out;
    out << "N " << g.node_count << " tau " << format_g17(g.tau) << "\n";
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        out << g.edge_i[e] << ' ' << g.edge_j[e] << ' ' << format_g17(g.edge_w[e]) << "\n";
    }
    write_text_file(path, out.str());
}

WildfireGraph read_graph(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    std::string n_tag, tau_tag;
    WildfireGraph g;
    in >> n_tag >> g.node_count >> tau_tag >> g.tau;
    if (!in || n_tag != "N" || tau_tag != "tau") {
        throw IoError("bad graph header in " + path.string());
    }
    int i, j;
    double w;
    while (in >> i >> j >> w) {
        if (i < 0 || j < 0 || i >= g.node_count || j >= g.node_count || i >= j) {
            throw IoError("bad edge in " + path.string());
        }
        g.edge_i.push_back(i);
        g.edge_j.push_back(j);
        g.edge_w.push_back(w);
    }
    return g;
}

}  // namespace firecast
