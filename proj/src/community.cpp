#include "firecast/community.hpp"

#include "firecast/io.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace firecast {

namespace {

/// Working graph for the move/aggregate cycle. Self-loop weight is the full
/// ordered-pair internal sum, so degrees and 2m are preserved across
/// aggregations.
struct LocalGraph {
    std::vector<std::vector<std::pair<int, double>>> adj;  // neighbors, no self entries
    std::vector<double> self_w;
    std::vector<double> degree;
    double two_m = 0.0;

    int size() const { return static_cast<int>(adj.size()); }
};

LocalGraph from_wildfire(const WildfireGraph& g) {
    LocalGraph lg;
    lg.adj.resize(static_cast<std::size_t>(g.node_count));
    lg.self_w.assign(static_cast<std::size_t>(g.node_count), 0.0);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        lg.adj[static_cast<std::size_t>(g.edge_i[e])].emplace_back(g.edge_j[e], g.edge_w[e]);
        lg.adj[static_cast<std::size_t>(g.edge_j[e])].emplace_back(g.edge_i[e], g.edge_w[e]);
    }
    lg.degree.assign(static_cast<std::size_t>(g.node_count), 0.0);
    for (int v = 0; v < g.node_count; ++v) {
        double k = lg.self_w[static_cast<std::size_t>(v)];
        for (const auto& [u, w] : lg.adj[static_cast<std::size_t>(v)]) k += w;
        lg.degree[static_cast<std::size_t>(v)] = k;
        lg.two_m += k;
    }
    return lg;
}

/**
 * One Louvain level: local moves over seeded-shuffle passes until a full
 * pass moves nothing. `labels` starts as singletons. Returns whether any
 * move happened.
 */
bool one_level(const LocalGraph& g, std::vector<int>& labels, Rng& rng, double gamma,
               double min_gain) {
    const int n = g.size();
    std::vector<double> sigma_tot(g.degree);  // one community per node initially
    std::vector<double> neigh_w(static_cast<std::size_t>(n), 0.0);
    std::vector<int> touched;
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    const double m2 = g.two_m;
    bool any_move = false;
    bool moved = true;
    while (moved) {
        moved = false;
        rng.shuffle(order);
        for (int idx = 0; idx < n; ++idx) {
            const int v = order[static_cast<std::size_t>(idx)];
            const double k_v = g.degree[static_cast<std::size_t>(v)];
            if (k_v == 0.0) continue;  // isolated: no move can gain
            const int old_c = labels[static_cast<std::size_t>(v)];

            touched.clear();
            neigh_w[static_cast<std::size_t>(old_c)] = 0.0;
            touched.push_back(old_c);
            for (const auto& [u, w] : g.adj[static_cast<std::size_t>(v)]) {
                const int c = labels[static_cast<std::size_t>(u)];
                if (neigh_w[static_cast<std::size_t>(c)] == 0.0 &&
                    std::find(touched.begin(), touched.end(), c) == touched.end()) {
                    touched.push_back(c);
                }
                neigh_w[static_cast<std::size_t>(c)] += w;
            }

            sigma_tot[static_cast<std::size_t>(old_c)] -= k_v;
            // Gain of joining community c relative to standing alone:
            //   w(v->c)/m - gamma * sigma_tot_c * k_v / (2 m^2)
            auto gain = [&](int c) {
                return neigh_w[static_cast<std::size_t>(c)] / (m2 / 2.0) -
                       gamma * sigma_tot[static_cast<std::size_t>(c)] * k_v * 2.0 / (m2 * m2);
            };
            const double stay_gain = gain(old_c);
            int best_c = old_c;
            double best_gain = stay_gain;
            for (int c : touched) {
                if (c == old_c) continue;
                const double cand = gain(c);
                if (cand > best_gain + min_gain) {
                    best_gain = cand;
                    best_c = c;
                }
            }
            sigma_tot[static_cast<std::size_t>(best_c)] += k_v;
            labels[static_cast<std::size_t>(v)] = best_c;
            if (best_c != old_c) {
                moved = true;
                any_move = true;
            }
            for (int c : touched) neigh_w[static_cast<std::size_t>(c)] = 0.0;
        }
    }
    return any_move;
}

/// Collapses communities into super-nodes; labels are renumbered to the
/// returned contiguous ids in first-appearance order.
LocalGraph aggregate(const LocalGraph& g, std::vector<int>& labels) {
    const int n = g.size();
    std::vector<int> renumber(static_cast<std::size_t>(n), -1);
    int next = 0;
    for (int v = 0; v < n; ++v) {
        int& r = renumber[static_cast<std::size_t>(labels[static_cast<std::size_t>(v)])];
        if (r < 0) r = next++;
        labels[static_cast<std::size_t>(v)] = r;
    }

    LocalGraph out;
    out.adj.resize(static_cast<std::size_t>(next));
    out.self_w.assign(static_cast<std::size_t>(next), 0.0);
    out.degree.assign(static_cast<std::size_t>(next), 0.0);
    out.two_m = g.two_m;

    std::vector<double> row(static_cast<std::size_t>(next), 0.0);
    std::vector<std::vector<int>> members(static_cast<std::size_t>(next));
    for (int v = 0; v < n; ++v) {
        members[static_cast<std::size_t>(labels[static_cast<std::size_t>(v)])].push_back(v);
    }
    for (int c = 0; c < next; ++c) {
        std::vector<int> touched;
        double self = 0.0;
        for (int v : members[static_cast<std::size_t>(c)]) {
            self += g.self_w[static_cast<std::size_t>(v)];
            for (const auto& [u, w] : g.adj[static_cast<std::size_t>(v)]) {
                const int cu = labels[static_cast<std::size_t>(u)];
                if (cu == c) {
                    self += w;  // both directions visited, giving the ordered sum
                } else {
                    if (row[static_cast<std::size_t>(cu)] == 0.0 &&
                        std::find(touched.begin(), touched.end(), cu) == touched.end()) {
                        touched.push_back(cu);
                    }
                    row[static_cast<std::size_t>(cu)] += w;
                }
            }
        }
        std::sort(touched.begin(), touched.end());
        out.self_w[static_cast<std::size_t>(c)] = self;
        double k = self;
        for (int cu : touched) {
            out.adj[static_cast<std::size_t>(c)].emplace_back(cu, row[static_cast<std::size_t>(cu)]);
            k += row[static_cast<std::size_t>(cu)];
            row[static_cast<std::size_t>(cu)] = 0.0;
        }
        out.degree[static_cast<std::size_t>(c)] = k;
    }
    return out;
}

}  // namespace

Partition Partition::single_community(int node_count) {
    Partition p;
    p.assignment.assign(static_cast<std::size_t>(node_count), 0);
    p.community_count = node_count > 0 ? 1 : 0;
    return p;
}

Partition Partition::singletons(int node_count) {
    Partition p;
    p.assignment.resize(static_cast<std::size_t>(node_count));
    std::iota(p.assignment.begin(), p.assignment.end(), 0);
    p.community_count = node_count;
    return p;
}

Partition Partition::from_labels(const std::vector<int>& labels) {
    Partition p;
    p.assignment.resize(labels.size());
    std::vector<int> renumber;
    for (std::size_t v = 0; v < labels.size(); ++v) {
        const int raw = labels[v];
        int found = -1;
        for (std::size_t r = 0; r < renumber.size(); ++r) {
            if (renumber[r] == raw) {
                found = static_cast<int>(r);
                break;
            }
        }
        if (found < 0) {
            found = static_cast<int>(renumber.size());
            renumber.push_back(raw);
        }
        p.assignment[v] = found;
    }
    p.community_count = static_cast<int>(renumber.size());
    return p;
}

double modularity(const WildfireGraph& g, const Partition& p, double gamma) {
    if (static_cast<int>(p.assignment.size()) != g.node_count) {
        throw ShapeError("modularity: partition does not cover all nodes");
    }
    const double m = g.total_weight();
    if (m == 0.0) throw RangeError("modularity: undefined on a graph with no edge weight");

    double internal = 0.0;  // sum_ij A_ij delta(c_i, c_j), ordered pairs
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        if (p.assignment[static_cast<std::size_t>(g.edge_i[e])] ==
            p.assignment[static_cast<std::size_t>(g.edge_j[e])]) {
            internal += 2.0 * g.edge_w[e];
        }
    }
    const std::vector<double> k = g.weighted_degrees();
    std::vector<double> sigma_tot(static_cast<std::size_t>(p.community_count), 0.0);
    for (int v = 0; v < g.node_count; ++v) {
        sigma_tot[static_cast<std::size_t>(p.assignment[static_cast<std::size_t>(v)])] +=
            k[static_cast<std::size_t>(v)];
    }
    double null_term = 0.0;
    for (double s : sigma_tot) null_term += s * s;
    return internal / (2.0 * m) - gamma * null_term / (4.0 * m * m);
}

LouvainResult louvain(const WildfireGraph& g, const LouvainConfig& config) {
    if (config.gamma <= 0.0) throw ConfigError("louvain: gamma must be positive");
    if (g.edge_count() == 0) throw RangeError("louvain: graph has no edges");

    Rng rng(config.seed);
    LocalGraph lg = from_wildfire(g);

    // flat[v] = community of original node v in the current level's graph
    std::vector<int> flat(static_cast<std::size_t>(g.node_count));
    std::iota(flat.begin(), flat.end(), 0);

    LouvainResult result;
    while (true) {
        std::vector<int> labels(static_cast<std::size_t>(lg.size()));
        std::iota(labels.begin(), labels.end(), 0);
        const bool improved = one_level(lg, labels, rng, config.gamma, config.min_gain);
        if (!improved && !result.phase_history.empty()) break;
        lg = aggregate(lg, labels);
        for (int& c : flat) c = labels[static_cast<std::size_t>(c)];

        Partition phase = Partition::from_labels(flat);
        result.phase_history.push_back(modularity(g, phase, config.gamma));
        if (!improved) break;
    }

    // Zero-degree nodes share one default community; merging them cannot
    // change Q because every term they touch is zero.
    const std::vector<double> degrees = g.weighted_degrees();
    int default_label = -1;
    std::vector<int> merged = flat;
    for (int v = 0; v < g.node_count; ++v) {
        if (degrees[static_cast<std::size_t>(v)] == 0.0) {
            if (default_label < 0) default_label = flat[static_cast<std::size_t>(v)];
            merged[static_cast<std::size_t>(v)] = default_label;
        }
    }
    result.partition = Partition::from_labels(merged);
    result.q = modularity(g, result.partition, config.gamma);
    return result;
}

Mat community_map(const Partition& p, const LandMask& mask, double sentinel) {
    if (static_cast<int>(p.assignment.size()) != mask.node_count()) {
        throw ShapeError("community_map: partition size does not match mask nodes");
    }
    Mat out = Mat::Constant(mask.spec().lat_count, mask.spec().lon_count, sentinel);
    for (int v = 0; v < mask.node_count(); ++v) {
        const auto [row, col] = mask.node_to_cell(v);
        out(row, col) = static_cast<double>(p.assignment[static_cast<std::size_t>(v)]);
    }
    return out;
}

void write_partition(const std::filesystem::path& path, const Partition& p) {
    std::ostringstream out;
    out << "node,community\n";
    for (std::size_t v = 0; v < p.assignment.size(); ++v) {
        out << v << ',' << p.assignment[v] << '\n';
    }
    write_text_file(path, out.str());
}

void write_community_summary(const std::filesystem::path& path, const WildfireGraph& g,
                             const Partition& p) {
    std::vector<int> size(static_cast<std::size_t>(p.community_count), 0);
    std::vector<double> internal(static_cast<std::size_t>(p.community_count), 0.0);
    for (int c : p.assignment) ++size[static_cast<std::size_t>(c)];
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const int ci = p.assignment[static_cast<std::size_t>(g.edge_i[e])];
        if (ci == p.assignment[static_cast<std::size_t>(g.edge_j[e])]) {
            internal[static_cast<std::size_t>(ci)] += g.edge_w[e];
        }
    }
    std::ostringstream out;
    out << "community,size,internal_weight\n";
    for (int c = 0; c < p.community_count; ++c) {
        out << c << ',' << size[static_cast<std::size_t>(c)] << ','
            << format_g17(internal[static_cast<std::size_t>(c)]) << '\n';
    }
    write_text_file(path, out.str());
}

Partition read_partition(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    std::string header;
    if (!std::getline(in, header) || header != "node,community") {
        throw IoError("bad partition header in " + path.string());
    }
    std::vector<int> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int node = 0, comm = 0;
        if (std::sscanf(line.c_str(), "%d,%d", &node, &comm) != 2 ||
            node != static_cast<int>(labels.size())) {
            throw IoError("bad partition row '" + line + "'");
        }
        labels.push_back(comm);
    }
    return Partition::from_labels(labels);
}

}  // namespace firecast
