#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "firecast/graph.hpp"
#include "firecast/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

using namespace firecast;

namespace {

/// Brute-force Pearson by the textbook covariance formula, independent of
/// the library path.
double pearson_oracle(const Vec& x, const Vec& y) {
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
    for (Eigen::Index t = 0; t < x.size(); ++t) {
        sx += x[t];
        sy += y[t];
        sxy += x[t] * y[t];
        sxx += x[t] * x[t];
        syy += y[t] * y[t];
    }
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double vx = sxx / n - (sx / n) * (sx / n);
    const double vy = syy / n - (sy / n) * (sy / n);
    if (vx <= 0.0 || vy <= 0.0) return 0.0;
    return cov / std::sqrt(vx * vy);
}

/// Dense transcription of the adjacency construction and normalization.
Mat dense_adjacency(const Mat& series, double tau) {
    const int n = static_cast<int>(series.rows());
    Mat a = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double r = pearson_oracle(series.row(i), series.row(j));
            if (r > tau) a(i, j) = r;
        }
    }
    return a;
}

Mat dense_normalize(const Mat& a) {
    const int n = static_cast<int>(a.rows());
    const Mat a_tilde = a + Mat::Identity(n, n);
    Vec deg = a_tilde.rowwise().sum();
    Mat out(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out(i, j) = a_tilde(i, j) / std::sqrt(deg[i] * deg[j]);
        }
    }
    return out;
}

Mat dense_from_graph(const WildfireGraph& g) {
    Mat a = Mat::Zero(g.node_count, g.node_count);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        a(g.edge_i[e], g.edge_j[e]) = g.edge_w[e];
        a(g.edge_j[e], g.edge_i[e]) = g.edge_w[e];
    }
    return a;
}

Mat dense_from_normalized(const NormalizedAdjacency& a_hat) {
    Mat out = Mat::Zero(a_hat.node_count, a_hat.node_count);
    for (int i = 0; i < a_hat.node_count; ++i) {
        for (int p = a_hat.row_ptr[static_cast<std::size_t>(i)];
             p < a_hat.row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
            out(i, a_hat.col_idx[static_cast<std::size_t>(p)]) =
                a_hat.values[static_cast<std::size_t>(p)];
        }
    }
    return out;
}

Mat random_series(Rng& rng, int nodes, int months) {
    Mat m(nodes, months);
    for (int i = 0; i < nodes; ++i) {
        const double phase = rng.uniform(0.0, 12.0);
        const double amp = rng.uniform(0.3, 1.0);
        for (int t = 0; t < months; ++t) {
            m(i, t) = amp * std::sin(2.0 * M_PI * (t + phase) / 12.0) + 0.2 * rng.normal();
        }
    }
    return m;
}

}  // namespace

TEST_CASE("pearson_r matches closed forms and the brute-force oracle") {
    Vec x(4), y(4);
    x << 1, 2, 3, 4;
    CHECK(pearson_r(x, x) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pearson_r(x, (-x).eval()) == doctest::Approx(-1.0).epsilon(1e-14));

    y << 1, 3, 2, 5;
    CHECK(pearson_r(x, y) == doctest::Approx(pearson_oracle(x, y)).epsilon(1e-13));

    const Vec constant = Vec::Constant(4, 2.5);
    CHECK(pearson_r(x, constant) == 0.0);
    CHECK(pearson_r(constant, constant) == 0.0);

    Vec short_series(2);
    short_series << 1, 2;
    CHECK_THROWS_AS(pearson_r(x, short_series), ShapeError);
}

TEST_CASE("compute_threshold equals the sort-and-index oracle") {
    Rng rng(5);
    const Mat series = random_series(rng, 6, 36);

    // Rank selection must be exact: sorting the pipeline's own pair values
    // and indexing reproduces tau bitwise.
    std::vector<double> own = pairwise_correlations(series);
    std::sort(own.begin(), own.end());
    CHECK(compute_threshold(series, 0.5) == own[7]);  // median of 15
    CHECK(compute_threshold(series, 0.1) ==
          own[static_cast<std::size_t>(std::ceil(0.1 * 15.0)) - 1]);

    // Against a fully independent Pearson computation the values agree to
    // floating-point accuracy.
    std::vector<double> pool;
    for (int i = 0; i < 6; ++i) {
        for (int j = i + 1; j < 6; ++j) pool.push_back(pearson_oracle(series.row(i), series.row(j)));
    }
    std::sort(pool.begin(), pool.end());
    CHECK(compute_threshold(series, 0.5) == doctest::Approx(pool[7]).epsilon(1e-12));
    CHECK(compute_threshold(series, 0.1) ==
          doctest::Approx(pool[static_cast<std::size_t>(std::ceil(0.1 * 15.0)) - 1])
              .epsilon(1e-12));

    // All-identical series correlate to exactly 1.
    Mat same(4, 24);
    for (int i = 0; i < 4; ++i) {
        for (int t = 0; t < 24; ++t) same(i, t) = std::sin(0.7 * t);
    }
    CHECK(compute_threshold(same, 0.1) == 1.0);

    CHECK_THROWS_AS(compute_threshold(Mat::Zero(1, 10), 0.1), ShapeError);
    CHECK_THROWS_AS(compute_threshold(series, 0.0), RangeError);
}

TEST_CASE("build_adjacency applies the strict threshold") {
    // Nodes 0 and 1 identical, node 2 uncorrelated noise.
    Mat series(3, 40);
    Rng rng(17);
    for (int t = 0; t < 40; ++t) {
        const double s = std::sin(2.0 * M_PI * t / 12.0);
        series(0, t) = s;
        series(1, t) = s;
        series(2, t) = rng.normal();
    }
    const WildfireGraph g = build_adjacency(series, 0.9);
    REQUIRE(g.edge_count() == 1);
    CHECK(g.edge_i[0] == 0);
    CHECK(g.edge_j[0] == 1);
    CHECK(g.edge_w[0] == doctest::Approx(1.0).epsilon(1e-14));

    // tau = 1 excludes even perfect correlation (strict inequality).
    const WildfireGraph empty = build_adjacency(series, 1.0);
    CHECK(empty.edge_count() == 0);
}

TEST_CASE("sparse adjacency equals the dense brute-force construction") {
    Rng rng(23);
    const Mat series = random_series(rng, 10, 48);
    // A fixed threshold away from any sample value keeps edge membership
    // identical across the two computation paths.
    const double tau = 0.25;
    const WildfireGraph g = build_adjacency(series, tau);
    const Mat dense = dense_adjacency(series, tau);
    const Mat sparse = dense_from_graph(g);
    CHECK((sparse - dense).cwiseAbs().maxCoeff() < 1e-12);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        CHECK(g.edge_w[e] > tau);
        CHECK(g.edge_i[e] < g.edge_j[e]);
    }
}

TEST_CASE("normalize_adjacency matches the dense formula") {
    SUBCASE("isolated node gets diagonal 1") {
        WildfireGraph g;
        g.node_count = 1;
        const NormalizedAdjacency a = normalize_adjacency(g);
        CHECK(a.coeff(0, 0) == 1.0);
    }
    SUBCASE("two nodes with a unit edge") {
        WildfireGraph g;
        g.node_count = 2;
        g.edge_i = {0};
        g.edge_j = {1};
        g.edge_w = {1.0};
        const NormalizedAdjacency a = normalize_adjacency(g);
        CHECK(a.coeff(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(a.coeff(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(a.coeff(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(a.coeff(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("random 8-node graph within 1e-12 of the dense oracle") {
        Rng rng(31);
        const Mat series = random_series(rng, 8, 60);
        const WildfireGraph g = build_adjacency(series, 0.2);
        REQUIRE(g.edge_count() > 0);
        const NormalizedAdjacency a = normalize_adjacency(g);
        const Mat oracle = dense_normalize(dense_from_graph(g));
        CHECK((dense_from_normalized(a) - oracle).cwiseAbs().maxCoeff() < 1e-12);
        // Exact symmetry and positive entries.
        for (int i = 0; i < 8; ++i) {
            for (int j = 0; j < 8; ++j) {
                CHECK(a.coeff(i, j) == a.coeff(j, i));
            }
        }
        for (double v : a.values) CHECK(v > 0.0);
    }
}

TEST_CASE("sparse multiply agrees with the dense product") {
    Rng rng(37);
    const Mat series = random_series(rng, 9, 48);
    const NormalizedAdjacency a = normalize_adjacency(build_adjacency(series, 0.1));
    Mat x(9, 4);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    const Mat got = a.multiply(x);
    const Mat want = dense_from_normalized(a) * x;
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("raising the threshold never adds an edge") {
    Rng rng(41);
    const Mat series = random_series(rng, 8, 36);
    const WildfireGraph low = build_adjacency(series, 0.1);
    const WildfireGraph high = build_adjacency(series, 0.4);
    CHECK(high.edge_count() <= low.edge_count());
    // Every high-tau edge appears in the low-tau graph with the same weight.
    for (std::size_t e = 0; e < high.edge_count(); ++e) {
        bool found = false;
        for (std::size_t f = 0; f < low.edge_count(); ++f) {
            if (low.edge_i[f] == high.edge_i[e] && low.edge_j[f] == high.edge_j[e]) {
                CHECK(low.edge_w[f] == high.edge_w[e]);
                found = true;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("pairwise correlations are identical across worker counts") {
    Rng rng(43);
    const Mat series = random_series(rng, 11, 30);
    const auto seq = pairwise_correlations(series, 1);
    const auto par = pairwise_correlations(series, 4);
    REQUIRE(seq.size() == par.size());
    for (std::size_t i = 0; i < seq.size(); ++i) CHECK(seq[i] == par[i]);
}

TEST_CASE("graph file round-trips bit-exactly") {
    Rng rng(47);
    const Mat series = random_series(rng, 7, 40);
    const WildfireGraph g = build_adjacency(series, 0.15);
    REQUIRE(g.edge_count() > 0);
    const auto dir = std::filesystem::temp_directory_path() / "firecast_graph_io";
    std::filesystem::create_directories(dir);
    write_graph(dir / "g.txt", g);
    const WildfireGraph back = read_graph(dir / "g.txt");
    CHECK(back.node_count == g.node_count);
    CHECK(back.tau == g.tau);
    REQUIRE(back.edge_count() == g.edge_count());
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        CHECK(back.edge_i[e] == g.edge_i[e]);
        CHECK(back.edge_j[e] == g.edge_j[e]);
        CHECK(back.edge_w[e] == g.edge_w[e]);
    }
}
