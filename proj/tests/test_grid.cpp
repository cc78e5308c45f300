#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "firecast/grid.hpp"
#include "firecast/io.hpp"

#include <filesystem>

using namespace firecast;

namespace {

LandMask random_mask(Rng& rng, int lat, int lon) {
    std::vector<std::uint8_t> land(static_cast<std::size_t>(lat * lon));
    bool any = false;
    for (auto& b : land) {
        b = rng.uniform01() < 0.5 ? 1 : 0;
        any = any || b;
    }
    if (!any) land[0] = 1;
    return LandMask(GridSpec{lat, lon}, std::move(land));
}

}  // namespace

TEST_CASE("mask_snapshot selects land cells in row-major node order") {
    const LandMask full = LandMask::all_land(GridSpec{2, 2});
    Mat img(2, 2);
    img << 1, 2, 3, 4;
    const Vec v = mask_snapshot(img, full);
    REQUIRE(v.size() == 4);
    CHECK(v[0] == 1);
    CHECK(v[1] == 2);
    CHECK(v[2] == 3);
    CHECK(v[3] == 4);

    std::vector<std::uint8_t> center(9, 0);
    center[4] = 1;
    const LandMask single(GridSpec{3, 3}, center);
    Mat img3 = Mat::Zero(3, 3);
    img3(1, 1) = 5.0;
    const Vec w = mask_snapshot(img3, single);
    REQUIRE(w.size() == 1);
    CHECK(w[0] == 5.0);

    CHECK_THROWS_AS(mask_snapshot(Mat::Zero(2, 3), single), ShapeError);
}

TEST_CASE("inflate fills ocean with exact zeros and inverts mask_snapshot") {
    std::vector<std::uint8_t> center(9, 0);
    center[4] = 1;
    const LandMask single(GridSpec{3, 3}, center);
    Vec v(1);
    v << 5.0;
    const Mat img = inflate(v, single);
    CHECK(img(1, 1) == 5.0);
    CHECK(img.sum() == 5.0);

    const LandMask full = LandMask::all_land(GridSpec{2, 2});
    Mat src(2, 2);
    src << 0.5, -1.25, 3.0, 7.5;
    CHECK(inflate(mask_snapshot(src, full), full) == src);

    CHECK_THROWS_AS(inflate(Vec::Zero(3), single), ShapeError);
}

TEST_CASE("mask/inflate round-trip holds exactly on random masks") {
    Rng rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        const LandMask mask = random_mask(rng, 4 + static_cast<int>(rng.below(5)),
                                          3 + static_cast<int>(rng.below(6)));
        Vec v(mask.node_count());
        for (int i = 0; i < v.size(); ++i) v[i] = rng.normal();
        const Mat img = inflate(v, mask);
        CHECK(mask_snapshot(img, mask) == v);
        // Ocean cells are exactly zero.
        double ocean_sum = 0.0;
        for (int r = 0; r < mask.spec().lat_count; ++r) {
            for (int c = 0; c < mask.spec().lon_count; ++c) {
                if (!mask.is_land(r, c)) ocean_sum += std::abs(img(r, c));
            }
        }
        CHECK(ocean_sum == 0.0);
    }
}

TEST_CASE("cell/node bijection is mutually inverse") {
    Rng rng(7);
    const LandMask mask = random_mask(rng, 6, 5);
    for (int k = 0; k < mask.node_count(); ++k) {
        const auto [r, c] = mask.node_to_cell(k);
        REQUIRE(mask.cell_to_node(r, c).has_value());
        CHECK(*mask.cell_to_node(r, c) == k);
    }
    int count = 0;
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 5; ++c) {
            if (mask.is_land(r, c)) ++count;
        }
    }
    CHECK(count == mask.node_count());
}

TEST_CASE("normalize maps the series range onto [0, 1]") {
    SnapshotSeries s;
    s.spec = GridSpec{1, 3};
    s.variable = "T";
    s.time_len = 1;
    s.data = {2.0, 4.0, 6.0};
    const auto [out, params] = normalize(s);
    CHECK(params.min == 2.0);
    CHECK(params.max == 6.0);
    CHECK(out.data[0] == 0.0);
    CHECK(out.data[1] == 0.5);
    CHECK(out.data[2] == 1.0);
}

TEST_CASE("constant series normalizes to zero instead of NaN") {
    SnapshotSeries s;
    s.spec = GridSpec{1, 2};
    s.variable = "T";
    s.time_len = 1;
    s.data = {3.0, 3.0};
    const auto [out, params] = normalize(s);
    CHECK(params.min == 3.0);
    CHECK(params.max == 3.0);
    CHECK(out.data[0] == 0.0);
    CHECK(out.data[1] == 0.0);
    const SnapshotSeries back = denormalize(out, params);
    CHECK(back.data[0] == 3.0);
    CHECK(back.data[1] == 3.0);
}

TEST_CASE("normalize/denormalize round-trips within 1e-12 relative") {
    Rng rng(11);
    SnapshotSeries s;
    s.spec = GridSpec{3, 4};
    s.variable = "R";
    s.time_len = 5;
    s.data.resize(60);
    for (auto& x : s.data) x = rng.uniform(-30.0, 80.0);
    const auto [out, params] = normalize(s);
    CHECK(*std::min_element(out.data.begin(), out.data.end()) == 0.0);
    CHECK(*std::max_element(out.data.begin(), out.data.end()) == 1.0);
    const SnapshotSeries back = denormalize(out, params);
    for (std::size_t i = 0; i < s.data.size(); ++i) {
        CHECK(back.data[i] == doctest::Approx(s.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("build_feature_tensor stacks [T, Hum, R, L, P] in order") {
    const int n = 4, months = 30;
    Rng rng(3);
    std::array<Mat, kClimateFeatureCount> climate;
    for (auto& c : climate) {
        c = Mat(n, months);
        for (int i = 0; i < n; ++i) {
            for (int t = 0; t < months; ++t) c(i, t) = rng.uniform01();
        }
    }
    Mat fire(n, months);
    for (int i = 0; i < n; ++i) {
        for (int t = 0; t < months; ++t) fire(i, t) = rng.uniform01();
    }

    const int t_start = 17, window = 12;
    const FeatureTensor x = build_feature_tensor(climate, fire, t_start, window);
    REQUIRE(x.nodes() == n);
    REQUIRE(x.steps() == window);
    // Direct index oracle against the source series.
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < window; ++k) {
            const int t = t_start - window + k;
            CHECK(x.at(i, kTemperature, k) == climate[0](i, t));
            CHECK(x.at(i, kHumidity, k) == climate[1](i, t));
            CHECK(x.at(i, kRainfall, k) == climate[2](i, t));
            CHECK(x.at(i, kLightning, k) == climate[3](i, t));
            CHECK(x.at(i, kBurntArea, k) == fire(i, t));
        }
    }

    // Window of one equals the stacked snapshot at t_start - 1.
    const FeatureTensor one = build_feature_tensor(climate, fire, t_start, 1);
    const Mat step = one.step_matrix(0);
    for (int i = 0; i < n; ++i) {
        CHECK(step(i, kTemperature) == climate[0](i, t_start - 1));
        CHECK(step(i, kBurntArea) == fire(i, t_start - 1));
    }

    CHECK_THROWS_AS(build_feature_tensor(climate, fire, 5, 12), RangeError);
    CHECK_THROWS_AS(build_feature_tensor(climate, fire, months + 1, 12), RangeError);
}

TEST_CASE("clip_rows drops latitude rows symmetrically") {
    SnapshotSeries s;
    s.spec = GridSpec{5, 2};
    s.variable = "T";
    s.time_len = 2;
    s.data.resize(20);
    for (std::size_t i = 0; i < s.data.size(); ++i) s.data[i] = static_cast<double>(i);
    const SnapshotSeries clipped = clip_rows(s, 1, 2);
    REQUIRE(clipped.spec.lat_count == 2);
    CHECK(clipped.at(0, 0, 0) == s.at(0, 1, 0));
    CHECK(clipped.at(1, 1, 1) == s.at(1, 2, 1));
    CHECK_THROWS_AS(clip_rows(s, 3, 2), RangeError);
}

TEST_CASE("series and mask files round-trip through descriptor + payload") {
    const auto dir = std::filesystem::temp_directory_path() / "firecast_grid_io";
    std::filesystem::create_directories(dir);

    SnapshotSeries s;
    s.spec = GridSpec{3, 4};
    s.variable = "Hum";
    s.time_len = 2;
    s.data.resize(24);
    for (std::size_t i = 0; i < s.data.size(); ++i) {
        s.data[i] = static_cast<double>(i) / 16.0;  // exactly representable in f32
    }
    write_series(dir, "hum", s);
    const SnapshotSeries r = read_series(dir, "hum");
    CHECK(r.variable == "Hum");
    CHECK(r.spec == s.spec);
    CHECK(r.time_len == 2);
    CHECK(r.data == s.data);

    Rng rng(9);
    const LandMask mask = random_mask(rng, 4, 6);
    write_mask(dir, "mask", mask);
    const LandMask back = read_mask(dir, "mask");
    CHECK(back.node_count() == mask.node_count());
    CHECK(back.land_bytes() == mask.land_bytes());
}

TEST_CASE("CSV import reconstructs a small grid series") {
    const auto dir = std::filesystem::temp_directory_path() / "firecast_grid_csv";
    std::filesystem::create_directories(dir);
    const auto path = dir / "series.csv";

    SnapshotSeries s;
    s.spec = GridSpec{2, 3};
    s.variable = "P";
    s.time_len = 2;
    s.data = {0.0, 0.5, 1.0, 0.25, 0.75, 0.125, 1.0, 0.0, 0.5, 0.25, 0.125, 0.75};
    write_csv_series(path, s);
    const SnapshotSeries r = read_csv_series(path, "P");
    CHECK(r.spec == s.spec);
    CHECK(r.time_len == s.time_len);
    CHECK(r.data == s.data);
}
