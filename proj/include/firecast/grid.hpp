#pragma once

#include "firecast/common.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace firecast {

/// Input feature channels, in the fixed order used everywhere: a feature
/// tensor row is [temperature, humidity, rainfall, lightning, burnt_area].
enum Feature : int {
    kTemperature = 0,
    kHumidity = 1,
    kRainfall = 2,
    kLightning = 3,
    kBurntArea = 4,
};
inline constexpr int kFeatureCount = 5;
inline constexpr int kClimateFeatureCount = 4;
extern const std::array<std::string, kFeatureCount> kFeatureNames;

struct GridSpec {
    int lat_count = 0;  // rows
    int lon_count = 0;  // columns

    int cell_count() const { return lat_count * lon_count; }
    bool valid_cell(int row, int col) const {
        return row >= 0 && row < lat_count && col >= 0 && col < lon_count;
    }
    bool operator==(const GridSpec&) const = default;
};

/**
 * Boolean land mask over a grid plus the bijection between land cells and
 * graph nodes. Node order is the row-major scan of the mask, which fixes
 * node indices deterministically for everything downstream.
 */
class LandMask {
public:
    LandMask() = default;
    LandMask(GridSpec spec, std::vector<std::uint8_t> is_land);

    const GridSpec& spec() const { return spec_; }
    int node_count() const { return static_cast<int>(node_to_cell_.size()); }
    bool is_land(int row, int col) const {
        return is_land_[static_cast<std::size_t>(row * spec_.lon_count + col)] != 0;
    }
    const std::vector<std::uint8_t>& land_bytes() const { return is_land_; }

    std::pair<int, int> node_to_cell(int node) const {
        return node_to_cell_[static_cast<std::size_t>(node)];
    }
    std::optional<int> cell_to_node(int row, int col) const {
        const int v = cell_to_node_[static_cast<std::size_t>(row * spec_.lon_count + col)];
        if (v < 0) return std::nullopt;
        return v;
    }

    static LandMask all_land(GridSpec spec);

private:
    GridSpec spec_;
    std::vector<std::uint8_t> is_land_;
    std::vector<std::pair<int, int>> node_to_cell_;
    std::vector<int> cell_to_node_;  // -1 for ocean cells
};

/**
 * A time series of 2-D snapshots for one variable. Images are stored
 * time-major; `image(t)` views one lat x lon frame.
 */
struct SnapshotSeries {
    GridSpec spec;
    std::string variable;  // one of T, Hum, R, L, P (P may carry a member suffix)
    int time_len = 0;
    std::vector<double> data;  // time-major, then row-major per image

    double at(int t, int row, int col) const {
        return data[static_cast<std::size_t>((t * spec.lat_count + row) * spec.lon_count + col)];
    }
    double& at(int t, int row, int col) {
        return data[static_cast<std::size_t>((t * spec.lat_count + row) * spec.lon_count + col)];
    }
    ConstMatMap image(int t) const {
        return ConstMatMap(data.data() + static_cast<std::size_t>(t) * spec.cell_count(),
                           spec.lat_count, spec.lon_count);
    }
    MatMap image(int t) {
        return MatMap(data.data() + static_cast<std::size_t>(t) * spec.cell_count(),
                      spec.lat_count, spec.lon_count);
    }
};

/// Per-variable min-max statistics; normalization maps [min, max] onto [0, 1].
struct NormalizationParams {
    double min = 0.0;
    double max = 0.0;
};

enum class MemberRole { Train, Validation, Test };

/**
 * One simulation ensemble member: its burnt-area series as a node-column
 * per month matrix. A Validation member still contributes its head months
 * to training windows; only its tail is held out.
 */
struct EnsembleMember {
    int id = 0;  // 1-based
    MemberRole role = MemberRole::Train;
    Mat fire;  // node_count x time_len
};

/// Selects land-cell values of one image into a node-column vector
/// (row-major node order).
Vec mask_snapshot(const Mat& image, const LandMask& mask);

/// Inverse of mask_snapshot: land cells carry vec values, ocean cells are
/// exactly zero.
Mat inflate(const Vec& vec, const LandMask& mask);

/// Applies mask_snapshot to every frame; returns node_count x time_len.
Mat mask_series(const SnapshotSeries& series, const LandMask& mask);

/// Min/max over all times and cells of the series.
NormalizationParams compute_normalization(const SnapshotSeries& series);
/// Pooled min/max over several node-series matrices of the same variable.
NormalizationParams compute_normalization(const std::vector<const Mat*>& series);

/// (x - min) / (max - min) elementwise; a constant series (max == min) maps
/// to all zeros.
std::pair<SnapshotSeries, NormalizationParams> normalize(const SnapshotSeries& series);
void apply_normalization(SnapshotSeries& series, const NormalizationParams& params);
void apply_normalization(Mat& node_series, const NormalizationParams& params);
SnapshotSeries denormalize(const SnapshotSeries& series, const NormalizationParams& params);

/// Drops `top` leading and `bottom` trailing latitude rows from every frame.
/// Used to align wider meteorological grids with the fire grid.
SnapshotSeries clip_rows(const SnapshotSeries& series, int top, int bottom);

/**
 * Node x feature x time input block. Feature order is fixed:
 * [T, Hum, R, L, P]. Flat layout is node-major, then feature, then step.
 */
class FeatureTensor {
public:
    FeatureTensor() = default;
    FeatureTensor(int nodes, int steps)
        : nodes_(nodes), steps_(steps),
          data_(static_cast<std::size_t>(nodes) * kFeatureCount * steps, 0.0) {}

    int nodes() const { return nodes_; }
    int steps() const { return steps_; }
    double at(int node, int feature, int step) const {
        return data_[index(node, feature, step)];
    }
    double& at(int node, int feature, int step) { return data_[index(node, feature, step)]; }

    /// One time step as a node x feature matrix (copied).
    Mat step_matrix(int step) const;

    const std::vector<double>& flat() const { return data_; }
    std::vector<double>& flat() { return data_; }

private:
    std::size_t index(int node, int feature, int step) const {
        return (static_cast<std::size_t>(node) * kFeatureCount + static_cast<std::size_t>(feature)) *
                   static_cast<std::size_t>(steps_) +
               static_cast<std::size_t>(step);
    }
    int nodes_ = 0;
    int steps_ = 0;
    std::vector<double> data_;
};

/**
 * Stacks the four climate node-series and one fire node-series into the
 * input tensor covering months [t_start - window, t_start).
 */
FeatureTensor build_feature_tensor(const std::array<Mat, kClimateFeatureCount>& climate,
                                   const Mat& fire, int t_start, int window);

}  // namespace firecast
