#include "firecast/grid.hpp"

#include <algorithm>
#include <limits>

namespace firecast {

const std::array<std::string, kFeatureCount> kFeatureNames = {"T", "Hum", "R", "L", "P"};

LandMask::LandMask(GridSpec spec, std::vector<std::uint8_t> is_land)
    : spec_(spec), is_land_(std::move(is_land)) {
    if (spec_.lat_count < 1 || spec_.lon_count < 1) {
        throw ShapeError("LandMask: grid must be at least 1x1");
    }
    if (static_cast<int>(is_land_.size()) != spec_.cell_count()) {
        throw ShapeError("LandMask: mask byte count does not match grid");
    }
    cell_to_node_.assign(is_land_.size(), -1);
    for (int row = 0; row < spec_.lat_count; ++row) {
        for (int col = 0; col < spec_.lon_count; ++col) {
            const std::size_t cell = static_cast<std::size_t>(row * spec_.lon_count + col);
            if (is_land_[cell]) {
                cell_to_node_[cell] = static_cast<int>(node_to_cell_.size());
                node_to_cell_.emplace_back(row, col);
            }
        }
    }
}

LandMask LandMask::all_land(GridSpec spec) {
    return LandMask(spec, std::vector<std::uint8_t>(static_cast<std::size_t>(spec.cell_count()), 1));
}

Vec mask_snapshot(const Mat& image, const LandMask& mask) {
    if (image.rows() != mask.spec().lat_count || image.cols() != mask.spec().lon_count) {
        throw ShapeError("mask_snapshot: image dimensions do not match mask grid");
    }
    Vec out(mask.node_count());
    for (int k = 0; k < mask.node_count(); ++k) {
        const auto [row, col] = mask.node_to_cell(k);
        out[k] = image(row, col);
    }
    return out;
}

Mat inflate(const Vec& vec, const LandMask& mask) {
    if (vec.size() != mask.node_count()) {
        throw ShapeError("inflate: vector length does not match mask node count");
    }
    Mat out = Mat::Zero(mask.spec().lat_count, mask.spec().lon_count);
    for (int k = 0; k < mask.node_count(); ++k) {
        const auto [row, col] = mask.node_to_cell(k);
        out(row, col) = vec[k];
    }
    return out;
}

Mat mask_series(const SnapshotSeries& series, const LandMask& mask) {
    if (series.spec != mask.spec()) {
        throw ShapeError("mask_series: series grid does not match mask grid");
    }
    Mat out(mask.node_count(), series.time_len);
    for (int t = 0; t < series.time_len; ++t) {
        for (int k = 0; k < mask.node_count(); ++k) {
            const auto [row, col] = mask.node_to_cell(k);
            out(k, t) = series.at(t, row, col);
        }
    }
    return out;
}

NormalizationParams compute_normalization(const SnapshotSeries& series) {
    if (series.data.empty()) {
        throw ShapeError("compute_normalization: empty series");
    }
    NormalizationParams p;
    p.min = *std::min_element(series.data.begin(), series.data.end());
    p.max = *std::max_element(series.data.begin(), series.data.end());
    return p;
}

NormalizationParams compute_normalization(const std::vector<const Mat*>& series) {
    NormalizationParams p{std::numeric_limits<double>::infinity(),
                          -std::numeric_limits<double>::infinity()};
    std::size_t total = 0;
    for (const Mat* m : series) {
        if (m->size() == 0) continue;
        total += static_cast<std::size_t>(m->size());
        p.min = std::min(p.min, m->minCoeff());
        p.max = std::max(p.max, m->maxCoeff());
    }
    if (total == 0) {
        throw ShapeError("compute_normalization: empty pool");
    }
    return p;
}

namespace {

inline double normalize_value(double x, const NormalizationParams& p) {
    // Constant series map to zero rather than NaN.
    if (p.max == p.min) return 0.0;
    return (x - p.min) / (p.max - p.min);
}

}  // namespace

std::pair<SnapshotSeries, NormalizationParams> normalize(const SnapshotSeries& series) {
    const NormalizationParams params = compute_normalization(series);
    SnapshotSeries out = series;
    apply_normalization(out, params);
    return {std::move(out), params};
}

void apply_normalization(SnapshotSeries& series, const NormalizationParams& params) {
    for (double& x : series.data) x = normalize_value(x, params);
}

void apply_normalization(Mat& node_series, const NormalizationParams& params) {
    for (Eigen::Index i = 0; i < node_series.size(); ++i) {
        node_series.data()[i] = normalize_value(node_series.data()[i], params);
    }
}

SnapshotSeries denormalize(const SnapshotSeries& series, const NormalizationParams& params) {
    SnapshotSeries out = series;
    for (double& x : out.data) x = x * (params.max - params.min) + params.min;
    return out;
}

SnapshotSeries clip_rows(const SnapshotSeries& series, int top, int bottom) {
    if (top < 0 || bottom < 0 || top + bottom >= series.spec.lat_count) {
        throw RangeError("clip_rows: offsets leave no rows");
    }
    SnapshotSeries out;
    out.spec = GridSpec{series.spec.lat_count - top - bottom, series.spec.lon_count};
    out.variable = series.variable;
    out.time_len = series.time_len;
    out.data.resize(static_cast<std::size_t>(out.time_len) * out.spec.cell_count());
    for (int t = 0; t < out.time_len; ++t) {
        for (int row = 0; row < out.spec.lat_count; ++row) {
            for (int col = 0; col < out.spec.lon_count; ++col) {
                out.at(t, row, col) = series.at(t, row + top, col);
            }
        }
    }
    return out;
}

Mat FeatureTensor::step_matrix(int step) const {
    Mat out(nodes_, kFeatureCount);
    for (int i = 0; i < nodes_; ++i) {
        for (int f = 0; f < kFeatureCount; ++f) {
            out(i, f) = at(i, f, step);
        }
    }
    return out;
}

FeatureTensor build_feature_tensor(const std::array<Mat, kClimateFeatureCount>& climate,
                                   const Mat& fire, int t_start, int window) {
    const Eigen::Index nodes = fire.rows();
    for (const Mat& c : climate) {
        if (c.rows() != nodes) {
            throw ShapeError("build_feature_tensor: climate node count differs from fire");
        }
    }
    if (window < 1) throw RangeError("build_feature_tensor: window must be >= 1");
    if (t_start - window < 0 || t_start > fire.cols()) {
        throw RangeError("build_feature_tensor: window outside fire series bounds");
    }
    for (const Mat& c : climate) {
        if (t_start > c.cols()) {
            throw RangeError("build_feature_tensor: window outside climate series bounds");
        }
    }
    FeatureTensor x(static_cast<int>(nodes), window);
    for (int i = 0; i < nodes; ++i) {
        for (int k = 0; k < window; ++k) {
            const int t = t_start - window + k;
            for (int f = 0; f < kClimateFeatureCount; ++f) {
                x.at(i, f, k) = climate[static_cast<std::size_t>(f)](i, t);
            }
            x.at(i, kBurntArea, k) = fire(i, t);
        }
    }
    return x;
}

}  // namespace firecast
