#include "firecast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace firecast {

namespace {

constexpr double kSsimL = 1.0;  // data range after normalization
constexpr double kSsimC1 = (0.01 * kSsimL) * (0.01 * kSsimL);
constexpr double kSsimC2 = (0.03 * kSsimL) * (0.03 * kSsimL);

void check_shapes(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw ShapeError("metrics: sequence sizes differ");
    if (pred.empty()) throw ShapeError("metrics: empty sequences");
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

double metric_mse(const std::vector<double>& pred, const std::vector<double>& truth) {
    check_shapes(pred, truth);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

double metric_rrmse(const std::vector<double>& pred, const std::vector<double>& truth) {
    const double mse = metric_mse(pred, truth);
    const double mean = mean_of(truth);
    if (mean == 0.0) throw RangeError("rrmse: ground-truth mean is zero");
    return std::sqrt(mse) / mean;
}

double metric_ssim(const std::vector<double>& pred, const std::vector<double>& truth) {
    check_shapes(pred, truth);
    const double n = static_cast<double>(pred.size());
    const double mu_p = mean_of(pred);
    const double mu_t = mean_of(truth);
    double var_p = 0.0, var_t = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double dp = pred[i] - mu_p;
        const double dt = truth[i] - mu_t;
        var_p += dp * dp;
        var_t += dt * dt;
        cov += dp * dt;
    }
    var_p /= n;
    var_t /= n;
    cov /= n;
    return ((2.0 * mu_t * mu_p + kSsimC1) * (2.0 * cov + kSsimC2)) /
           ((mu_t * mu_t + mu_p * mu_p + kSsimC1) * (var_t + var_p + kSsimC2));
}

double metric_psnr(const std::vector<double>& pred, const std::vector<double>& truth) {
    const double mse = metric_mse(pred, truth);
    if (mse == 0.0) throw RangeError("psnr: undefined for zero MSE");
    const double max_t = *std::max_element(truth.begin(), truth.end());
    return 10.0 * std::log10(max_t * max_t / mse);
}

MetricReport compute_metrics(const std::vector<double>& pred, const std::vector<double>& truth) {
    MetricReport r;
    r.mse = metric_mse(pred, truth);
    r.rrmse = metric_rrmse(pred, truth);
    r.ssim = metric_ssim(pred, truth);
    if (r.mse == 0.0) {
        r.psnr_infinite = true;
        r.psnr = std::numeric_limits<double>::infinity();
    } else {
        r.psnr = metric_psnr(pred, truth);
    }
    return r;
}

std::vector<MetricReport> yearly_report(const std::vector<double>& pred,
                                        const std::vector<double>& truth, int total_months,
                                        int months_per_year) {
    check_shapes(pred, truth);
    if (months_per_year < 1 || total_months < 1) {
        throw RangeError("yearly_report: month counts must be >= 1");
    }
    if (total_months % months_per_year != 0) {
        throw RangeError("yearly_report: " + std::to_string(total_months) +
                         " months do not divide into " + std::to_string(months_per_year) +
                         "-month years");
    }
    if (pred.size() % static_cast<std::size_t>(total_months) != 0) {
        throw RangeError("yearly_report: value count not divisible by month count");
    }
    const std::size_t per_month = pred.size() / static_cast<std::size_t>(total_months);
    const std::size_t per_year = per_month * static_cast<std::size_t>(months_per_year);
    const int years = total_months / months_per_year;
    std::vector<MetricReport> out;
    out.reserve(static_cast<std::size_t>(years));
    for (int y = 0; y < years; ++y) {
        const auto lo = static_cast<std::ptrdiff_t>(per_year * static_cast<std::size_t>(y));
        const auto hi = lo + static_cast<std::ptrdiff_t>(per_year);
        const std::vector<double> p(pred.begin() + lo, pred.begin() + hi);
        const std::vector<double> t(truth.begin() + lo, truth.begin() + hi);
        out.push_back(compute_metrics(p, t));
    }
    return out;
}

}  // namespace firecast
