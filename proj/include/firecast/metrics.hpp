#pragma once

#include "firecast/common.hpp"

#include <vector>

namespace firecast {

/**
 * The four evaluation scores over one prediction/truth pair. PSNR is
 * undefined on a perfect prediction; `psnr_infinite` flags that case and
 * `psnr` then holds +inf.
 */
struct MetricReport {
    double mse = 0.0;
    double rrmse = 0.0;
    double ssim = 0.0;
    double psnr = 0.0;
    bool psnr_infinite = false;
};

/// Mean squared error over all entries of two equal-shape value sequences.
double metric_mse(const std::vector<double>& pred, const std::vector<double>& truth);

/// sqrt(MSE) divided by the mean of the ground truth; the mean must be
/// nonzero.
double metric_rrmse(const std::vector<double>& pred, const std::vector<double>& truth);

/// Whole-sequence structural similarity: single mean/variance/covariance
/// statistics (population form), c1 = (0.01 L)^2, c2 = (0.03 L)^2 with
/// L = 1 for normalized data.
double metric_ssim(const std::vector<double>& pred, const std::vector<double>& truth);

/// 10 log10(MAX^2 / MSE) with MAX the maximum of the ground truth. Throws
/// RangeError when MSE is zero; use `compute_metrics` for the flagged form.
double metric_psnr(const std::vector<double>& pred, const std::vector<double>& truth);

MetricReport compute_metrics(const std::vector<double>& pred, const std::vector<double>& truth);

/// Splits two time-major sequences spanning `total_months` into equal
/// 12-month blocks and scores each block independently. The month count
/// must divide evenly into years and the value count into months.
std::vector<MetricReport> yearly_report(const std::vector<double>& pred,
                                        const std::vector<double>& truth, int total_months,
                                        int months_per_year = 12);

}  // namespace firecast
