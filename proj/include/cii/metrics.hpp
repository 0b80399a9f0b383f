#pragma once

#include "cii/uncertain.hpp"

#include <vector>

namespace cii {

/// True when the observation lies inside the prediction's range interval
/// (an interval observation must be fully inside).
bool covers(const PBox& pred, const UncertainNumber& obs);

/// Empirical coverage rate xi over paired predictions and observations.
double coverage(const std::vector<PBox>& preds, const std::vector<UncertainNumber>& obs);

struct BinCoverage {
    double bin_lo = 0.0;
    double bin_hi = 0.0;
    double xi = 0.0;  // NaN for empty bins
    std::size_t count = 0;
};

/// Coverage stratified over equal-width bins of the distance score.
std::vector<BinCoverage> stratified_coverage(const std::vector<PBox>& preds,
                                             const std::vector<UncertainNumber>& obs,
                                             const std::vector<double>& rs, int n_bins);

/// Band area divided by the 5%-95% interquantile response range.
double quantile_scaled_breadth(const PBox& p, double q05, double q95);

/// Empirical quantile with linear interpolation between order statistics.
double empirical_quantile(std::vector<double> sample, double q);

/// Exact area between a p-box on [0,1] and the uniform CDF, using the
/// non-overlap band distance (zero when the band contains the uniform).
double area_vs_uniform(const PBox& box);

struct UPoolResult {
    PBox pooled;        // empirical p-box of the interval-valued u-scores
    double d_p = 0.0;   // band-vs-uniform calibration area
    double d_p_band = 0.0;  // literal band-width integral, for transparency
};

/// U-pooling calibration: each observation maps to the interval
/// [lower(y), upper(y)] through its predicted p-box; pooling the intervals
/// gives an empirical p-box on [0,1] compared against uniformity.
UPoolResult u_pool(const std::vector<PBox>& preds, const std::vector<double>& obs);

}  // namespace cii
