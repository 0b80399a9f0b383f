#include "cii/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cii {

namespace {

Interval observation_interval(const UncertainNumber& obs) {
    if (const Scalar* s = std::get_if<Scalar>(&obs)) {
        return Interval(s->value, s->value);
    }
    if (const Interval* iv = std::get_if<Interval>(&obs)) {
        return *iv;
    }
    return range_interval(to_pbox(obs));
}

}  // namespace

bool covers(const PBox& pred, const UncertainNumber& obs) {
    return range_interval(pred).contains(observation_interval(obs));
}

double coverage(const std::vector<PBox>& preds, const std::vector<UncertainNumber>& obs) {
    if (preds.size() != obs.size()) throw std::invalid_argument("length mismatch");
    if (preds.empty()) throw std::invalid_argument("empty evaluation set");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (covers(preds[i], obs[i])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(preds.size());
}

std::vector<BinCoverage> stratified_coverage(const std::vector<PBox>& preds,
                                             const std::vector<UncertainNumber>& obs,
                                             const std::vector<double>& rs, int n_bins) {
    if (preds.size() != obs.size() || preds.size() != rs.size()) {
        throw std::invalid_argument("length mismatch");
    }
    if (preds.empty()) throw std::invalid_argument("empty evaluation set");
    if (n_bins < 1) throw std::invalid_argument("need at least one bin");

    const auto [mn_it, mx_it] = std::minmax_element(rs.begin(), rs.end());
    const double r_min = *mn_it;
    const double width = std::max(*mx_it - r_min, 1e-300);

    std::vector<BinCoverage> bins(static_cast<std::size_t>(n_bins));
    std::vector<std::size_t> hits(bins.size(), 0);
    for (std::size_t b = 0; b < bins.size(); ++b) {
        bins[b].bin_lo = r_min + width * double(b) / n_bins;
        bins[b].bin_hi = r_min + width * double(b + 1) / n_bins;
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
        auto b = static_cast<std::size_t>(
            std::min<double>(std::floor((rs[i] - r_min) / width * n_bins), n_bins - 1));
        ++bins[b].count;
        if (covers(preds[i], obs[i])) ++hits[b];
    }
    for (std::size_t b = 0; b < bins.size(); ++b) {
        bins[b].xi = bins[b].count == 0
                         ? std::numeric_limits<double>::quiet_NaN()
                         : double(hits[b]) / double(bins[b].count);
    }
    return bins;
}

double quantile_scaled_breadth(const PBox& p, double q05, double q95) {
    if (!(q95 > q05)) throw std::invalid_argument("degenerate response scale");
    return breadth(p) / (q95 - q05);
}

double empirical_quantile(std::vector<double> sample, double q) {
    if (sample.empty()) throw std::invalid_argument("empty sample");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile level out of range");
    std::sort(sample.begin(), sample.end());
    const double pos = q * double(sample.size() - 1);
    const auto k = static_cast<std::size_t>(std::floor(pos));
    if (k + 1 >= sample.size()) return sample.back();
    const double frac = pos - double(k);
    return sample[k] * (1.0 - frac) + sample[k + 1] * frac;
}

double area_vs_uniform(const PBox& box) {
    // Segment endpoints: band breakpoints clipped to [0,1], plus 0 and 1.
    std::vector<double> grid{0.0, 1.0};
    for (const StepCdf* f : {&box.lower, &box.upper}) {
        for (double x : f->breakpoints()) {
            if (x > 0.0 && x < 1.0) grid.push_back(x);
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    auto ramp_sq = [](double v) { return v > 0.0 ? v * v : 0.0; };
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double s = grid[k], e = grid[k + 1];
        const double up = box.upper.evaluate(s);
        const double lo = box.lower.evaluate(s);
        // h(u) = max(0, u - up) + max(0, lo - u) on [s, e); the two terms
        // cannot both be positive since up >= lo.
        total += 0.5 * (ramp_sq(e - up) - ramp_sq(s - up));
        total += 0.5 * (ramp_sq(lo - s) - ramp_sq(lo - e));
    }
    return total;
}

UPoolResult u_pool(const std::vector<PBox>& preds, const std::vector<double>& obs) {
    if (preds.size() != obs.size()) throw std::invalid_argument("length mismatch");
    if (preds.empty()) throw std::invalid_argument("empty evaluation set");

    std::vector<double> u_lo(preds.size()), u_hi(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        u_lo[i] = std::clamp(preds[i].lower.evaluate(obs[i]), 0.0, 1.0);
        u_hi[i] = std::clamp(preds[i].upper.evaluate(obs[i]), 0.0, 1.0);
    }
    // Pooled lower bound counts the upper u-scores; pooled upper bound the
    // lower u-scores.
    UPoolResult res;
    res.pooled = PBox(empirical_cdf(u_hi), empirical_cdf(u_lo));
    res.d_p = area_vs_uniform(res.pooled);
    res.d_p_band = breadth(res.pooled);
    return res;
}

}  // namespace cii
