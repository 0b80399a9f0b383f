#include "cii/uncertain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cii {

namespace {

void check_finite(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument(std::string("non-finite ") + what);
        }
    }
}

// Levels of f at every point of a sorted grid, via one two-pointer sweep
// instead of a binary search per point.
std::vector<double> levels_on_grid(const StepCdf& f, const std::vector<double>& grid) {
    const auto& xs = f.breakpoints();
    const auto& ps = f.levels();
    std::vector<double> out(grid.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        while (k < xs.size() && xs[k] <= grid[i]) ++k;
        out[i] = k == 0 ? 0.0 : ps[k - 1];
    }
    return out;
}

}  // namespace

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo <= hi)) {
        throw std::invalid_argument("interval requires lo <= hi");
    }
}

StepCdf::StepCdf(std::vector<double> breakpoints, std::vector<double> levels)
    : xs_(std::move(breakpoints)), ps_(std::move(levels)) {
    if (xs_.empty() || xs_.size() != ps_.size()) {
        throw std::invalid_argument("step cdf needs matching non-empty breakpoints/levels");
    }
    check_finite(xs_, "breakpoint");
    check_finite(ps_, "level");
    for (std::size_t i = 1; i < xs_.size(); ++i) {
        if (!(xs_[i] > xs_[i - 1])) {
            throw std::invalid_argument("breakpoints must be strictly increasing");
        }
        if (ps_[i] < ps_[i - 1] - 1e-12) {
            throw std::invalid_argument("levels must be nondecreasing");
        }
        ps_[i] = std::max(ps_[i], ps_[i - 1]);
    }
    for (double& p : ps_) {
        if (p < -1e-12 || p > 1.0 + 1e-12) {
            throw std::invalid_argument("levels must lie in [0,1]");
        }
        p = std::clamp(p, 0.0, 1.0);
    }
}

double StepCdf::evaluate(double x) const {
    // Index of the last breakpoint <= x.
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    if (it == xs_.begin()) return 0.0;
    return ps_[static_cast<std::size_t>(it - xs_.begin()) - 1];
}

bool StepCdf::is_proper(double tol) const {
    return ps_.back() >= 1.0 - tol;
}

StepCdf StepCdf::dirac(double v) {
    return StepCdf({v}, {1.0});
}

PBox::PBox(StepCdf lower_, StepCdf upper_)
    : lower(std::move(lower_)), upper(std::move(upper_)) {
    const std::vector<double> grid = merge_breakpoints({&lower, &upper});
    const std::vector<double> lo = levels_on_grid(lower, grid);
    const std::vector<double> hi = levels_on_grid(upper, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (hi[k] < lo[k] - 1e-9) {
            throw std::invalid_argument("p-box requires upper >= lower everywhere");
        }
    }
}

bool PBox::is_precise(double tol) const {
    return breadth(*this) <= tol;
}

PBox to_pbox(const UncertainNumber& u) {
    struct Visitor {
        PBox operator()(const Scalar& s) const {
            StepCdf step = StepCdf::dirac(s.value);
            return PBox(step, step);
        }
        PBox operator()(const Interval& iv) const {
            // Vacuous-within-interval p-box: all mass somewhere in [lo, hi].
            if (iv.lo == iv.hi) {
                StepCdf step = StepCdf::dirac(iv.lo);
                return PBox(step, step);
            }
            return PBox(StepCdf::dirac(iv.hi), StepCdf::dirac(iv.lo));
        }
        PBox operator()(const StepCdf& f) const { return PBox(f, f); }
        PBox operator()(const PBox& b) const { return b; }
    };
    return std::visit(Visitor{}, u);
}

StepCdf empirical_cdf(std::vector<double> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("empty sample set");
    }
    check_finite(samples, "sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    std::vector<double> xs;
    std::vector<double> ps;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double cum = static_cast<double>(i + 1) / n;
        if (!xs.empty() && samples[i] == xs.back()) {
            ps.back() = cum;  // tie merge
        } else {
            xs.push_back(samples[i]);
            ps.push_back(cum);
        }
    }
    return StepCdf(std::move(xs), std::move(ps));
}

std::vector<double> merge_breakpoints(const std::vector<const StepCdf*>& cdfs) {
    std::vector<double> grid;
    for (const StepCdf* f : cdfs) {
        grid.insert(grid.end(), f->breakpoints().begin(), f->breakpoints().end());
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

PBox envelope(const std::vector<StepCdf>& cdfs) {
    if (cdfs.empty()) {
        throw std::invalid_argument("envelope of empty family");
    }
    std::vector<const StepCdf*> ptrs;
    ptrs.reserve(cdfs.size());
    for (const StepCdf& f : cdfs) ptrs.push_back(&f);
    std::vector<double> grid = merge_breakpoints(ptrs);

    std::vector<double> lo(grid.size(), 1.0), hi(grid.size(), 0.0);
    for (const StepCdf& f : cdfs) {
        const std::vector<double> vals = levels_on_grid(f, grid);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            lo[k] = std::min(lo[k], vals[k]);
            hi[k] = std::max(hi[k], vals[k]);
        }
    }
    StepCdf lower(grid, std::move(lo));
    StepCdf upper(std::move(grid), std::move(hi));
    return PBox(std::move(lower), std::move(upper));
}

double area_metric(const PBox& p, const PBox& s) {
    const std::vector<double> grid =
        merge_breakpoints({&p.lower, &p.upper, &s.lower, &s.upper});
    const std::vector<double> plo = levels_on_grid(p.lower, grid);
    const std::vector<double> pup = levels_on_grid(p.upper, grid);
    const std::vector<double> slo = levels_on_grid(s.lower, grid);
    const std::vector<double> sup = levels_on_grid(s.upper, grid);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double h = std::max({0.0, slo[k] - pup[k], plo[k] - sup[k]});
        total += h * (grid[k + 1] - grid[k]);
    }
    return total;
}

Interval range_interval(const PBox& p) {
    if (!p.upper.is_proper() || !p.lower.is_proper()) {
        throw std::invalid_argument("improper CDF");
    }
    const auto& uxs = p.upper.breakpoints();
    const auto& ups = p.upper.levels();
    double a = uxs.back();
    for (std::size_t k = 0; k < ups.size(); ++k) {
        if (ups[k] > 0.0) {
            a = uxs[k];
            break;
        }
    }
    const auto& lxs = p.lower.breakpoints();
    const auto& lps = p.lower.levels();
    double b = lxs.back();
    for (std::size_t k = 0; k < lps.size(); ++k) {
        if (lps[k] >= 1.0 - 1e-9) {
            b = lxs[k];
            break;
        }
    }
    return Interval(a, b);
}

double breadth(const PBox& p) {
    const std::vector<double> grid = merge_breakpoints({&p.lower, &p.upper});
    const std::vector<double> lo = levels_on_grid(p.lower, grid);
    const std::vector<double> hi = levels_on_grid(p.upper, grid);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        total += std::max(0.0, hi[k] - lo[k]) * (grid[k + 1] - grid[k]);
    }
    return total;
}

}  // namespace cii
