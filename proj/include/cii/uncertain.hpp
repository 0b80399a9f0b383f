#pragma once

#include <optional>
#include <variant>
#include <vector>

namespace cii {

/// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double lo_, double hi_);

    double width() const { return hi - lo; }
    bool contains(double v) const { return v >= lo && v <= hi; }
    bool contains(const Interval& other) const {
        return other.lo >= lo && other.hi <= hi;
    }
};

/// Right-continuous nondecreasing step function on the real line.
///
/// Value is 0 before the first breakpoint, levels[k] on
/// [breakpoints[k], breakpoints[k+1]), and the final level from the last
/// breakpoint onward. A proper CDF has final level 1.
class StepCdf {
  public:
    StepCdf() = default;
    StepCdf(std::vector<double> breakpoints, std::vector<double> levels);

    const std::vector<double>& breakpoints() const { return xs_; }
    const std::vector<double>& levels() const { return ps_; }
    std::size_t size() const { return xs_.size(); }

    double evaluate(double x) const;
    double front_x() const { return xs_.front(); }
    double back_x() const { return xs_.back(); }
    double final_level() const { return ps_.back(); }
    bool is_proper(double tol = 1e-9) const;

    /// Unit step at v (degenerate distribution).
    static StepCdf dirac(double v);

  private:
    std::vector<double> xs_;
    std::vector<double> ps_;
};

/// Pair of step CDFs bounding a set of CDFs: upper(x) >= lower(x) everywhere.
struct PBox {
    StepCdf lower;  // lower probability bound (right edge of the band)
    StepCdf upper;  // upper probability bound (left edge of the band)

    PBox() = default;
    PBox(StepCdf lower_, StepCdf upper_);

    bool is_precise(double tol = 1e-12) const;
};

/// Tagged uncertain number: scalar, interval, distribution, or p-box.
struct Scalar {
    double value = 0.0;
};

using UncertainNumber = std::variant<Scalar, Interval, StepCdf, PBox>;

/// Canonicalize any uncertain number to a p-box.
PBox to_pbox(const UncertainNumber& u);

/// ECDF of a non-empty sample; tied values merge into one breakpoint.
StepCdf empirical_cdf(std::vector<double> samples);

/// Pointwise inf/sup envelope of a non-empty family of CDFs.
PBox envelope(const std::vector<StepCdf>& cdfs);

/// Stochastic area metric between two p-boxes.
///
/// Integrates h(x) = max(0, S_lo(x) - F_up(x), F_lo(x) - S_up(x)) exactly
/// over the merged breakpoint grid. Zero iff the bands overlap everywhere;
/// reduces to the classical area metric (1-Wasserstein distance) when both
/// arguments are precise.
double area_metric(const PBox& p, const PBox& s);

/// Support interval [a, b]: a is the leftmost point where the upper bound
/// becomes positive, b the leftmost point where the lower bound reaches 1.
/// Throws if a bound never reaches level 1.
Interval range_interval(const PBox& p);

/// Exact integral of upper - lower over the merged grid.
double breadth(const PBox& p);

/// Merged, deduplicated sorted union of breakpoints.
std::vector<double> merge_breakpoints(const std::vector<const StepCdf*>& cdfs);

}  // namespace cii
