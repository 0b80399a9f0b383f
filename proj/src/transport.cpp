#include "cii/transport.hpp"

#include "cii/lp.hpp"
#include "cii/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cii {

namespace {

// Base CDF after applying the support clamps, with a prefix integral for
// O(log n) transport-cost evaluation.
struct ClippedCdf {
    std::vector<double> xs;
    std::vector<double> ps;
    std::vector<double> integral;  // integral[k] = int_{xs[0]}^{xs[k]} F dt

    ClippedCdf(const StepCdf& base, const BallConstraints& c) {
        const auto& bx = base.breakpoints();
        const auto& bp = base.levels();
        const bool has_lo = c.support && std::isfinite(c.support->lo);
        const bool has_hi = c.support && std::isfinite(c.support->hi);
        const double a = has_lo ? c.support->lo : -kInf;
        const double b = has_hi ? c.support->hi : kInf;

        for (std::size_t i = 0; i < bx.size(); ++i) {
            if (bx[i] < a || bx[i] > b) continue;
            xs.push_back(bx[i]);
            ps.push_back(bp[i]);
        }
        if (has_lo) {
            const double fa = base.evaluate(a);
            if (fa > 0.0 && (xs.empty() || xs.front() > a)) {
                xs.insert(xs.begin(), a);
                ps.insert(ps.begin(), fa);
            }
        }
        if (has_hi) {
            if (!xs.empty() && xs.back() == b) {
                ps.back() = 1.0;
            } else {
                xs.push_back(b);
                ps.push_back(1.0);
            }
        }
        if (xs.empty()) {
            throw std::invalid_argument("support constraint excludes the whole base");
        }
        for (std::size_t i = 1; i < ps.size(); ++i) ps[i] = std::max(ps[i], ps[i - 1]);

        integral.resize(xs.size(), 0.0);
        for (std::size_t i = 1; i < xs.size(); ++i) {
            integral[i] = integral[i - 1] + ps[i - 1] * (xs[i] - xs[i - 1]);
        }
    }

    double evaluate(double x) const {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        if (it == xs.begin()) return 0.0;
        return ps[static_cast<std::size_t>(it - xs.begin()) - 1];
    }

    // Integral of F from xs[0] to x (F vanishes before xs[0]).
    double prefix(double x) const {
        if (x <= xs.front()) return 0.0;
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t k = static_cast<std::size_t>(it - xs.begin()) - 1;
        return integral[k] + ps[k] * (x - xs[k]);
    }

    // Leftmost point where F reaches at least v (v in (0, 1]).
    double rise_point(double v) const {
        auto it = std::lower_bound(ps.begin(), ps.end(), v);
        if (it == ps.end()) return xs.back();  // proper CDFs reach 1
        return xs[static_cast<std::size_t>(it - ps.begin())];
    }

    // sup{t : F(t) <= v}: the breakpoint where F first exceeds v.
    double drop_point(double v) const {
        auto it = std::upper_bound(ps.begin(), ps.end(), v);
        if (it == ps.end()) return xs.back();
        return xs[static_cast<std::size_t>(it - ps.begin())];
    }

    // Minimal W1 cost of raising the CDF to v at x0.
    double raise_cost(double x0, double v) const {
        const double tv = rise_point(v);
        if (tv <= x0) return 0.0;
        return v * (tv - x0) - (prefix(tv) - prefix(x0));
    }

    // Minimal W1 cost of lowering the CDF to v at x0.
    double lower_cost(double x0, double v) const {
        const double sv = drop_point(v);
        if (sv >= x0) return 0.0;
        return (prefix(x0) - prefix(sv)) - v * (x0 - sv);
    }
};

// The raise cost is piecewise linear and increasing in the target value v,
// with kinks at the base levels, so the largest affordable v is found by a
// binary search over level segments followed by one linear solve.
double upper_value_at(const ClippedCdf& f, const BallConstraints& c, double x0,
                      double d) {
    if (c.support && x0 < c.support->lo) return 0.0;  // no admissible mass below
    const double v0 = f.evaluate(x0);
    if (v0 >= 1.0) return 1.0;
    if (d <= 0.0) return v0;
    if (f.raise_cost(x0, 1.0) <= d) return 1.0;

    // smallest segment index whose level is unaffordable
    const auto& ps = f.ps;
    std::size_t lo = static_cast<std::size_t>(
        std::upper_bound(ps.begin(), ps.end(), v0) - ps.begin());
    std::size_t hi = ps.size() - 1;  // cost at the top level exceeds d
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (f.raise_cost(x0, ps[mid]) > d) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    // on (prev level, ps[lo]] the rise point is xs[lo]; solve cost(v) = d
    const double t = f.xs[lo];
    const double v = (d + f.prefix(t) - f.prefix(x0)) / (t - x0);
    return std::clamp(v, v0, 1.0);
}

// Mirror image of upper_value_at: the drop cost is piecewise linear and
// decreasing in v, so the smallest affordable v is solved per segment.
double lower_value_at(const ClippedCdf& f, const BallConstraints& c, double x0,
                      double d) {
    if (c.support && x0 >= c.support->hi) return 1.0;  // all mass is at or below b
    const double v0 = f.evaluate(x0);
    if (v0 <= 0.0) return 0.0;
    if (d <= 0.0) return v0;
    if (f.lower_cost(x0, 0.0) <= d) return 0.0;

    // smallest segment index whose level is affordable
    const auto& ps = f.ps;
    std::size_t lo = 0;  // cost at level 0 exceeds d
    std::size_t hi = ps.size() - 1;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (f.lower_cost(x0, ps[mid]) <= d) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    // on [prev level, ps[lo]) the drop point is xs[lo]; solve cost(v) = d
    const double s = f.xs[lo];
    const double v = ((f.prefix(x0) - f.prefix(s)) - d) / (x0 - s);
    return std::clamp(v, 0.0, v0);
}

template <typename ValueAt>
StepCdf evaluate_on_grid(const std::vector<double>& query_grid, ValueAt&& value_at) {
    std::vector<double> grid = query_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.empty()) throw std::invalid_argument("empty query grid");

    std::vector<double> values(grid.size());
    const long n = static_cast<long>(grid.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(num_threads()) if (num_threads() > 1)
#endif
    for (long i = 0; i < n; ++i) {
        values[static_cast<std::size_t>(i)] =
            value_at(grid[static_cast<std::size_t>(i)]);
    }
    // guard against bisection jitter: the true envelope is monotone
    for (std::size_t i = 1; i < values.size(); ++i) {
        values[i] = std::clamp(std::max(values[i], values[i - 1]), 0.0, 1.0);
    }
    return StepCdf(std::move(grid), std::move(values));
}

void check_envelope_inputs(const StepCdf& base, double d, const BallConstraints& c) {
    if (d < 0.0) throw std::invalid_argument("transport budget must be nonnegative");
    if (!base.is_proper()) throw std::invalid_argument("base CDF must be proper");
    if (c.support && !(c.support->lo < c.support->hi)) {
        throw std::invalid_argument("support constraint requires lo < hi");
    }
}

}  // namespace

BallConstraints BallConstraints::with_support(double lo, double hi) {
    BallConstraints c;
    c.support = Interval(lo, hi);
    return c;
}

StepCdf upper_envelope(const StepCdf& base, double d, const BallConstraints& c,
                       const std::vector<double>& query_grid) {
    check_envelope_inputs(base, d, c);
    ClippedCdf f(base, c);
    return evaluate_on_grid(query_grid,
                            [&](double x0) { return upper_value_at(f, c, x0, d); });
}

StepCdf lower_envelope(const StepCdf& base, double d, const BallConstraints& c,
                       const std::vector<double>& query_grid) {
    check_envelope_inputs(base, d, c);
    ClippedCdf f(base, c);
    return evaluate_on_grid(query_grid,
                            [&](double x0) { return lower_value_at(f, c, x0, d); });
}

PBox ascloseas(const PBox& base, double d, const BallConstraints& c,
               const std::vector<double>& query_grid) {
    StepCdf lo = lower_envelope(base.lower, d, c, query_grid);
    StepCdf hi = upper_envelope(base.upper, d, c, query_grid);
    return PBox(std::move(lo), std::move(hi));
}

std::vector<double> default_query_grid(const PBox& base, const BallConstraints& c,
                                       int n_extra) {
    std::vector<double> grid = merge_breakpoints({&base.lower, &base.upper});
    double lo = grid.front(), hi = grid.back();
    if (c.support) {
        lo = std::min(lo, c.support->lo);
        hi = std::max(hi, c.support->hi);
    }
    if (hi > lo) {
        // endpoints pinned exactly: the lower envelope jumps to 1 at the
        // support's upper edge, so that point must be on the grid
        grid.push_back(lo);
        for (int i = 1; i < n_extra; ++i) {
            grid.push_back(lo + (hi - lo) * static_cast<double>(i) /
                                    static_cast<double>(n_extra));
        }
        grid.push_back(hi);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

double envelope_oracle(const StepCdf& base, double d, const BallConstraints& c,
                       double x0, EnvelopeSense sense, int grid_size) {
    if (grid_size < 16) throw std::invalid_argument("oracle grid too coarse");
    check_envelope_inputs(base, d, c);
    ClippedCdf f(base, c);

    double lo = std::min(f.xs.front(), x0);
    double hi = std::max(f.xs.back(), x0);
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const std::size_t m = static_cast<std::size_t>(grid_size);
    const double dx = (hi - lo) / static_cast<double>(m);

    // Cell i holds the CDF value G_i at midpoint t_i; G_i = F_i + p_i - n_i
    // with p_i (raise) and n_i (drop) nonnegative, so the transport budget
    // row sum_i (p_i + n_i) dx <= d is the discretized W1 distance.
    std::vector<double> fvals(m);
    std::vector<double> plo(2 * m, 0.0), pup(2 * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double t = lo + (static_cast<double>(i) + 0.5) * dx;
        fvals[i] = f.evaluate(t);
        bool clamped = c.support && (t < c.support->lo || t >= c.support->hi);
        pup[i] = clamped ? 0.0 : 1.0 - fvals[i];          // p_i
        pup[m + i] = clamped ? 0.0 : fvals[i];            // n_i
    }

    LinearProgram lp;
    lp.objective.assign(2 * m, 0.0);
    lp.lower = plo;
    lp.upper = pup;

    // monotonicity: G_i <= G_{i+1}
    for (std::size_t i = 0; i + 1 < m; ++i) {
        std::vector<double> row(2 * m, 0.0);
        row[i] = 1.0;
        row[m + i] = -1.0;
        row[i + 1] = -1.0;
        row[m + i + 1] = 1.0;
        lp.add_row(std::move(row), Relation::LessEq, fvals[i + 1] - fvals[i]);
    }
    {
        std::vector<double> budget(2 * m, dx);
        lp.add_row(std::move(budget), Relation::LessEq, d);
    }

    std::size_t k = static_cast<std::size_t>(
        std::clamp((x0 - lo) / dx, 0.0, static_cast<double>(m - 1)));
    const double s = (sense == EnvelopeSense::Sup) ? -1.0 : 1.0;
    lp.objective[k] = s;
    lp.objective[m + k] = -s;

    LpSolution sol = solve(lp);
    if (sol.status != LpStatus::Optimal) {
        throw std::runtime_error("envelope oracle LP failed");
    }
    return fvals[k] + sol.x[k] - sol.x[m + k];
}

}  // namespace cii
