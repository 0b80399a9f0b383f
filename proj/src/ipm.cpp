#include "cii/ipm.hpp"

#include <cmath>
#include <stdexcept>

namespace cii {

namespace {

// Integral of T_j over [-1, 1]: zero for odd j, 2/(1 - j^2) for even j.
double chebyshev_integral(int j) {
    if (j % 2 == 1) return 0.0;
    return 2.0 / (1.0 - static_cast<double>(j) * static_cast<double>(j));
}

double eval_poly(const std::vector<double>& coeffs, double r, double r_min,
                 double r_max) {
    std::vector<double> psi =
        chebyshev_basis(r, static_cast<int>(coeffs.size()) - 1, r_min, r_max);
    double v = 0.0;
    for (std::size_t j = 0; j < coeffs.size(); ++j) v += coeffs[j] * psi[j];
    return v;
}

}  // namespace

std::vector<double> chebyshev_basis(double r, int degree, double r_min, double r_max) {
    const double t = (2.0 * r - (r_min + r_max)) / (r_max - r_min);
    std::vector<double> psi(static_cast<std::size_t>(degree) + 1);
    psi[0] = 1.0;
    if (degree >= 1) psi[1] = t;
    for (int j = 2; j <= degree; ++j) {
        psi[static_cast<std::size_t>(j)] =
            2.0 * t * psi[static_cast<std::size_t>(j - 1)] - psi[static_cast<std::size_t>(j - 2)];
    }
    return psi;
}

IntervalPredictor::IntervalPredictor(int degree, std::vector<double> coeffs_upper,
                                     std::vector<double> coeffs_lower, double r_min,
                                     double r_max)
    : degree_(degree),
      upper_(std::move(coeffs_upper)),
      lower_(std::move(coeffs_lower)),
      r_min_(r_min),
      r_max_(r_max) {
    if (upper_.size() != static_cast<std::size_t>(degree_) + 1 ||
        lower_.size() != upper_.size()) {
        throw std::invalid_argument("coefficient count does not match degree");
    }
    if (!(r_max_ > r_min_)) {
        throw std::invalid_argument("degenerate distance range");
    }
}

double IntervalPredictor::upper_edge(double r) const {
    return eval_poly(upper_, r, r_min_, r_max_);
}

double IntervalPredictor::lower_edge(double r) const {
    return eval_poly(lower_, r, r_min_, r_max_);
}

Interval IntervalPredictor::predict_band(double r) const {
    const double lo = std::max(0.0, lower_edge(r));
    const double hi = std::max(upper_edge(r), lo);
    return Interval(lo, hi);
}

LinearProgram build_ipm_lp(const std::vector<std::pair<double, double>>& points,
                           int degree, int grid_size, double r_min, double r_max) {
    const std::size_t k = static_cast<std::size_t>(degree) + 1;
    LinearProgram lp;
    lp.objective.resize(2 * k, 0.0);
    // minimize integral of f_u - f_l over [r_min, r_max]
    const double half_width = (r_max - r_min) / 2.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double w = half_width * chebyshev_integral(static_cast<int>(j));
        lp.objective[j] = w;        // u_j
        lp.objective[k + j] = -w;   // l_j
    }

    for (const auto& [r, d] : points) {
        std::vector<double> psi = chebyshev_basis(r, degree, r_min, r_max);
        std::vector<double> up(2 * k, 0.0), lo(2 * k, 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            up[j] = psi[j];
            lo[k + j] = psi[j];
        }
        lp.add_row(std::move(up), Relation::GreaterEq, d);  // f_u(r_i) >= d_i
        lp.add_row(std::move(lo), Relation::LessEq, d);     // f_l(r_i) <= d_i
    }

    for (int g = 0; g < grid_size; ++g) {
        const double r = r_min + (r_max - r_min) * static_cast<double>(g) /
                                     static_cast<double>(grid_size - 1);
        std::vector<double> psi = chebyshev_basis(r, degree, r_min, r_max);
        std::vector<double> order(2 * k, 0.0), nonneg(2 * k, 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            order[j] = psi[j];
            order[k + j] = -psi[j];
            nonneg[k + j] = psi[j];
        }
        lp.add_row(std::move(order), Relation::GreaterEq, 0.0);   // f_u >= f_l
        lp.add_row(std::move(nonneg), Relation::GreaterEq, 0.0);  // f_l >= 0
    }
    return lp;
}

IntervalPredictor fit_ipm(const std::vector<std::pair<double, double>>& points,
                          int degree, int grid_size) {
    if (degree < 0) throw std::invalid_argument("degree must be nonnegative");
    if (points.size() < static_cast<std::size_t>(degree) + 2) {
        throw std::invalid_argument("ipm fit needs at least degree+2 points");
    }
    if (grid_size < 2 * degree + 2) {
        throw std::invalid_argument("grid too coarse for the requested degree");
    }
    double r_min = points.front().first, r_max = points.front().first;
    for (const auto& [r, d] : points) {
        if (!std::isfinite(r) || !std::isfinite(d)) {
            throw std::invalid_argument("non-finite calibration point");
        }
        if (d < 0.0) throw std::invalid_argument("conformal scores must be nonnegative");
        r_min = std::min(r_min, r);
        r_max = std::max(r_max, r);
    }
    if (!(r_max > r_min)) {
        throw std::invalid_argument("degenerate distance range");
    }

    LinearProgram lp = build_ipm_lp(points, degree, grid_size, r_min, r_max);
    LpSolution sol = solve(lp);
    if (sol.status != LpStatus::Optimal) {
        throw std::runtime_error("ipm scenario program did not reach an optimum");
    }
    const std::size_t k = static_cast<std::size_t>(degree) + 1;
    std::vector<double> up(sol.x.begin(), sol.x.begin() + static_cast<long>(k));
    std::vector<double> lo(sol.x.begin() + static_cast<long>(k), sol.x.end());
    return IntervalPredictor(degree, std::move(up), std::move(lo), r_min, r_max);
}

double adjusted_discrepancy(const IntervalPredictor& ipm, const DistanceModel& dm,
                            const Eigen::VectorXd& x) {
    const double r = dm.score(x);
    const Interval band = ipm.predict_band(r);
    if (r <= dm.r0()) return 0.5 * (band.lo + band.hi);
    return band.hi;
}

}  // namespace cii
