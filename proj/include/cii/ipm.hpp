#pragma once

#include "cii/distance.hpp"
#include "cii/lp.hpp"
#include "cii/uncertain.hpp"

#include <utility>
#include <vector>

namespace cii {

/// Polynomial lower/upper bound functions over the distance score, fit by
/// scenario optimization: the band encloses every calibration point while
/// minimizing its integrated spread.
class IntervalPredictor {
  public:
    IntervalPredictor() = default;
    IntervalPredictor(int degree, std::vector<double> coeffs_upper,
                      std::vector<double> coeffs_lower, double r_min, double r_max);

    double upper_edge(double r) const;
    double lower_edge(double r) const;

    /// Band [max(0, f_l(r)), max(f_u(r), clamped lower)] at any finite r;
    /// queries beyond the fitted domain evaluate the polynomials directly.
    Interval predict_band(double r) const;

    int degree() const { return degree_; }
    double r_min() const { return r_min_; }
    double r_max() const { return r_max_; }
    const std::vector<double>& coeffs_upper() const { return upper_; }
    const std::vector<double>& coeffs_lower() const { return lower_; }

  private:
    int degree_ = 0;
    std::vector<double> upper_;
    std::vector<double> lower_;
    double r_min_ = 0.0;
    double r_max_ = 1.0;
};

/// Chebyshev basis values psi_0..psi_degree at r mapped onto [-1, 1].
std::vector<double> chebyshev_basis(double r, int degree, double r_min, double r_max);

/// The scenario LP behind fit_ipm, exposed so tests can cross-check the
/// solved optimum against independent enumeration. Variables are ordered
/// (u_0..u_deg, l_0..l_deg).
LinearProgram build_ipm_lp(const std::vector<std::pair<double, double>>& points,
                           int degree, int grid_size, double r_min, double r_max);

/// Fit the minimal-spread enclosing band on (distance, score) pairs.
/// Ordering (f_u >= f_l) and nonnegativity (f_l >= 0) are enforced on a
/// uniform grid of grid_size points over the observed distance range.
IntervalPredictor fit_ipm(const std::vector<std::pair<double, double>>& points,
                          int degree = 2, int grid_size = 64);

/// Distance-aware discrepancy: band midpoint inside the training support
/// (r <= r0), band upper edge beyond it.
double adjusted_discrepancy(const IntervalPredictor& ipm, const DistanceModel& dm,
                            const Eigen::VectorXd& x);

}  // namespace cii
