#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace cii {

enum class MetricKind { Mahalanobis, Euclidean };

/// Training-manifold statistics producing a scalar distance score r(x),
/// with r0 the maximum score over the training inputs.
class DistanceModel {
  public:
    double score(const Eigen::VectorXd& x) const;
    bool is_extrapolation(const Eigen::VectorXd& x) const {
        return score(x) > r0_;
    }

    double r0() const { return r0_; }
    MetricKind kind() const { return kind_; }
    Eigen::Index dim() const { return mean_.size(); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::VectorXd& column_shift() const { return col_shift_; }
    const Eigen::VectorXd& column_scale() const { return col_scale_; }
    const Eigen::MatrixXd& covariance_factor() const { return chol_; }

    friend DistanceModel fit_distance(const std::vector<Eigen::VectorXd>& train_inputs,
                                      MetricKind kind,
                                      std::optional<double> ridge);

    /// Rebuild a fitted model from stored parameters (model-file loading).
    static DistanceModel restore(MetricKind kind, Eigen::VectorXd col_shift,
                                 Eigen::VectorXd col_scale, Eigen::VectorXd mean,
                                 Eigen::MatrixXd covariance_factor, double r0);

  private:
    MetricKind kind_ = MetricKind::Mahalanobis;
    Eigen::VectorXd col_shift_;  // per-column standardization (mahalanobis only)
    Eigen::VectorXd col_scale_;
    Eigen::VectorXd mean_;       // in standardized coordinates
    Eigen::MatrixXd chol_;       // lower-triangular factor of regularized covariance
    double r0_ = 0.0;
};

/// Fit mean/covariance statistics from at least two training points.
/// The ridge defaults to 1e-6 * trace(Sigma)/dim. Mahalanobis scoring
/// standardizes features with per-column training z-scores first; the
/// euclidean kind uses raw features with Sigma = I.
DistanceModel fit_distance(const std::vector<Eigen::VectorXd>& train_inputs,
                           MetricKind kind = MetricKind::Mahalanobis,
                           std::optional<double> ridge = std::nullopt);

}  // namespace cii
