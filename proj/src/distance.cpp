#include "cii/distance.hpp"

#include <cmath>
#include <stdexcept>

namespace cii {

DistanceModel fit_distance(const std::vector<Eigen::VectorXd>& train_inputs,
                           MetricKind kind,
                           std::optional<double> ridge) {
    if (train_inputs.size() < 2) {
        throw std::invalid_argument("distance fit needs at least 2 training points");
    }
    const Eigen::Index dim = train_inputs.front().size();
    const Eigen::Index n = static_cast<Eigen::Index>(train_inputs.size());
    Eigen::MatrixXd X(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (train_inputs[static_cast<std::size_t>(i)].size() != dim) {
            throw std::invalid_argument("inconsistent feature dimensions");
        }
        X.row(i) = train_inputs[static_cast<std::size_t>(i)].transpose();
    }
    if (!X.allFinite()) {
        throw std::invalid_argument("non-finite feature values");
    }

    DistanceModel m;
    m.kind_ = kind;
    m.col_shift_ = Eigen::VectorXd::Zero(dim);
    m.col_scale_ = Eigen::VectorXd::Ones(dim);

    if (kind == MetricKind::Mahalanobis) {
        m.col_shift_ = X.colwise().mean();
        Eigen::MatrixXd centered = X.rowwise() - m.col_shift_.transpose();
        Eigen::VectorXd sd =
            (centered.array().square().colwise().sum() / double(n - 1)).sqrt();
        for (Eigen::Index j = 0; j < dim; ++j) {
            m.col_scale_(j) = sd(j) > 0.0 ? sd(j) : 1.0;
        }
        Eigen::MatrixXd Z = centered.array().rowwise() / m.col_scale_.transpose().array();
        m.mean_ = Z.colwise().mean();
        Eigen::MatrixXd Zc = Z.rowwise() - m.mean_.transpose();
        Eigen::MatrixXd cov = (Zc.transpose() * Zc) / double(n - 1);
        const double lambda =
            ridge.value_or(1e-6 * cov.trace() / static_cast<double>(dim));
        if (lambda < 0.0) {
            throw std::invalid_argument("ridge must be nonnegative");
        }
        cov.diagonal().array() += lambda;
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("covariance not positive definite; increase ridge");
        }
        m.chol_ = llt.matrixL();
    } else {
        m.mean_ = X.colwise().mean();
        m.chol_ = Eigen::MatrixXd::Identity(dim, dim);
    }

    double r0 = 0.0;
    for (const auto& x : train_inputs) {
        r0 = std::max(r0, m.score(x));
    }
    m.r0_ = r0;
    return m;
}

DistanceModel DistanceModel::restore(MetricKind kind, Eigen::VectorXd col_shift,
                                     Eigen::VectorXd col_scale, Eigen::VectorXd mean,
                                     Eigen::MatrixXd covariance_factor, double r0) {
    const Eigen::Index dim = mean.size();
    if (col_shift.size() != dim || col_scale.size() != dim ||
        covariance_factor.rows() != dim || covariance_factor.cols() != dim) {
        throw std::invalid_argument("inconsistent distance-model parameter shapes");
    }
    if (!(r0 >= 0.0)) throw std::invalid_argument("r0 must be nonnegative");
    for (Eigen::Index j = 0; j < dim; ++j) {
        if (!(col_scale(j) > 0.0) || !(covariance_factor(j, j) > 0.0)) {
            throw std::invalid_argument("distance-model scales must be positive");
        }
    }
    DistanceModel m;
    m.kind_ = kind;
    m.col_shift_ = std::move(col_shift);
    m.col_scale_ = std::move(col_scale);
    m.mean_ = std::move(mean);
    m.chol_ = std::move(covariance_factor);
    m.r0_ = r0;
    return m;
}

double DistanceModel::score(const Eigen::VectorXd& x) const {
    if (x.size() != mean_.size()) {
        throw std::invalid_argument("query dimension does not match distance model");
    }
    if (kind_ == MetricKind::Euclidean) {
        return (x - mean_).norm();
    }
    Eigen::VectorXd z =
        ((x - col_shift_).array() / col_scale_.array()).matrix() - mean_;
    Eigen::VectorXd y =
        chol_.triangularView<Eigen::Lower>().solve(z);
    return y.norm();
}

}  // namespace cii
