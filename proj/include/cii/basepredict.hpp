#pragma once

#include "cii/uncertain.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace cii {

/// Pluggable base hypothesis: fit once, then deterministic uncertain-number
/// predictions. The row-indexed overload exists for file-ingested external
/// predictions, which are keyed by input row rather than by features.
class BasePredictor {
  public:
    virtual ~BasePredictor() = default;

    virtual UncertainNumber predict(const Eigen::VectorXd& x) const = 0;
    virtual UncertainNumber predict_row(std::size_t /*row*/,
                                        const Eigen::VectorXd& x) const {
        return predict(x);
    }
    virtual const char* kind() const = 0;
};

/// Two-stage heteroscedastic least squares: a polynomial mean fit followed
/// by a polynomial fit of log squared residuals for the variance surface.
/// Predictions are discretized Gaussians.
class HeteroscedasticLeastSquares : public BasePredictor {
  public:
    UncertainNumber predict(const Eigen::VectorXd& x) const override;
    const char* kind() const override { return "hetero_ls"; }

    int feature_degree() const { return degree_; }
    const Eigen::VectorXd& mean_coeffs() const { return beta_mean_; }
    const Eigen::VectorXd& logvar_coeffs() const { return beta_logvar_; }

    double predictive_mean(const Eigen::VectorXd& x) const;
    double predictive_variance(const Eigen::VectorXd& x) const;

    Eigen::Index feature_dim() const { return dim_; }
    double variance_floor() const { return var_floor_; }
    double variance_cap() const { return var_cap_; }

    /// Rebuild a fitted model from stored parameters (model-file loading).
    static std::shared_ptr<HeteroscedasticLeastSquares> restore(
        int degree, Eigen::Index dim, Eigen::VectorXd beta_mean,
        Eigen::VectorXd beta_logvar, double var_floor, double var_cap);

    friend std::shared_ptr<HeteroscedasticLeastSquares> fit_hetero_ls(
        const std::vector<Eigen::VectorXd>& inputs, const std::vector<double>& responses,
        int feature_degree);

  private:
    int degree_ = 1;
    Eigen::Index dim_ = 0;
    Eigen::VectorXd beta_mean_;
    Eigen::VectorXd beta_logvar_;
    double var_floor_ = 1e-12;
    double var_cap_ = 1e12;
};

std::shared_ptr<HeteroscedasticLeastSquares> fit_hetero_ls(
    const std::vector<Eigen::VectorXd>& inputs, const std::vector<double>& responses,
    int feature_degree = 1);

/// Envelope of heteroscedastic members fit on bootstrap resamples; the
/// prediction is the p-box enclosing every member CDF.
class BootstrapEnsembleEnvelope : public BasePredictor {
  public:
    UncertainNumber predict(const Eigen::VectorXd& x) const override;
    const char* kind() const override { return "bootstrap_envelope"; }

    const std::vector<std::shared_ptr<HeteroscedasticLeastSquares>>& members() const {
        return members_;
    }

    /// Rebuild from stored member parameters (model-file loading).
    static std::shared_ptr<BootstrapEnsembleEnvelope> restore(
        std::vector<std::shared_ptr<HeteroscedasticLeastSquares>> members);

    friend std::shared_ptr<BootstrapEnsembleEnvelope> fit_bootstrap_envelope(
        const std::vector<Eigen::VectorXd>& inputs, const std::vector<double>& responses,
        int n_members, int feature_degree, std::uint64_t seed, bool resample);

  private:
    std::vector<std::shared_ptr<HeteroscedasticLeastSquares>> members_;
};

/// Fit n_members >= 2 members on seeded bootstrap resamples. Resampling can
/// be disabled to obtain identical members (useful when a precise envelope
/// is wanted).
std::shared_ptr<BootstrapEnsembleEnvelope> fit_bootstrap_envelope(
    const std::vector<Eigen::VectorXd>& inputs, const std::vector<double>& responses,
    int n_members = 10, int feature_degree = 1, std::uint64_t seed = 0,
    bool resample = true);

/// Predictions ingested from a newline-delimited p-box file, keyed by row.
class ExternalPredictions : public BasePredictor {
  public:
    explicit ExternalPredictions(std::map<std::size_t, PBox> by_row);

    UncertainNumber predict(const Eigen::VectorXd& x) const override;
    UncertainNumber predict_row(std::size_t row, const Eigen::VectorXd& x) const override;
    const char* kind() const override { return "external"; }

    std::size_t size() const { return by_row_.size(); }
    const std::map<std::size_t, PBox>& predictions() const { return by_row_; }

  private:
    std::map<std::size_t, PBox> by_row_;
};

std::shared_ptr<ExternalPredictions> load_external(const std::string& path);

/// Discretized Normal(mu, sigma^2) on an n-point midpoint-quantile grid.
StepCdf discretize_normal(double mu, double sigma2, int n = 512);

/// Inverse standard normal CDF (Acklam's approximation with one refinement).
double inverse_normal_cdf(double p);

}  // namespace cii
