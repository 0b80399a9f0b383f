#include "cii/basepredict.hpp"

#include "cii/serialize.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace cii {

namespace {

// Per-dimension polynomial features with intercept:
// [1, x1, x1^2, ..., x1^deg, x2, ...].
Eigen::VectorXd poly_features(const Eigen::VectorXd& x, int degree) {
    const Eigen::Index dim = x.size();
    Eigen::VectorXd phi(1 + dim * degree);
    phi(0) = 1.0;
    Eigen::Index k = 1;
    for (Eigen::Index j = 0; j < dim; ++j) {
        double pw = 1.0;
        for (int q = 0; q < degree; ++q) {
            pw *= x(j);
            phi(k++) = pw;
        }
    }
    return phi;
}

Eigen::VectorXd ridge_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Eigen::MatrixXd gram = X.transpose() * X;
    const double lambda = 1e-8 * gram.trace() / static_cast<double>(gram.rows());
    gram.diagonal().array() += std::max(lambda, 1e-300);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    Eigen::VectorXd beta = ldlt.solve(X.transpose() * y);
    if (ldlt.info() != Eigen::Success || !beta.allFinite()) {
        throw std::runtime_error("rank-deficient design matrix");
    }
    return beta;
}

constexpr double kInfQ = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("quantile level must be in (0,1)");
    }
    // Acklam's rational approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    }
    // One Halley refinement against erfc.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

StepCdf discretize_normal(double mu, double sigma2, int n) {
    if (n < 2) throw std::invalid_argument("discretization needs at least 2 points");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("variance must be positive");
    const double sigma = std::sqrt(sigma2);
    std::vector<double> xs(static_cast<std::size_t>(n));
    std::vector<double> ps(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) {
        const double p = (static_cast<double>(k) - 0.5) / static_cast<double>(n);
        const double z = std::clamp(inverse_normal_cdf(p), -8.0, 8.0);
        xs[static_cast<std::size_t>(k - 1)] = mu + sigma * z;
        ps[static_cast<std::size_t>(k - 1)] =
            static_cast<double>(k) / static_cast<double>(n);
    }
    return StepCdf(std::move(xs), std::move(ps));
}

std::shared_ptr<HeteroscedasticLeastSquares> fit_hetero_ls(
    const std::vector<Eigen::VectorXd>& inputs, const std::vector<double>& responses,
    int feature_degree) {
    if (feature_degree < 0) throw std::invalid_argument("degree must be nonnegative");
    if (inputs.size() != responses.size() || inputs.empty()) {
        throw std::invalid_argument("inputs/responses size mismatch");
    }
    const Eigen::Index n = static_cast<Eigen::Index>(inputs.size());
    const Eigen::Index dim = inputs.front().size();
    const Eigen::Index p = 1 + dim * feature_degree;
    if (n < std::max<Eigen::Index>(2 * (feature_degree + 1), p + 1)) {
        throw std::invalid_argument("not enough points for heteroscedastic fit");
    }

    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        X.row(i) = poly_features(inputs[static_cast<std::size_t>(i)], feature_degree);
        y(i) = responses[static_cast<std::size_t>(i)];
    }

    auto model = std::make_shared<HeteroscedasticLeastSquares>();
    model->degree_ = feature_degree;
    model->dim_ = dim;
    model->beta_mean_ = ridge_least_squares(X, y);

    Eigen::VectorXd resid = y - X * model->beta_mean_;
    Eigen::VectorXd logsq(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        logsq(i) = std::log(std::max(resid(i) * resid(i), 1e-300));
    }
    model->beta_logvar_ = ridge_least_squares(X, logsq);
    // log e^2 for Gaussian noise sits below log sigma^2 by E[log chi^2_1]
    // = gamma + log 2; shift the intercept so exp() recovers the variance.
    model->beta_logvar_(0) += 1.2703628454614782;

    const double var_y =
        (y.array() - y.mean()).square().sum() / std::max<double>(1.0, double(n - 1));
    model->var_floor_ = std::max(1e-6 * var_y, 1e-300);
    model->var_cap_ = std::max(1e8 * var_y, 1.0);
    return model;
}

std::shared_ptr<HeteroscedasticLeastSquares> HeteroscedasticLeastSquares::restore(
    int degree, Eigen::Index dim, Eigen::VectorXd beta_mean,
    Eigen::VectorXd beta_logvar, double var_floor, double var_cap) {
    const Eigen::Index p = 1 + dim * degree;
    if (degree < 0 || dim < 1 || beta_mean.size() != p || beta_logvar.size() != p) {
        throw std::invalid_argument("inconsistent heteroscedastic model parameters");
    }
    if (!(var_floor > 0.0) || !(var_cap >= var_floor)) {
        throw std::invalid_argument("invalid variance bounds");
    }
    auto model = std::make_shared<HeteroscedasticLeastSquares>();
    model->degree_ = degree;
    model->dim_ = dim;
    model->beta_mean_ = std::move(beta_mean);
    model->beta_logvar_ = std::move(beta_logvar);
    model->var_floor_ = var_floor;
    model->var_cap_ = var_cap;
    return model;
}

double HeteroscedasticLeastSquares::predictive_mean(const Eigen::VectorXd& x) const {
    return poly_features(x, degree_).dot(beta_mean_);
}

double HeteroscedasticLeastSquares::predictive_variance(const Eigen::VectorXd& x) const {
    const double lv = poly_features(x, degree_).dot(beta_logvar_);
    return std::clamp(std::exp(lv), var_floor_, var_cap_);
}

UncertainNumber HeteroscedasticLeastSquares::predict(const Eigen::VectorXd& x) const {
    if (x.size() != dim_) throw std::invalid_argument("feature dimension mismatch");
    return discretize_normal(predictive_mean(x), predictive_variance(x));
}

std::shared_ptr<BootstrapEnsembleEnvelope> fit_bootstrap_envelope(
    const std::vector<Eigen::VectorXd>& inputs, const std::vector<double>& responses,
    int n_members, int feature_degree, std::uint64_t seed, bool resample) {
    if (n_members < 2) {
        throw std::invalid_argument("bootstrap envelope needs at least 2 members");
    }
    auto model = std::make_shared<BootstrapEnsembleEnvelope>();
    model->members_.reserve(static_cast<std::size_t>(n_members));
    for (int mbr = 0; mbr < n_members; ++mbr) {
        std::vector<Eigen::VectorXd> xs = inputs;
        std::vector<double> ys = responses;
        if (resample) {
            std::mt19937_64 rng(splitmix64(seed ^ (0xB00757707ULL + mbr)));
            std::uniform_int_distribution<std::size_t> pick(0, inputs.size() - 1);
            for (std::size_t i = 0; i < inputs.size(); ++i) {
                const std::size_t j = pick(rng);
                xs[i] = inputs[j];
                ys[i] = responses[j];
            }
        }
        model->members_.push_back(fit_hetero_ls(xs, ys, feature_degree));
    }
    return model;
}

std::shared_ptr<BootstrapEnsembleEnvelope> BootstrapEnsembleEnvelope::restore(
    std::vector<std::shared_ptr<HeteroscedasticLeastSquares>> members) {
    if (members.size() < 2) {
        throw std::invalid_argument("bootstrap envelope needs at least 2 members");
    }
    for (const auto& m : members) {
        if (!m) throw std::invalid_argument("null ensemble member");
    }
    auto model = std::make_shared<BootstrapEnsembleEnvelope>();
    model->members_ = std::move(members);
    return model;
}

UncertainNumber BootstrapEnsembleEnvelope::predict(const Eigen::VectorXd& x) const {
    // All members are Gaussians discretized at the same quantile levels, so
    // the CDF envelope is the per-level min/max of the member quantiles.
    constexpr int kGrid = 512;
    static const std::vector<double> z = [] {
        std::vector<double> zz(kGrid);
        for (int k = 1; k <= kGrid; ++k) {
            zz[static_cast<std::size_t>(k - 1)] = std::clamp(
                inverse_normal_cdf((static_cast<double>(k) - 0.5) / kGrid), -8.0, 8.0);
        }
        return zz;
    }();

    std::vector<double> left(kGrid, kInfQ), right(kGrid, -kInfQ), ps(kGrid);
    for (const auto& m : members_) {
        const double mu = m->predictive_mean(x);
        const double sigma = std::sqrt(m->predictive_variance(x));
        for (int k = 0; k < kGrid; ++k) {
            const double q = mu + sigma * z[static_cast<std::size_t>(k)];
            left[static_cast<std::size_t>(k)] =
                std::min(left[static_cast<std::size_t>(k)], q);
            right[static_cast<std::size_t>(k)] =
                std::max(right[static_cast<std::size_t>(k)], q);
        }
    }
    for (int k = 0; k < kGrid; ++k) {
        ps[static_cast<std::size_t>(k)] = static_cast<double>(k + 1) / kGrid;
    }
    // sup CDF jumps at the leftmost member quantiles, inf CDF at the rightmost
    StepCdf lower(std::move(right), ps);
    StepCdf upper(std::move(left), std::move(ps));
    return PBox(std::move(lower), std::move(upper));
}

ExternalPredictions::ExternalPredictions(std::map<std::size_t, PBox> by_row)
    : by_row_(std::move(by_row)) {}

UncertainNumber ExternalPredictions::predict(const Eigen::VectorXd&) const {
    throw std::runtime_error("external predictions are keyed by row index");
}

UncertainNumber ExternalPredictions::predict_row(std::size_t row,
                                                 const Eigen::VectorXd&) const {
    auto it = by_row_.find(row);
    if (it == by_row_.end()) {
        throw std::out_of_range("no external prediction for row " + std::to_string(row));
    }
    const PBox& box = it->second;
    if (box.is_precise() && box.lower.size() == 1) {
        return Scalar{box.lower.front_x()};
    }
    return box;
}

std::shared_ptr<ExternalPredictions> load_external(const std::string& path) {
    return std::make_shared<ExternalPredictions>(read_pbox_file(path));
}

}  // namespace cii
