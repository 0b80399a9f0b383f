#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cii/basepredict.hpp"

#include <cmath>
#include <random>

using namespace cii;

namespace {

Eigen::VectorXd vec1(double v) {
    Eigen::VectorXd x(1);
    x(0) = v;
    return x;
}

}  // namespace

TEST_CASE("inverse normal cdf") {
    CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.9599639845400545).epsilon(1e-9));
    CHECK(inverse_normal_cdf(0.025) == doctest::Approx(-1.9599639845400545).epsilon(1e-9));
    CHECK_THROWS(inverse_normal_cdf(0.0));
    CHECK_THROWS(inverse_normal_cdf(1.0));
}

TEST_CASE("normal discretization") {
    StepCdf f = discretize_normal(3.0, 4.0, 512);
    CHECK(f.is_proper());
    CHECK(f.evaluate(3.0) == doctest::Approx(0.5).epsilon(2e-3));
    CHECK(f.evaluate(3.0 + 2.0 * 1.96) == doctest::Approx(0.975).epsilon(2e-3));
    CHECK_THROWS(discretize_normal(0.0, -1.0));
    CHECK_THROWS(discretize_normal(0.0, 1.0, 1));
}

TEST_CASE("noiseless linear data is interpolated with floored variance") {
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> ys;
    for (int i = 0; i < 20; ++i) {
        xs.push_back(vec1(double(i)));
        ys.push_back(3.0 * i - 2.0);
    }
    auto m = fit_hetero_ls(xs, ys, 1);
    for (double q : {0.0, 7.5, 19.0, 30.0}) {
        // mildly regularized least squares: accurate to ~1e-4 absolute
        CHECK(std::abs(m->predictive_mean(vec1(q)) - (3.0 * q - 2.0)) <=
              1e-3 * std::max(1.0, std::abs(3.0 * q - 2.0)));
    }
    // residuals are numerically zero: variance sits at its floor
    CHECK(m->predictive_variance(vec1(5.0)) ==
          doctest::Approx(m->variance_floor()).epsilon(1e-9));
}

TEST_CASE("constant-variance data recovers the noise scale") {
    // Monte-Carlo oracle: data generated with sigma^2 = 4; the two-stage
    // fit must land within 20% at n = 500.
    std::mt19937_64 rng(20240610);
    std::normal_distribution<double> noise(0.0, 2.0);
    std::uniform_real_distribution<double> ux(-3.0, 3.0);
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> ys;
    for (int i = 0; i < 500; ++i) {
        const double x = ux(rng);
        xs.push_back(vec1(x));
        ys.push_back(1.0 + 2.0 * x + noise(rng));
    }
    auto m = fit_hetero_ls(xs, ys, 1);
    double mean_var = 0.0;
    const std::vector<double> queries{-2.0, -1.0, 0.0, 1.0, 2.0};
    for (double q : queries) mean_var += m->predictive_variance(vec1(q));
    mean_var /= double(queries.size());
    CHECK(mean_var == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("prediction is deterministic") {
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> ys;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> noise;
    for (int i = 0; i < 30; ++i) {
        xs.push_back(vec1(double(i) / 3.0));
        ys.push_back(std::sin(double(i)) + noise(rng));
    }
    auto m = fit_hetero_ls(xs, ys, 2);
    PBox a = to_pbox(m->predict(vec1(1.7)));
    PBox b = to_pbox(m->predict(vec1(1.7)));
    CHECK(a.lower.breakpoints() == b.lower.breakpoints());
    CHECK(a.lower.levels() == b.lower.levels());
}

TEST_CASE("bootstrap envelope") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> ux(-4.0, 4.0);
    std::normal_distribution<double> noise(0.0, 3.0);
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> ys;
    for (int i = 0; i < 40; ++i) {
        const double x = ux(rng);
        xs.push_back(vec1(x));
        ys.push_back(x * x * x + noise(rng));
    }

    SUBCASE("fewer than two members is rejected") {
        CHECK_THROWS(fit_bootstrap_envelope(xs, ys, 1, 3, 0));
    }

    SUBCASE("identical members give a precise p-box") {
        auto m = fit_bootstrap_envelope(xs, ys, 5, 3, 0, /*resample=*/false);
        PBox box = to_pbox(m->predict(vec1(1.0)));
        CHECK(breadth(box) == doctest::Approx(0.0).epsilon(1e-9));
    }

    SUBCASE("breadth grows away from the data (widening fan)") {
        auto m = fit_bootstrap_envelope(xs, ys, 10, 3, 7);
        const double near = breadth(to_pbox(m->predict(vec1(0.0))));
        const double far = breadth(to_pbox(m->predict(vec1(6.0))));
        CHECK(far > near);
    }

    SUBCASE("the p-box contains every member CDF") {
        auto m = fit_bootstrap_envelope(xs, ys, 10, 3, 7);
        const Eigen::VectorXd q = vec1(2.5);
        PBox box = to_pbox(m->predict(q));
        for (const auto& member : m->members()) {
            const double mu = member->predictive_mean(q);
            const double sd = std::sqrt(member->predictive_variance(q));
            for (double z : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
                const double x = mu + z * sd;
                const double level = 0.5 * std::erfc(-z / std::sqrt(2.0));
                CHECK(box.upper.evaluate(x) >= level - 5e-3);
                CHECK(box.lower.evaluate(x) <= level + 5e-3);
            }
        }
    }

    SUBCASE("fixed seed reproduces the fit bit-for-bit") {
        auto a = fit_bootstrap_envelope(xs, ys, 6, 3, 12345);
        auto b = fit_bootstrap_envelope(xs, ys, 6, 3, 12345);
        PBox pa = to_pbox(a->predict(vec1(3.0)));
        PBox pb = to_pbox(b->predict(vec1(3.0)));
        CHECK(pa.lower.breakpoints() == pb.lower.breakpoints());
        CHECK(pa.upper.levels() == pb.upper.levels());
    }
}

TEST_CASE("hetero predictive CDF is proper at any query") {
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> ys;
    for (int i = 0; i < 15; ++i) {
        xs.push_back(vec1(double(i)));
        ys.push_back(double(i % 4));
    }
    auto m = fit_hetero_ls(xs, ys, 1);
    for (double q : {-100.0, 0.0, 50.0}) {
        PBox box = to_pbox(m->predict(vec1(q)));
        CHECK(box.lower.is_proper());
        CHECK(box.upper.is_proper());
    }
}

TEST_CASE("fit guards") {
    std::vector<Eigen::VectorXd> xs{vec1(0.0), vec1(1.0)};
    std::vector<double> ys{0.0, 1.0};
    CHECK_THROWS(fit_hetero_ls(xs, ys, 2));  // too few points for the degree
    CHECK_THROWS(fit_hetero_ls(xs, {0.0}, 1));
    CHECK_THROWS(fit_hetero_ls(xs, ys, -1));
}
