#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cii/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <random>

using namespace cii;

namespace {

Eigen::VectorXd vec1(double v) {
    Eigen::VectorXd x(1);
    x(0) = v;
    return x;
}

struct ToyData {
    std::vector<Eigen::VectorXd> inputs;
    std::vector<double> responses;
};

ToyData cubic_toy(std::uint64_t seed, int n = 40) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-4.0, 4.0);
    std::normal_distribution<double> noise(0.0, 3.0);
    ToyData d;
    for (int i = 0; i < n; ++i) {
        const double x = ux(rng);
        d.inputs.push_back(vec1(x));
        d.responses.push_back(x * x * x + noise(rng));
    }
    return d;
}

}  // namespace

TEST_CASE("calibration selection") {
    std::vector<double> rs(100);
    for (std::size_t i = 0; i < rs.size(); ++i) rs[i] = double(i) / 99.0;

    SUBCASE("selecting everything returns every index") {
        auto idx = select_calibration(rs, rs.size(), 0.3, 10, 1);
        REQUIRE(idx.size() == rs.size());
        for (std::size_t i = 0; i < idx.size(); ++i) CHECK(idx[i] == i);
    }

    SUBCASE("pure boundary emphasis takes the largest distances") {
        auto idx = select_calibration(rs, 20, 1.0, 10, 1);
        REQUIRE(idx.size() == 20);
        // the 20 largest r values are indices 80..99
        for (std::size_t i = 0; i < idx.size(); ++i) CHECK(idx[i] == 80 + i);
    }

    SUBCASE("hybrid split: stratified counts match a direct recount") {
        const std::size_t n_cal = 20;
        auto idx = select_calibration(rs, n_cal, 0.3, 10, 7);
        REQUIRE(idx.size() == n_cal);
        CHECK(std::is_sorted(idx.begin(), idx.end()));
        CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());  // unique

        // floor(20 * 0.7) = 14 stratified + 6 boundary picks. The boundary
        // picks are the largest-r indices not already chosen, so the top-6
        // unchosen cannot exist: the selected set must include at least 6
        // of the top-r tail, counted from the largest r downwards.
        std::size_t boundary_hits = 0;
        for (std::size_t i = 99;; --i) {
            if (std::binary_search(idx.begin(), idx.end(), i)) ++boundary_hits;
            else break;
            if (i == 0) break;
        }
        CHECK(boundary_hits >= 6);

        // Recount oracle: with uniform r over 10 equal bins of 10 points,
        // proportional allocation of 14 puts 1 or 2 picks in every bin.
        std::vector<std::size_t> per_bin(10, 0);
        for (std::size_t i : idx) {
            per_bin[std::min<std::size_t>(static_cast<std::size_t>(rs[i] * 10), 9)]++;
        }
        for (std::size_t b = 0; b + 1 < per_bin.size(); ++b) {
            CHECK(per_bin[b] >= 1);
            CHECK(per_bin[b] <= 2);
        }
    }

    SUBCASE("guards") {
        CHECK_THROWS(select_calibration(rs, 101, 0.3, 10, 1));
        CHECK_THROWS(select_calibration(rs, 10, 1.5, 10, 1));
        CHECK_THROWS(select_calibration(rs, 10, 0.3, 0, 1));
    }
}

TEST_CASE("conformal scores") {
    ToyData toy = cubic_toy(3);
    auto base = fit_hetero_ls(toy.inputs, toy.responses, 3);
    DistanceModel dm = fit_distance(toy.inputs);

    SUBCASE("observation equal to a degenerate prediction scores zero") {
        // A base that predicts exactly the observation: use the observation
        // itself as an interval containing the whole predictive band.
        std::vector<UncertainNumber> obs;
        std::vector<Eigen::VectorXd> xs;
        for (std::size_t i = 0; i < 3; ++i) {
            xs.push_back(toy.inputs[i]);
            PBox pred = to_pbox(base->predict(toy.inputs[i]));
            Interval support = range_interval(pred);
            obs.push_back(Interval(support.lo - 1.0, support.hi + 1.0));
        }
        auto recs = conformal_scores(xs, obs, {}, *base, dm);
        for (const auto& rec : recs) CHECK(rec.d == 0.0);  // containment
    }

    SUBCASE("scalar at the predictive mean scores the mean absolute deviation") {
        const Eigen::VectorXd x = toy.inputs.front();
        const double mu = base->predictive_mean(x);
        const double sigma = std::sqrt(base->predictive_variance(x));
        auto recs = conformal_scores({x}, {UncertainNumber{Scalar{mu}}}, {}, *base, dm);
        // Quadrature oracle: E|Y - mu| of a Gaussian is sigma * sqrt(2/pi);
        // the 512-point discretization clips the tails slightly.
        const double mad = sigma * std::sqrt(2.0 / M_PI);
        CHECK(recs[0].d == doctest::Approx(mad).epsilon(5e-3));
        CHECK(recs[0].r == doctest::Approx(dm.score(x)).epsilon(1e-12));
    }
}

TEST_CASE("end-to-end fit") {
    ToyData toy = cubic_toy(4);
    auto base = fit_bootstrap_envelope(toy.inputs, toy.responses, 10, 3, 11);
    CiiConfig cfg;
    cfg.support_margin = 10.0;

    CiiModel m = fit_cii(toy.inputs, toy.responses, base, cfg);

    SUBCASE("every calibration score is enclosed by the fitted band") {
        CHECK(m.calibration.size() == toy.inputs.size());  // default: all points
        for (const auto& rec : m.calibration) {
            CHECK(m.ipm.upper_edge(rec.r) >= rec.d - 1e-9);
            CHECK(m.ipm.lower_edge(rec.r) <= rec.d + 1e-9);
        }
    }

    SUBCASE("deterministic refit") {
        CiiModel m2 = fit_cii(toy.inputs, toy.responses, base, cfg);
        CHECK(m2.ipm.coeffs_upper() == m.ipm.coeffs_upper());
        CHECK(m2.ipm.coeffs_lower() == m.ipm.coeffs_lower());
        CHECK(m2.distance.r0() == m.distance.r0());
    }

    SUBCASE("predictions contain the base prediction inside the support") {
        // Outside the support interval the prediction is clipped to 0/1, so
        // containment of the raw base is only promised within it.
        REQUIRE(m.constraints.support.has_value());
        const Interval sup = *m.constraints.support;
        for (double q : {-8.0, -2.0, 0.0, 3.0, 8.0}) {
            PBox pred = predict_cii(m, vec1(q));
            PBox raw = to_pbox(base->predict(vec1(q)));
            std::vector<double> grid = merge_breakpoints(
                {&pred.lower, &pred.upper, &raw.lower, &raw.upper});
            for (double x : grid) {
                if (x >= sup.lo) {
                    CHECK(pred.upper.evaluate(x) >= raw.upper.evaluate(x) - 1e-9);
                }
                if (x < sup.hi) {
                    CHECK(pred.lower.evaluate(x) <= raw.lower.evaluate(x) + 1e-9);
                }
            }
        }
    }

    SUBCASE("imprecision grows beyond the training support") {
        const double r0 = m.distance.r0();
        // queries at the centre and far outside
        PBox near = predict_cii(m, vec1(0.0));
        PBox far = predict_cii(m, vec1(8.0));
        CHECK(m.distance.score(vec1(8.0)) > r0);
        CHECK(breadth(far) > breadth(near));
    }
}

TEST_CASE("zero-budget model returns the base p-box unchanged") {
    // A row-keyed base that predicts each observation exactly: every
    // conformal score is 0, the fitted band collapses to zero width, and
    // the ball of radius 0 returns the base prediction as-is.
    std::vector<Eigen::VectorXd> inputs;
    std::vector<double> responses;
    std::map<std::size_t, PBox> exact;
    for (int i = 0; i < 12; ++i) {
        inputs.push_back(vec1(double(i)));
        responses.push_back(2.0 * i + 1.0);
        exact.emplace(static_cast<std::size_t>(i),
                      to_pbox(Scalar{responses.back()}));
    }
    auto base = std::make_shared<ExternalPredictions>(std::move(exact));
    CiiConfig cfg;
    cfg.ipm_degree = 0;
    CiiModel m = fit_cii(inputs, responses, base, cfg);

    for (const auto& rec : m.calibration) CHECK(rec.d == 0.0);
    const std::size_t row = 5;
    PBox pred = predict_cii(m, inputs[row], row);
    PBox raw = to_pbox(base->predict_row(row, inputs[row]));
    CHECK(area_metric(pred, raw) == 0.0);
    CHECK(breadth(pred) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(range_interval(pred).contains(responses[row]));
}

TEST_CASE("n_cal smaller than the training set is honoured") {
    ToyData toy = cubic_toy(5, 60);
    auto base = fit_hetero_ls(toy.inputs, toy.responses, 3);
    CiiConfig cfg;
    cfg.n_cal = 25;
    CiiModel m = fit_cii(toy.inputs, toy.responses, base, cfg);
    CHECK(m.calibration.size() == 25);
}
