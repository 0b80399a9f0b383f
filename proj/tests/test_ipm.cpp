#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cii/ipm.hpp"
#include "oracle_utils.hpp"

#include <cmath>
#include <random>
#include <utility>
#include <vector>

using namespace cii;

namespace {

// Band area by composite Simpson quadrature; exact for the polynomial
// integrand up to cubic degree, far above the degrees used here.
double band_area(const IntervalPredictor& m) {
    const int n = 2000;  // even
    const double a = m.r_min(), b = m.r_max();
    const double h = (b - a) / n;
    auto width = [&](double r) { return m.upper_edge(r) - m.lower_edge(r); };
    double s = width(a) + width(b);
    for (int k = 1; k < n; ++k) s += width(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// The vertex-enumeration reference for the same scenario program.
double oracle_band_area(const std::vector<std::pair<double, double>>& pts, int degree,
                        int grid_size, double r_min, double r_max) {
    return oracle::vertex_optimum(build_ipm_lp(pts, degree, grid_size, r_min, r_max));
}

void check_enclosure(const IntervalPredictor& m,
                     const std::vector<std::pair<double, double>>& pts) {
    for (const auto& [r, d] : pts) {
        CHECK(m.upper_edge(r) >= d - 1e-9);
        CHECK(m.lower_edge(r) <= d + 1e-9);
    }
}

}  // namespace

TEST_CASE("degree 0 is the min/max enclosure") {
    std::vector<std::pair<double, double>> pts{{0.0, 1.0}, {1.0, 2.0}, {2.0, 3.0}};
    IntervalPredictor m = fit_ipm(pts, 0, 8);
    for (double r : {-1.0, 0.3, 1.7, 5.0}) {
        Interval band = m.predict_band(r);
        CHECK(band.lo == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(band.hi == doctest::Approx(3.0).epsilon(1e-9));
    }
    check_enclosure(m, pts);
}

TEST_CASE("collinear points collapse the band to the line") {
    std::vector<std::pair<double, double>> pts{{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}};
    IntervalPredictor m = fit_ipm(pts, 1, 16);
    CHECK(band_area(m) == doctest::Approx(0.0).epsilon(1e-8));
    Interval band = m.predict_band(1.5);
    CHECK(band.lo == doctest::Approx(1.5).epsilon(1e-8));
    CHECK(band.hi == doctest::Approx(1.5).epsilon(1e-8));
    check_enclosure(m, pts);
}

TEST_CASE("non-collinear triple matches the vertex-enumeration reference") {
    std::vector<std::pair<double, double>> pts{{0.0, 0.0}, {1.0, 2.0}, {2.0, 1.0}};
    const int grid = 8;
    IntervalPredictor m = fit_ipm(pts, 1, grid);
    const double reference = oracle_band_area(pts, 1, grid, 0.0, 2.0);
    CHECK(band_area(m) == doctest::Approx(reference).epsilon(1e-6));
    check_enclosure(m, pts);
}

TEST_CASE("random small instances match vertex enumeration") {
    std::mt19937_64 rng(20240606);
    std::uniform_real_distribution<double> ur(0.0, 4.0), ud(0.0, 3.0);
    std::uniform_int_distribution<int> np(3, 6), ndeg(0, 1);
    for (int rep = 0; rep < 40; ++rep) {
        const int degree = ndeg(rng);
        const int n = np(rng);
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < n; ++i) pts.emplace_back(ur(rng), ud(rng));
        double r_lo = pts[0].first, r_hi = pts[0].first;
        for (const auto& [r, d] : pts) {
            r_lo = std::min(r_lo, r);
            r_hi = std::max(r_hi, r);
        }
        if (r_hi - r_lo < 1e-6) continue;  // degenerate domain rejected elsewhere
        const int grid = 8;
        IntervalPredictor m = fit_ipm(pts, degree, grid);
        const double reference = oracle_band_area(pts, degree, grid, r_lo, r_hi);
        CHECK(std::abs(band_area(m) - reference) <= 1e-6 * std::max(1.0, reference));
        check_enclosure(m, pts);
    }
}

TEST_CASE("band prediction clamps the lower edge at zero") {
    // Steeply decreasing scores force the fitted lower line below zero at
    // large r; the published band must clamp there.
    std::vector<std::pair<double, double>> pts{{0.0, 2.0}, {1.0, 1.0}, {2.0, 0.1}};
    IntervalPredictor m = fit_ipm(pts, 1, 16);
    Interval far = m.predict_band(10.0);
    CHECK(far.lo == 0.0);
    CHECK(far.hi >= far.lo);
}

TEST_CASE("distance-aware adjustment switches at r0") {
    // Distance model over 1-D inputs centred at 0 with r0 = 2.
    std::vector<Eigen::VectorXd> train;
    for (double v : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        Eigen::VectorXd x(1);
        x(0) = v;
        train.push_back(x);
    }
    DistanceModel dm = fit_distance(train, MetricKind::Euclidean);
    CHECK(dm.r0() == doctest::Approx(2.0).epsilon(1e-12));

    // Constant band [1, 3] at every distance.
    std::vector<std::pair<double, double>> pts{{0.0, 1.0}, {1.0, 3.0}, {2.0, 2.0}};
    IntervalPredictor band = fit_ipm(pts, 0, 8);

    Eigen::VectorXd inside(1), outside(1);
    inside << 1.0;   // r = 1 <= r0: midpoint
    outside << 5.0;  // r = 5 > r0: upper edge
    CHECK(adjusted_discrepancy(band, dm, inside) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(adjusted_discrepancy(band, dm, outside) == doctest::Approx(3.0).epsilon(1e-9));

    Eigen::VectorXd boundary(1);
    boundary << 2.0;  // exactly r0 counts as inside
    CHECK(adjusted_discrepancy(band, dm, boundary) ==
          doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("degenerate band yields the same value in both branches") {
    std::vector<std::pair<double, double>> pts{{0.0, 1.5}, {1.0, 1.5}, {2.0, 1.5}};
    IntervalPredictor m = fit_ipm(pts, 0, 8);
    Interval b = m.predict_band(7.0);
    CHECK(b.lo == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(b.hi == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("interior points leave the fitted band area unchanged") {
    std::vector<std::pair<double, double>> pts{{0.0, 0.5}, {1.0, 2.0}, {2.0, 1.0},
                                               {3.0, 2.5}};
    IntervalPredictor m = fit_ipm(pts, 1, 32);
    const double area0 = band_area(m);

    // A point strictly inside the fitted band cannot change the optimum.
    const double r_new = 1.5;
    const double d_new = 0.5 * (m.upper_edge(r_new) + m.lower_edge(r_new));
    auto augmented = pts;
    augmented.emplace_back(r_new, d_new);
    IntervalPredictor m2 = fit_ipm(augmented, 1, 32);
    CHECK(band_area(m2) == doctest::Approx(area0).epsilon(1e-8));
}

TEST_CASE("input validation") {
    std::vector<std::pair<double, double>> same{{1.0, 0.5}, {1.0, 1.5}, {1.0, 2.0}};
    CHECK_THROWS_WITH(fit_ipm(same, 1, 16), "degenerate distance range");

    std::vector<std::pair<double, double>> few{{0.0, 1.0}, {1.0, 2.0}};
    CHECK_THROWS(fit_ipm(few, 1, 16));  // needs degree + 2 points

    std::vector<std::pair<double, double>> neg{{0.0, -1.0}, {1.0, 2.0}, {2.0, 0.5}};
    CHECK_THROWS(fit_ipm(neg, 1, 16));  // scores must be nonnegative
}

TEST_CASE("chebyshev basis endpoints") {
    // psi_j at the domain edges: T_j(-1) = (-1)^j and T_j(1) = 1.
    std::vector<double> at_min = chebyshev_basis(2.0, 3, 2.0, 6.0);
    std::vector<double> at_max = chebyshev_basis(6.0, 3, 2.0, 6.0);
    for (int j = 0; j <= 3; ++j) {
        CHECK(at_min[static_cast<std::size_t>(j)] ==
              doctest::Approx(j % 2 ? -1.0 : 1.0).epsilon(1e-12));
        CHECK(at_max[static_cast<std::size_t>(j)] == doctest::Approx(1.0).epsilon(1e-12));
    }
}
