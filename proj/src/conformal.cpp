#include "cii/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cii {

std::vector<std::size_t> select_calibration(const std::vector<double>& distance_scores,
                                            std::size_t n_cal, double boundary_fraction,
                                            int n_strata, std::uint64_t seed) {
    const std::size_t n = distance_scores.size();
    if (n_cal > n) throw std::invalid_argument("n_cal exceeds available records");
    if (boundary_fraction < 0.0 || boundary_fraction > 1.0) {
        throw std::invalid_argument("boundary_fraction must lie in [0,1]");
    }
    if (n_strata < 1) throw std::invalid_argument("need at least one stratum");
    if (n_cal == n) {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
    }

    const std::size_t n_strat =
        static_cast<std::size_t>(std::floor(double(n_cal) * (1.0 - boundary_fraction)));
    const std::size_t n_boundary = n_cal - n_strat;

    std::vector<bool> chosen(n, false);
    std::mt19937_64 rng(seed);

    if (n_strat > 0) {
        const double r_min = *std::min_element(distance_scores.begin(), distance_scores.end());
        const double r_max = *std::max_element(distance_scores.begin(), distance_scores.end());
        const double width = std::max(r_max - r_min, 1e-300);
        std::vector<std::vector<std::size_t>> bins(static_cast<std::size_t>(n_strata));
        for (std::size_t i = 0; i < n; ++i) {
            auto b = static_cast<std::size_t>(
                std::min<double>(std::floor((distance_scores[i] - r_min) / width *
                                            n_strata),
                                 n_strata - 1));
            bins[b].push_back(i);
        }
        // proportional allocation via largest remainder
        std::vector<std::size_t> take(bins.size(), 0);
        std::vector<std::pair<double, std::size_t>> rema;
        std::size_t assigned = 0;
        for (std::size_t b = 0; b < bins.size(); ++b) {
            const double exact = double(n_strat) * double(bins[b].size()) / double(n);
            take[b] = std::min<std::size_t>(static_cast<std::size_t>(std::floor(exact)),
                                            bins[b].size());
            assigned += take[b];
            rema.emplace_back(exact - std::floor(exact), b);
        }
        std::stable_sort(rema.begin(), rema.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (const auto& [rem, b] : rema) {
            if (assigned >= n_strat) break;
            if (take[b] < bins[b].size()) {
                ++take[b];
                ++assigned;
            }
        }
        // top up from any bin with spare capacity if rounding fell short
        for (std::size_t b = 0; b < bins.size() && assigned < n_strat; ++b) {
            while (take[b] < bins[b].size() && assigned < n_strat) {
                ++take[b];
                ++assigned;
            }
        }
        for (std::size_t b = 0; b < bins.size(); ++b) {
            std::vector<std::size_t> pool = bins[b];
            std::shuffle(pool.begin(), pool.end(), rng);
            for (std::size_t k = 0; k < take[b]; ++k) chosen[pool[k]] = true;
        }
    }

    // boundary emphasis: the largest-distance records not already chosen
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return distance_scores[a] > distance_scores[b];
    });
    std::size_t added = 0;
    for (std::size_t i = 0; i < n && added < n_boundary; ++i) {
        if (!chosen[order[i]]) {
            chosen[order[i]] = true;
            ++added;
        }
    }

    std::vector<std::size_t> out;
    out.reserve(n_cal);
    for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) out.push_back(i);
    }
    return out;
}

std::vector<CalibrationRecord> conformal_scores(
    const std::vector<Eigen::VectorXd>& inputs,
    const std::vector<UncertainNumber>& observations,
    const std::vector<std::size_t>& rows, const BasePredictor& base,
    const DistanceModel& dm) {
    if (inputs.size() != observations.size()) {
        throw std::invalid_argument("inputs/observations size mismatch");
    }
    std::vector<CalibrationRecord> records;
    records.reserve(inputs.size());
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const std::size_t row = rows.empty() ? k : rows[k];
        CalibrationRecord rec;
        rec.index = row;
        rec.r = dm.score(inputs[k]);
        rec.d = area_metric(to_pbox(base.predict_row(row, inputs[k])),
                            to_pbox(observations[k]));
        records.push_back(rec);
    }
    return records;
}

CiiModel fit_cii(const std::vector<Eigen::VectorXd>& inputs,
                 const std::vector<double>& responses,
                 std::shared_ptr<const BasePredictor> base, const CiiConfig& config) {
    if (inputs.size() != responses.size() || inputs.empty()) {
        throw std::invalid_argument("inputs/responses size mismatch");
    }
    if (!base) throw std::invalid_argument("base predictor required");

    CiiModel m;
    m.distance = fit_distance(inputs, config.metric, config.ridge);
    m.base = std::move(base);
    m.query_grid_points = config.query_grid_points;

    std::vector<double> rs;
    rs.reserve(inputs.size());
    for (const auto& x : inputs) rs.push_back(m.distance.score(x));

    const std::size_t n_cal = config.n_cal.value_or(inputs.size());
    std::vector<std::size_t> cal_idx = select_calibration(
        rs, n_cal, config.boundary_fraction, config.n_strata, config.seed);

    std::vector<Eigen::VectorXd> cal_x;
    std::vector<UncertainNumber> cal_y;
    cal_x.reserve(cal_idx.size());
    cal_y.reserve(cal_idx.size());
    for (std::size_t i : cal_idx) {
        cal_x.push_back(inputs[i]);
        cal_y.push_back(Scalar{responses[i]});
    }
    m.calibration = conformal_scores(cal_x, cal_y, cal_idx, *m.base, m.distance);

    std::vector<std::pair<double, double>> points;
    points.reserve(m.calibration.size());
    for (const auto& rec : m.calibration) points.emplace_back(rec.r, rec.d);
    m.ipm = fit_ipm(points, config.ipm_degree, config.ipm_grid);

    if (config.support_override) {
        m.constraints.support = *config.support_override;
    } else {
        const auto [mn, mx] = std::minmax_element(responses.begin(), responses.end());
        const double span = std::max(*mx - *mn, 1e-6 * (std::abs(*mn) + 1.0));
        m.constraints.support = Interval(*mn - config.support_margin * span,
                                         *mx + config.support_margin * span);
    }
    return m;
}

PBox predict_cii(const CiiModel& m, const Eigen::VectorXd& x,
                 std::optional<std::size_t> row) {
    const double budget = adjusted_discrepancy(m.ipm, m.distance, x);
    const UncertainNumber raw =
        row ? m.base->predict_row(*row, x) : m.base->predict(x);
    const PBox base_box = to_pbox(raw);
    const std::vector<double> grid =
        default_query_grid(base_box, m.constraints, m.query_grid_points);
    return ascloseas(base_box, budget, m.constraints, grid);
}

}  // namespace cii
