#pragma once

#include "cii/basepredict.hpp"
#include "cii/distance.hpp"
#include "cii/ipm.hpp"
#include "cii/transport.hpp"
#include "cii/uncertain.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace cii {

/// (distance score, conformal score) pair for one calibration point.
struct CalibrationRecord {
    std::size_t index = 0;
    double r = 0.0;
    double d = 0.0;
};

struct CiiConfig {
    int ipm_degree = 2;
    int ipm_grid = 64;
    std::optional<std::size_t> n_cal;  // default: every training point
    double boundary_fraction = 0.3;
    int n_strata = 10;
    std::optional<double> ridge;
    MetricKind metric = MetricKind::Mahalanobis;
    double support_margin = 3.0;               // response-range multiples
    std::optional<Interval> support_override;  // replaces the data-driven default
    int query_grid_points = 128;
    std::uint64_t seed = 0;
};

struct CiiModel {
    DistanceModel distance;
    IntervalPredictor ipm;
    BallConstraints constraints;
    std::shared_ptr<const BasePredictor> base;
    std::vector<CalibrationRecord> calibration;
    int query_grid_points = 128;
};

/// Hybrid calibration-subset selection: stratified sampling over equal-width
/// distance bins plus the largest-distance points for boundary emphasis.
/// Returned indices are unique and sorted.
std::vector<std::size_t> select_calibration(const std::vector<double>& distance_scores,
                                            std::size_t n_cal, double boundary_fraction,
                                            int n_strata, std::uint64_t seed);

/// Conformal scores over a calibration set: r = distance score, d = area
/// metric between the base prediction and the observation.
std::vector<CalibrationRecord> conformal_scores(
    const std::vector<Eigen::VectorXd>& inputs,
    const std::vector<UncertainNumber>& observations,
    const std::vector<std::size_t>& rows, const BasePredictor& base,
    const DistanceModel& dm);

/// End-to-end fit: distance model, calibration subset, conformal scores,
/// interval predictor, support constraint.
CiiModel fit_cii(const std::vector<Eigen::VectorXd>& inputs,
                 const std::vector<double>& responses,
                 std::shared_ptr<const BasePredictor> base, const CiiConfig& config);

/// Conformalised p-box: the ascloseas ball of adjusted radius around the
/// base prediction. Contains the base prediction for every query.
PBox predict_cii(const CiiModel& m, const Eigen::VectorXd& x,
                 std::optional<std::size_t> row = std::nullopt);

}  // namespace cii
