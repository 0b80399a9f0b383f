#pragma once

#include "cii/conformal.hpp"
#include "cii/dataset.hpp"
#include "cii/metrics.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cii {

/// Distance-quantile split into low-distance train and high-distance
/// holdout parts, with ID/OOD flags from the refitted training model.
struct SplitResult {
    Dataset train;
    Dataset holdout;
    std::vector<bool> holdout_is_id;
    DistanceModel operational;  // refit on the train part
};

SplitResult extrapolation_split(const Dataset& d, std::pair<int, int> ratio,
                                std::uint64_t seed,
                                MetricKind metric = MetricKind::Mahalanobis);

/// Uniform random subset of round(epsilon * n) rows, minimum 10.
Dataset subsample_train(const Dataset& train, double epsilon, std::uint64_t seed);

struct ExperimentConfig {
    std::uint64_t seed = 42;
    std::vector<double> epsilons{0.1, 0.3, 0.5, 0.7, 0.9};
    int n_repeats = 20;
    std::pair<int, int> split_ratio{3, 7};

    // linear-in-distance discrepancy band: keeps the fitted band edges
    // monotone so imprecision grows with the distance score
    int ipm_degree = 1;
    int ipm_grid = 64;
    std::optional<std::size_t> n_cal;
    double boundary_fraction = 0.3;
    int n_strata = 10;
    int n_bins = 10;
    MetricKind metric = MetricKind::Mahalanobis;
    std::optional<double> ridge;
    double support_margin = 3.0;
    int query_grid_points = 128;
    bool run_baselines = true;

    int feature_degree = 1;  // base predictors on benchmark datasets
    int n_members = 10;

    // cubic-toy protocol
    int toy_train_size = 40;
    int toy_test_size = 200;
    double toy_noise_sd = 3.0;
    int toy_feature_degree = 3;
    double toy_support_margin = 10.0;
};

struct MetricRow {
    std::string dataset;
    double epsilon = 1.0;
    int repeat = 0;
    std::string regime;  // ID, OOD, or ALL
    std::string method;
    std::size_t n = 0;
    double xi = 0.0;
    double gamma_n_mean = 0.0;
    double gamma_n_sd = 0.0;
    double d_p = 0.0;
    double d_p_band = 0.0;
};

struct AggregateRow {
    std::string dataset;
    double epsilon = 1.0;
    std::string regime;
    std::string method;
    std::size_t n_repeats = 0;
    double xi_mean = 0.0, xi_se = 0.0;
    double gamma_mean = 0.0, gamma_se = 0.0;
    double d_p_mean = 0.0, d_p_se = 0.0;
};

struct StratifiedRow {
    std::string dataset;
    double epsilon = 1.0;
    int repeat = 0;
    int bin = 0;
    double bin_lo = 0.0, bin_hi = 0.0;
    double xi_b = 0.0;  // NaN when empty
    double gamma_n_mean = 0.0;
    std::size_t count = 0;
};

struct BandRow {
    double x = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double obs = 0.0;
};

struct ExperimentReport {
    std::vector<MetricRow> rows;
    std::vector<StratifiedRow> stratified;
    std::map<std::string, std::vector<BandRow>> bands;
    // pooled CII gamma_n samples keyed "dataset|epsilon|regime"
    std::map<std::string, std::vector<double>> gamma_values;
    nlohmann::json manifest;
};

/// Mean and standard error per (dataset, epsilon, regime, method) group,
/// exactly recomputable from the emitted rows.
std::vector<AggregateRow> aggregate_rows(const std::vector<MetricRow>& rows);

/// Cubic-function toy protocol: small training sample, prediction far
/// beyond the training support, fresh noisy test observations.
ExperimentReport run_cubic(const ExperimentConfig& config);

/// Benchmark sweep: per dataset x epsilon x repeat, distance-quantile split,
/// train subsampling, baseline + CII fits, and ID/OOD evaluation.
ExperimentReport run_benchmark(const std::vector<std::string>& dataset_paths,
                               const std::string& target_column,
                               const ExperimentConfig& config);

/// Write rows.csv, summary.csv, stratified.csv, gamma_ecdf.csv, bands/*.csv
/// and manifest.json; byte-stable for identical inputs.
void emit_report(const ExperimentReport& report, const std::string& out_dir);

/// Reload rows.csv (round-trip check for the aggregates).
std::vector<MetricRow> load_rows_csv(const std::string& path);

}  // namespace cii
