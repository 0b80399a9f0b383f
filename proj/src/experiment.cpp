#include "cii/experiment.hpp"

#include "cii/parallel.hpp"
#include "cii/rng.hpp"
#include "cii/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace cii {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.name = d.name;
    out.feature_names = d.feature_names;
    out.target_name = d.target_name;
    out.features.reserve(rows.size());
    out.responses.reserve(rows.size());
    for (std::size_t i : rows) {
        out.features.push_back(d.features[i]);
        out.responses.push_back(d.responses[i]);
    }
    return out;
}

/// Central mass-probability interval of a precise CDF via breakpoint
/// quantiles (first breakpoint reaching the level).
Interval central_interval(const StepCdf& f, double mass) {
    const double a = (1.0 - mass) / 2.0;
    auto quantile = [&f](double p) {
        const auto& ps = f.levels();
        const auto& xs = f.breakpoints();
        for (std::size_t k = 0; k < ps.size(); ++k) {
            if (ps[k] >= p - 1e-12) return xs[k];
        }
        return xs.back();
    };
    return Interval(quantile(a), quantile(1.0 - a));
}

struct MethodEval {
    std::string name;
    std::vector<PBox> preds;      // band used for breadth and u-pooling
    std::vector<bool> hits;       // per-point coverage indicator
};

double sample_sd(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / double(v.size() - 1));
}

/// Metric rows for one (dataset, epsilon, repeat) cell and one subset of
/// evaluation indices.
void append_rows(std::vector<MetricRow>& rows, const std::string& dataset, double eps,
                 int rep, const std::string& regime, const std::vector<std::size_t>& idx,
                 const std::vector<double>& ys, const std::vector<MethodEval>& methods,
                 double q05, double q95,
                 std::map<std::string, std::vector<double>>* gamma_pool) {
    if (idx.empty()) return;
    std::vector<double> y_sub(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) y_sub[k] = ys[idx[k]];

    for (const MethodEval& m : methods) {
        MetricRow row;
        row.dataset = dataset;
        row.epsilon = eps;
        row.repeat = rep;
        row.regime = regime;
        row.method = m.name;
        row.n = idx.size();

        std::size_t hit_count = 0;
        std::vector<PBox> p_sub(idx.size());
        std::vector<double> gammas(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (m.hits[idx[k]]) ++hit_count;
            p_sub[k] = m.preds[idx[k]];
            gammas[k] = quantile_scaled_breadth(p_sub[k], q05, q95);
        }
        row.xi = double(hit_count) / double(idx.size());
        row.gamma_n_mean =
            std::accumulate(gammas.begin(), gammas.end(), 0.0) / double(gammas.size());
        row.gamma_n_sd = sample_sd(gammas, row.gamma_n_mean);
        UPoolResult up = u_pool(p_sub, y_sub);
        row.d_p = up.d_p;
        row.d_p_band = up.d_p_band;
        rows.push_back(std::move(row));

        if (gamma_pool != nullptr && m.name == "cii" && regime != "ALL") {
            std::string key = dataset + "|" + format_double(eps) + "|" + regime;
            auto& pool = (*gamma_pool)[key];
            pool.insert(pool.end(), gammas.begin(), gammas.end());
        }
    }
}

/// Distance-stratified coverage plus per-bin mean breadth for the CII rows.
void append_stratified(std::vector<StratifiedRow>& out, const std::string& dataset,
                       double eps, int rep, const std::vector<PBox>& preds,
                       const std::vector<double>& ys, const std::vector<double>& rs,
                       int n_bins, double q05, double q95) {
    std::vector<UncertainNumber> obs(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) obs[i] = Scalar{ys[i]};
    std::vector<BinCoverage> bins = stratified_coverage(preds, obs, rs, n_bins);

    const auto [mn_it, mx_it] = std::minmax_element(rs.begin(), rs.end());
    const double r_min = *mn_it;
    const double width = std::max(*mx_it - r_min, 1e-300);
    std::vector<double> gamma_sum(bins.size(), 0.0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        auto b = static_cast<std::size_t>(
            std::min<double>(std::floor((rs[i] - r_min) / width * n_bins), n_bins - 1));
        gamma_sum[b] += quantile_scaled_breadth(preds[i], q05, q95);
    }
    for (std::size_t b = 0; b < bins.size(); ++b) {
        StratifiedRow row;
        row.dataset = dataset;
        row.epsilon = eps;
        row.repeat = rep;
        row.bin = static_cast<int>(b);
        row.bin_lo = bins[b].bin_lo;
        row.bin_hi = bins[b].bin_hi;
        row.xi_b = bins[b].xi;
        row.count = bins[b].count;
        row.gamma_n_mean = bins[b].count == 0 ? kNaN : gamma_sum[b] / double(bins[b].count);
        out.push_back(std::move(row));
    }
}

struct CellPredictions {
    std::vector<PBox> cii;
    std::vector<PBox> env;
    std::vector<StepCdf> hetero;
    std::vector<double> rs;  // CII-model distance scores
};

CellPredictions predict_cell(const CiiModel& model, const BasePredictor& env_base,
                             const HeteroscedasticLeastSquares& hetero,
                             const std::vector<Eigen::VectorXd>& xs) {
    CellPredictions out;
    const std::size_t n = xs.size();
    out.cii.resize(n);
    out.env.resize(n);
    out.hetero.resize(n);
    out.rs.resize(n);
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic) if (num_threads() > 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        try {
            const auto idx = static_cast<std::size_t>(i);
            out.cii[idx] = predict_cii(model, xs[idx]);
            out.env[idx] = to_pbox(env_base.predict(xs[idx]));
            out.hetero[idx] = std::get<StepCdf>(hetero.predict(xs[idx]));
            out.rs[idx] = model.distance.score(xs[idx]);
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return out;
}

std::vector<MethodEval> build_method_evals(const CellPredictions& p,
                                           const std::vector<double>& ys) {
    const std::size_t n = ys.size();
    MethodEval cii{"cii", p.cii, std::vector<bool>(n)};
    MethodEval env{"bootstrap_envelope", p.env, std::vector<bool>(n)};
    MethodEval het{"hetero_ls", {}, std::vector<bool>(n)};
    het.preds.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        cii.hits[i] = covers(p.cii[i], Scalar{ys[i]});
        env.hits[i] = covers(p.env[i], Scalar{ys[i]});
        // precise baseline: coverage of the central 95% predictive interval
        het.hits[i] = central_interval(p.hetero[i], 0.95).contains(ys[i]);
        het.preds[i] = PBox(p.hetero[i], p.hetero[i]);
    }
    return {std::move(cii), std::move(env), std::move(het)};
}

std::string csv_field(double v) {
    return std::isnan(v) ? std::string("NA") : format_double(v);
}

}  // namespace

SplitResult extrapolation_split(const Dataset& d, std::pair<int, int> ratio,
                                std::uint64_t /*seed*/, MetricKind metric) {
    if (ratio.first <= 0 || ratio.second <= 0) {
        throw std::invalid_argument("split ratio parts must be positive");
    }
    const std::size_t n = d.size();
    if (n < 10) throw std::invalid_argument("need at least 10 rows to split");

    DistanceModel provisional = fit_distance(d.features, metric);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) scores[i] = provisional.score(d.features[i]);
    const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
    if (!(*mx > *mn)) {
        throw std::runtime_error("degenerate distance scores: all rows equidistant");
    }

    const double frac = double(ratio.first) / double(ratio.first + ratio.second);
    auto n_train = static_cast<std::size_t>(std::llround(frac * double(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

    // score-quantile threshold with ties broken by row order
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    std::vector<std::size_t> train_idx(order.begin(), order.begin() + n_train);
    std::vector<std::size_t> holdout_idx(order.begin() + n_train, order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(holdout_idx.begin(), holdout_idx.end());

    SplitResult res;
    res.train = take_rows(d, train_idx);
    res.holdout = take_rows(d, holdout_idx);
    res.operational = fit_distance(res.train.features, metric);
    res.holdout_is_id.resize(holdout_idx.size());
    for (std::size_t i = 0; i < holdout_idx.size(); ++i) {
        res.holdout_is_id[i] = !res.operational.is_extrapolation(res.holdout.features[i]);
    }
    return res;
}

Dataset subsample_train(const Dataset& train, double epsilon, std::uint64_t seed) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw std::invalid_argument("subsample proportion must lie in (0, 1]");
    }
    const std::size_t n = train.size();
    const auto k = static_cast<std::size_t>(std::llround(epsilon * double(n)));
    if (k < 10) throw std::runtime_error("insufficient training data");
    if (k >= n) return train;

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 gen(seed);
    std::shuffle(idx.begin(), idx.end(), gen);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return take_rows(train, idx);
}

std::vector<AggregateRow> aggregate_rows(const std::vector<MetricRow>& rows) {
    using Key = std::tuple<std::string, double, std::string, std::string>;
    std::map<Key, std::vector<const MetricRow*>> groups;
    for (const MetricRow& r : rows) {
        groups[Key{r.dataset, r.epsilon, r.regime, r.method}].push_back(&r);
    }
    std::vector<AggregateRow> out;
    out.reserve(groups.size());
    for (const auto& [key, members] : groups) {
        AggregateRow a;
        std::tie(a.dataset, a.epsilon, a.regime, a.method) = key;
        a.n_repeats = members.size();
        auto stats = [&members](double MetricRow::* field, double& mean, double& se) {
            std::vector<double> vals;
            vals.reserve(members.size());
            for (const MetricRow* m : members) vals.push_back(m->*field);
            mean = std::accumulate(vals.begin(), vals.end(), 0.0) / double(vals.size());
            se = vals.size() < 2 ? kNaN
                                 : sample_sd(vals, mean) / std::sqrt(double(vals.size()));
        };
        stats(&MetricRow::xi, a.xi_mean, a.xi_se);
        stats(&MetricRow::gamma_n_mean, a.gamma_mean, a.gamma_se);
        stats(&MetricRow::d_p, a.d_p_mean, a.d_p_se);
        out.push_back(std::move(a));
    }
    return out;
}

ExperimentReport run_cubic(const ExperimentConfig& config) {
    ExperimentReport report;
    const std::string name = "cubic_toy";

    for (int rep = 0; rep < config.n_repeats; ++rep) {
        const std::uint64_t s = derive_seed(config.seed, name, 1.0, rep);
        std::mt19937_64 gen(s);
        std::uniform_real_distribution<double> ux(-4.0, 4.0);
        std::normal_distribution<double> unit_noise(0.0, 1.0);
        auto noise = [&]() {
            return config.toy_noise_sd > 0.0 ? config.toy_noise_sd * unit_noise(gen) : 0.0;
        };

        std::vector<Eigen::VectorXd> train_x(static_cast<std::size_t>(config.toy_train_size));
        std::vector<double> train_y(train_x.size());
        for (std::size_t i = 0; i < train_x.size(); ++i) {
            const double x = ux(gen);
            train_x[i] = Eigen::VectorXd::Constant(1, x);
            train_y[i] = x * x * x + noise();
        }

        const auto n_test = static_cast<std::size_t>(config.toy_test_size);
        std::vector<Eigen::VectorXd> test_x(n_test);
        std::vector<double> test_y(n_test);
        for (std::size_t j = 0; j < n_test; ++j) {
            const double x = -8.0 + 16.0 * double(j) / double(n_test - 1);
            test_x[j] = Eigen::VectorXd::Constant(1, x);
            test_y[j] = x * x * x + noise();
        }

        auto env_base =
            fit_bootstrap_envelope(train_x, train_y, config.n_members,
                                   config.toy_feature_degree, mix_seed(s ^ 0xb001), true);
        auto hetero = fit_hetero_ls(train_x, train_y, config.toy_feature_degree);

        CiiConfig cc;
        cc.ipm_degree = config.ipm_degree;
        cc.ipm_grid = config.ipm_grid;
        cc.n_cal = config.n_cal;
        cc.boundary_fraction = config.boundary_fraction;
        cc.n_strata = config.n_strata;
        cc.ridge = config.ridge;
        cc.metric = config.metric;
        cc.support_margin = config.toy_support_margin;
        cc.query_grid_points = config.query_grid_points;
        cc.seed = mix_seed(s ^ 0xc11a);
        CiiModel model = fit_cii(train_x, train_y, env_base, cc);

        CellPredictions pred = predict_cell(model, *env_base, *hetero, test_x);
        std::vector<MethodEval> methods = build_method_evals(pred, test_y);

        const double q05 = empirical_quantile(train_y, 0.05);
        const double q95 = empirical_quantile(train_y, 0.95);

        std::vector<std::size_t> all_idx(n_test), id_idx, ood_idx;
        std::iota(all_idx.begin(), all_idx.end(), 0);
        for (std::size_t j = 0; j < n_test; ++j) {
            (pred.rs[j] <= model.distance.r0() ? id_idx : ood_idx).push_back(j);
        }
        append_rows(report.rows, name, 1.0, rep, "ALL", all_idx, test_y, methods, q05, q95,
                    nullptr);
        append_rows(report.rows, name, 1.0, rep, "ID", id_idx, test_y, methods, q05, q95,
                    &report.gamma_values);
        append_rows(report.rows, name, 1.0, rep, "OOD", ood_idx, test_y, methods, q05, q95,
                    &report.gamma_values);
        append_stratified(report.stratified, name, 1.0, rep, pred.cii, test_y, pred.rs,
                          config.n_bins, q05, q95);

        if (rep == 0) {
            for (const MethodEval& m : methods) {
                std::vector<BandRow>& band = report.bands[name + "_" + m.name];
                band.resize(n_test);
                for (std::size_t j = 0; j < n_test; ++j) {
                    Interval ri = m.name == "hetero_ls"
                                      ? central_interval(pred.hetero[j], 0.95)
                                      : range_interval(m.preds[j]);
                    band[j] = BandRow{test_x[j](0), ri.lo, ri.hi, test_y[j]};
                }
            }
        }
    }

    report.manifest["protocol"] = name;
    report.manifest["config"]["seed"] = config.seed;
    report.manifest["config"]["n_repeats"] = config.n_repeats;
    report.manifest["config"]["train_size"] = config.toy_train_size;
    report.manifest["config"]["test_size"] = config.toy_test_size;
    report.manifest["config"]["noise_sd"] = config.toy_noise_sd;
    report.manifest["config"]["support_margin"] = config.toy_support_margin;
    report.manifest["config"]["ipm_degree"] = config.ipm_degree;
    report.manifest["notes"]["scaling"] =
        "breadth scaled by the 5%-95% interquantile range of each repeat's training sample";
    return report;
}

ExperimentReport run_benchmark(const std::vector<std::string>& dataset_paths,
                               const std::string& target_column,
                               const ExperimentConfig& config) {
    for (double eps : config.epsilons) {
        if (!(eps > 0.0 && eps <= 1.0)) {
            throw std::invalid_argument("subsample proportion must lie in (0, 1]");
        }
    }
    ExperimentReport report;
    report.manifest["errors"] = nlohmann::json::array();

    for (const std::string& path : dataset_paths) {
        Dataset ds;
        try {
            ds = ingest_csv(path, target_column);
        } catch (const std::exception& e) {
            report.manifest["errors"].push_back({{"dataset", path}, {"error", e.what()}});
            continue;
        }
        report.manifest["datasets"][ds.name] = {
            {"path", path},
            {"rows", ds.size()},
            {"dropped_rows", ds.dropped_rows},
            {"digest", dataset_digest(ds)},
        };
        const double q05 = empirical_quantile(ds.responses, 0.05);
        const double q95 = empirical_quantile(ds.responses, 0.95);

        try {
            for (double eps : config.epsilons) {
                for (int rep = 0; rep < config.n_repeats; ++rep) {
                    const std::uint64_t s = derive_seed(config.seed, ds.name, eps, rep);
                    SplitResult split =
                        extrapolation_split(ds, config.split_ratio, s, config.metric);
                    Dataset train = subsample_train(split.train, eps, mix_seed(s ^ 0x5b5b));

                    auto env_base = fit_bootstrap_envelope(
                        train.features, train.responses, config.n_members,
                        config.feature_degree, mix_seed(s ^ 0xe27e), true);
                    auto hetero =
                        fit_hetero_ls(train.features, train.responses, config.feature_degree);

                    CiiConfig cc;
                    cc.ipm_degree = config.ipm_degree;
                    cc.ipm_grid = config.ipm_grid;
                    cc.n_cal = config.n_cal;
                    cc.boundary_fraction = config.boundary_fraction;
                    cc.n_strata = config.n_strata;
                    cc.ridge = config.ridge;
                    cc.metric = config.metric;
                    cc.support_margin = config.support_margin;
                    cc.query_grid_points = config.query_grid_points;
                    cc.seed = mix_seed(s ^ 0xc11b);
                    CiiModel model = fit_cii(train.features, train.responses, env_base, cc);

                    CellPredictions pred =
                        predict_cell(model, *env_base, *hetero, split.holdout.features);
                    std::vector<MethodEval> methods =
                        build_method_evals(pred, split.holdout.responses);

                    std::vector<std::size_t> id_idx, ood_idx;
                    for (std::size_t i = 0; i < split.holdout_is_id.size(); ++i) {
                        (split.holdout_is_id[i] ? id_idx : ood_idx).push_back(i);
                    }
                    append_rows(report.rows, ds.name, eps, rep, "ID", id_idx,
                                split.holdout.responses, methods, q05, q95,
                                &report.gamma_values);
                    append_rows(report.rows, ds.name, eps, rep, "OOD", ood_idx,
                                split.holdout.responses, methods, q05, q95,
                                &report.gamma_values);
                    append_stratified(report.stratified, ds.name, eps, rep, pred.cii,
                                      split.holdout.responses, pred.rs, config.n_bins, q05,
                                      q95);
                }
            }
        } catch (const std::exception& e) {
            report.manifest["errors"].push_back({{"dataset", ds.name}, {"error", e.what()}});
        }
    }

    report.manifest["protocol"] = "benchmark";
    report.manifest["config"]["seed"] = config.seed;
    report.manifest["config"]["epsilons"] = config.epsilons;
    report.manifest["config"]["n_repeats"] = config.n_repeats;
    report.manifest["config"]["split_ratio"] = {config.split_ratio.first,
                                                config.split_ratio.second};
    report.manifest["config"]["ipm_degree"] = config.ipm_degree;
    report.manifest["config"]["n_cal"] =
        config.n_cal ? nlohmann::json(*config.n_cal) : nlohmann::json(nullptr);
    report.manifest["config"]["boundary_fraction"] = config.boundary_fraction;
    report.manifest["config"]["n_bins"] = config.n_bins;
    report.manifest["config"]["feature_degree"] = config.feature_degree;
    report.manifest["config"]["n_members"] = config.n_members;
    report.manifest["config"]["support_margin"] = config.support_margin;
    report.manifest["notes"]["splitting"] =
        "provisional distance fit on the full data sets the quantile threshold; the "
        "operational model is refit on the train part and its r0 defines the ID/OOD labels";
    report.manifest["notes"]["uncertainty_column"] =
        "plus/minus columns are standard errors over repeats";
    report.manifest["notes"]["scaling"] =
        "breadth scaled by the 5%-95% interquantile range of the full response sample";
    return report;
}

void emit_report(const ExperimentReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "bands", ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir);

    auto open = [&out_dir](const std::string& file) {
        std::ofstream f(fs::path(out_dir) / file);
        if (!f) throw std::runtime_error("cannot write " + file + " in " + out_dir);
        return f;
    };

    std::vector<MetricRow> rows = report.rows;
    std::sort(rows.begin(), rows.end(), [](const MetricRow& a, const MetricRow& b) {
        return std::tie(a.dataset, a.epsilon, a.repeat, a.regime, a.method) <
               std::tie(b.dataset, b.epsilon, b.repeat, b.regime, b.method);
    });
    {
        std::ofstream f = open("rows.csv");
        f << "dataset,epsilon,repeat,regime,method,n,xi,gamma_n_mean,gamma_n_sd,d_p,d_p_band\n";
        for (const MetricRow& r : rows) {
            f << r.dataset << ',' << format_double(r.epsilon) << ',' << r.repeat << ','
              << r.regime << ',' << r.method << ',' << r.n << ',' << csv_field(r.xi) << ','
              << csv_field(r.gamma_n_mean) << ',' << csv_field(r.gamma_n_sd) << ','
              << csv_field(r.d_p) << ',' << csv_field(r.d_p_band) << '\n';
        }
    }
    {
        std::ofstream f = open("summary.csv");
        f << "dataset,epsilon,regime,method,n_repeats,xi_mean,xi_se,gamma_mean,gamma_se,"
             "d_p_mean,d_p_se\n";
        for (const AggregateRow& a : aggregate_rows(rows)) {
            f << a.dataset << ',' << format_double(a.epsilon) << ',' << a.regime << ','
              << a.method << ',' << a.n_repeats << ',' << csv_field(a.xi_mean) << ','
              << csv_field(a.xi_se) << ',' << csv_field(a.gamma_mean) << ','
              << csv_field(a.gamma_se) << ',' << csv_field(a.d_p_mean) << ','
              << csv_field(a.d_p_se) << '\n';
        }
    }
    {
        std::vector<StratifiedRow> strat = report.stratified;
        std::sort(strat.begin(), strat.end(),
                  [](const StratifiedRow& a, const StratifiedRow& b) {
                      return std::tie(a.dataset, a.epsilon, a.repeat, a.bin) <
                             std::tie(b.dataset, b.epsilon, b.repeat, b.bin);
                  });
        std::ofstream f = open("stratified.csv");
        f << "dataset,epsilon,repeat,bin,bin_lo,bin_hi,count,xi_b,gamma_n_mean\n";
        for (const StratifiedRow& r : strat) {
            f << r.dataset << ',' << format_double(r.epsilon) << ',' << r.repeat << ','
              << r.bin << ',' << format_double(r.bin_lo) << ',' << format_double(r.bin_hi)
              << ',' << r.count << ',' << csv_field(r.xi_b) << ','
              << csv_field(r.gamma_n_mean) << '\n';
        }
    }
    {
        std::ofstream f = open("gamma_ecdf.csv");
        f << "dataset,epsilon,regime,gamma_n,level\n";
        for (const auto& [key, values] : report.gamma_values) {
            std::string dataset, eps, regime;
            std::stringstream ks(key);
            std::getline(ks, dataset, '|');
            std::getline(ks, eps, '|');
            std::getline(ks, regime, '|');
            std::vector<double> sorted = values;
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t i = 0; i < sorted.size(); ++i) {
                f << dataset << ',' << eps << ',' << regime << ','
                  << format_double(sorted[i]) << ','
                  << format_double(double(i + 1) / double(sorted.size())) << '\n';
            }
        }
    }
    for (const auto& [name, band] : report.bands) {
        std::ofstream f(fs::path(out_dir) / "bands" / (name + ".csv"));
        if (!f) throw std::runtime_error("cannot write band file for " + name);
        f << "x,lo,hi,obs\n";
        for (const BandRow& r : band) {
            f << format_double(r.x) << ',' << format_double(r.lo) << ','
              << format_double(r.hi) << ',' << format_double(r.obs) << '\n';
        }
    }
    {
        std::ofstream f = open("manifest.json");
        f << report.manifest.dump(2) << '\n';
    }
}

std::vector<MetricRow> load_rows_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty rows file " + path);

    std::vector<MetricRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 11) throw std::runtime_error("malformed row in " + path);
        MetricRow r;
        r.dataset = cells[0];
        r.epsilon = std::stod(cells[1]);
        r.repeat = std::stoi(cells[2]);
        r.regime = cells[3];
        r.method = cells[4];
        r.n = std::stoul(cells[5]);
        auto num = [](const std::string& s) { return s == "NA" ? kNaN : std::stod(s); };
        r.xi = num(cells[6]);
        r.gamma_n_mean = num(cells[7]);
        r.gamma_n_sd = num(cells[8]);
        r.d_p = num(cells[9]);
        r.d_p_band = num(cells[10]);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace cii
