// Command-line front end: experiment protocols, model fitting/prediction,
// and the external-prediction file round trip.

#include "cii/conformal.hpp"
#include "cii/dataset.hpp"
#include "cii/experiment.hpp"
#include "cii/parallel.hpp"
#include "cii/serialize.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace {

std::pair<int, int> parse_ratio(const std::string& s) {
    const auto pos = s.find(':');
    if (pos == std::string::npos || pos == 0 || pos + 1 >= s.size()) {
        throw CLI::ValidationError("--ratio", "expected the form A:B, e.g. 3:7");
    }
    try {
        const int a = std::stoi(s.substr(0, pos));
        const int b = std::stoi(s.substr(pos + 1));
        if (a <= 0 || b <= 0) throw std::invalid_argument("nonpositive");
        return {a, b};
    } catch (const std::exception&) {
        throw CLI::ValidationError("--ratio", "parts must be positive integers");
    }
}

struct CommonOpts {
    cii::ExperimentConfig config;
    std::string ratio = "3:7";
    std::string out_dir = "out";
    long long n_cal = -1;
};

void add_common_flags(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--seed", o.config.seed, "master RNG seed");
    sub->add_option("--repeats", o.config.n_repeats, "repetitions per cell")
        ->check(CLI::PositiveNumber);
    sub->add_option("--ratio", o.ratio, "train:holdout distance-quantile ratio (A:B)");
    sub->add_option("--degree", o.config.ipm_degree, "discrepancy-band polynomial degree")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--n-cal", o.n_cal, "calibration subset size (default: all)");
    sub->add_option("--boundary-fraction", o.config.boundary_fraction,
                    "calibration fraction reserved for the largest distances")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--bins", o.config.n_bins, "distance bins for stratified coverage")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--threads", [](const std::vector<std::string>& vals) {
        cii::set_num_threads(std::stoi(vals.front()));
        return true;
    }, "worker threads (1 = serial reference, 0 = all cores)");
    sub->set_config("--config", "", "flat key=value config file (flags override it)");
}

void finalize_config(CommonOpts& o) {
    o.config.split_ratio = parse_ratio(o.ratio);
    if (o.n_cal >= 0) o.config.n_cal = static_cast<std::size_t>(o.n_cal);
    o.config.n_strata = o.config.n_bins;
}

void print_summary(const cii::ExperimentReport& report) {
    for (const auto& agg : cii::aggregate_rows(report.rows)) {
        std::printf("%-14s eps=%.2f %-4s %-18s xi=%.4f gamma_n=%.4f d_p=%.4f\n",
                    agg.dataset.c_str(), agg.epsilon, agg.regime.c_str(),
                    agg.method.c_str(), agg.xi_mean, agg.gamma_mean, agg.d_p_mean);
    }
}

std::shared_ptr<const cii::BasePredictor> fit_base(const cii::Dataset& train,
                                                   const std::string& kind,
                                                   int feature_degree, int members,
                                                   std::uint64_t seed) {
    if (kind == "hetero_ls") {
        return cii::fit_hetero_ls(train.features, train.responses, feature_degree);
    }
    if (kind == "bootstrap_envelope") {
        return cii::fit_bootstrap_envelope(train.features, train.responses, members,
                                           feature_degree, seed);
    }
    throw std::runtime_error("unknown base predictor '" + kind +
                             "' (expected hetero_ls or bootstrap_envelope)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distance-aware conformal p-box prediction toolkit"};
    app.require_subcommand(1);

    // --- toy -------------------------------------------------------------
    CommonOpts toy_opts;
    toy_opts.out_dir = "toy_out";
    CLI::App* toy = app.add_subcommand("toy", "cubic-function toy experiment");
    add_common_flags(toy, toy_opts);
    toy->add_option("--noise-sd", toy_opts.config.toy_noise_sd,
                    "observation noise standard deviation")
        ->check(CLI::NonNegativeNumber);

    // --- bench -----------------------------------------------------------
    CommonOpts bench_opts;
    bench_opts.out_dir = "bench_out";
    std::vector<std::string> bench_paths;
    std::string bench_target = "target";
    CLI::App* bench = app.add_subcommand("bench", "benchmark sweep over CSV datasets");
    bench->add_option("datasets", bench_paths, "dataset CSV paths")->required();
    bench->add_option("--target", bench_target, "target column (name or index)");
    bench->add_option("--epsilon", bench_opts.config.epsilons,
                      "training proportions to sweep")
        ->expected(-1);
    add_common_flags(bench, bench_opts);

    // --- predict ---------------------------------------------------------
    CommonOpts pred_opts;
    std::string pred_train, pred_model_in, pred_data, pred_target = "target";
    std::string pred_out = "predictions.jsonl", pred_save_model;
    std::string pred_base = "hetero_ls";
    int pred_feature_degree = 1, pred_members = 10;
    CLI::App* predict =
        app.add_subcommand("predict", "fit or load a model and predict a CSV");
    predict->add_option("--train", pred_train, "training CSV (fits a fresh model)");
    predict->add_option("--model", pred_model_in, "saved model file to load instead");
    predict->add_option("--data", pred_data, "CSV of query rows")->required();
    predict->add_option("--target", pred_target, "target column (name or index)");
    predict->add_option("--base", pred_base,
                        "base predictor: hetero_ls or bootstrap_envelope");
    predict->add_option("--feature-degree", pred_feature_degree,
                        "base-predictor polynomial degree");
    predict->add_option("--members", pred_members, "ensemble members");
    predict->add_option("--save-model", pred_save_model, "write the fitted model here");
    predict->add_option("--out", pred_out, "output prediction file");
    predict->add_option("--seed", pred_opts.config.seed, "master RNG seed");
    predict->add_option("--degree", pred_opts.config.ipm_degree,
                        "discrepancy-band polynomial degree");
    predict->add_option("--n-cal", pred_opts.n_cal, "calibration subset size");
    predict->add_option("--boundary-fraction", pred_opts.config.boundary_fraction,
                        "boundary-emphasis calibration fraction");
    predict->add_option("--bins", pred_opts.config.n_bins, "calibration strata");
    predict->set_config("--config", "", "flat key=value config file");

    // --- dump-base -------------------------------------------------------
    std::string dump_train, dump_data, dump_target = "target";
    std::string dump_out = "base_predictions.jsonl", dump_kind = "bootstrap_envelope";
    int dump_feature_degree = 1, dump_members = 10;
    std::uint64_t dump_seed = 42;
    CLI::App* dump = app.add_subcommand(
        "dump-base", "fit a base predictor and dump its raw predictions");
    dump->add_option("--train", dump_train, "training CSV")->required();
    dump->add_option("--data", dump_data, "CSV of query rows")->required();
    dump->add_option("--target", dump_target, "target column (name or index)");
    dump->add_option("--base", dump_kind, "hetero_ls or bootstrap_envelope");
    dump->add_option("--feature-degree", dump_feature_degree, "polynomial degree");
    dump->add_option("--members", dump_members, "ensemble members");
    dump->add_option("--seed", dump_seed, "bootstrap seed");
    dump->add_option("--out", dump_out, "output prediction file");

    // --- load-base -------------------------------------------------------
    std::string load_path, load_out;
    CLI::App* load =
        app.add_subcommand("load-base", "validate an external prediction file");
    load->add_option("file", load_path, "prediction file to load")->required();
    load->add_option("--out", load_out, "re-emit the parsed records here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*toy) {
            finalize_config(toy_opts);
            cii::ExperimentReport report = cii::run_cubic(toy_opts.config);
            cii::emit_report(report, toy_opts.out_dir);
            print_summary(report);
            std::printf("report written to %s\n", toy_opts.out_dir.c_str());
        } else if (*bench) {
            finalize_config(bench_opts);
            cii::ExperimentReport report =
                cii::run_benchmark(bench_paths, bench_target, bench_opts.config);
            cii::emit_report(report, bench_opts.out_dir);
            print_summary(report);
            if (!report.manifest["errors"].empty()) {
                std::fprintf(stderr, "warning: %zu dataset(s) failed; see manifest\n",
                             report.manifest["errors"].size());
            }
            std::printf("report written to %s\n", bench_opts.out_dir.c_str());
        } else if (*predict) {
            if (pred_train.empty() == pred_model_in.empty()) {
                throw std::runtime_error("pass exactly one of --train or --model");
            }
            cii::CiiModel model;
            if (!pred_model_in.empty()) {
                model = cii::read_model_file(pred_model_in);
            } else {
                cii::Dataset train = cii::ingest_csv(pred_train, pred_target);
                cii::CiiConfig cfg;
                cfg.ipm_degree = pred_opts.config.ipm_degree;
                cfg.boundary_fraction = pred_opts.config.boundary_fraction;
                cfg.n_strata = pred_opts.config.n_bins;
                cfg.seed = pred_opts.config.seed;
                if (pred_opts.n_cal >= 0) {
                    cfg.n_cal = static_cast<std::size_t>(pred_opts.n_cal);
                }
                model = cii::fit_cii(
                    train.features, train.responses,
                    fit_base(train, pred_base, pred_feature_degree, pred_members,
                             pred_opts.config.seed),
                    cfg);
            }
            if (!pred_save_model.empty()) cii::write_model_file(pred_save_model, model);

            cii::Dataset data = cii::ingest_csv(pred_data, pred_target);
            std::map<std::size_t, cii::PBox> out;
            for (std::size_t i = 0; i < data.size(); ++i) {
                out.emplace(i, cii::predict_cii(model, data.features[i]));
            }
            cii::write_pbox_file(pred_out, out);
            std::printf("%zu predictions written to %s\n", out.size(), pred_out.c_str());
        } else if (*dump) {
            cii::Dataset train = cii::ingest_csv(dump_train, dump_target);
            cii::Dataset data = cii::ingest_csv(dump_data, dump_target);
            auto base =
                fit_base(train, dump_kind, dump_feature_degree, dump_members, dump_seed);
            std::map<std::size_t, cii::PBox> out;
            for (std::size_t i = 0; i < data.size(); ++i) {
                out.emplace(i, cii::to_pbox(base->predict(data.features[i])));
            }
            cii::write_pbox_file(dump_out, out);
            std::printf("%zu base predictions written to %s\n", out.size(),
                        dump_out.c_str());
        } else if (*load) {
            const auto by_row = cii::read_pbox_file(load_path);
            double total_breadth = 0.0;
            for (const auto& [idx, box] : by_row) total_breadth += cii::breadth(box);
            std::printf("%zu records, mean breadth %.6g\n", by_row.size(),
                        by_row.empty() ? 0.0 : total_breadth / double(by_row.size()));
            if (!load_out.empty()) cii::write_pbox_file(load_out, by_row);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
