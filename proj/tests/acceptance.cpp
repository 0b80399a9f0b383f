// Acceptance gate: one pass/fail line per criterion, nonzero exit when any
// criterion fails.

#include "cii/experiment.hpp"
#include "cii/metrics.hpp"
#include "cii/serialize.hpp"
#include "cii/transport.hpp"
#include "oracle_utils.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace cii;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s — %s\n", criterion, pass ? "PASS" : "FAIL",
                detail.c_str());
    if (!pass) ++g_failures;
}

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------- C1 ----
void criterion_1() {
    const double t0 = now_seconds();
    ExperimentConfig cfg;  // defaults: seed 42, 20 repeats, 40 train points
    ExperimentReport r = run_cubic(cfg);
    const double elapsed = now_seconds() - t0;

    double sum = 0.0;
    int runs = 0, perfect = 0;
    for (const auto& row : r.rows) {
        if (row.method == "cii" && row.regime == "ALL") {
            sum += row.xi;
            ++runs;
            if (row.xi == 1.0) ++perfect;
        }
    }
    const double mean = runs ? sum / runs : 0.0;
    const bool pass = runs == 20 && mean >= 0.99 && perfect >= 18 && elapsed < 30.0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "toy coverage mean=%.4f perfect=%d/20 elapsed=%.1fs", mean, perfect,
                  elapsed);
    report(1, pass, buf);
}

// ---------------------------------------------------------------- C2 ----
StepCdf random_base(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nb(2, 10);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), up(0.05, 1.0);
    const int n = nb(rng);
    std::vector<double> xs, ps;
    for (int i = 0; i < n; ++i) {
        xs.push_back(ux(rng));
        ps.push_back(up(rng));
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    ps.resize(xs.size());
    std::sort(ps.begin(), ps.end());
    ps.back() = 1.0;
    return StepCdf(std::move(xs), std::move(ps));
}

void criterion_2() {
    const int grid_size = 256;
    std::mt19937_64 rng(20240614);
    BallConstraints c;
    int checked = 0, within = 0;

    for (int rep = 0; rep < 50; ++rep) {
        StepCdf base = random_base(rng);
        const double lo = base.front_x() - 0.5, hi = base.back_x() + 0.5;
        std::vector<double> queries;
        for (int q = 0; q < 5; ++q) {
            queries.push_back(lo + (hi - lo) * (q + 0.37) / 5.0);
        }
        for (double d : {0.0, 0.01, 0.1, 0.5}) {
            for (double x0 : queries) {
                // The oracle discretizes x (value taken one cell from x0) and
                // the budget (a few cells of area); bracket it by the exact
                // envelopes at perturbed points and budgets.
                const double cell =
                    (std::max(base.back_x(), x0) - std::min(base.front_x(), x0)) /
                    grid_size;
                const double slack = 4.0 * cell;
                const double d_lo = std::max(0.0, d - slack), d_hi = d + slack;

                const double osup =
                    envelope_oracle(base, d, c, x0, EnvelopeSense::Sup, grid_size);
                ++checked;
                if (osup >= upper_envelope(base, d_lo, c, {x0 - cell})
                                    .evaluate(x0 - cell) -
                                1e-6 &&
                    osup <= upper_envelope(base, d_hi, c, {x0 + cell})
                                    .evaluate(x0 + cell) +
                                1e-6) {
                    ++within;
                }
                const double oinf =
                    envelope_oracle(base, d, c, x0, EnvelopeSense::Inf, grid_size);
                ++checked;
                if (oinf >= lower_envelope(base, d_hi, c, {x0 - cell})
                                    .evaluate(x0 - cell) -
                                1e-6 &&
                    oinf <= lower_envelope(base, d_lo, c, {x0 + cell})
                                    .evaluate(x0 + cell) +
                                1e-6) {
                    ++within;
                }
            }
        }
    }

    // analytic uniform-base cases
    std::vector<double> uxs, ups;
    for (int k = 1; k <= 512; ++k) {
        uxs.push_back(double(k) / 512);
        ups.push_back(double(k) / 512);
    }
    StepCdf uniform(uxs, ups);
    StepCdf g002 = upper_envelope(uniform, 0.02, c, {0.5});
    StepCdf g0125 = upper_envelope(uniform, 0.125, c, {0.5});
    const bool analytic = std::abs(g002.evaluate(0.5) - 0.7) <= 1e-3 &&
                          std::abs(g0125.evaluate(0.5) - 1.0) <= 1e-3;

    const bool pass = within == checked && analytic;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "oracle agreement %d/%d, uniform closed forms %s", within, checked,
                  analytic ? "ok" : "off");
    report(2, pass, buf);
}

// ---------------------------------------------------------------- C3 ----
double band_area(const IntervalPredictor& m) {
    const int n = 2000;
    const double a = m.r_min(), b = m.r_max();
    const double h = (b - a) / n;
    auto width = [&](double r) { return m.upper_edge(r) - m.lower_edge(r); };
    double s = width(a) + width(b);
    for (int k = 1; k < n; ++k) s += width(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

void criterion_3() {
    std::mt19937_64 rng(20240615);
    std::uniform_real_distribution<double> ur(0.0, 4.0), ud(0.0, 3.0);
    std::uniform_int_distribution<int> np(3, 6), ndeg(0, 1);

    int instances = 0, optimal = 0, enclosed = 0;
    while (instances < 100) {
        const int degree = ndeg(rng);
        const int n = np(rng);
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < n; ++i) pts.emplace_back(ur(rng), ud(rng));
        double r_lo = pts[0].first, r_hi = pts[0].first;
        for (const auto& [r, d] : pts) {
            r_lo = std::min(r_lo, r);
            r_hi = std::max(r_hi, r);
        }
        if (r_hi - r_lo < 1e-6) continue;
        ++instances;
        const int grid = 8;
        IntervalPredictor m = fit_ipm(pts, degree, grid);
        const double reference =
            oracle::vertex_optimum(build_ipm_lp(pts, degree, grid, r_lo, r_hi));
        if (std::abs(band_area(m) - reference) <= 1e-6 * std::max(1.0, reference)) {
            ++optimal;
        }
        bool ok = true;
        for (const auto& [r, d] : pts) {
            if (m.upper_edge(r) < d - 1e-9 || m.lower_edge(r) > d + 1e-9) ok = false;
        }
        if (ok) ++enclosed;
    }
    const bool pass = optimal == 100 && enclosed == 100;
    char buf[160];
    std::snprintf(buf, sizeof buf, "optimality %d/100, enclosure %d/100", optimal,
                  enclosed);
    report(3, pass, buf);
}

// ------------------------------------------------------------ C4-C6 ----
struct AggKey {
    std::string dataset, regime, method;
    double epsilon;
};

const AggregateRow* find_agg(const std::vector<AggregateRow>& aggs, const AggKey& k) {
    for (const auto& a : aggs) {
        if (a.dataset == k.dataset && a.regime == k.regime && a.method == k.method &&
            a.epsilon == k.epsilon) {
            return &a;
        }
    }
    return nullptr;
}

double quartile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * double(v.size() - 1);
    const auto k = static_cast<std::size_t>(pos);
    if (k + 1 >= v.size()) return v.back();
    const double frac = pos - double(k);
    return v[k] * (1 - frac) + v[k + 1] * frac;
}

void criteria_4_and_5(const std::vector<std::string>& datasets,
                      const std::vector<std::string>& names) {
    ExperimentConfig cfg;  // defaults: seed 42, 20 repeats, 5 epsilons
    ExperimentReport r = run_benchmark(datasets, "target", cfg);
    auto aggs = aggregate_rows(r.rows);

    // C4: CII coverage and calibration at epsilon = 0.5, with the envelope
    // baseline strictly below CII in OOD on at least one dataset.
    bool c4 = true;
    std::string c4_detail;
    double env_below = 0;
    for (const auto& name : names) {
        for (const std::string regime : {"ID", "OOD"}) {
            const AggregateRow* a = find_agg(aggs, {name, regime, "cii", 0.5});
            if (!a || a->xi_mean < 0.99 || a->d_p_mean > 0.05) c4 = false;
            if (a) {
                char buf[96];
                std::snprintf(buf, sizeof buf, " %s/%s xi=%.4f d_p=%.4f",
                              name.c_str(), regime.c_str(), a->xi_mean, a->d_p_mean);
                c4_detail += buf;
            }
        }
        const AggregateRow* cii = find_agg(aggs, {name, "OOD", "cii", 0.5});
        const AggregateRow* env =
            find_agg(aggs, {name, "OOD", "bootstrap_envelope", 0.5});
        if (cii && env && env->xi_mean < cii->xi_mean) ++env_below;
    }
    if (env_below < 1) c4 = false;
    report(4, c4, "benchmark coverage at eps=0.5:" + c4_detail +
                      (env_below >= 1 ? " (envelope baseline below CII in OOD)"
                                      : " (envelope baseline NOT below CII)"));

    // C5: OOD imprecision exceeds ID imprecision for every dataset and
    // epsilon, in the mean and at the three quartiles of the pooled values.
    bool c5 = true;
    int cells = 0, mean_ok = 0, quart_ok = 0;
    for (const auto& name : names) {
        for (double eps : cfg.epsilons) {
            const AggregateRow* id = find_agg(aggs, {name, "ID", "cii", eps});
            const AggregateRow* ood = find_agg(aggs, {name, "OOD", "cii", eps});
            ++cells;
            if (id && ood && ood->gamma_mean > id->gamma_mean) ++mean_ok;

            const std::string kid = name + "|" + format_double(eps) + "|ID";
            const std::string kood = name + "|" + format_double(eps) + "|OOD";
            auto iid = r.gamma_values.find(kid);
            auto iood = r.gamma_values.find(kood);
            bool q_ok = false;
            if (iid != r.gamma_values.end() && iood != r.gamma_values.end() &&
                !iid->second.empty() && !iood->second.empty()) {
                q_ok = true;
                for (double q : {0.25, 0.5, 0.75}) {
                    if (quartile(iood->second, q) < quartile(iid->second, q) - 1e-12) {
                        q_ok = false;
                    }
                }
            }
            if (q_ok) ++quart_ok;
        }
    }
    c5 = mean_ok == cells && quart_ok == cells;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "gamma OOD>ID in the mean %d/%d cells, quartile dominance %d/%d",
                  mean_ok, cells, quart_ok, cells);
    report(5, c5, buf);
}

void criterion_6(const std::vector<std::string>& datasets,
                 const std::vector<std::string>& names) {
    ExperimentConfig cfg;
    cfg.epsilons = {1.0};  // no subsampling
    cfg.n_repeats = 1;
    ExperimentReport r = run_benchmark(datasets, "target", cfg);

    bool pass = true;
    std::string detail;
    for (const auto& name : names) {
        // mean gamma per bin across the stratified rows of this dataset
        std::vector<std::pair<int, double>> bins;
        bool xi_ok = true;
        for (const auto& s : r.stratified) {
            if (s.dataset != name || s.count == 0) continue;
            bins.emplace_back(s.bin, s.gamma_n_mean);
            if (!(s.xi_b >= 0.95)) xi_ok = false;
        }
        // Spearman rank correlation between bin index and mean gamma
        std::vector<double> idx, val;
        for (const auto& [b, g] : bins) {
            idx.push_back(double(b));
            val.push_back(g);
        }
        auto ranks = [](const std::vector<double>& v) {
            std::vector<std::size_t> order(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) order[i] = i;
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
            std::vector<double> rk(v.size());
            for (std::size_t i = 0; i < order.size(); ++i) rk[order[i]] = double(i);
            return rk;
        };
        const std::vector<double> ra = ranks(idx), rb = ranks(val);
        double ma = 0, mb = 0;
        for (std::size_t i = 0; i < ra.size(); ++i) {
            ma += ra[i];
            mb += rb[i];
        }
        ma /= double(ra.size());
        mb /= double(rb.size());
        double num = 0, da = 0, db = 0;
        for (std::size_t i = 0; i < ra.size(); ++i) {
            num += (ra[i] - ma) * (rb[i] - mb);
            da += (ra[i] - ma) * (ra[i] - ma);
            db += (rb[i] - mb) * (rb[i] - mb);
        }
        const double spearman = num / std::sqrt(std::max(da * db, 1e-300));
        char buf[96];
        std::snprintf(buf, sizeof buf, " %s spearman=%.3f xi_b>=0.95:%s", name.c_str(),
                      spearman, xi_ok ? "yes" : "no");
        detail += buf;
        if (!(spearman > 0.5) || !xi_ok || bins.size() < 3) pass = false;
    }
    report(6, pass, "distance adaptivity:" + detail);
}

// ---------------------------------------------------------------- C7 ----
void criterion_7() {
    bool pass = true;

    // xi equals the count-weighted mean of the bin rates (exact).
    std::mt19937_64 rng(20240616);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<PBox> preds;
    std::vector<UncertainNumber> obs;
    std::vector<double> rs;
    for (int i = 0; i < 157; ++i) {
        preds.push_back(to_pbox(Interval(0.0, 1.0)));
        obs.push_back(Scalar{u(rng) < 0.8 ? 0.5 : 2.0});
        rs.push_back(u(rng));
    }
    double weighted = 0.0;
    std::size_t total = 0;
    for (const auto& b : stratified_coverage(preds, obs, rs, 10)) {
        if (b.count > 0) {
            weighted += b.xi * double(b.count);
            total += b.count;
        }
    }
    if (weighted / double(total) != coverage(preds, obs)) pass = false;

    // d_p = 0.5 for the all-u-at-zero construction (analytic).
    std::vector<PBox> zero_preds(10, to_pbox(UncertainNumber{StepCdf::dirac(1.0)}));
    std::vector<double> zero_obs(10, 0.0);
    const double d_p = u_pool(zero_preds, zero_obs).d_p;
    if (std::abs(d_p - 0.5) > 1e-12) pass = false;

    // gamma_n affine invariance.
    bool affine_ok = true;
    for (int rep = 0; rep < 20; ++rep) {
        const double lo = u(rng), hi = lo + 0.5 + u(rng);
        const double a = 0.2 + 3.0 * u(rng), b = -5.0 + 10.0 * u(rng);
        const double q05 = lo - 1.0, q95 = hi + 1.0;
        const double g0 = quantile_scaled_breadth(to_pbox(Interval(lo, hi)), q05, q95);
        const double g1 = quantile_scaled_breadth(
            to_pbox(Interval(a * lo + b, a * hi + b)), a * q05 + b, a * q95 + b);
        if (std::abs(g0 - g1) > 1e-10) affine_ok = false;
    }
    if (!affine_ok) pass = false;

    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "xi identity %s, d_p(all-zero)=%.15f, affine invariance %s",
                  weighted / double(total) == coverage(preds, obs) ? "exact" : "BROKEN",
                  d_p, affine_ok ? "ok" : "BROKEN");
    report(7, pass, buf);
}

// ---------------------------------------------------------------- C8 ----
void criterion_8(const std::string& dataset) {
    namespace fs = std::filesystem;
    const fs::path tmp =
        fs::temp_directory_path() / ("cii_accept_" + std::to_string(std::random_device{}()));
    fs::create_directories(tmp);

    ExperimentConfig cfg;
    cfg.epsilons = {0.5};
    cfg.n_repeats = 2;
    cfg.n_members = 5;

    bool pass = false;
    std::string detail = "bench determinism";
#ifdef CII_CLI_PATH
    const std::string cli = CII_CLI_PATH;
    const std::string base_cmd = "\"" + cli + "\" bench \"" + dataset +
                                 "\" --epsilon 0.5 --repeats 2 --seed 42 --out ";
    const int rc1 = std::system((base_cmd + "\"" + (tmp / "a").string() +
                                 "\" > /dev/null")
                                    .c_str());
    const int rc2 = std::system((base_cmd + "\"" + (tmp / "b").string() +
                                 "\" > /dev/null")
                                    .c_str());
    if (rc1 == 0 && rc2 == 0) {
        const std::string a = slurp((tmp / "a" / "rows.csv").string());
        const std::string b = slurp((tmp / "b" / "rows.csv").string());
        pass = !a.empty() && a == b;
        detail += pass ? ": byte-identical rows.csv from two CLI invocations"
                       : ": rows.csv differ";
    } else {
        detail += ": CLI invocation failed";
    }
#else
    ExperimentReport r1 = run_benchmark({dataset}, "target", cfg);
    ExperimentReport r2 = run_benchmark({dataset}, "target", cfg);
    emit_report(r1, (tmp / "a").string());
    emit_report(r2, (tmp / "b").string());
    const std::string a = slurp((tmp / "a" / "rows.csv").string());
    const std::string b = slurp((tmp / "b" / "rows.csv").string());
    pass = !a.empty() && a == b;
    detail += pass ? ": byte-identical rows.csv" : ": rows.csv differ";
#endif
    fs::remove_all(tmp);
    report(8, pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
    std::string data_dir = "data";
#ifdef CII_DATA_DIR
    data_dir = CII_DATA_DIR;
#endif
    if (argc > 1) data_dir = argv[1];
    const std::vector<std::string> datasets{data_dir + "/synth_energy.csv",
                                            data_dir + "/synth_housing.csv"};
    const std::vector<std::string> names{"synth_energy", "synth_housing"};

    criterion_1();
    criterion_2();
    criterion_3();
    criteria_4_and_5(datasets, names);
    criterion_6(datasets, names);
    criterion_7();
    criterion_8(datasets.front());

    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all 8 criteria passed\n");
    return 0;
}
