// Benchmark of the OpenMP batch kernels against the serial reference path,
// verifying that both produce bit-identical results.

#include "cii/conformal.hpp"
#include "cii/parallel.hpp"
#include "cii/transport.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct BatchResult {
    std::vector<cii::PBox> boxes;
    double elapsed = 0.0;
};

BatchResult run_batch(const cii::CiiModel& model,
                      const std::vector<Eigen::VectorXd>& queries, int threads) {
    cii::set_num_threads(threads);
    BatchResult res;
    res.boxes.resize(queries.size());
    const auto t0 = Clock::now();
    for (std::size_t i = 0; i < queries.size(); ++i) {
        res.boxes[i] = cii::predict_cii(model, queries[i]);
    }
    res.elapsed = seconds_since(t0);
    return res;
}

bool identical(const std::vector<cii::PBox>& a, const std::vector<cii::PBox>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].lower.breakpoints() != b[i].lower.breakpoints() ||
            a[i].lower.levels() != b[i].lower.levels() ||
            a[i].upper.breakpoints() != b[i].upper.breakpoints() ||
            a[i].upper.levels() != b[i].upper.levels()) {
            return false;
        }
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    const int n_queries = argc > 1 ? std::atoi(argv[1]) : 400;

    // Cubic toy data: enough structure that budgets and envelopes vary.
    std::mt19937_64 rng(20240607);
    std::uniform_real_distribution<double> ux(-4.0, 4.0);
    std::normal_distribution<double> noise(0.0, 3.0);
    std::vector<Eigen::VectorXd> inputs;
    std::vector<double> responses;
    for (int i = 0; i < 40; ++i) {
        Eigen::VectorXd x(1);
        x(0) = ux(rng);
        inputs.push_back(x);
        responses.push_back(x(0) * x(0) * x(0) + noise(rng));
    }

    cii::CiiConfig cfg;
    cfg.ipm_degree = 1;
    cfg.support_margin = 10.0;
    cii::CiiModel model = cii::fit_cii(
        inputs, responses, cii::fit_bootstrap_envelope(inputs, responses, 10, 3, 7), cfg);

    std::vector<Eigen::VectorXd> queries;
    for (int i = 0; i < n_queries; ++i) {
        Eigen::VectorXd x(1);
        x(0) = -8.0 + 16.0 * double(i) / double(n_queries - 1);
        queries.push_back(x);
    }

    std::printf("batch p-box prediction, %d queries\n", n_queries);
    const BatchResult serial = run_batch(model, queries, 1);
    std::printf("  serial reference : %8.3f s\n", serial.elapsed);

    cii::set_num_threads(0);
    const int hw = cii::num_threads();
    const BatchResult parallel = run_batch(model, queries, 0);
    std::printf("  parallel (%2d thr): %8.3f s  speedup %.2fx\n", hw, parallel.elapsed,
                serial.elapsed / parallel.elapsed);

    if (!identical(serial.boxes, parallel.boxes)) {
        std::fprintf(stderr, "FAIL: serial and parallel outputs differ\n");
        return 1;
    }
    std::printf("  outputs bit-identical: yes\n");
    cii::set_num_threads(1);
    return 0;
}
