#pragma once

#include <limits>
#include <vector>

namespace cii {

enum class Relation { LessEq, Equal, GreaterEq };

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Dense linear program: minimize c'x subject to row constraints and
/// per-variable bounds (infinite bounds allowed).
struct LinearProgram {
    struct Row {
        std::vector<double> coeffs;
        Relation rel = Relation::LessEq;
        double rhs = 0.0;
    };

    std::vector<double> objective;
    std::vector<Row> rows;
    std::vector<double> lower;  // empty means all -inf
    std::vector<double> upper;  // empty means all +inf

    std::size_t num_vars() const { return objective.size(); }
    void add_row(std::vector<double> coeffs, Relation rel, double rhs);
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
    double objective_value = 0.0;
};

/// Two-phase simplex with bounded variables. Dantzig pricing with a Bland
/// fallback once degenerate stalling is detected; feasibility tolerance 1e-9.
/// Deterministic for a fixed input ordering.
LpSolution solve(const LinearProgram& p);

}  // namespace cii
