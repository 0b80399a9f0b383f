#include "cii/lp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cii {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr int kStallLimit = 64;   // degenerate steps before switching to Bland
constexpr int kMaxRefreshes = 60; // refactorization rounds per phase

enum class VarStatus { Basic, AtLower, AtUpper };

// Standard-form working problem: minimize c'x, A x = b, 0 <= x <= u.
// The tableau is updated incrementally by pivoting and periodically rebuilt
// from the original data (basis refactorization) to shed round-off drift.
struct Tableau {
    std::size_t m = 0;  // rows
    std::size_t n = 0;  // columns
    Eigen::MatrixXd a0;                  // original constraint matrix
    Eigen::VectorXd b0;                  // original right-hand side
    std::vector<std::vector<double>> a;  // B^-1 A, m x n
    std::vector<double> xb;              // basic variable values
    std::vector<double> cost;            // reduced costs, length n
    std::vector<double> c_cur;           // objective of the active phase
    std::vector<double> ub;              // upper bounds (lower is 0)
    std::vector<int> basis;              // basic variable per row
    std::vector<VarStatus> status;
    std::size_t first_artificial = 0;    // columns >= this are artificials
    long last_pivots = 0;                // pivots + bound flips in last pass

    void pivot(std::size_t row, std::size_t col) {
        const double piv = a[row][col];
        const double inv = 1.0 / piv;
        for (double& v : a[row]) v *= inv;
        a[row][col] = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row) continue;
            const double f = a[i][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) a[i][j] -= f * a[row][j];
            a[i][col] = 0.0;
        }
        const double fc = cost[col];
        if (fc != 0.0) {
            for (std::size_t j = 0; j < n; ++j) cost[j] -= fc * a[row][j];
            cost[col] = 0.0;
        }
    }

    // Reduced costs for the active objective, recomputed from the tableau.
    void reset_cost() {
        cost = c_cur;
        for (std::size_t i = 0; i < m; ++i) {
            const double cb = c_cur[static_cast<std::size_t>(basis[i])];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) cost[j] -= cb * a[i][j];
        }
        for (std::size_t i = 0; i < m; ++i) cost[static_cast<std::size_t>(basis[i])] = 0.0;
    }

    // Rebuild the tableau, basic values, and reduced costs from the original
    // data for the current basis, discarding accumulated pivoting error.
    void refresh() {
        Eigen::MatrixXd basis_cols(m, m);
        for (std::size_t i = 0; i < m; ++i) {
            basis_cols.col(static_cast<Eigen::Index>(i)) =
                a0.col(basis[static_cast<std::size_t>(i)]);
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_cols);
        Eigen::MatrixXd t = lu.solve(a0);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                a[i][j] = t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
        }
        Eigen::VectorXd rhs = b0;
        for (std::size_t j = 0; j < n; ++j) {
            if (status[j] == VarStatus::AtUpper && ub[j] != 0.0) {
                rhs -= a0.col(static_cast<Eigen::Index>(j)) * ub[j];
            }
        }
        Eigen::VectorXd basics = lu.solve(rhs);
        for (std::size_t i = 0; i < m; ++i) xb[i] = basics(static_cast<Eigen::Index>(i));
        reset_cost();
    }

    // Runs pivots until no eligible entering column remains; Optimal then,
    // Unbounded if an improving direction has no limit.
    LpStatus iterate(bool forbid_artificials) {
        bool bland = false;
        int stall = 0;
        last_pivots = 0;
        const std::size_t limit = forbid_artificials ? first_artificial : n;
        for (long iter = 0; iter < 200000; ++iter) {
            // entering column
            std::size_t q = n;
            double best = kPivotTol;
            for (std::size_t j = 0; j < limit; ++j) {
                if (status[j] == VarStatus::Basic) continue;
                const double d = cost[j];
                const bool eligible = (status[j] == VarStatus::AtLower && d < -kPivotTol) ||
                                      (status[j] == VarStatus::AtUpper && d > kPivotTol);
                if (!eligible) continue;
                if (bland) { q = j; break; }
                if (std::abs(d) > best) { best = std::abs(d); q = j; }
            }
            if (q == n) return LpStatus::Optimal;

            const double dir = (status[q] == VarStatus::AtLower) ? 1.0 : -1.0;

            // ratio test; near-ties resolved toward the largest pivot
            // magnitude (smallest basis index under Bland's rule)
            double t = std::isfinite(ub[q]) ? ub[q] : kInf;  // bound flip distance
            std::size_t leave = m;
            bool leave_at_upper = false;
            for (std::size_t i = 0; i < m; ++i) {
                const double delta = dir * a[i][q];
                const std::size_t bi = static_cast<std::size_t>(basis[i]);
                double lim;
                bool at_upper;
                if (delta > kPivotTol) {
                    lim = std::max(0.0, xb[i]) / delta;
                    at_upper = false;
                } else if (delta < -kPivotTol && std::isfinite(ub[bi])) {
                    lim = std::max(0.0, ub[bi] - xb[i]) / (-delta);
                    at_upper = true;
                } else {
                    continue;
                }
                bool better = lim < t - kFeasTol;
                if (!better && leave != m && lim <= t + kFeasTol) {
                    better = bland ? basis[i] < basis[leave]
                                   : std::abs(a[i][q]) > std::abs(a[leave][q]);
                }
                if (better || (leave == m && lim <= t)) {
                    t = std::min(t, lim);
                    leave = i;
                    leave_at_upper = at_upper;
                }
            }
            if (!std::isfinite(t)) return LpStatus::Unbounded;
            ++last_pivots;

            if (t <= 1e-12) {
                if (++stall > kStallLimit) bland = true;
            } else {
                stall = 0;
            }

            // update basic values
            for (std::size_t i = 0; i < m; ++i) xb[i] -= dir * t * a[i][q];

            if (leave == m) {
                // entering variable runs to its opposite bound: flip, no pivot
                status[q] = (status[q] == VarStatus::AtLower) ? VarStatus::AtUpper
                                                              : VarStatus::AtLower;
                continue;
            }

            const std::size_t out = static_cast<std::size_t>(basis[leave]);
            status[out] = leave_at_upper ? VarStatus::AtUpper : VarStatus::AtLower;
            const double enter_value = (dir > 0 ? 0.0 : ub[q]) + dir * t;
            basis[leave] = static_cast<int>(q);
            status[q] = VarStatus::Basic;
            pivot(leave, q);
            xb[leave] = enter_value;
        }
        throw std::runtime_error("simplex iteration limit exceeded");
    }

    // Iterate-and-refactorize until a freshly rebuilt tableau confirms that
    // no eligible entering column remains.
    LpStatus optimize(bool forbid_artificials) {
        for (int round = 0; round < kMaxRefreshes; ++round) {
            const LpStatus st = iterate(forbid_artificials);
            const long pivots = last_pivots;
            refresh();
            if (st == LpStatus::Unbounded) {
                if (round + 1 < kMaxRefreshes && pivots > 0) continue;
                return LpStatus::Unbounded;
            }
            if (pivots == 0 && round > 0) return LpStatus::Optimal;
            if (pivots == 0 && round == 0) {
                // initial tableau was already clean; confirm once after refresh
                if (iterate(forbid_artificials) == LpStatus::Optimal && last_pivots == 0) {
                    return LpStatus::Optimal;
                }
                refresh();
            }
        }
        throw std::runtime_error("simplex failed to converge after refactorization");
    }
};

}  // namespace

void LinearProgram::add_row(std::vector<double> coeffs, Relation rel, double rhs) {
    rows.push_back(Row{std::move(coeffs), rel, rhs});
}

LpSolution solve(const LinearProgram& p) {
    const std::size_t n0 = p.num_vars();
    if (n0 == 0) {
        throw std::invalid_argument("linear program has no variables");
    }
    std::vector<double> lo(n0, -kInf), hi(n0, kInf);
    if (!p.lower.empty()) {
        if (p.lower.size() != n0) throw std::invalid_argument("bad lower bound size");
        lo = p.lower;
    }
    if (!p.upper.empty()) {
        if (p.upper.size() != n0) throw std::invalid_argument("bad upper bound size");
        hi = p.upper;
    }
    for (std::size_t j = 0; j < n0; ++j) {
        if (lo[j] > hi[j]) throw std::invalid_argument("variable bounds cross");
    }
    for (const auto& row : p.rows) {
        if (row.coeffs.size() != n0) {
            throw std::invalid_argument("constraint row width mismatch");
        }
        if (!std::isfinite(row.rhs)) {
            throw std::invalid_argument("constraint rhs must be finite");
        }
    }

    // Variable transform to [0, u]: x = sign * y + offset, free vars split
    // into a positive and a negative part.
    struct Map {
        std::size_t col;             // first internal column
        double sign = 1.0;
        double offset = 0.0;
        bool split = false;          // x = y[col] - y[col+1]
    };
    std::vector<Map> maps(n0);
    std::vector<double> ubounds;
    std::size_t ncols = 0;
    for (std::size_t j = 0; j < n0; ++j) {
        Map& mp = maps[j];
        mp.col = ncols;
        if (std::isfinite(lo[j])) {
            mp.sign = 1.0;
            mp.offset = lo[j];
            ubounds.push_back(std::isfinite(hi[j]) ? hi[j] - lo[j] : kInf);
            ncols += 1;
        } else if (std::isfinite(hi[j])) {
            mp.sign = -1.0;
            mp.offset = hi[j];
            ubounds.push_back(kInf);
            ncols += 1;
        } else {
            mp.split = true;
            ubounds.push_back(kInf);
            ubounds.push_back(kInf);
            ncols += 2;
        }
    }

    const std::size_t m = p.rows.size();
    // columns: transformed vars, slacks, artificials
    std::size_t nslack = 0;
    for (const auto& row : p.rows) {
        if (row.rel != Relation::Equal) ++nslack;
    }
    const std::size_t nart = m;
    const std::size_t n = ncols + nslack + nart;

    Tableau t;
    t.m = m;
    t.n = n;
    t.first_artificial = ncols + nslack;
    t.a0 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    t.b0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    t.a.assign(m, std::vector<double>(n, 0.0));
    t.xb.assign(m, 0.0);
    t.ub = ubounds;
    t.ub.resize(n, kInf);
    t.basis.assign(m, 0);
    t.status.assign(n, VarStatus::AtLower);

    std::vector<double> cfull(n, 0.0);
    for (std::size_t j = 0; j < n0; ++j) {
        const Map& mp = maps[j];
        cfull[mp.col] += mp.sign * p.objective[j];
        if (mp.split) cfull[mp.col + 1] -= p.objective[j];
    }

    std::size_t slack_idx = ncols;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& row = p.rows[i];
        double rhs = row.rhs;
        auto& arow = t.a[i];
        for (std::size_t j = 0; j < n0; ++j) {
            const double aij = row.coeffs[j];
            if (aij == 0.0) continue;
            const Map& mp = maps[j];
            arow[mp.col] += mp.sign * aij;
            if (mp.split) arow[mp.col + 1] -= aij;
            rhs -= aij * mp.offset;
        }
        if (row.rel == Relation::LessEq) {
            arow[slack_idx++] = 1.0;
        } else if (row.rel == Relation::GreaterEq) {
            arow[slack_idx++] = -1.0;
        }
        if (rhs < 0.0) {
            for (double& v : arow) v = -v;
            rhs = -rhs;
        }
        arow[t.first_artificial + i] = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            t.a0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = arow[j];
        }
        t.b0(static_cast<Eigen::Index>(i)) = rhs;
        t.xb[i] = rhs;
        t.basis[i] = static_cast<int>(t.first_artificial + i);
        t.status[t.first_artificial + i] = VarStatus::Basic;
    }

    // Phase 1: minimize the sum of artificials.
    t.c_cur.assign(n, 0.0);
    for (std::size_t j = t.first_artificial; j < n; ++j) t.c_cur[j] = 1.0;
    t.reset_cost();
    t.optimize(false);

    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (t.basis[i] >= static_cast<int>(t.first_artificial)) infeas += t.xb[i];
    }
    if (infeas > kFeasTol) {
        return LpSolution{LpStatus::Infeasible, {}, 0.0};
    }
    // Pin all artificials at zero so none can drift in phase 2.
    for (std::size_t j = t.first_artificial; j < n; ++j) t.ub[j] = 0.0;

    // Phase 2.
    t.c_cur = cfull;
    t.reset_cost();
    if (t.optimize(true) == LpStatus::Unbounded) {
        return LpSolution{LpStatus::Unbounded, {}, 0.0};
    }

    std::vector<double> y(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (t.status[j] == VarStatus::AtUpper) y[j] = t.ub[j];
    }
    for (std::size_t i = 0; i < m; ++i) {
        y[static_cast<std::size_t>(t.basis[i])] = t.xb[i];
    }

    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.x.resize(n0);
    for (std::size_t j = 0; j < n0; ++j) {
        const Map& mp = maps[j];
        double v = mp.sign * y[mp.col] + mp.offset;
        if (mp.split) v = y[mp.col] - y[mp.col + 1];
        sol.x[j] = v;
    }
    double obj = 0.0;
    for (std::size_t j = 0; j < n0; ++j) obj += p.objective[j] * sol.x[j];
    sol.objective_value = obj;
    return sol;
}

}  // namespace cii
