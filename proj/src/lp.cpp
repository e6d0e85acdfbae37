#include "adpp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "adpp/rng.hpp"

namespace adpp::lp {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;
constexpr double kFeasTol = 1e-9;
constexpr std::size_t kMaxIterations = 1'000'000;

/// Dense simplex tableau in equality form. The last row holds reduced costs
/// and minus the current objective in its rhs slot.
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_((rows + 1) * (cols + 1), 0.0) {}

    double& at(std::size_t r, std::size_t c) { return a_[r * (cols_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return a_[r * (cols_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, cols_); }
    double rhs(std::size_t r) const { return at(r, cols_); }
    double& cost(std::size_t c) { return at(rows_, c); }
    double cost(std::size_t c) const { return at(rows_, c); }
    double objective() const { return -at(rows_, cols_); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    void pivot(std::size_t pr, std::size_t pc) {
        const double p = at(pr, pc);
        for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) /= p;
        at(pr, pc) = 1.0;
        for (std::size_t r = 0; r <= rows_; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
            at(r, pc) = 0.0;
        }
    }

    /// Sets the cost row to c - c_B B^-1 A for the given column costs.
    void price(const std::vector<double>& c, const std::vector<std::size_t>& basis) {
        for (std::size_t j = 0; j <= cols_; ++j) at(rows_, j) = j < cols_ ? c[j] : 0.0;
        for (std::size_t r = 0; r < rows_; ++r) {
            const double cb = c[basis[r]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) at(rows_, j) -= cb * at(r, j);
        }
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> a_;
};

enum class RunResult { optimal, unbounded, iteration_limit };

/// Bland's rule: lowest-index improving column enters; among minimum-ratio
/// rows, the one whose basic variable has the lowest index leaves.
RunResult run_simplex(Tableau& t, std::vector<std::size_t>& basis, const std::vector<bool>& allowed,
                      std::size_t& iterations) {
    while (iterations < kMaxIterations) {
        std::size_t enter = t.cols();
        for (std::size_t j = 0; j < t.cols(); ++j) {
            if (allowed[j] && t.cost(j) < -kCostTol) {
                enter = j;
                break;
            }
        }
        if (enter == t.cols()) return RunResult::optimal;

        std::size_t leave = t.rows();
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < t.rows(); ++r) {
            const double a = t.at(r, enter);
            if (a <= kPivotTol) continue;
            const double ratio = t.rhs(r) / a;
            if (ratio < best_ratio - 1e-14 ||
                (std::abs(ratio - best_ratio) <= 1e-14 && leave < t.rows() && basis[r] < basis[leave])) {
                best_ratio = ratio;
                leave = r;
            }
        }
        if (leave == t.rows()) return RunResult::unbounded;
        t.pivot(leave, enter);
        basis[leave] = enter;
        ++iterations;
    }
    return RunResult::iteration_limit;
}

/// Solves B^T y = c_B by Gaussian elimination with partial pivoting.
std::vector<double> solve_transposed(std::vector<std::vector<double>> bt, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(bt[r][col]) > std::abs(bt[piv][col])) piv = r;
        }
        if (std::abs(bt[piv][col]) < 1e-14) throw DomainError("basis matrix is singular");
        std::swap(bt[piv], bt[col]);
        std::swap(rhs[piv], rhs[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = bt[r][col] / bt[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) bt[r][c] -= f * bt[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> y(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = rhs[r];
        for (std::size_t c = r + 1; c < n; ++c) s -= bt[r][c] * y[c];
        y[r] = s / bt[r][r];
    }
    return y;
}

/// Column j of the equality-form constraint matrix (rows 0..K-1 penalties,
/// row K the simplex row).
std::vector<double> column(const LpInstance& inst, std::size_t j) {
    const std::size_t f = inst.strategies();
    const std::size_t k = inst.penalties();
    std::vector<double> col(k + 1, 0.0);
    if (j < f) {
        for (std::size_t r = 0; r < k; ++r) col[r] = inst.constraints[r][j];
        col[k] = 1.0;
    } else {
        col[j - f] = 1.0;
    }
    return col;
}

}  // namespace

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
    }
    return "unknown";
}

void LpInstance::validate() const {
    if (objective.empty()) throw DimensionError("LP needs at least one strategy");
    if (rhs.size() != constraints.size()) throw DimensionError("LP has mismatched constraint rows and rhs");
    for (const auto& row : constraints) {
        if (row.size() != objective.size()) throw DimensionError("LP constraint row has wrong length");
    }
    if (!(perturbation >= 0.0)) throw DomainError("LP perturbation x must be nonnegative");
}

LpInstance LpInstance::from_model(const StrategySpace& space, const FiniteDistribution& lambda,
                                  const CostModel& cost, double x) {
    return from_rtable(RTable(space, lambda, cost), cost.limits(), x);
}

LpInstance LpInstance::from_rtable(const RTable& table, const std::vector<double>& limits, double x) {
    if (table.width() != limits.size() + 1) throw DimensionError("r-table width does not match K");
    LpInstance inst;
    const auto f = static_cast<std::size_t>(table.strategies());
    inst.objective.resize(f);
    inst.constraints.assign(limits.size(), std::vector<double>(f));
    for (std::size_t m = 0; m < f; ++m) {
        inst.objective[m] = table.r(m, 0);
        for (std::size_t k = 0; k < limits.size(); ++k) inst.constraints[k][m] = table.r(m, k + 1);
    }
    inst.rhs = limits;
    inst.perturbation = x;
    return inst;
}

LpInstance LpInstance::with_perturbation(double x) const {
    LpInstance out = *this;
    out.perturbation = x;
    return out;
}

LpInstance LpInstance::permuted(const std::vector<std::size_t>& order) const {
    if (order.size() != strategies()) throw DimensionError("permutation has wrong length");
    LpInstance out = *this;
    for (std::size_t j = 0; j < order.size(); ++j) {
        out.objective[j] = objective[order[j]];
        for (std::size_t k = 0; k < penalties(); ++k) out.constraints[k][j] = constraints[k][order[j]];
    }
    return out;
}

LpSolution solve_lp(const LpInstance& inst) {
    inst.validate();
    const std::size_t f = inst.strategies();
    const std::size_t kk = inst.penalties();
    const std::size_t rows = kk + 1;

    // Columns: strategies [0, f), slacks [f, f + kk), artificials after that.
    std::vector<std::size_t> art_row;
    std::vector<double> row_sign(rows, 1.0);
    for (std::size_t k = 0; k < kk; ++k) {
        if (inst.rhs[k] + inst.perturbation < 0.0) {
            row_sign[k] = -1.0;
            art_row.push_back(k);
        }
    }
    art_row.push_back(kk);
    const std::size_t n_struct = f + kk;
    const std::size_t cols = n_struct + art_row.size();

    Tableau t(rows, cols);
    std::vector<std::size_t> basis(rows);
    for (std::size_t k = 0; k < kk; ++k) {
        const double s = row_sign[k];
        for (std::size_t m = 0; m < f; ++m) t.at(k, m) = s * inst.constraints[k][m];
        t.at(k, f + k) = s;
        t.rhs(k) = s * (inst.rhs[k] + inst.perturbation);
        basis[k] = f + k;
    }
    for (std::size_t m = 0; m < f; ++m) t.at(kk, m) = 1.0;
    t.rhs(kk) = 1.0;
    for (std::size_t a = 0; a < art_row.size(); ++a) {
        t.at(art_row[a], n_struct + a) = 1.0;
        basis[art_row[a]] = n_struct + a;
    }

    LpSolution sol;
    std::vector<bool> allowed(cols, true);

    // Phase 1: minimize the sum of artificials.
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t a = 0; a < art_row.size(); ++a) phase1[n_struct + a] = 1.0;
    t.price(phase1, basis);
    if (run_simplex(t, basis, allowed, sol.iterations) != RunResult::optimal) {
        sol.status = LpStatus::unbounded;
        return sol;
    }
    if (t.objective() > kFeasTol) {
        sol.status = LpStatus::infeasible;
        return sol;
    }
    // Drive zero-level artificials out of the basis. The constraint matrix
    // always has full row rank (each penalty row owns a slack), so a
    // structural pivot column exists.
    for (std::size_t r = 0; r < rows; ++r) {
        if (basis[r] < n_struct) continue;
        std::size_t pc = n_struct;
        for (std::size_t j = 0; j < n_struct; ++j) {
            if (std::abs(t.at(r, j)) > kPivotTol) {
                pc = j;
                break;
            }
        }
        if (pc == n_struct) throw DomainError("LP has a redundant constraint row");
        t.pivot(r, pc);
        basis[r] = pc;
    }

    // Phase 2 on the original objective; artificials may not re-enter.
    for (std::size_t j = n_struct; j < cols; ++j) allowed[j] = false;
    std::vector<double> phase2(cols, 0.0);
    for (std::size_t m = 0; m < f; ++m) phase2[m] = inst.objective[m];
    t.price(phase2, basis);
    if (run_simplex(t, basis, allowed, sol.iterations) != RunResult::optimal) {
        sol.status = LpStatus::unbounded;
        return sol;
    }

    sol.status = LpStatus::optimal;
    sol.theta.assign(f, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        if (basis[r] < f) sol.theta[basis[r]] = std::max(0.0, t.rhs(r));
    }
    sol.basis = basis;
    sol.value = 0.0;
    for (std::size_t m = 0; m < f; ++m) sol.value += sol.theta[m] * inst.objective[m];
    sol.slacks.resize(kk);
    for (std::size_t k = 0; k < kk; ++k) {
        double lhs = 0.0;
        for (std::size_t m = 0; m < f; ++m) lhs += sol.theta[m] * inst.constraints[k][m];
        sol.slacks[k] = inst.rhs[k] + inst.perturbation - lhs;
    }
    return sol;
}

std::vector<double> reduced_costs(const LpInstance& inst, const LpSolution& sol) {
    if (sol.status != LpStatus::optimal) throw DomainError("reduced costs need an optimal solution");
    const std::size_t f = inst.strategies();
    const std::size_t kk = inst.penalties();
    const std::size_t n = kk + 1;
    if (sol.basis.size() != n) throw DimensionError("basis has wrong size");

    std::vector<std::vector<double>> bt(n, std::vector<double>(n));
    std::vector<double> cb(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto col = column(inst, sol.basis[r]);
        for (std::size_t i = 0; i < n; ++i) bt[r][i] = col[i];
        cb[r] = sol.basis[r] < f ? inst.objective[sol.basis[r]] : 0.0;
    }
    const auto y = solve_transposed(std::move(bt), std::move(cb));

    std::vector<double> d(f + kk);
    for (std::size_t j = 0; j < f + kk; ++j) {
        const auto col = column(inst, j);
        double s = j < f ? inst.objective[j] : 0.0;
        for (std::size_t i = 0; i < n; ++i) s -= y[i] * col[i];
        d[j] = s;
    }
    return d;
}

std::string verify_optimal(const LpInstance& inst, const LpSolution& sol, double tol) {
    if (sol.status != LpStatus::optimal) return "status is not optimal";
    double sum = 0.0;
    double value = 0.0;
    for (std::size_t m = 0; m < sol.theta.size(); ++m) {
        if (sol.theta[m] < -tol) return "theta_" + std::to_string(m) + " is negative";
        sum += sol.theta[m];
        value += sol.theta[m] * inst.objective[m];
    }
    if (std::abs(sum - 1.0) > tol) return "theta does not sum to one";
    if (std::abs(value - sol.value) > tol) return "value differs from theta . r_0";
    for (std::size_t k = 0; k < inst.penalties(); ++k) {
        if (sol.slacks[k] < -tol) return "constraint " + std::to_string(k + 1) + " violated";
    }
    const auto d = reduced_costs(inst, sol);
    for (std::size_t j = 0; j < d.size(); ++j) {
        if (d[j] < -tol) return "column " + std::to_string(j) + " has negative reduced cost";
    }
    return {};
}

double g_of_x(const LpInstance& base, double x) {
    if (!(x >= 0.0)) throw DomainError("G(x) needs x >= 0");
    const auto sol = solve_lp(base.with_perturbation(x));
    if (sol.status != LpStatus::optimal) return std::numeric_limits<double>::infinity();
    return sol.value;
}

double lipschitz_probe(const LpInstance& base, const std::vector<double>& grid) {
    if (grid.size() < 2) throw DomainError("Lipschitz probe needs at least two grid points");
    if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("Lipschitz probe grid must be sorted");
    std::vector<double> g(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        g[i] = g_of_x(base, grid[i]);
        if (!std::isfinite(g[i])) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.12g", grid[i]);
            throw DomainError(std::string("G is infeasible at grid point x = ") + buf);
        }
    }
    double c = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double dx = grid[i + 1] - grid[i];
        if (dx <= 0.0) continue;
        c = std::max(c, std::abs(g[i + 1] - g[i]) / dx);
    }
    return c;
}

double gap_delta(const FiniteDistribution& pi, const CoveringSet& covering, const CostModel& cost, double nu) {
    if (!(nu > 0.0)) throw DomainError("gap_delta needs nu > 0");
    const double d = nearest_member(covering, pi).distance;
    double b = 0.0;
    for (std::size_t k = 0; k <= cost.penalties(); ++k) b = std::max(b, cost.b_max(k));
    return b * (d + nu);
}

std::vector<double> probe_grid(const CostModel& cost, double delta_gap) {
    // Dense near the origin, where the convex value function G is steepest,
    // then uniform up to the largest perturbation any constraint can need.
    double reach = delta_gap;
    for (std::size_t k = 1; k <= cost.penalties(); ++k) reach = std::max(reach, cost.dp_max(k));
    std::vector<double> grid{0.0};
    for (int e = -8; e < 0; ++e) grid.push_back(reach * std::pow(10.0, e));
    for (int i = 1; i <= 100; ++i) grid.push_back(reach * i / 100.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

GapCase gap_case(const StrategySpace& space, const CostModel& cost, const CoveringSet& covering,
                           const FiniteDistribution& pi, double nu) {
    GapCase out;
    const auto nearest = nearest_member(covering, pi);
    out.distance = nearest.distance;
    out.delta_gap = gap_delta(pi, covering, cost, nu);
    const auto member_lp = LpInstance::from_model(space, covering.member(nearest.index), cost);
    out.lp_member = g_of_x(member_lp, 0.0);
    out.lp_limit = g_of_x(LpInstance::from_model(space, pi, cost), 0.0);
    if (!std::isfinite(out.lp_member) || !std::isfinite(out.lp_limit)) return out;

    const auto grid = probe_grid(cost, out.delta_gap);
    out.c_hat = lipschitz_probe(member_lp, grid);

    out.holds = out.lp_member <= out.lp_limit + (out.c_hat + 1.0) * out.delta_gap;
    return out;
}

namespace {

FiniteDistribution random_distribution(Rng& rng, std::size_t n, double floor) {
    std::vector<double> p(n);
    double s = 0.0;
    for (auto& x : p) {
        x = -std::log(1.0 - rng.uniform()) + floor;
        s += x;
    }
    for (auto& x : p) x /= s;
    // Recenter the rounding error onto the largest entry.
    const double err = 1.0 - std::accumulate(p.begin(), p.end(), 0.0);
    *std::max_element(p.begin(), p.end()) += err;
    return FiniteDistribution(std::move(p));
}

}  // namespace

GapCheckReport gap_check(const GapCheckOptions& opts) {
    GapCheckReport report;
    Rng rng(opts.seed);
    while (report.instances < opts.instances) {
        // Small product model with F <= max_strategies.
        const std::size_t users = 1 + rng.uniform_index(2);
        std::vector<std::uint32_t> states(users), actions(users);
        for (std::size_t i = 0; i < users; ++i) {
            states[i] = static_cast<std::uint32_t>(1 + rng.uniform_index(3));
            actions[i] = static_cast<std::uint32_t>(2 + rng.uniform_index(2));
        }
        ProductStateSpace space_states(states);
        ActionModel action_model(actions);
        std::uint64_t f = 1;
        bool too_big = false;
        for (std::size_t i = 0; i < users && !too_big; ++i)
            for (std::uint32_t s = 0; s < states[i] && !too_big; ++s) {
                f *= actions[i];
                too_big = f > opts.max_strategies;
            }
        if (too_big) continue;
        StrategySpace space(space_states, action_model);

        const std::size_t kk = rng.uniform_index(opts.max_penalties + 1);
        const std::size_t na = action_model.joint_count();
        const std::size_t ns = space_states.total();
        std::vector<std::vector<double>> tables(kk + 1, std::vector<double>(na * ns));
        for (auto& tab : tables)
            for (auto& v : tab) v = 2.0 * rng.uniform() - 1.0;

        // Covering members and a limit pi within delta of the first member.
        const std::size_t members = 1 + rng.uniform_index(4);
        std::vector<FiniteDistribution> cover;
        for (std::size_t j = 0; j < members; ++j) cover.push_back(random_distribution(rng, ns, 0.2));
        const double mix = rng.uniform() * 0.9;
        const auto target = random_distribution(rng, ns, 0.2);
        // L1 distance of the mixture to member 0 is mix * ||target - member0||_1 < 2 * mix.
        auto pi = FiniteDistribution::mixture(cover[0], target, mix * opts.delta / 2.0);

        // Constraint levels between the extreme r_k under the nearest member, so
        // both LPs are feasible most of the time.
        std::vector<double> limits(kk);
        const std::size_t near = nearest_member(
            CoveringSet::with_derived_support(cover, opts.delta), pi).index;
        std::vector<double> placeholder(kk, 0.0);
        CostModel probe(na, ns, tables, placeholder);
        RTable rt(space, cover[near], probe);
        for (std::size_t k = 0; k < kk; ++k) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (StrategyIndex m = 0; m < rt.strategies(); ++m) {
                lo = std::min(lo, rt.r(m, k + 1));
                hi = std::max(hi, rt.r(m, k + 1));
            }
            limits[k] = lo + rng.uniform() * (hi - lo);
        }
        CostModel cost(na, ns, std::move(tables), std::move(limits));
        auto covering = CoveringSet::with_derived_support(std::move(cover), opts.delta);

        auto c = gap_case(space, cost, covering, pi, opts.nu);
        if (!std::isfinite(c.lp_member) || !std::isfinite(c.lp_limit)) {
            ++report.regenerated;
            continue;
        }
        ++report.instances;
        if (!c.holds) ++report.failures;
        report.cases.push_back(c);
    }
    return report;
}

}  // namespace adpp::lp
