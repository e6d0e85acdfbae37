#pragma once

// Exact solution of the stationary-equivalent linear program
//
//   min_theta  sum_m theta_m r_0^(m)
//   s.t.       sum_m theta_m r_k^(m) <= c_k + x,   k = 1..K
//              sum_m theta_m = 1,  theta >= 0
//
// by a dense two-phase simplex with Bland's rule, plus the perturbed value
// function G(x), an empirical Lipschitz probe and the optimality-gap
// quantities that compare the LP under a covering member with the LP under
// the true limit distribution.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "adpp/decision.hpp"
#include "adpp/prob.hpp"

namespace adpp::lp {

struct LpInstance {
    std::vector<double> objective;                ///< r_0^(m), size F
    std::vector<std::vector<double>> constraints;  ///< K rows of r_k^(m)
    std::vector<double> rhs;                       ///< c_k, size K
    double perturbation = 0.0;                     ///< x >= 0, added to every rhs

    std::size_t strategies() const noexcept { return objective.size(); }
    std::size_t penalties() const noexcept { return constraints.size(); }

    /// Throws DimensionError / DomainError on malformed instances.
    void validate() const;

    /// LP under distribution lambda for the given model.
    static LpInstance from_model(const StrategySpace& space, const FiniteDistribution& lambda,
                                 const CostModel& cost, double x = 0.0);
    static LpInstance from_rtable(const RTable& table, const std::vector<double>& limits, double x = 0.0);

    LpInstance with_perturbation(double x) const;
    /// Same program with the strategy columns reordered: new column j is old column order[j].
    LpInstance permuted(const std::vector<std::size_t>& order) const;
};

enum class LpStatus { optimal, infeasible, unbounded };

const char* to_string(LpStatus s);

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> theta;
    double value = std::numeric_limits<double>::infinity();
    /// (c_k + x) - sum_m theta_m r_k^(m); nonnegative when feasible.
    std::vector<double> slacks;
    /// Basic columns of the final tableau: indices < F are strategies,
    /// F..F+K-1 are constraint slacks.
    std::vector<std::size_t> basis;
    std::size_t iterations = 0;
};

LpSolution solve_lp(const LpInstance& inst);

/// Reduced costs c_j - y^T A_j of every structural and slack column at the
/// returned basis. All entries are >= -tolerance at an optimum.
std::vector<double> reduced_costs(const LpInstance& inst, const LpSolution& sol);

/// Post-hoc checks of an optimal solution (primal feasibility, value
/// consistency, no negative reduced cost). Returns an empty string when all
/// hold, otherwise a description of the first failure.
std::string verify_optimal(const LpInstance& inst, const LpSolution& sol, double tol = 1e-9);

/// G(x): optimal value with every rhs raised by x; +infinity when infeasible.
double g_of_x(const LpInstance& base, double x);

/// max over adjacent grid pairs of |G(x_i) - G(x_{i+1})| / |x_i - x_{i+1}|.
/// An empirical lower bound on the Lipschitz constant of G; the grid cannot
/// certify global Lipschitzness. Throws DomainError naming the first
/// infeasible grid point.
double lipschitz_probe(const LpInstance& base, const std::vector<double>& grid);

/// Delta = max_k b_max,k * (d + nu), with d the L1 distance from pi to its
/// nearest covering member.
double gap_delta(const FiniteDistribution& pi, const CoveringSet& covering, const CostModel& cost, double nu);

/// Probe grid on [0, max(delta_gap, max_k dp_max,k)]: geometric near 0, then
/// 100 uniform points.
std::vector<double> probe_grid(const CostModel& cost, double delta_gap);

struct GapCase {
    double lp_member = 0.0;  ///< optimum under the nearest member
    double lp_limit = 0.0;   ///< optimum under pi
    double c_hat = 0.0;
    double delta_gap = 0.0;
    double distance = 0.0;
    bool holds = false;
};

struct GapCheckReport {
    std::size_t instances = 0;
    std::size_t failures = 0;
    std::size_t regenerated = 0;
    std::vector<GapCase> cases;
    bool all_hold() const { return failures == 0 && instances > 0; }
};

/// Evaluates lp(P_istar) <= lp(pi) + (c_hat + 1) * Delta for one model, with
/// c_hat from lipschitz_probe on a grid reaching past the perturbation the
/// inequality needs. Returns nullopt-like case with holds=false and lp
/// values = inf when either LP is infeasible.
GapCase gap_case(const StrategySpace& space, const CostModel& cost, const CoveringSet& covering,
                           const FiniteDistribution& pi, double nu);

struct GapCheckOptions {
    std::size_t instances = 100;
    std::uint64_t seed = 7;
    std::uint64_t max_strategies = 32;
    std::size_t max_penalties = 3;
    double nu = 0.05;
    double delta = 0.3;
};

/// Random small instances with stationary pi; infeasible draws are
/// regenerated, not counted.
GapCheckReport gap_check(const GapCheckOptions& opts = {});

}  // namespace adpp::lp
