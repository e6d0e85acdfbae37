#pragma once

// Closed-form guarantees: McDiarmid tail, detection-error bounds, the
// time-average bound stack (psi, Gamma, Q_up), the blocked PAC right-hand
// side, threshold sets and the beta_1 mixing bounds.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adpp/decision.hpp"
#include "adpp/prob.hpp"

namespace adpp::bounds {

/// Exponent form of the detection-error bound. `hoeffding` divides by zeta
/// (consistent with a Hoeffding argument over log-ratios of range
/// log(alpha/beta)); `literal` multiplies by zeta.
enum class ErrorBoundMode { hoeffding, literal };

/// Exponent of the blocked McDiarmid term: `literal` uses v^2, `strict`
/// uses v (bounded differences Delta p / v over v blocks).
enum class PacMode { literal, strict };

const char* to_string(ErrorBoundMode m);
const char* to_string(PacMode m);

/// exp(-2 eps^2 / sum c_i^2).
double mcdiarmid_tail(double eps, std::span<const double> c);

/// Detection-error bound for slot tau. `margin` is the separation whose
/// square enters the exponent; a nonpositive margin makes the bound vacuous
/// (raw value M). Returns the raw value, which may exceed 1.
double pe_upper(std::uint64_t tau, std::uint64_t delay, std::uint64_t window, double zeta, double margin,
                std::size_t members, ErrorBoundMode mode);

/// S_{t,delta} = exp(-phi + log M) with phi built from the smallest margin
/// and the smallest window N over [alpha, t]; `sum_bound` = (t - alpha) S.
struct SBound {
    double s;
    double sum_bound;
};
SBound s_t_delta(std::uint64_t t, std::uint64_t alpha, double zeta, double min_margin, std::uint64_t min_window,
                 std::size_t members, ErrorBoundMode mode);

/// Per-slot expected log-ratios E_{pi_s} log(P_j / P_istar) for s < t,
/// stored s-major (t x M).
std::vector<double> slot_divergences(std::span<const FiniteDistribution> pis, const CoveringSet& covering,
                                     std::size_t istar);

/// Separation at slot tau: min over j != istar of -D_{tau,j}, where D_{tau,j}
/// averages the per-slot expected log-ratios over the delayed window
/// [tau - D - w + 1, tau - D]. +infinity when M = 1. Requires a full window.
double detection_margin(std::span<const double> divergences, std::size_t members, std::size_t istar,
                        std::uint64_t tau, std::uint64_t delay, std::uint64_t window);

/// (1/t) sum_{tau<t} ||pi_tau - pi||_1 and the pair (J_bar, H_bar).
struct JH {
    double mean_distance;
    double jbar;
    double hbar;
};
JH jbar_ht(std::span<const FiniteDistribution> pis, const FiniteDistribution& limit, double delta,
           const CostModel& cost, std::span<const double> b_seq, std::uint64_t delay);

/// B_tau for tau = 0..t-1. Geometric schedules reuse the two endpoint
/// expectations per strategy; piecewise schedules evaluate once per segment.
std::vector<double> b_sequence(const StrategySpace& space, const CostModel& cost,
                               const NonstationarySchedule& schedule, std::uint64_t t);

/// rho = sum_k (p_max,k - c_k)^2.
double rho(const CostModel& cost);

struct PsiInputs {
    std::uint64_t t = 1;
    double V = 1.0;
    std::uint64_t delay = 0;
    double C = 0.0;       ///< cap on the initial Lyapunov value
    double c_hat = 0.0;   ///< Lipschitz constant of G
    double gap = 0.0;     ///< Delta between pi and its nearest member
    double jbar = 0.0;
    double hbar = 0.0;
    double p_max0 = 0.0;
    double rho = 0.0;
    double F = 1.0;
    std::vector<double> pe;  ///< P_e,up for tau = 0..t-1
    std::vector<double> b;   ///< B_tau for tau = 0..t-1
};

struct PsiResult {
    double psi;
    double gamma;
    double q_up;
};

PsiResult psi_q_gamma(const PsiInputs& in);

struct PacInputs {
    std::uint64_t t = 2;
    std::uint64_t alpha = 0;
    std::uint64_t u = 1;
    std::uint64_t v = 1;
    double eps = 0.0;        ///< epsilon_k
    double level = 0.0;      ///< c_k (for k = 0, the optimum)
    double mean = 0.0;       ///< (1/t) sum E p_k(tau)
    double dp_max = 0.0;     ///< (Delta p)_max,k
    double beta = 0.0;       ///< beta_1 value at lag u
    double pe_sum = 0.0;     ///< sum of error probabilities over [alpha, t]
    PacMode mode = PacMode::literal;
};

struct PacResult {
    double eps_bar;
    double block_term;
    double raw;
    double clamped;
};

/// Smallest admissible epsilon_k is strictly above this value.
double pac_floor(const PacInputs& in);

/// Throws DomainError when eps does not exceed pac_floor or u v != t - alpha.
PacResult pac_rhs(const PacInputs& in);

/// t in T_{t,i}: (t - alpha) > dp0 u / (sqrt 2 eps) sqrt(log(u / (gamma - beta_star))).
/// A negative log argument is clamped to zero. Throws DomainError unless
/// gamma > beta_star and eps > 0.
bool threshold_check(std::uint64_t t, std::uint64_t alpha, std::uint64_t u, double eps, double gamma,
                     double beta_star, double dp0);

/// max{(e^{kappa D'} - 1)/2, 1/2} with D' = max(D, 1). Throws DomainError
/// when kappa D' >= log 3 (theta would reach 1).
double theta(double kappa, std::uint64_t delay);

/// D = 0: theta^((s-1)/2) / sqrt 2 * log(F |Omega| (K+1)), s >= 1.
/// D >= 1: theta^((s-D+1)/(2D)) / sqrt 2 * log(D F |Omega| (K+1)), s >= 2D+1.
double beta_bound(std::uint64_t s, std::uint64_t delay, double kappa, double F, double omega_count,
                  std::size_t K);

/// (t - alpha) [beta + S].
double beta_star(std::uint64_t t, std::uint64_t alpha, double beta, double s);

/// u = floor(sqrt t), v = floor((t - u) / u), alpha = t - u v. Needs t >= 2.
struct Blocking {
    std::uint64_t u;
    std::uint64_t v;
    std::uint64_t alpha;
};
Blocking default_blocking(std::uint64_t t);

inline double clamp_probability(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

/// One named quantity of a bound table.
struct Entry {
    std::string name;
    double raw;
    double clamped;  ///< equals raw for quantities that are not probabilities
    bool probability;
};

struct BoundReport {
    ErrorBoundMode error_mode = ErrorBoundMode::hoeffding;
    PacMode pac_mode = PacMode::literal;
    std::vector<Entry> entries;
    std::vector<double> pe;  ///< raw P_e,up per slot
    std::vector<double> margin;
    std::vector<std::string> notes;

    void add(std::string name, double value, bool probability = false);
    /// Raw value of a named entry; throws if absent.
    double get(const std::string& name) const;
    bool has(const std::string& name) const;
};

}  // namespace adpp::bounds
