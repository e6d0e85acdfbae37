#pragma once

// The ADPP control loop: delayed feedback, covering-member detection,
// drift-plus-penalty strategy selection and virtual queue updates, with
// single-run tracing and a deterministic ensemble runner.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "adpp/decision.hpp"
#include "adpp/prob.hpp"

namespace adpp {

using QueueVector = std::vector<double>;

/// Q_k(t+1) = max{Q_k(t) + p_k(t-D) - c_k, 0}. `delayed_penalties` holds
/// p_1..p_K (not p_0).
QueueVector update_queues(const QueueVector& q, std::span<const double> delayed_penalties,
                          std::span<const double> limits);

struct LyapunovDrift {
    double before;
    double after;
    double delta;
};

/// L = 1/2 ||Q||^2 before and after, and their difference.
LyapunovDrift lyapunov_drift(const QueueVector& before, const QueueVector& after);

/// Window size w_t: constant, or ceil(scale * sqrt(t + 1)).
struct WindowSchedule {
    enum class Kind { constant, sqrt };
    Kind kind = Kind::constant;
    std::uint64_t size = 40;
    double scale = 1.0;

    std::uint64_t at(std::uint64_t t) const;
    static WindowSchedule constant(std::uint64_t w) { return {Kind::constant, w, 1.0}; }
};

/// Everything that defines the controlled system. Immutable once built.
struct Problem {
    StrategySpace space;
    CostModel cost;
    CoveringSet covering;
    NonstationarySchedule schedule;
};

struct SimParams {
    double V = 20.0;
    std::uint64_t delay = 0;  ///< D
    WindowSchedule window = WindowSchedule::constant(40);
    std::uint64_t horizon = 5000;  ///< T
    std::uint64_t seed = 1;
};

/// True when slot t has no complete detection window: t <= D + w_t - 1.
bool in_warmup(std::uint64_t t, std::uint64_t delay, std::uint64_t window);

/// Argmax over members of the window log-likelihood; ties to the lowest
/// index, -infinity ranks last.
std::size_t detect(const CoveringSet& covering, std::span<const OutcomeId> window);

/// Uniform member index from the run's warmup stream.
std::size_t warmup_detect(const CoveringSet& covering, Rng& rng);

/// argmin_m V r_0^(m) + sum_k Q_k r_k^(m); ties to the lowest index.
StrategyIndex select_strategy(const QueueVector& q, double V, const RTable& table);

/// Per-problem data shared read-only by every run: r-tables and
/// log-likelihood tables for each member, pi_t for the horizon, and i*.
class PreparedProblem {
public:
    PreparedProblem(std::shared_ptr<const Problem> problem, std::uint64_t horizon);

    const Problem& problem() const noexcept { return *problem_; }
    const RTable& rtable(std::size_t member) const { return rtables_[member]; }
    /// log P_j(w), or -infinity on zero mass.
    double log_prob(std::size_t member, OutcomeId w) const { return logp_[member * outcomes_ + w]; }
    const FiniteDistribution& pi_at(std::uint64_t t) const { return pi_[t]; }
    std::uint64_t horizon() const noexcept { return pi_.size(); }
    std::size_t istar() const noexcept { return istar_; }
    std::size_t penalties() const noexcept { return problem_->cost.penalties(); }

    /// Detection with the cached log tables; same result as detect().
    std::size_t detect(std::span<const OutcomeId> window) const;

private:
    std::shared_ptr<const Problem> problem_;
    std::vector<RTable> rtables_;
    std::vector<double> logp_;
    std::size_t outcomes_;
    std::vector<FiniteDistribution> pi_;
    std::size_t istar_;
};

struct TraceRecord {
    std::uint64_t t = 0;
    OutcomeId omega = 0;
    std::uint32_t jstar = 0;
    bool warmup = false;
    StrategyIndex m = 0;
    ActionId action = 0;
    std::vector<double> p;    ///< p_0..p_K realized at slot t
    QueueVector q;            ///< Q_1..Q_K after this slot's update, i.e. Q(t+1)
    std::vector<double> avg;  ///< (1/(t+1)) sum_{s<=t} p_k(s)
};

/// Runs one realization, calling `observe` after every slot. The record
/// passed to the observer is reused between calls.
void simulate(const PreparedProblem& prep, const SimParams& params, std::uint64_t run_index,
              const std::function<void(const TraceRecord&)>& observe);

/// Full trace of run 0 for the given parameters.
std::vector<TraceRecord> run(const PreparedProblem& prep, const SimParams& params);

/// Compact per-run log, enough to recompute queues and every empirical
/// statistic.
struct RunLog {
    std::vector<OutcomeId> omega;
    std::vector<std::uint32_t> jstar;
    std::vector<std::uint8_t> warmup;
    std::vector<StrategyIndex> m;
    std::vector<double> p;  ///< T x (K+1), row-major
    std::vector<double> final_avg;

    double p_at(std::uint64_t t, std::size_t k, std::size_t width) const { return p[t * width + k]; }
};

struct EnsembleResult {
    std::uint64_t horizon = 0;
    std::size_t penalties = 0;  ///< K
    std::size_t istar = 0;
    std::size_t members = 0;
    std::vector<double> mean_p;  ///< T x (K+1) per-slot means across runs
    std::vector<RunLog> runs;
    /// Slots where 0 <= Q_k(t) <= t (p_max,k - c_k) failed, over all runs.
    std::uint64_t queue_violations = 0;

    std::size_t width() const noexcept { return penalties + 1; }
    std::size_t run_count() const noexcept { return runs.size(); }
    double mean(std::uint64_t t, std::size_t k) const { return mean_p[t * width() + k]; }
};

/// n independent runs with split seeds, executed on `workers` threads
/// (0 = hardware concurrency). Output does not depend on the worker count.
EnsembleResult run_ensemble(const PreparedProblem& prep, const SimParams& params, std::size_t n_runs,
                            std::size_t workers = 0);

/// Q_k(t) <= t (p_max,k - c_k) and Q_k(t) >= 0, with a relative slack for
/// rounding. `t` counts completed updates.
bool queue_within_growth_bound(const QueueVector& q, std::uint64_t t, const CostModel& cost);

}  // namespace adpp
