#include "adpp/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace adpp {

QueueVector update_queues(const QueueVector& q, std::span<const double> delayed_penalties,
                          std::span<const double> limits) {
    if (q.size() != delayed_penalties.size() || q.size() != limits.size()) {
        throw DimensionError("queue, penalty and limit vectors differ in length");
    }
    QueueVector out(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) out[k] = std::max(q[k] + delayed_penalties[k] - limits[k], 0.0);
    return out;
}

LyapunovDrift lyapunov_drift(const QueueVector& before, const QueueVector& after) {
    auto half_sq = [](const QueueVector& q) {
        double s = 0.0;
        for (double x : q) s += x * x;
        return 0.5 * s;
    };
    const double a = half_sq(before);
    const double b = half_sq(after);
    return {a, b, b - a};
}

std::uint64_t WindowSchedule::at(std::uint64_t t) const {
    if (kind == Kind::constant) return size;
    const double w = std::ceil(scale * std::sqrt(static_cast<double>(t) + 1.0));
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(w));
}

bool in_warmup(std::uint64_t t, std::uint64_t delay, std::uint64_t window) {
    return t + 1 <= delay + window;
}

std::size_t detect(const CoveringSet& covering, std::span<const OutcomeId> window) {
    std::size_t best = 0;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < covering.size(); ++j) {
        const double ll = window_loglik(covering.member(j), window);
        if (ll > best_ll) {
            best_ll = ll;
            best = j;
        }
    }
    return best;
}

std::size_t warmup_detect(const CoveringSet& covering, Rng& rng) {
    return static_cast<std::size_t>(rng.uniform_index(covering.size()));
}

StrategyIndex select_strategy(const QueueVector& q, double V, const RTable& table) {
    if (table.width() != q.size() + 1) throw DimensionError("queue length does not match the r-table");
    StrategyIndex best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    const std::size_t width = table.width();
    for (StrategyIndex m = 0; m < table.strategies(); ++m) {
        const auto r = table.row(m);
        double v = V * r[0];
        for (std::size_t k = 1; k < width; ++k) v += q[k - 1] * r[k];
        if (v < best_v) {
            best_v = v;
            best = m;
        }
    }
    return best;
}

PreparedProblem::PreparedProblem(std::shared_ptr<const Problem> problem, std::uint64_t horizon)
    : problem_(std::move(problem)), outcomes_(problem_->covering.outcome_count()) {
    const auto& p = *problem_;
    if (p.schedule.outcome_count() != outcomes_ || p.space.states().total() != outcomes_ ||
        p.cost.state_count() != outcomes_) {
        throw DimensionError("schedule, covering set, state space and cost model disagree on |Omega|");
    }
    if (p.cost.action_count() != p.space.actions().joint_count()) {
        throw DimensionError("cost tables do not match the joint action count");
    }
    rtables_.reserve(p.covering.size());
    logp_.resize(p.covering.size() * outcomes_);
    for (std::size_t j = 0; j < p.covering.size(); ++j) {
        rtables_.emplace_back(p.space, p.covering.member(j), p.cost);
        for (std::size_t w = 0; w < outcomes_; ++w) {
            const double pr = p.covering.member(j)[w];
            logp_[j * outcomes_ + w] = pr > 0.0 ? std::log(pr) : -std::numeric_limits<double>::infinity();
        }
    }
    pi_.reserve(horizon);
    for (std::uint64_t t = 0; t < horizon; ++t) pi_.push_back(p.schedule.at(t));
    istar_ = nearest_member(p.covering, p.schedule.limit()).index;
}

std::size_t PreparedProblem::detect(std::span<const OutcomeId> window) const {
    if (window.empty()) throw DomainError("detection window is empty");
    std::size_t best = 0;
    double best_ll = -std::numeric_limits<double>::infinity();
    const double w_count = static_cast<double>(window.size());
    for (std::size_t j = 0; j < rtables_.size(); ++j) {
        const double* lp = logp_.data() + j * outcomes_;
        double s = 0.0;
        for (OutcomeId w : window) s += lp[w];
        // Same scaling as window_loglik so ties resolve identically.
        s /= w_count;
        if (s > best_ll) {
            best_ll = s;
            best = j;
        }
    }
    return best;
}

bool queue_within_growth_bound(const QueueVector& q, std::uint64_t t, const CostModel& cost) {
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double cap = static_cast<double>(t) * (cost.p_max(k + 1) - cost.limit(k + 1));
        if (q[k] < 0.0) return false;
        if (q[k] > cap + 1e-9 * std::max(1.0, std::abs(cap))) return false;
    }
    return true;
}

void simulate(const PreparedProblem& prep, const SimParams& params, std::uint64_t run_index,
              const std::function<void(const TraceRecord&)>& observe) {
    const auto& prob = prep.problem();
    if (params.horizon == 0) throw ConfigError("horizon must be at least 1");
    if (params.horizon > prep.horizon()) throw ConfigError("horizon exceeds the prepared schedule");
    if (!(params.V >= 0.0)) throw ConfigError("V must be nonnegative");
    if (params.window.kind == WindowSchedule::Kind::constant && params.window.size == 0) {
        throw ConfigError("window size must be at least 1");
    }

    const std::size_t kk = prep.penalties();
    const std::size_t width = kk + 1;
    const std::uint64_t T = params.horizon;
    const std::uint64_t D = params.delay;

    Rng state_rng = Rng::for_run(params.seed, run_index, Stream::states);
    Rng warmup_rng = Rng::for_run(params.seed, run_index, Stream::warmup);

    std::vector<OutcomeId> omega(T);
    std::vector<double> p_hist(T * width);
    std::vector<double> sums(width, 0.0);
    std::vector<double> delayed(kk, 0.0);
    const auto limits = prob.cost.limits();

    TraceRecord rec;
    rec.p.assign(width, 0.0);
    rec.q.assign(kk, 0.0);
    rec.avg.assign(width, 0.0);

    for (std::uint64_t t = 0; t < T; ++t) {
        omega[t] = sample(prep.pi_at(t), state_rng);

        const std::uint64_t w = params.window.at(t);
        std::size_t j;
        const bool warm = in_warmup(t, D, w);
        if (warm) {
            j = warmup_detect(prob.covering, warmup_rng);
        } else {
            const std::uint64_t last = t - D;
            j = prep.detect(std::span<const OutcomeId>(omega.data() + (last + 1 - w), w));
        }

        const StrategyIndex m = select_strategy(rec.q, params.V, prep.rtable(j));
        const ActionId a = prob.space.apply(m, omega[t]);
        double* pt = p_hist.data() + t * width;
        for (std::size_t k = 0; k < width; ++k) {
            pt[k] = prob.cost.value(k, a, omega[t]);
            sums[k] += pt[k];
        }

        if (t >= D) {
            const double* pd = p_hist.data() + (t - D) * width;
            for (std::size_t k = 0; k < kk; ++k) delayed[k] = pd[k + 1];
        } else {
            std::fill(delayed.begin(), delayed.end(), 0.0);
        }
        rec.q = update_queues(rec.q, delayed, limits);

        rec.t = t;
        rec.omega = omega[t];
        rec.jstar = static_cast<std::uint32_t>(j);
        rec.warmup = warm;
        rec.m = m;
        rec.action = a;
        const double inv = 1.0 / static_cast<double>(t + 1);
        for (std::size_t k = 0; k < width; ++k) {
            rec.p[k] = pt[k];
            rec.avg[k] = sums[k] * inv;
        }
        observe(rec);
    }
}

std::vector<TraceRecord> run(const PreparedProblem& prep, const SimParams& params) {
    std::vector<TraceRecord> out;
    out.reserve(params.horizon);
    simulate(prep, params, 0, [&](const TraceRecord& r) { out.push_back(r); });
    return out;
}

EnsembleResult run_ensemble(const PreparedProblem& prep, const SimParams& params, std::size_t n_runs,
                            std::size_t workers) {
    if (n_runs == 0) throw ConfigError("ensemble needs at least one run");
    const std::size_t width = prep.penalties() + 1;
    const std::uint64_t T = params.horizon;

    EnsembleResult res;
    res.horizon = T;
    res.penalties = prep.penalties();
    res.istar = prep.istar();
    res.members = prep.problem().covering.size();
    res.runs.resize(n_runs);
    std::vector<std::uint64_t> violations(n_runs, 0);

    auto do_run = [&](std::size_t r) {
        RunLog& log = res.runs[r];
        log.omega.reserve(T);
        log.jstar.reserve(T);
        log.warmup.reserve(T);
        log.m.reserve(T);
        log.p.reserve(T * width);
        std::uint64_t bad = 0;
        simulate(prep, params, r, [&](const TraceRecord& rec) {
            log.omega.push_back(rec.omega);
            log.jstar.push_back(rec.jstar);
            log.warmup.push_back(rec.warmup ? 1 : 0);
            log.m.push_back(rec.m);
            log.p.insert(log.p.end(), rec.p.begin(), rec.p.end());
            if (!queue_within_growth_bound(rec.q, rec.t + 1, prep.problem().cost)) ++bad;
            if (rec.t + 1 == T) log.final_avg = rec.avg;
        });
        violations[r] = bad;
    };

    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n_runs);
    if (workers <= 1) {
        for (std::size_t r = 0; r < n_runs; ++r) do_run(r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::atomic<bool> failed{false};
        for (std::size_t i = 0; i < workers; ++i) {
            pool.emplace_back([&] {
                for (std::size_t r = next++; r < n_runs; r = next++) {
                    try {
                        do_run(r);
                    } catch (...) {
                        if (!failed.exchange(true)) failure = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    // Merge in run order so the sums do not depend on scheduling.
    res.mean_p.assign(T * width, 0.0);
    for (std::size_t r = 0; r < n_runs; ++r) {
        const auto& p = res.runs[r].p;
        for (std::size_t i = 0; i < p.size(); ++i) res.mean_p[i] += p[i];
        res.queue_violations += violations[r];
    }
    const double inv = 1.0 / static_cast<double>(n_runs);
    for (double& x : res.mean_p) x *= inv;
    return res;
}

}  // namespace adpp
