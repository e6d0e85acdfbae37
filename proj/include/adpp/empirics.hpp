#pragma once

// Estimators for the quantities the guarantees talk about: detection-error
// rates, the beta_1 mixing coefficient, the channel constant kappa and
// time-average gaps, all computed from ensemble logs.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adpp/decision.hpp"
#include "adpp/sim.hpp"

namespace adpp::empirics {

/// Two-sided 99% normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

/// z sqrt(p (1 - p) / n).
double binomial_half_width(double p, std::size_t n, double z = kZ99);

struct ErrorRates {
    std::size_t runs = 0;
    std::vector<double> rate;        ///< fraction of runs with j*_t != i*
    std::vector<double> half_width;  ///< 99% normal interval
    std::vector<std::uint8_t> warmup;  ///< 1 when every run was in warmup at t
};

ErrorRates error_rate(const EnsembleResult& ens);

/// Fraction of runs with at least one detection error in [first, last].
double interval_error_rate(const EnsembleResult& ens, std::uint64_t first, std::uint64_t last);

/// values[run][t] of one scalar process, plus errors[run][t] != 0 marking
/// detection errors (may be empty: no conditioning).
struct Panel {
    std::vector<std::vector<double>> values;
    std::vector<std::vector<std::uint8_t>> errors;

    std::size_t runs() const { return values.size(); }
    std::uint64_t horizon() const { return values.empty() ? 0 : values.front().size(); }
};

/// p_k(t) of every run, with error flags against i*.
Panel panel(const EnsembleResult& ens, std::size_t k);

struct Beta1Options {
    std::size_t anchors = 20;
    std::size_t min_runs = 100;
};

struct Beta1Anchor {
    std::uint64_t t;
    std::size_t survivors;
    double tv;
    double half_width;
    bool skipped;
};

struct Beta1Estimate {
    std::uint64_t s = 0;
    double value = 0.0;       ///< max TV over the anchors that were not skipped
    double half_width = 0.0;  ///< CI half-width at the maximizing anchor
    std::vector<Beta1Anchor> anchors;
};

/// Log-spaced anchors in [alpha, T - 1 - s], deduplicated.
std::vector<std::uint64_t> anchor_grid(std::uint64_t alpha, std::uint64_t horizon, std::uint64_t s,
                                       std::size_t count);

/// TV distance between the empirical joint law of (x_i, y_i) and the product
/// of its empirical marginals.
double pair_tv(const std::vector<double>& x, const std::vector<double>& y);

/// 99% L1 deviation radius for an empirical law with `cells` cells from n
/// samples, halved for TV: 1/2 sqrt(2/n (cells ln 2 + ln 100)).
double tv_half_width(std::size_t cells, std::size_t n);

/// For each anchor t, keeps runs with no detection error in [t, t + s] and
/// measures pair_tv of (p(t), p(t + s)). Throws Error when every anchor is
/// skipped.
Beta1Estimate estimate_beta1(const Panel& panel, std::uint64_t s, std::uint64_t alpha,
                             const Beta1Options& opts = {});

/// One observation of the realized cost vector X given the chosen strategy.
struct ChannelSample {
    StrategyIndex m;
    std::vector<double> x;
};

struct KappaEstimate {
    std::optional<double> value;  ///< empty when undefined
    std::size_t strategies = 0;   ///< strategies with at least one included cell
    std::size_t cells_used = 0;
    std::size_t cells_excluded = 0;
    std::size_t samples = 0;
    std::string note;
};

/// max over x, m, m' of log(P(x|m) / P(x|m')) over cells with at least
/// `min_count` observations.
KappaEstimate estimate_kappa(const std::vector<ChannelSample>& samples, std::size_t min_count = 50);

/// Pools post-warmup slots without a detection error.
std::vector<ChannelSample> channel_samples(const EnsembleResult& ens);

struct GapReport {
    double lp_value = 0.0;
    std::vector<double> final_mean;  ///< mean over runs of (1/T) sum p_k
    std::vector<double> final_half_width;
    double cost_gap = 0.0;                ///< final_mean[0] - lp_value
    std::vector<double> excess;           ///< max(0, final_mean[k] - c_k), k = 1..K
    std::uint64_t tail = 0;               ///< slots in the trailing window
    std::vector<double> tail_mean;        ///< ensemble mean of p_k over the trailing window
};

GapReport gap_report(const EnsembleResult& ens, double lp_value, const CostModel& cost, std::uint64_t tail = 500);

}  // namespace adpp::empirics
