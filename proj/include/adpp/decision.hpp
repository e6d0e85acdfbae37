#pragma once

// Pure strategies, cost/penalty tables and the strategy averages r_k^(m)
// shared by the LP oracle and the control loop.

#include <cstdint>
#include <span>
#include <vector>

#include "adpp/prob.hpp"

namespace adpp {

using StrategyIndex = std::uint64_t;
using ActionId = std::uint32_t;

/// Per-user action set sizes |A_i|.
class ActionModel {
public:
    ActionModel() = default;
    explicit ActionModel(std::vector<std::uint32_t> counts);

    std::size_t users() const noexcept { return counts_.size(); }
    std::uint32_t count(std::size_t user) const { return counts_[user]; }
    const std::vector<std::uint32_t>& counts() const noexcept { return counts_; }
    /// |A| = prod |A_i|
    std::size_t joint_count() const noexcept { return joint_; }

    ActionId encode(std::span<const std::uint32_t> actions) const;
    std::vector<std::uint32_t> decode(ActionId id) const;

private:
    std::vector<std::uint32_t> counts_;
    std::vector<std::size_t> place_;
    std::size_t joint_ = 0;
};

/// s_i : Omega_i -> A_i for every user i.
struct PureStrategy {
    std::vector<std::vector<std::uint32_t>> tables;
    bool operator==(const PureStrategy&) const = default;
};

/// Largest F the engine accepts.
inline constexpr std::uint64_t kMaxStrategies = std::uint64_t{1} << 32;

/// F = prod |A_i|^{|Omega_i|}. Throws ConfigError when F exceeds kMaxStrategies.
std::uint64_t strategy_count(const ActionModel& actions, const ProductStateSpace& states);

/// Canonical enumeration of all pure strategies. Strategy m is a mixed-radix
/// number whose digits are s_i(w_i) ordered (user 0, state 0), (user 0,
/// state 1), ..., most significant first; digit base is |A_i|.
class StrategySpace {
public:
    StrategySpace(ProductStateSpace states, ActionModel actions);

    const ProductStateSpace& states() const noexcept { return states_; }
    const ActionModel& actions() const noexcept { return actions_; }
    std::uint64_t size() const noexcept { return count_; }

    PureStrategy decode(StrategyIndex m) const;
    StrategyIndex encode(const PureStrategy& s) const;

    /// Local action of `user` under strategy m when its own state is `local_state`.
    std::uint32_t local_action(StrategyIndex m, std::size_t user, std::uint32_t local_state) const {
        return static_cast<std::uint32_t>((m / digit_place_[user][local_state]) % actions_.count(user));
    }

    /// Joint action S^m(w), computed user by user from (w_i, m) only.
    ActionId apply(StrategyIndex m, OutcomeId joint_state) const;
    ActionId apply(const PureStrategy& s, OutcomeId joint_state) const;

private:
    ProductStateSpace states_;
    ActionModel actions_;
    std::uint64_t count_;
    std::vector<std::vector<std::uint64_t>> digit_place_;
};

/// Cost table p_0 and penalty tables p_1..p_K over (joint action, joint
/// state), with constraint levels c_1..c_K.
class CostModel {
public:
    /// tables[k][a * |Omega| + w]; tables.size() == K + 1; limits.size() == K.
    CostModel(std::size_t action_count, std::size_t state_count, std::vector<std::vector<double>> tables,
              std::vector<double> limits);

    std::size_t penalties() const noexcept { return limits_.size(); }  ///< K
    std::size_t action_count() const noexcept { return actions_; }
    std::size_t state_count() const noexcept { return states_; }

    double value(std::size_t k, ActionId a, OutcomeId w) const { return tables_[k][a * states_ + w]; }
    const std::vector<double>& table(std::size_t k) const { return tables_[k]; }
    const std::vector<double>& limits() const noexcept { return limits_; }
    /// c_k for k = 1..K.
    double limit(std::size_t k) const { return limits_[k - 1]; }

    double p_max(std::size_t k) const { return pmax_[k]; }
    double p_min(std::size_t k) const { return pmin_[k]; }
    double dp_max(std::size_t k) const { return pmax_[k] - pmin_[k]; }
    double b_max(std::size_t k) const;

private:
    std::size_t actions_;
    std::size_t states_;
    std::vector<std::vector<double>> tables_;
    std::vector<double> limits_;
    std::vector<double> pmax_;
    std::vector<double> pmin_;
};

/// (r_0, ..., r_K) with r_k = sum_w lambda(w) p_k(S^m(w), w).
std::vector<double> r_vector(const StrategySpace& space, StrategyIndex m, const FiniteDistribution& lambda,
                             const CostModel& cost);

/// r_vector for every strategy, stored row-major: row m holds r_0..r_K.
class RTable {
public:
    RTable(const StrategySpace& space, const FiniteDistribution& lambda, const CostModel& cost);

    std::uint64_t strategies() const noexcept { return strategies_; }
    std::size_t width() const noexcept { return width_; }  ///< K + 1
    double r(StrategyIndex m, std::size_t k) const { return data_[m * width_ + k]; }
    std::span<const double> row(StrategyIndex m) const { return {data_.data() + m * width_, width_}; }

private:
    std::uint64_t strategies_;
    std::size_t width_;
    std::vector<double> data_;
};

/// B_t = max_m 1/2 sum_k sum_w pi_t(w) |p_k(S^m(w), w) - c_k|^2. Precomputes
/// the per-strategy squared excess so repeated evaluations are cheap.
class BtEvaluator {
public:
    BtEvaluator(const StrategySpace& space, const CostModel& cost);
    double operator()(const FiniteDistribution& pi) const;
    /// sum_k sum_w pi(w) |p_k - c_k|^2 for every strategy (no factor 1/2).
    std::vector<double> expectations(const FiniteDistribution& pi) const;

private:
    std::uint64_t strategies_;
    std::size_t states_;
    std::vector<double> excess_;  // strategies_ x states_
};

double b_t(const StrategySpace& space, const FiniteDistribution& pi, const CostModel& cost);

}  // namespace adpp
