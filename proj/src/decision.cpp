#include "adpp/decision.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace adpp {

ActionModel::ActionModel(std::vector<std::uint32_t> counts) : counts_(std::move(counts)) {
    if (counts_.empty()) throw ConfigError("action model needs at least one user");
    place_.assign(counts_.size(), 1);
    joint_ = 1;
    for (std::size_t i = counts_.size(); i-- > 0;) {
        if (counts_[i] == 0) throw ConfigError("user " + std::to_string(i) + " has no actions");
        place_[i] = joint_;
        joint_ *= counts_[i];
        if (joint_ > UINT32_MAX) throw ConfigError("joint action space too large");
    }
}

ActionId ActionModel::encode(std::span<const std::uint32_t> actions) const {
    if (actions.size() != counts_.size()) throw DimensionError("action tuple has wrong length");
    std::size_t id = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        if (actions[i] >= counts_[i]) throw DimensionError("action out of range");
        id += actions[i] * place_[i];
    }
    return static_cast<ActionId>(id);
}

std::vector<std::uint32_t> ActionModel::decode(ActionId id) const {
    if (id >= joint_) throw DimensionError("joint action id out of range");
    std::vector<std::uint32_t> out(counts_.size());
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        out[i] = static_cast<std::uint32_t>((id / place_[i]) % counts_[i]);
    }
    return out;
}

std::uint64_t strategy_count(const ActionModel& actions, const ProductStateSpace& states) {
    if (actions.users() != states.users()) {
        throw DimensionError("action model and state space disagree on the number of users");
    }
    std::uint64_t f = 1;
    for (std::size_t i = 0; i < actions.users(); ++i) {
        for (std::uint32_t s = 0; s < states.cardinality(i); ++s) {
            const std::uint64_t a = actions.count(i);
            if (f > kMaxStrategies / a) {
                throw ConfigError("strategy count exceeds 2^32; restrict the strategy class "
                                  "(fewer local states or actions per user)");
            }
            f *= a;
        }
    }
    return f;
}

StrategySpace::StrategySpace(ProductStateSpace states, ActionModel actions)
    : states_(std::move(states)), actions_(std::move(actions)), count_(strategy_count(actions_, states_)) {
    digit_place_.resize(states_.users());
    std::uint64_t place = 1;
    for (std::size_t i = states_.users(); i-- > 0;) {
        digit_place_[i].assign(states_.cardinality(i), 0);
        for (std::uint32_t s = states_.cardinality(i); s-- > 0;) {
            digit_place_[i][s] = place;
            place *= actions_.count(i);
        }
    }
}

PureStrategy StrategySpace::decode(StrategyIndex m) const {
    if (m >= count_) throw DimensionError("strategy index out of range");
    PureStrategy s;
    s.tables.resize(states_.users());
    for (std::size_t i = 0; i < states_.users(); ++i) {
        s.tables[i].resize(states_.cardinality(i));
        for (std::uint32_t w = 0; w < states_.cardinality(i); ++w) s.tables[i][w] = local_action(m, i, w);
    }
    return s;
}

StrategyIndex StrategySpace::encode(const PureStrategy& s) const {
    if (s.tables.size() != states_.users()) throw DimensionError("strategy has wrong number of users");
    StrategyIndex m = 0;
    for (std::size_t i = 0; i < states_.users(); ++i) {
        if (s.tables[i].size() != states_.cardinality(i)) {
            throw DimensionError("strategy table length does not match |Omega_i|");
        }
        for (std::uint32_t w = 0; w < states_.cardinality(i); ++w) {
            if (s.tables[i][w] >= actions_.count(i)) throw DimensionError("strategy action out of range");
            m += s.tables[i][w] * digit_place_[i][w];
        }
    }
    return m;
}

ActionId StrategySpace::apply(StrategyIndex m, OutcomeId joint_state) const {
    ActionId a = 0;
    for (std::size_t i = 0; i < states_.users(); ++i) {
        a = a * actions_.count(i) + local_action(m, i, states_.component(joint_state, i));
    }
    return a;
}

ActionId StrategySpace::apply(const PureStrategy& s, OutcomeId joint_state) const {
    ActionId a = 0;
    for (std::size_t i = 0; i < states_.users(); ++i) {
        a = a * actions_.count(i) + s.tables[i][states_.component(joint_state, i)];
    }
    return a;
}

CostModel::CostModel(std::size_t action_count, std::size_t state_count,
                     std::vector<std::vector<double>> tables, std::vector<double> limits)
    : actions_(action_count), states_(state_count), tables_(std::move(tables)), limits_(std::move(limits)) {
    if (tables_.size() != limits_.size() + 1) {
        throw DimensionError("cost model needs K + 1 tables for K constraint levels");
    }
    for (std::size_t k = 0; k < tables_.size(); ++k) {
        if (tables_[k].size() != actions_ * states_) {
            throw DimensionError("table " + std::to_string(k) + " is not |A| x |Omega|");
        }
        for (double v : tables_[k]) {
            if (!std::isfinite(v)) throw ConfigError("table " + std::to_string(k) + " has a non-finite entry");
        }
        const auto [lo, hi] = std::minmax_element(tables_[k].begin(), tables_[k].end());
        pmin_.push_back(*lo);
        pmax_.push_back(*hi);
    }
    for (std::size_t k = 0; k < limits_.size(); ++k) {
        if (!std::isfinite(limits_[k])) throw ConfigError("constraint level c_" + std::to_string(k + 1) + " is not finite");
    }
}

double CostModel::b_max(std::size_t k) const {
    return std::max(std::abs(pmax_[k]), std::abs(pmin_[k]));
}

std::vector<double> r_vector(const StrategySpace& space, StrategyIndex m, const FiniteDistribution& lambda,
                             const CostModel& cost) {
    if (lambda.size() != cost.state_count() || lambda.size() != space.states().total()) {
        throw DimensionError("distribution does not live on the model's joint state space");
    }
    std::vector<double> r(cost.penalties() + 1, 0.0);
    for (OutcomeId w = 0; w < lambda.size(); ++w) {
        const double p = lambda[w];
        if (p == 0.0) continue;
        const ActionId a = space.apply(m, w);
        for (std::size_t k = 0; k < r.size(); ++k) r[k] += p * cost.value(k, a, w);
    }
    return r;
}

RTable::RTable(const StrategySpace& space, const FiniteDistribution& lambda, const CostModel& cost)
    : strategies_(space.size()), width_(cost.penalties() + 1) {
    if (lambda.size() != cost.state_count() || lambda.size() != space.states().total()) {
        throw DimensionError("distribution does not live on the model's joint state space");
    }
    data_.assign(strategies_ * width_, 0.0);
    for (StrategyIndex m = 0; m < strategies_; ++m) {
        double* row = data_.data() + m * width_;
        for (OutcomeId w = 0; w < lambda.size(); ++w) {
            const double p = lambda[w];
            if (p == 0.0) continue;
            const ActionId a = space.apply(m, w);
            for (std::size_t k = 0; k < width_; ++k) row[k] += p * cost.value(k, a, w);
        }
    }
}

BtEvaluator::BtEvaluator(const StrategySpace& space, const CostModel& cost)
    : strategies_(space.size()), states_(cost.state_count()) {
    excess_.assign(strategies_ * states_, 0.0);
    for (StrategyIndex m = 0; m < strategies_; ++m) {
        for (OutcomeId w = 0; w < states_; ++w) {
            const ActionId a = space.apply(m, w);
            double s = 0.0;
            for (std::size_t k = 1; k <= cost.penalties(); ++k) {
                const double d = cost.value(k, a, w) - cost.limit(k);
                s += d * d;
            }
            excess_[m * states_ + w] = s;
        }
    }
}

double BtEvaluator::operator()(const FiniteDistribution& pi) const {
    if (pi.size() != states_) throw DimensionError("distribution does not match the cost model");
    double best = 0.0;
    const auto p = pi.probs();
    for (StrategyIndex m = 0; m < strategies_; ++m) {
        const double* row = excess_.data() + m * states_;
        double s = 0.0;
        for (std::size_t w = 0; w < states_; ++w) s += p[w] * row[w];
        best = std::max(best, s);
    }
    return 0.5 * best;
}

std::vector<double> BtEvaluator::expectations(const FiniteDistribution& pi) const {
    if (pi.size() != states_) throw DimensionError("distribution does not match the cost model");
    std::vector<double> out(strategies_);
    const auto p = pi.probs();
    for (StrategyIndex m = 0; m < strategies_; ++m) {
        const double* row = excess_.data() + m * states_;
        double s = 0.0;
        for (std::size_t w = 0; w < states_; ++w) s += p[w] * row[w];
        out[m] = s;
    }
    return out;
}

double b_t(const StrategySpace& space, const FiniteDistribution& pi, const CostModel& cost) {
    return BtEvaluator(space, cost)(pi);
}

}  // namespace adpp
