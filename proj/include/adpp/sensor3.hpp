#pragma once

// The three-sensor reporting benchmark: sensor i sees w_i in {0,1,2,3} and
// decides whether to transmit (1 watt). Utility
//   min{ a_1 w_1 / 3 + (a_2 w_2 + a_3 w_3) / 6, 1 }
// is maximized subject to an average power of 1/3 per sensor. The engine
// minimizes cost, so p_0 = -utility and p_k = a_k.

#include <cstdint>
#include <memory>
#include <vector>

#include "adpp/sim.hpp"

namespace adpp::sensor3 {

inline constexpr std::size_t kSensors = 3;
inline constexpr std::uint32_t kLevels = 4;
inline constexpr double kPowerLimit = 1.0 / 3.0;

struct Options {
    std::uint64_t covering_seed = 11;
    std::size_t members = 8;         ///< limit itself plus members - 1 perturbations
    double radius = 0.2;             ///< per-sensor L1 distance of each perturbation
    double floor = 0.02;             ///< smallest admissible per-sensor probability
    double rho = 0.99;               ///< geometric schedule rate
    std::size_t initial_member = 1;  ///< schedule starts at this member
    std::uint64_t horizon = 5000;    ///< slots over which delta is measured
};

/// {0.1, 0.7, 0.1, 0.1}
FiniteDistribution sensor_limit();

ProductStateSpace state_space();
ActionModel action_model();
StrategySpace strategy_space();
CostModel cost_model();

/// Per-sensor laws of every covering member (member 0 is the limit).
std::vector<std::vector<FiniteDistribution>> member_factors(const Options& opts);

/// Covering set, schedule and the realized radius delta.
Problem make_problem(const Options& opts = {});
std::shared_ptr<const Problem> shared_problem(const Options& opts = {});

/// Repo defaults for experiments on this benchmark.
struct Defaults {
    std::vector<double> V_list{2.0, 5.0, 20.0};
    double V = 20.0;
    std::uint64_t delay = 0;
    std::uint64_t window = 40;
    std::uint64_t horizon = 5000;
    std::size_t runs = 1000;
};

}  // namespace adpp::sensor3
