#include "adpp/sensor3.hpp"

#include <algorithm>
#include <cmath>

namespace adpp::sensor3 {

FiniteDistribution sensor_limit() { return FiniteDistribution({0.1, 0.7, 0.1, 0.1}); }

ProductStateSpace state_space() { return ProductStateSpace(std::vector<std::uint32_t>(kSensors, kLevels)); }

ActionModel action_model() { return ActionModel(std::vector<std::uint32_t>(kSensors, 2)); }

StrategySpace strategy_space() { return StrategySpace(state_space(), action_model()); }

CostModel cost_model() {
    const auto states = state_space();
    const auto actions = action_model();
    const std::size_t ns = states.total();
    const std::size_t na = actions.joint_count();
    std::vector<std::vector<double>> tables(kSensors + 1, std::vector<double>(na * ns));
    for (ActionId a = 0; a < na; ++a) {
        const auto act = actions.decode(a);
        for (OutcomeId w = 0; w < ns; ++w) {
            const auto om = states.decode(w);
            const double u = std::min(act[0] * om[0] / 3.0 + (act[1] * om[1] + act[2] * om[2]) / 6.0, 1.0);
            tables[0][a * ns + w] = -u;
            for (std::size_t k = 0; k < kSensors; ++k) tables[k + 1][a * ns + w] = act[k];
        }
    }
    return CostModel(na, ns, std::move(tables), std::vector<double>(kSensors, kPowerLimit));
}

namespace {

/// A law at L1 distance exactly `radius` from `base`, every entry >= floor.
FiniteDistribution perturb(const FiniteDistribution& base, double radius, double floor, Rng& rng) {
    const std::size_t n = base.size();
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<double> d(n);
        double mean = 0.0;
        for (auto& x : d) {
            x = 2.0 * rng.uniform() - 1.0;
            mean += x;
        }
        mean /= static_cast<double>(n);
        double l1 = 0.0;
        for (auto& x : d) {
            x -= mean;
            l1 += std::abs(x);
        }
        if (l1 < 1e-6) continue;
        std::vector<double> p(n);
        bool ok = true;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = base[i] + d[i] * radius / l1;
            ok = ok && p[i] >= floor;
        }
        if (!ok) continue;
        // Put the rounding residue on the largest entry so the sum is exact.
        double s = 0.0;
        for (double x : p) s += x;
        *std::max_element(p.begin(), p.end()) += 1.0 - s;
        return FiniteDistribution(std::move(p));
    }
    throw ConfigError("could not place a perturbation with the requested radius above the floor");
}

}  // namespace

std::vector<std::vector<FiniteDistribution>> member_factors(const Options& opts) {
    if (opts.members == 0) throw ConfigError("sensor3 covering needs at least one member");
    Rng rng(opts.covering_seed);
    const auto base = sensor_limit();
    std::vector<std::vector<FiniteDistribution>> out;
    out.emplace_back(kSensors, base);
    for (std::size_t j = 1; j < opts.members; ++j) {
        std::vector<FiniteDistribution> f;
        for (std::size_t i = 0; i < kSensors; ++i) f.push_back(perturb(base, opts.radius, opts.floor, rng));
        out.push_back(std::move(f));
    }
    return out;
}

Problem make_problem(const Options& opts) {
    if (opts.initial_member >= opts.members) throw ConfigError("sensor3 initial member out of range");
    std::vector<FiniteDistribution> members;
    for (const auto& f : member_factors(opts)) members.push_back(FiniteDistribution::product(f));
    const auto limit = members.front();
    auto schedule = NonstationarySchedule::geometric(members[opts.initial_member], limit, opts.rho);

    // delta: the largest nearest-member distance the schedule reaches, made
    // strict by a small relative widening.
    auto provisional = CoveringSet::with_derived_support(members, 1.0);
    double worst = 0.0;
    for (std::uint64_t t = 0; t < opts.horizon; ++t) {
        worst = std::max(worst, nearest_member(provisional, schedule.at(t)).distance);
    }
    const double delta = std::max(worst * (1.0 + 1e-9), 1e-12);
    return Problem{strategy_space(), cost_model(), CoveringSet::with_derived_support(std::move(members), delta),
                   std::move(schedule)};
}

std::shared_ptr<const Problem> shared_problem(const Options& opts) {
    return std::make_shared<const Problem>(make_problem(opts));
}

}  // namespace adpp::sensor3
