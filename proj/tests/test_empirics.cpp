#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "adpp/empirics.hpp"
#include "adpp/sensor3.hpp"

using namespace adpp;
using namespace adpp::empirics;

namespace {

Panel synthetic(std::size_t runs, std::uint64_t T, Rng& rng, bool coupled) {
    Panel p;
    for (std::size_t r = 0; r < runs; ++r) {
        std::vector<double> v(T);
        for (auto& x : v) x = static_cast<double>(rng.uniform_index(coupled ? 2 : 3));
        if (coupled)
            for (std::uint64_t t = 1; t < T; ++t) v[t] = v[0];
        p.values.push_back(std::move(v));
    }
    return p;
}

std::shared_ptr<const Problem> single_member_sensor3() {
    const auto base = sensor3::shared_problem();
    const auto pi = base->schedule.limit();
    return std::make_shared<const Problem>(Problem{base->space, base->cost,
                                                   CoveringSet::with_derived_support({pi}, 0.1), base->schedule});
}

}  // namespace

TEST_CASE("binomial half width") {
    CHECK(binomial_half_width(0.5, 100) == doctest::Approx(kZ99 * 0.05));
    CHECK(binomial_half_width(0.0, 100) == 0.0);
    CHECK(tv_half_width(4, 100) == doctest::Approx(0.5 * std::sqrt(2.0 / 100 * (4 * std::log(2.0) + std::log(100.0)))));
}

TEST_CASE("pair TV") {
    CHECK(pair_tv({1, 1, 1}, {2, 3, 2}) == 0.0);
    CHECK(pair_tv({0, 1, 0, 1}, {0, 1, 0, 1}) == doctest::Approx(0.5));
    CHECK(pair_tv({0, 0, 1, 1}, {0, 1, 0, 1}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(pair_tv({0, 1}, {0}), DimensionError);
}

TEST_CASE("anchor grid") {
    const auto g = anchor_grid(100, 5000, 40, 20);
    REQUIRE(!g.empty());
    CHECK(g.front() == 100);
    CHECK(g.back() == 5000 - 1 - 40);
    CHECK(std::is_sorted(g.begin(), g.end()));
    CHECK(std::adjacent_find(g.begin(), g.end()) == g.end());
    CHECK(anchor_grid(10, 12, 5, 3).size() == 0);
    CHECK(anchor_grid(0, 3, 1, 10).size() <= 2);
}

TEST_CASE("beta_1 on synthetic panels") {
    Rng rng(3);
    SUBCASE("i.i.d. values: near zero at 10^4 runs") {
        const auto p = synthetic(10000, 60, rng, false);
        const auto e = estimate_beta1(p, 5, 0, {5, 100});
        CHECK(e.value <= 0.05);
        CHECK(e.value >= 0.0);
    }
    SUBCASE("coupled pairs: one half") {
        const auto p = synthetic(10000, 60, rng, true);
        const auto e = estimate_beta1(p, 5, 0, {5, 100});
        CHECK(e.value == doctest::Approx(0.5).epsilon(0.02));
        CHECK(e.value <= 1.0);
    }
    SUBCASE("too few survivors") {
        auto p = synthetic(150, 60, rng, false);
        p.errors.assign(150, std::vector<std::uint8_t>(60, 0));
        for (std::size_t r = 0; r < 100; ++r) p.errors[r][30] = 1;
        // anchors whose window [t, t + 5] covers slot 30 keep only 50 runs
        const auto e = estimate_beta1(p, 5, 0, {20, 100});
        bool any_skipped = false;
        for (const auto& a : e.anchors) {
            const bool covers = a.t <= 30 && 30 <= a.t + 5;
            CHECK(a.skipped == covers);
            if (!a.skipped) CHECK(a.survivors == 150);
            any_skipped |= a.skipped;
        }
        CHECK(any_skipped);
        for (auto& row : p.errors) row.assign(60, 1);
        CHECK_THROWS_AS(estimate_beta1(p, 5, 0, {20, 100}), Error);
    }
}

TEST_CASE("beta_1 on shuffled sensor3 traces is within CI of zero") {
    const auto prep = PreparedProblem(sensor3::shared_problem(), 150);
    const auto ens = run_ensemble(prep, {20.0, 0, WindowSchedule::constant(10), 150, 5}, 400, 1);
    auto p = panel(ens, 1);
    p.errors.clear();
    Rng rng(77);
    // permute every slot across runs independently
    for (std::uint64_t t = 0; t < p.horizon(); ++t)
        for (std::size_t i = p.runs() - 1; i > 0; --i)
            std::swap(p.values[i][t], p.values[rng.uniform_index(i + 1)][t]);
    const auto e = estimate_beta1(p, 5, 20, {10, 100});
    for (const auto& a : e.anchors) CHECK(a.tv <= a.half_width);
}

TEST_CASE("kappa") {
    Rng rng(9);
    SUBCASE("two strategies: log 2") {
        std::vector<ChannelSample> s;
        for (int i = 0; i < 200000; ++i) {
            const StrategyIndex m = i % 2;
            const double p1 = m == 0 ? 0.6 : 0.3;
            s.push_back({m, {rng.uniform() < p1 ? 1.0 : 0.0}});
        }
        const auto k = estimate_kappa(s);
        REQUIRE(k.value);
        CHECK(*k.value == doctest::Approx(std::log(2.0)).epsilon(0.03));
        CHECK(k.strategies == 2);
    }
    SUBCASE("identical conditionals: near zero") {
        std::vector<ChannelSample> s;
        for (int i = 0; i < 200000; ++i) s.push_back({static_cast<StrategyIndex>(i % 3), {double(rng.uniform_index(4))}});
        const auto k = estimate_kappa(s);
        REQUIRE(k.value);
        CHECK(*k.value >= 0.0);
        CHECK(*k.value < 0.05);
    }
    SUBCASE("one strategy: undefined") {
        std::vector<ChannelSample> s(500, ChannelSample{7, {1.0}});
        const auto k = estimate_kappa(s);
        CHECK_FALSE(k.value);
        CHECK(!k.note.empty());
    }
    SUBCASE("sparse cells are excluded") {
        std::vector<ChannelSample> s;
        for (int i = 0; i < 100; ++i) s.push_back({0, {0.0}});
        for (int i = 0; i < 100; ++i) s.push_back({1, {0.0}});
        for (int i = 0; i < 10; ++i) s.push_back({1, {1.0}});
        const auto k = estimate_kappa(s, 50);
        CHECK(k.cells_excluded >= 1);
        REQUIRE(k.value);
        CHECK(*k.value == doctest::Approx(std::log(110.0 / 100.0)).epsilon(1e-9));
    }
}

TEST_CASE("error rates") {
    SUBCASE("one member: never wrong") {
        const auto prep = PreparedProblem(single_member_sensor3(), 100);
        const auto ens = run_ensemble(prep, {20.0, 0, WindowSchedule::constant(10), 100, 2}, 30, 1);
        const auto r = error_rate(ens);
        for (double x : r.rate) CHECK(x == 0.0);
        CHECK(interval_error_rate(ens, 0, 99) == 0.0);
    }
    SUBCASE("warmup: (M - 1) / M") {
        const auto prep = PreparedProblem(sensor3::shared_problem(), 60);
        const auto ens = run_ensemble(prep, {20.0, 0, WindowSchedule::constant(40), 60, 4}, 2000, 1);
        const auto r = error_rate(ens);
        REQUIRE(r.runs == 2000);
        const double expect = 7.0 / 8;
        double pooled = 0.0;
        for (std::uint64_t t = 0; t < 39; ++t) {
            CHECK(r.warmup[t] == 1);
            // 39 slots at once: z = 3.9 keeps the family-wise level near 99%
            CHECK(std::abs(r.rate[t] - expect) <= binomial_half_width(expect, 2000, 3.9));
            pooled += r.rate[t] / 39;
        }
        CHECK(std::abs(pooled - expect) <= binomial_half_width(expect, 39 * 2000));
        CHECK(r.warmup[40] == 0);
        for (double x : r.rate) {
            CHECK(x >= 0.0);
            CHECK(x <= 1.0);
        }
        CHECK(interval_error_rate(ens, 0, 5) >= r.rate[0]);
        CHECK(interval_error_rate(ens, 0, 5) <= 1.0);
    }
}

TEST_CASE("channel samples skip warmup and errors") {
    const auto prep = PreparedProblem(sensor3::shared_problem(), 80);
    const auto ens = run_ensemble(prep, {20.0, 0, WindowSchedule::constant(10), 80, 6}, 10, 1);
    std::size_t expected = 0;
    for (const auto& r : ens.runs)
        for (std::uint64_t t = 0; t < 80; ++t) expected += !r.warmup[t] && r.jstar[t] == ens.istar;
    const auto s = channel_samples(ens);
    CHECK(s.size() == expected);
    for (const auto& x : s) CHECK(x.x.size() == 4);
}

TEST_CASE("gap report") {
    SUBCASE("single strategy, point mass state") {
        const auto pm = FiniteDistribution::point_mass(2, 1);
        const CostModel cost(1, 2, {{0.4, -0.25}, {0.0, 0.3}}, {0.5});
        const auto prob = std::make_shared<const Problem>(
            Problem{StrategySpace(ProductStateSpace({2}), ActionModel({1})), cost,
                    CoveringSet::with_derived_support({pm}, 0.1), NonstationarySchedule::stationary(pm)});
        const auto prep = PreparedProblem(prob, 50);
        const auto ens = run_ensemble(prep, {5.0, 0, WindowSchedule::constant(3), 50, 1}, 4, 1);
        const auto g = gap_report(ens, -0.25, cost, 10);
        CHECK(g.cost_gap == doctest::Approx(0.0));
        CHECK(g.final_mean[1] == doctest::Approx(0.3));
        CHECK(g.excess[0] == 0.0);
        CHECK(g.final_half_width[0] == doctest::Approx(0.0));
        CHECK(g.tail == 10);
        CHECK(g.tail_mean[0] == doctest::Approx(-0.25));
    }
    SUBCASE("constraint excess is reported") {
        const auto pm = FiniteDistribution::point_mass(2, 0);
        const CostModel cost(1, 2, {{0.0, 0.0}, {0.8, 0.8}}, {0.5});
        const auto prob = std::make_shared<const Problem>(
            Problem{StrategySpace(ProductStateSpace({2}), ActionModel({1})), cost,
                    CoveringSet::with_derived_support({pm}, 0.1), NonstationarySchedule::stationary(pm)});
        const auto prep = PreparedProblem(prob, 20);
        const auto ens = run_ensemble(prep, {5.0, 0, WindowSchedule::constant(3), 20, 1}, 2, 1);
        CHECK(gap_report(ens, 0.0, cost, 5).excess[0] == doctest::Approx(0.3));
    }
}
