#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "adpp/lp.hpp"
#include "adpp/sensor3.hpp"

using namespace adpp;
using namespace adpp::lp;

namespace {

// Frozen after the first evaluation on the sensor3 preset.
constexpr double kSensor3CHat = 0.620000002573;

LpInstance random_instance(Rng& rng, std::size_t F, std::size_t K) {
    LpInstance in;
    for (std::size_t m = 0; m < F; ++m) in.objective.push_back(rng.uniform() * 2 - 1);
    in.constraints.assign(K, {});
    for (std::size_t k = 0; k < K; ++k) {
        double lo = 1.0, hi = 0.0;
        for (std::size_t m = 0; m < F; ++m) {
            const double v = rng.uniform();
            in.constraints[k].push_back(v);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        in.rhs.push_back(lo + (hi - lo) * (0.3 + 0.6 * rng.uniform()));
    }
    return in;
}

void check_solution_invariants(const LpInstance& in, const LpSolution& s) {
    REQUIRE(s.status == LpStatus::optimal);
    double sum = 0.0, val = 0.0;
    for (std::size_t m = 0; m < in.strategies(); ++m) {
        CHECK(s.theta[m] >= -1e-9);
        sum += s.theta[m];
        val += s.theta[m] * in.objective[m];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    CHECK(std::abs(val - s.value) <= 1e-9);
    for (std::size_t k = 0; k < in.penalties(); ++k) {
        double lhs = 0.0;
        for (std::size_t m = 0; m < in.strategies(); ++m) lhs += s.theta[m] * in.constraints[k][m];
        CHECK(lhs <= in.rhs[k] + in.perturbation + 1e-9);
    }
    CHECK(verify_optimal(in, s).empty());
}

}  // namespace

TEST_CASE("two strategies without constraints") {
    LpInstance in;
    in.objective = {0.0, 1.0};
    const auto s = solve_lp(in);
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.theta == std::vector<double>{1.0, 0.0});
    CHECK(s.value == 0.0);
}

TEST_CASE("single strategy") {
    LpInstance in;
    in.objective = {0.37};
    in.constraints = {{0.2}, {0.5}};
    in.rhs = {0.3, 0.5};
    const auto s = solve_lp(in);
    REQUIRE(s.status == LpStatus::optimal);
    CHECK(s.theta == std::vector<double>{1.0});
    CHECK(s.value == doctest::Approx(0.37));
}

TEST_CASE("infeasible and malformed instances") {
    LpInstance in;
    in.objective = {0.0, 1.0};
    in.constraints = {{1.0, 1.0}};
    in.rhs = {0.5};
    CHECK(solve_lp(in).status == LpStatus::infeasible);
    CHECK(g_of_x(in, 0.0) == INFINITY);
    CHECK(g_of_x(in, 0.5) == doctest::Approx(0.0));

    LpInstance bad = in;
    bad.rhs = {};
    CHECK_THROWS_AS(bad.validate(), DimensionError);
    bad = in;
    bad.perturbation = -1;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("sensor3 optimum is 0.394") {
    const auto p = sensor3::shared_problem();
    const auto in = LpInstance::from_model(p->space, p->schedule.limit(), p->cost);
    const auto s = solve_lp(in);
    check_solution_invariants(in, s);
    CHECK(std::abs(-s.value - 0.394) <= 0.001);
    for (double x : s.slacks) CHECK(x >= -1e-9);
}

TEST_CASE("G(x): definition, slack limit and monotonicity") {
    const auto p = sensor3::shared_problem();
    const auto in = LpInstance::from_model(p->space, p->schedule.limit(), p->cost);
    CHECK(g_of_x(in, 0.0) == solve_lp(in).value);
    const double huge = 1.0;  // >= max_k (p_max,k - c_k)
    CHECK(g_of_x(in, huge) == doctest::Approx(*std::min_element(in.objective.begin(), in.objective.end())));

    // grid 0, 0.05, ..., 0.5 re-solved with a permuted strategy order
    std::vector<std::size_t> order(in.strategies());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(4);
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_index(i + 1)]);
    const auto perm = in.permuted(order);
    double prev = INFINITY;
    for (int i = 0; i <= 10; ++i) {
        const double x = 0.05 * i;
        const double g = g_of_x(in, x);
        CHECK(g == doctest::Approx(g_of_x(perm, x)).epsilon(1e-12));
        CHECK(g <= prev + 1e-9);
        prev = g;
    }
}

TEST_CASE("value is invariant under strategy permutations") {
    Rng rng(21);
    for (int i = 0; i < 50; ++i) {
        const auto in = random_instance(rng, 2 + rng.uniform_index(30), rng.uniform_index(4));
        const auto s = solve_lp(in);
        if (s.status != LpStatus::optimal) continue;
        check_solution_invariants(in, s);
        std::vector<std::size_t> order(in.strategies());
        std::iota(order.begin(), order.end(), 0);
        std::reverse(order.begin(), order.end());
        CHECK(solve_lp(in.permuted(order)).value == doctest::Approx(s.value).epsilon(1e-12));
    }
}

TEST_CASE("no constraints: value is the smallest cost") {
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto in = random_instance(rng, 1 + rng.uniform_index(40), 0);
        CHECK(solve_lp(in).value == *std::min_element(in.objective.begin(), in.objective.end()));
    }
}

TEST_CASE("optimality certificate") {
    Rng rng(8);
    for (int i = 0; i < 50; ++i) {
        const auto in = random_instance(rng, 3 + rng.uniform_index(20), 1 + rng.uniform_index(3));
        const auto s = solve_lp(in);
        if (s.status != LpStatus::optimal) continue;
        for (double rc : reduced_costs(in, s)) CHECK(rc >= -1e-9);
    }
}

TEST_CASE("Lipschitz probe") {
    LpInstance flat;
    flat.objective = {0.5, 0.5};
    CHECK(lipschitz_probe(flat, {0.0, 0.5, 1.0}) == 0.0);

    // G(x) = max(0, 1 - x)
    LpInstance in;
    in.objective = {0.0, 1.0};
    in.constraints = {{1.0, 0.0}};
    in.rhs = {0.0};
    for (double x : {0.0, 0.3, 0.8, 1.0, 1.5}) CHECK(g_of_x(in, x) == doctest::Approx(std::max(0.0, 1.0 - x)));
    CHECK(lipschitz_probe(in, {0.0, 0.25, 0.5, 0.75, 1.0}) == doctest::Approx(1.0));

    LpInstance infeasible;
    infeasible.objective = {0.0, 1.0};
    infeasible.constraints = {{1.0, 1.0}};
    infeasible.rhs = {0.0};
    try {
        lipschitz_probe(infeasible, {0.25, 0.5, 1.0});
        FAIL("expected a domain error");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("0.25") != std::string::npos);
    }
    CHECK_THROWS_AS(lipschitz_probe(in, {0.0}), DomainError);
}

TEST_CASE("sensor3 c_hat regression") {
    const auto p = sensor3::shared_problem();
    const auto c = gap_case(p->space, p->cost, p->covering, p->schedule.limit(), 0.05);
    CHECK(c.c_hat > 0.0);
    CHECK(c.c_hat == doctest::Approx(kSensor3CHat).epsilon(1e-9));
    CHECK(c.holds);
}

TEST_CASE("gap delta") {
    const FiniteDistribution a({0.5, 0.5}), b({0.4, 0.6});
    const auto cov = CoveringSet::with_derived_support({a}, 0.5);
    // b_max = 1 for both tables
    const CostModel cost(1, 2, {{1.0, -1.0}, {0.0, 1.0}}, {0.5});
    CHECK(gap_delta(b, cov, cost, 0.1) == doctest::Approx(0.3));
    CHECK(gap_delta(a, cov, cost, 1e-12) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK_THROWS_AS(gap_delta(a, cov, cost, 0.0), DomainError);
}

TEST_CASE("member LP within (c_hat + 1) Delta of the limit LP") {
    SUBCASE("pi in the covering set") {
        const auto p = sensor3::shared_problem();
        const auto& pi = p->covering.member(0);
        const auto c = gap_case(p->space, p->cost, p->covering, pi, 0.05);
        CHECK(c.lp_member == c.lp_limit);
        double bmax = 0.0;
        for (std::size_t k = 0; k <= p->cost.penalties(); ++k) bmax = std::max(bmax, p->cost.b_max(k));
        CHECK(c.lp_limit + (c.c_hat + 1) * c.delta_gap - c.lp_member >= (c.c_hat + 1) * 0.05 * bmax - 1e-12);
    }
    SUBCASE("100 random instances, seed 7") {
        const auto r = gap_check({});
        CHECK(r.instances == 100);
        CHECK(r.failures == 0);
        CHECK(r.all_hold());
    }
    SUBCASE("adversarial: distance just under delta") {
        const auto p = sensor3::shared_problem();
        const auto& cov = p->covering;
        // walk from member 0 toward member 1 until the nearest distance is just below delta
        double best = 0.0;
        FiniteDistribution pi = cov.member(0);
        for (int i = 0; i <= 200; ++i) {
            const auto q = FiniteDistribution::mixture(cov.member(0), cov.member(3), i / 200.0);
            const auto n = nearest_member(cov, q);
            if (n.distance < cov.delta() && n.distance > best) {
                best = n.distance;
                pi = q;
            }
        }
        CHECK(best > 0.5 * cov.delta());
        CHECK(gap_case(p->space, p->cost, cov, pi, 0.05).holds);
    }
}
