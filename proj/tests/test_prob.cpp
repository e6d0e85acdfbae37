#include <doctest.h>

#include <cmath>
#include <vector>

#include "adpp/prob.hpp"

using namespace adpp;

namespace {

FiniteDistribution random_dist(Rng& rng, std::size_t n) {
    std::vector<double> p(n);
    double s = 0.0;
    for (auto& x : p) {
        x = rng.uniform() + 1e-3;
        s += x;
    }
    for (auto& x : p) x /= s;
    double err = 1.0;
    for (double x : p) err -= x;
    p[0] += err;
    return FiniteDistribution(p);
}

}  // namespace

TEST_CASE("distribution validation") {
    CHECK_NOTHROW(FiniteDistribution({0.25, 0.75}));
    CHECK_THROWS_AS(FiniteDistribution({0.5, 0.49}), ConfigError);
    CHECK_THROWS_AS(FiniteDistribution({1.5, -0.5}), ConfigError);
    CHECK_THROWS_AS(FiniteDistribution(std::vector<double>{}), ConfigError);
}

TEST_CASE("l1 and tv distances") {
    const FiniteDistribution a({0.5, 0.5}), b({0.25, 0.75});
    CHECK(l1_distance(a, a) == 0.0);
    CHECK(l1_distance(FiniteDistribution::point_mass(2, 0), FiniteDistribution::point_mass(2, 1)) == 2.0);
    CHECK(l1_distance(a, b) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(tv_distance(a, a) == 0.0);
    CHECK(tv_distance(FiniteDistribution::point_mass(2, 0), FiniteDistribution::point_mass(2, 1)) == 1.0);
    CHECK(tv_distance(a, b) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK_THROWS_AS(l1_distance(a, FiniteDistribution::uniform(3)), DimensionError);
}

TEST_CASE("l1 is a metric and tv is half of it on random triples") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto p = random_dist(rng, 6), q = random_dist(rng, 6), r = random_dist(rng, 6);
        const double pq = l1_distance(p, q);
        CHECK(pq >= 0.0);
        CHECK(pq <= 2.0);
        CHECK(pq == l1_distance(q, p));
        CHECK(l1_distance(p, r) <= pq + l1_distance(q, r) + 1e-15);
        CHECK(tv_distance(p, q) == doctest::Approx(pq / 2).epsilon(1e-15));
    }
}

TEST_CASE("product space encoding is a bijection") {
    const ProductStateSpace s({4, 3, 2});
    CHECK(s.total() == 24);
    for (OutcomeId id = 0; id < s.total(); ++id) {
        const auto c = s.decode(id);
        CHECK(s.encode(c) == id);
        for (std::size_t u = 0; u < 3; ++u) CHECK(s.component(id, u) == c[u]);
    }
    // user 0 is the most significant digit
    const std::vector<std::uint32_t> c{1, 0, 0};
    CHECK(s.encode(c) == 6);
}

TEST_CASE("metric entropy") {
    auto cov = [](std::size_t m) {
        return CoveringSet::with_derived_support(std::vector<FiniteDistribution>(m, FiniteDistribution::uniform(2)),
                                                 0.1);
    };
    CHECK(metric_entropy(cov(1)) == 0.0);
    CHECK(metric_entropy(cov(8)) == doctest::Approx(2.0794415416798357));
    CHECK(metric_entropy(cov(3)) == doctest::Approx(std::log(3.0)));
}

TEST_CASE("covering set support bounds") {
    CHECK_THROWS_AS(CoveringSet({FiniteDistribution({0.5, 0.5})}, 0.1, 0.4, 0.1), ConfigError);
    CHECK_THROWS_AS(CoveringSet({FiniteDistribution({0.5, 0.5})}, 0.1, 0.1, 0.4), ConfigError);
    CHECK_THROWS_AS(CoveringSet(std::vector<FiniteDistribution>{}, 0.1, 0.9, 0.1), ConfigError);
    const auto c = CoveringSet::with_derived_support({FiniteDistribution({0.2, 0.8}), FiniteDistribution({0.6, 0.4})},
                                                     0.5);
    CHECK(c.beta_delta() < 0.2);
    CHECK(c.alpha_delta() > 0.8);
    CHECK(c.zeta() == doctest::Approx(std::pow(std::log(c.alpha_delta() / c.beta_delta()), 2)));
}

TEST_CASE("nearest member") {
    std::vector<FiniteDistribution> m{FiniteDistribution({0.1, 0.9}), FiniteDistribution({0.3, 0.7}),
                                      FiniteDistribution({0.5, 0.5}), FiniteDistribution({0.7, 0.3}),
                                      FiniteDistribution({0.3, 0.7})};
    const auto cov = CoveringSet::with_derived_support(m, 0.5);
    const auto hit = nearest_member(cov, m[3]);
    CHECK(hit.index == 3);
    CHECK(hit.distance == 0.0);
    // equidistant members 1 and 4 (duplicates): lowest index
    CHECK(nearest_member(cov, FiniteDistribution({0.3, 0.7})).index == 1);
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(nearest_member(cov, m[i]).index == (i == 4 ? 1 : i));

    const auto cov2 = CoveringSet(
        {FiniteDistribution::point_mass(2, 0), FiniteDistribution::uniform(2)}, 0.5, 1.0 + 1e-9, 0.4);
    const auto r = nearest_member(cov2, FiniteDistribution({0.9, 0.1}));
    CHECK(r.index == 0);
    CHECK(r.distance == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(r.within_radius);
}

TEST_CASE("sampling") {
    Rng rng(1);
    const auto pm = FiniteDistribution::point_mass(4, 2);
    for (int i = 0; i < 100; ++i) CHECK(sample(pm, rng) == 2);

    const auto u = FiniteDistribution::uniform(4);
    std::vector<std::size_t> counts(4, 0);
    const std::size_t n = 1000000;
    for (std::size_t i = 0; i < n; ++i) ++counts[sample(u, rng)];
    for (auto c : counts) CHECK(std::abs(static_cast<double>(c) / n - 0.25) < 0.005);

    const FiniteDistribution s({0.1, 0.7, 0.1, 0.1});
    Rng a(42), b(42);
    const auto first = sample(s, a);
    CHECK(first == sample(s, b));
    // frozen: the generator is bit-identical across platforms
    Rng c(42);
    CHECK(sample(s, c) == first);
}

TEST_CASE("window log-likelihood") {
    const std::vector<OutcomeId> zeros(4, 0);
    CHECK(window_loglik(FiniteDistribution({0.5, 0.5}), zeros) == doctest::Approx(std::log(0.5)));
    const std::vector<OutcomeId> any{0, 3, 2, 2, 1};
    CHECK(window_loglik(FiniteDistribution::uniform(5), any) == doctest::Approx(-std::log(5.0)));
    const std::vector<OutcomeId> w{1, 1, 0};
    CHECK(window_loglik(FiniteDistribution({0.1, 0.7, 0.1, 0.1}), w) ==
          doctest::Approx((2 * std::log(0.7) + std::log(0.1)) / 3));
    CHECK(window_loglik(FiniteDistribution::point_mass(2, 1), zeros) == -INFINITY);
}

TEST_CASE("divergence") {
    const FiniteDistribution a({0.5, 0.5}), b({0.25, 0.75});
    CHECK(divergence(a, b, b) == 0.0);
    CHECK(divergence(a, b, a) == doctest::Approx(0.5 * std::log(0.5) + 0.5 * std::log(1.5)));
    CHECK(divergence(a, b, a) == doctest::Approx(-0.1438410362258904));
    // swapped roles, brute force
    const double swapped = 0.5 * std::log(0.5 / 0.25) + 0.5 * std::log(0.5 / 0.75);
    CHECK(divergence(a, a, b) == doctest::Approx(swapped));
    CHECK_THROWS_AS(divergence(a, FiniteDistribution::point_mass(2, 0), a), DomainError);
}

TEST_CASE("geometric schedule converges monotonically") {
    const FiniteDistribution init({0.7, 0.1, 0.1, 0.1}), lim({0.1, 0.7, 0.1, 0.1});
    for (double rho : {0.5, 0.9, 0.99}) {
        const auto s = NonstationarySchedule::geometric(init, lim, rho);
        double prev = INFINITY;
        for (std::uint64_t t : {10ULL, 100ULL, 1000ULL, 10000ULL}) {
            const double d = l1_distance(s.at(t), lim);
            CHECK(d <= prev);
            prev = d;
        }
        CHECK(prev < 1e-3);
        CHECK(s.at(0) == init);
    }
}

TEST_CASE("piecewise and stationary schedules") {
    const FiniteDistribution a({0.5, 0.5}), b({0.2, 0.8});
    const auto s = NonstationarySchedule::piecewise({{0, a}, {10, b}});
    CHECK(s.at(9) == a);
    CHECK(s.at(10) == b);
    CHECK(s.limit() == b);
    CHECK(s.settling_time() == 10);
    CHECK_THROWS_AS(NonstationarySchedule::piecewise({{1, a}}), ConfigError);
    CHECK(NonstationarySchedule::stationary(a).at(1000) == a);
    CHECK_THROWS_AS(NonstationarySchedule::geometric(a, b, 1.0), ConfigError);
}

TEST_CASE("product and mixture") {
    const FiniteDistribution x({0.1, 0.9}), y({0.3, 0.7});
    const std::vector<FiniteDistribution> f{x, y};
    const auto p = FiniteDistribution::product(f);
    CHECK(p[1] == doctest::Approx(0.1 * 0.7));  // (0, 1)
    CHECK(p[2] == doctest::Approx(0.9 * 0.3));  // (1, 0)
    const auto m = FiniteDistribution::mixture(x, y, 0.25);
    CHECK(m[0] == doctest::Approx(0.75 * 0.1 + 0.25 * 0.3));
}
