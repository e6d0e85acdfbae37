#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "adpp/bounds.hpp"
#include "adpp/sensor3.hpp"
#include "oracles.hpp"

using namespace adpp;
using namespace adpp::bounds;

namespace {

constexpr auto kDefault = ErrorBoundMode::hoeffding;

}  // namespace

TEST_CASE("McDiarmid tail") {
    const std::vector<double> one{1.0};
    CHECK(mcdiarmid_tail(0.0, one) == 1.0);
    CHECK(mcdiarmid_tail(1.0, one) == doctest::Approx(std::exp(-2.0)));
    CHECK(oracle::coin_mean_mcdiarmid(20, 0.5) >= oracle::coin_mean_tail(20, 0.5));
    CHECK(oracle::coin_mean_tail(1, 1.0) == doctest::Approx(0.5));
    CHECK(oracle::coin_mean_tail(20, 0.0) > 0.5);
    CHECK_THROWS_AS(mcdiarmid_tail(-0.1, one), DomainError);
    const std::vector<double> zero{0.0};
    CHECK_THROWS_AS(mcdiarmid_tail(0.1, zero), DomainError);
}

TEST_CASE("McDiarmid dominates the exact binomial tail for n <= 20") {
    for (int n = 1; n <= 20; ++n)
        for (int i = 0; i <= 20; ++i) {
            CAPTURE(n);
            CAPTURE(i);
            REQUIRE(oracle::coin_mean_mcdiarmid(n, 0.05 * i) >= oracle::coin_mean_tail(n, 0.05 * i));
        }
    CHECK(oracle::mcdiarmid_dominates_binomial());
}

TEST_CASE("detection error bound") {
    CHECK(pe_upper(0, 0, 1, 1.0, 0.5, 8, kDefault) == 0.125);
    CHECK(pe_upper(0, 0, 40, 1.0, 0.5, 8, ErrorBoundMode::literal) == 0.125);
    CHECK(pe_upper(50, 0, 40, 1.0, 0.0, 8, kDefault) == 8.0);
    CHECK(clamp_probability(pe_upper(50, 0, 40, 1.0, 0.0, 8, kDefault)) == 1.0);
    CHECK(pe_upper(50, 0, 40, 1.0, 0.5, 2, kDefault) == doctest::Approx(2 * std::exp(-20.0)));
    CHECK(pe_upper(50, 0, 40, 4.0, 0.5, 2, kDefault) == doctest::Approx(2 * std::exp(-5.0)));
    CHECK(pe_upper(50, 0, 40, 4.0, 0.5, 2, ErrorBoundMode::literal) == doctest::Approx(2 * std::exp(-80.0)));
    CHECK(pe_upper(50, 0, 40, 1.0, INFINITY, 1, kDefault) == 0.0);
    // warmup boundary: tau = D + w - 1 is warmup, tau = D + w is not
    CHECK(pe_upper(42, 3, 40, 1.0, 0.5, 2, kDefault) == 0.5);
    CHECK(pe_upper(43, 3, 40, 1.0, 0.5, 2, kDefault) < 1e-8);
    CHECK_THROWS_AS(pe_upper(10, 0, 1, 1.0, 0.5, 0, kDefault), ConfigError);
    CHECK_THROWS_AS(pe_upper(10, 0, 1, 0.0, 0.5, 2, kDefault), DomainError);
}

TEST_CASE("detection error bound decreases in w past warmup") {
    for (double margin : {0.01, 0.1, 0.4}) {
        double prev = INFINITY;
        for (std::uint64_t w = 1; w <= 200; ++w) {
            const double p = pe_upper(1000, 2, w, 3.0, margin, 8, kDefault);
            REQUIRE(p < prev);
            prev = p;
        }
    }
}

TEST_CASE("S bound") {
    CHECK(s_t_delta(100, 10, 1.0, 0.0, 5, 8, kDefault).s == 8.0);
    const auto a = s_t_delta(100, 10, 2.0, 0.3, 10, 8, kDefault);
    const auto b = s_t_delta(100, 10, 2.0, 0.3, 20, 8, kDefault);
    CHECK(b.s / 8 == doctest::Approx((a.s / 8) * (a.s / 8)).epsilon(1e-12));
    CHECK(a.sum_bound == doctest::Approx(90 * a.s));
    CHECK_THROWS_AS(s_t_delta(5, 10, 1.0, 0.1, 1, 2, kDefault), DomainError);
}

TEST_CASE("slot-by-slot error sum is below the S sum on the sensor3 schedule") {
    const auto p = sensor3::shared_problem();
    const std::uint64_t t = 600, D = 0, w = 40;
    std::vector<FiniteDistribution> pis;
    for (std::uint64_t s = 0; s < t; ++s) pis.push_back(p->schedule.at(s));
    const std::size_t M = p->covering.size();
    const auto div = slot_divergences(pis, p->covering, 0);
    const std::uint64_t first = std::max(default_blocking(t).alpha, D + w);
    double sum = 0.0, min_margin = INFINITY;
    for (std::uint64_t tau = first; tau < t; ++tau) {
        const double m = detection_margin(div, M, 0, tau, D, w);
        min_margin = std::min(min_margin, m);
        sum += pe_upper(tau, D, w, p->covering.zeta(), m, M, kDefault);
    }
    const auto S = s_t_delta(t, first, p->covering.zeta(), min_margin, w, M, kDefault);
    CHECK(sum <= S.sum_bound * (1 + 1e-12));
}

TEST_CASE("detection margin") {
    // two members; divergence rows are per slot
    const std::vector<double> div{0.0, -0.2, 0.0, -0.4, 0.0, -0.6};
    CHECK(detection_margin(div, 2, 0, 2, 0, 2) == doctest::Approx(0.5));
    CHECK(detection_margin(div, 2, 0, 2, 1, 1) == doctest::Approx(0.4));
    CHECK(detection_margin(div, 1, 0, 0, 0, 1) == INFINITY);
    CHECK_THROWS_AS(detection_margin(div, 2, 0, 1, 0, 2), DomainError);

    const FiniteDistribution a({0.5, 0.5}), b({0.2, 0.8});
    const auto cov = CoveringSet::with_derived_support({a, b}, 0.7);
    const std::vector<FiniteDistribution> pis(3, a);
    const auto d = slot_divergences(pis, cov, 0);
    CHECK(d[0] == 0.0);
    CHECK(d[1] == doctest::Approx(divergence(a, b, a)));
    CHECK(d[1] < 0.0);
}

TEST_CASE("J_bar and H_bar") {
    const auto cost = sensor3::cost_model();
    const FiniteDistribution lim({0.1, 0.7, 0.1, 0.1}), init({0.7, 0.1, 0.1, 0.1});
    const std::vector<FiniteDistribution> same(10, lim);
    const std::vector<double> zeros(10, 0.0);
    const auto s = jbar_ht(same, lim, 0.2, cost, zeros, 0);
    CHECK(s.mean_distance == 0.0);
    CHECK(s.jbar == doctest::Approx(1.0 * 0.2));
    CHECK(s.hbar == 0.0);

    const CostModel k0(2, 4, {std::vector<double>(8, 0.3)}, {});
    const std::vector<double> b(10, 0.7);
    CHECK(jbar_ht(same, lim, 0.1, k0, b, 2).hbar == doctest::Approx(5 * 0.7));

    const double rho_s = 0.9;
    const auto g = NonstationarySchedule::geometric(init, lim, rho_s);
    for (std::uint64_t t : {1ULL, 7ULL, 100ULL, 2000ULL}) {
        std::vector<FiniteDistribution> pis;
        for (std::uint64_t x = 0; x < t; ++x) pis.push_back(g.at(x));
        const auto r = jbar_ht(pis, lim, 0.0, cost, std::vector<double>(t, 0.0), 0);
        const double closed = l1_distance(init, lim) * (1 - std::pow(rho_s, double(t))) / ((1 - rho_s) * t);
        CHECK(std::abs(r.mean_distance - closed) < 1e-9);
    }
}

TEST_CASE("B sequence matches per-slot evaluation") {
    const auto p = sensor3::shared_problem();
    const auto seq = b_sequence(p->space, p->cost, p->schedule, 300);
    const BtEvaluator ev(p->space, p->cost);
    for (std::uint64_t tau : {0ULL, 1ULL, 17ULL, 150ULL, 299ULL})
        CHECK(seq[tau] == doctest::Approx(ev(p->schedule.at(tau))).epsilon(1e-10));

    const FiniteDistribution a({0.5, 0.5}), b({0.1, 0.9});
    const StrategySpace sp(ProductStateSpace({2}), ActionModel({2}));
    const CostModel cost(2, 2, {std::vector<double>(4, 0.0), {0.0, 0.0, 1.0, 1.0}}, {0.5});
    const auto pw = NonstationarySchedule::piecewise({{0, a}, {5, b}});
    const auto s2 = b_sequence(sp, cost, pw, 8);
    CHECK(s2[4] == doctest::Approx(b_t(sp, a, cost)));
    CHECK(s2[5] == doctest::Approx(b_t(sp, b, cost)));
    CHECK(b_sequence(sp, CostModel(2, 2, {std::vector<double>(4, 0.0)}, {}), pw, 8) == std::vector<double>(8, 0.0));
}

TEST_CASE("rho") {
    CHECK(rho(sensor3::cost_model()) == doctest::Approx(3 * (4.0 / 9)));
}

TEST_CASE("psi, Gamma and Q_up") {
    PsiInputs in;
    in.t = 50;
    in.V = 10;
    in.c_hat = 0.6;
    in.jbar = 0.3;
    in.F = 16;
    in.pe.assign(50, 0.0);
    in.b.assign(50, 0.0);
    const auto r = psi_q_gamma(in);
    CHECK(r.psi == doctest::Approx(1.6 * 0.3));
    CHECK(r.gamma == doctest::Approx(10 * 1.6 * 0.3));
    CHECK(r.q_up == doctest::Approx(std::sqrt(10.0 * 16 / 50 + r.gamma / 2500)));

    auto big = in;
    big.V = 1000;
    const double q1 = psi_q_gamma(in).q_up, q2 = psi_q_gamma(big).q_up;
    CHECK(q2 > q1);
    CHECK(q2 / std::sqrt(1000.0 * 16 / 50) == doctest::Approx(1.0).epsilon(0.05));

    in.p_max0 = 0.5;
    in.pe.assign(50, 0.1);
    CHECK(psi_q_gamma(in).psi > r.psi);
    in.pe.pop_back();
    CHECK_THROWS_AS(psi_q_gamma(in), DimensionError);
}

TEST_CASE("dual evaluators agree to 1e-12 on 100 random inputs") {
    Rng rng(101);
    for (int i = 0; i < 100; ++i) {
        const auto pin = oracle::random_psi_inputs(rng);
        const auto a = psi_q_gamma(pin), b = oracle::psi_long(pin);
        REQUIRE(oracle::rel_err(a.psi, b.psi) <= 1e-12);
        REQUIRE(oracle::rel_err(a.gamma, b.gamma) <= 1e-12);
        REQUIRE(oracle::rel_err(a.q_up, b.q_up) <= 1e-12);
        const auto qin = oracle::random_pac_inputs(rng);
        REQUIRE(oracle::rel_err(pac_rhs(qin).raw, oracle::pac_long(qin)) <= 1e-12);
    }
    CHECK(oracle::dual_evaluator_disagreement(100, 5) <= 1e-12);
}

TEST_CASE("PAC right-hand side") {
    PacInputs in;
    in.t = 100;
    in.alpha = 0;
    in.u = 1;
    in.v = 100;
    in.level = 0.5;
    in.mean = 0.5;
    in.dp_max = 1.0;
    in.eps = 1e6;
    CHECK(pac_rhs(in).raw == 0.0);

    // one block of t samples: a single McDiarmid tail with c_i = dp / v over v terms
    in.eps = 0.1;
    in.mode = PacMode::strict;
    const std::vector<double> c(100, 1.0 / 100);
    CHECK(pac_rhs(in).block_term == doctest::Approx(mcdiarmid_tail(0.1, c)));
    in.mode = PacMode::literal;
    CHECK(pac_rhs(in).block_term == doctest::Approx(std::exp(-2 * 0.01 * 100 * 100)));

    // v = 1: u blocks of a single slot each
    in.u = 100;
    in.v = 1;
    CHECK(pac_rhs(in).block_term == doctest::Approx(100 * std::exp(-2 * 0.01)));
    CHECK(pac_rhs(in).clamped == 1.0);

    in.beta = 1e-3;
    in.pe_sum = 0.25;
    const auto r = pac_rhs(in);
    CHECK(r.raw == doctest::Approx(r.block_term + 0.25 + 100 * 1e-3));

    in.alpha = 10;
    in.u = 9;
    in.v = 10;
    CHECK(pac_floor(in) == doctest::Approx(10.0 / 90));
    in.eps = 0.05;
    CHECK_THROWS_AS(pac_rhs(in), DomainError);
    in.eps = 0.5;
    in.v = 9;
    CHECK_THROWS_AS(pac_rhs(in), DomainError);
}

TEST_CASE("threshold set") {
    // gamma just above beta*: the log term dominates any moderate t
    CHECK_FALSE(threshold_check(3000, 100, 99, 0.1, 0.5 + 1e-12, 0.5, 1.0));
    CHECK(threshold_check(101, 100, 1, 1e12, 0.9, 0.1, 1.0));
    CHECK_FALSE(threshold_check(100, 100, 1, 1e12, 0.9, 0.1, 1.0));
    // hand evaluation: t - alpha = 4900 vs 70 / (sqrt2 * 0.05) * sqrt(log(70 / 0.05))
    const double rhs = 70.0 / (std::sqrt(2.0) * 0.05) * std::sqrt(std::log(70.0 / 0.05));
    CHECK(rhs < 4900);
    CHECK(threshold_check(5000, 100, 70, 0.05, 0.05, 0.0, 1.0));
    CHECK(2.5 * rhs > 4900);
    CHECK_FALSE(threshold_check(5000, 100, 70, 0.02, 0.05, 0.0, 1.0));
    CHECK_THROWS_AS(threshold_check(5000, 100, 70, 0.5, 0.05, 0.05, 1.0), DomainError);
    CHECK_THROWS_AS(threshold_check(5000, 100, 70, 0.0, 0.05, 0.0, 1.0), DomainError);
}

TEST_CASE("theta") {
    CHECK(theta(0.0, 0) == 0.5);
    CHECK(theta(std::log(2.0), 1) == doctest::Approx(0.5));
    CHECK(theta(1.0, 0) == doctest::Approx((std::exp(1.0) - 1) / 2));
    CHECK_THROWS_AS(theta(std::log(3.0), 0), DomainError);
    CHECK_THROWS_AS(theta(0.6, 2), DomainError);
    CHECK_THROWS_AS(theta(-0.1, 0), DomainError);
}

TEST_CASE("beta_1 bound") {
    const double mu = 4096.0 * 64 * 4;
    CHECK(beta_bound(1, 0, 0.5, 4096, 64, 3) == doctest::Approx(std::log(mu) / std::sqrt(2.0)));
    for (std::uint64_t s : {1ULL, 5ULL, 40ULL})
        CHECK(beta_bound(s, 0, 0.0, std::exp(1.0), 1, 0) ==
              doctest::Approx(std::pow(0.5, (s - 1) / 2.0) / std::sqrt(2.0)));
    CHECK(beta_bound(5, 2, 0.1, 10, 4, 1) ==
          doctest::Approx(std::pow(0.5, 4.0 / 4) / std::sqrt(2.0) * std::log(2 * 10 * 4 * 2.0)));
    CHECK_THROWS_AS(beta_bound(0, 0, 0.1, 10, 4, 1), DomainError);
    CHECK_THROWS_AS(beta_bound(4, 2, 0.1, 10, 4, 1), DomainError);

    for (std::uint64_t D : {0ULL, 1ULL, 3ULL}) {
        double prev = INFINITY;
        for (std::uint64_t s = 2 * D + 1; s < 2 * D + 200; ++s) {
            const double b = beta_bound(s, D, 0.3, 4096, 64, 3);
            REQUIRE(b < prev);
            REQUIRE(b >= 0.0);
            prev = b;
        }
    }
}

TEST_CASE("beta star") {
    CHECK(beta_star(100, 10, 0.0, 0.0) == 0.0);
    CHECK(beta_star(100, 10, 0.2, 0.3) == doctest::Approx(45.0));
    CHECK(beta_star(100, 10, 0.4, 0.6) == doctest::Approx(2 * beta_star(100, 10, 0.2, 0.3)));
    CHECK_THROWS_AS(beta_star(5, 10, 0.1, 0.1), DomainError);
}

TEST_CASE("default blocking") {
    const auto a = default_blocking(5000);
    CHECK(a.u == 70);
    CHECK(a.v == 70);
    CHECK(a.alpha == 100);
    const auto b = default_blocking(1000);
    CHECK(b.u == 31);
    CHECK(b.v == 31);
    CHECK(b.alpha == 39);
    for (std::uint64_t t = 2; t < 3000; ++t) {
        const auto x = default_blocking(t);
        REQUIRE(x.u * x.v + x.alpha == t);
        REQUIRE(x.u >= 1);
        REQUIRE(x.v >= 1);
    }
    CHECK_THROWS_AS(default_blocking(1), DomainError);
}

TEST_CASE("bound report stores raw and clamped values") {
    BoundReport r;
    r.add("pe", 3.0, true);
    r.add("q", 3.0);
    CHECK(r.entries[0].clamped == 1.0);
    CHECK(r.entries[1].clamped == 3.0);
    CHECK(r.get("pe") == 3.0);
    CHECK(r.has("q"));
    CHECK_FALSE(r.has("z"));
    CHECK_THROWS_AS(r.get("z"), Error);
}
