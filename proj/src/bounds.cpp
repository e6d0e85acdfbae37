#include "adpp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace adpp::bounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double exponent_factor(double zeta, ErrorBoundMode mode) {
    if (!(zeta > 0.0)) throw DomainError("zeta must be positive");
    return mode == ErrorBoundMode::literal ? 2.0 * zeta : 2.0 / zeta;
}

}  // namespace

const char* to_string(ErrorBoundMode m) {
    return m == ErrorBoundMode::literal ? "literal" : "default";
}

const char* to_string(PacMode m) {
    return m == PacMode::literal ? "literal" : "strict";
}

double mcdiarmid_tail(double eps, std::span<const double> c) {
    if (!(eps >= 0.0)) throw DomainError("McDiarmid tail needs eps >= 0");
    if (c.empty()) throw DomainError("McDiarmid tail needs at least one bounded difference");
    double s = 0.0;
    for (double x : c) {
        if (!(x > 0.0)) throw DomainError("bounded differences must be positive");
        s += x * x;
    }
    return std::exp(-2.0 * eps * eps / s);
}

double pe_upper(std::uint64_t tau, std::uint64_t delay, std::uint64_t window, double zeta, double margin,
                std::size_t members, ErrorBoundMode mode) {
    if (members == 0) throw ConfigError("covering set has no members");
    if (window == 0) throw DomainError("window must be at least 1");
    const double m = static_cast<double>(members);
    if (tau + 1 <= delay + window) return 1.0 / m;
    const double f = exponent_factor(zeta, mode);
    if (!(margin > 0.0)) return m;
    if (std::isinf(margin)) return 0.0;
    return std::exp(-f * margin * margin * static_cast<double>(window) + std::log(m));
}

SBound s_t_delta(std::uint64_t t, std::uint64_t alpha, double zeta, double min_margin, std::uint64_t min_window,
                 std::size_t members, ErrorBoundMode mode) {
    if (members == 0) throw ConfigError("covering set has no members");
    if (min_window == 0) throw DomainError("N must be at least 1");
    if (alpha > t) throw DomainError("alpha exceeds t");
    const double f = exponent_factor(zeta, mode);
    const double m = static_cast<double>(members);
    double s;
    if (!(min_margin > 0.0)) {
        s = m;
    } else if (std::isinf(min_margin)) {
        s = 0.0;
    } else {
        s = std::exp(-f * min_margin * min_margin * static_cast<double>(min_window) + std::log(m));
    }
    return {s, static_cast<double>(t - alpha) * s};
}

std::vector<double> slot_divergences(std::span<const FiniteDistribution> pis, const CoveringSet& covering,
                                     std::size_t istar) {
    const std::size_t m = covering.size();
    if (istar >= m) throw DimensionError("istar out of range");
    std::vector<double> out(pis.size() * m, 0.0);
    for (std::size_t s = 0; s < pis.size(); ++s) {
        for (std::size_t j = 0; j < m; ++j) {
            if (j == istar) continue;
            out[s * m + j] = divergence(pis[s], covering.member(j), covering.member(istar));
        }
    }
    return out;
}

double detection_margin(std::span<const double> divergences, std::size_t members, std::size_t istar,
                        std::uint64_t tau, std::uint64_t delay, std::uint64_t window) {
    if (members <= 1) return kInf;
    if (tau + 1 <= delay + window) throw DomainError("detection margin needs a full window");
    const std::uint64_t last = tau - delay;
    const std::uint64_t first = last + 1 - window;
    if ((last + 1) * members > divergences.size()) throw DimensionError("divergence table too short");
    double best = kInf;
    for (std::size_t j = 0; j < members; ++j) {
        if (j == istar) continue;
        double s = 0.0;
        for (std::uint64_t x = first; x <= last; ++x) s += divergences[x * members + j];
        best = std::min(best, -s / static_cast<double>(window));
    }
    return best;
}

JH jbar_ht(std::span<const FiniteDistribution> pis, const FiniteDistribution& limit, double delta,
           const CostModel& cost, std::span<const double> b_seq, std::uint64_t delay) {
    if (pis.empty()) throw DomainError("J_bar needs t >= 1");
    if (b_seq.size() != pis.size()) throw DimensionError("B sequence length differs from t");
    const double t = static_cast<double>(pis.size());
    double dist = 0.0;
    for (const auto& p : pis) dist += l1_distance(p, limit);
    double pmax = -kInf;
    for (std::size_t k = 0; k <= cost.penalties(); ++k) pmax = std::max(pmax, cost.p_max(k));
    double bsum = 0.0;
    for (double b : b_seq) bsum += b;
    JH out;
    out.mean_distance = dist / t;
    out.jbar = pmax * (out.mean_distance + delta);
    out.hbar = (1.0 + 2.0 * static_cast<double>(delay)) / t * bsum;
    return out;
}

std::vector<double> b_sequence(const StrategySpace& space, const CostModel& cost,
                               const NonstationarySchedule& schedule, std::uint64_t t) {
    std::vector<double> out(t, 0.0);
    if (cost.penalties() == 0 || t == 0) return out;
    BtEvaluator eval(space, cost);
    if (const auto* g = schedule.as_geometric()) {
        const auto a = eval.expectations(g->limit);
        const auto b = eval.expectations(g->initial);
        for (std::uint64_t tau = 0; tau < t; ++tau) {
            const double r = std::pow(g->rho, static_cast<double>(tau));
            double best = 0.0;
            for (std::size_t m = 0; m < a.size(); ++m) best = std::max(best, (1.0 - r) * a[m] + r * b[m]);
            out[tau] = 0.5 * best;
        }
        return out;
    }
    const auto& segs = schedule.as_piecewise()->segments;
    for (std::size_t i = 0; i < segs.size() && segs[i].start < t; ++i) {
        const double v = eval(segs[i].dist);
        const std::uint64_t end = i + 1 < segs.size() ? std::min<std::uint64_t>(segs[i + 1].start, t) : t;
        std::fill(out.begin() + static_cast<std::ptrdiff_t>(segs[i].start),
                  out.begin() + static_cast<std::ptrdiff_t>(end), v);
    }
    return out;
}

double rho(const CostModel& cost) {
    double s = 0.0;
    for (std::size_t k = 1; k <= cost.penalties(); ++k) {
        const double d = cost.p_max(k) - cost.limit(k);
        s += d * d;
    }
    return s;
}

PsiResult psi_q_gamma(const PsiInputs& in) {
    if (in.t == 0) throw DomainError("psi needs t >= 1");
    if (!(in.V > 0.0)) throw DomainError("psi needs V > 0");
    if (in.pe.size() != in.t || in.b.size() != in.t) throw DimensionError("P_e and B sequences must have length t");
    const double t = static_cast<double>(in.t);
    const double d = 1.0 + 2.0 * static_cast<double>(in.delay);
    double bpe = 0.0, pe = 0.0, tpe = 0.0;
    for (std::uint64_t tau = 0; tau < in.t; ++tau) {
        bpe += in.b[tau] * in.pe[tau];
        pe += in.pe[tau];
        tpe += static_cast<double>(tau) * in.pe[tau];
    }
    PsiResult r;
    r.psi = (in.V * (in.c_hat + 1.0) * in.jbar + in.hbar + in.C / t) / in.V + d / (t * in.V) * bpe +
            in.p_max0 / t * pe + in.rho / (in.V * t) * tpe;
    r.gamma = in.V * (in.c_hat + 1.0) * (in.gap + in.jbar) + in.hbar + in.C + d * bpe + in.p_max0 * pe +
              in.rho * tpe;
    r.q_up = std::sqrt(in.V * in.F / t + r.gamma / (t * t));
    return r;
}

double pac_floor(const PacInputs& in) {
    if (in.t <= in.alpha) throw DomainError("PAC bound needs t > alpha");
    return in.mean - in.level +
           static_cast<double>(in.alpha) * in.dp_max / static_cast<double>(in.t - in.alpha);
}

PacResult pac_rhs(const PacInputs& in) {
    if (in.u * in.v != in.t - in.alpha || in.u == 0 || in.v == 0) {
        throw DomainError("blocking constants must satisfy u v = t - alpha with u, v >= 1");
    }
    const double floor = pac_floor(in);
    if (!(in.eps > floor)) {
        throw DomainError("epsilon_k must exceed the running-mean floor (1/t) sum E p_k - c_k + alpha dp/(t - alpha)");
    }
    const double t = static_cast<double>(in.t);
    const double a = static_cast<double>(in.alpha);
    const double eps_t = in.eps + in.level - in.mean;
    PacResult r;
    r.eps_bar = (t * eps_t - a * in.dp_max) / (t - a);
    const double v = static_cast<double>(in.v);
    const double vpow = in.mode == PacMode::literal ? v * v : v;
    if (in.dp_max > 0.0) {
        r.block_term = static_cast<double>(in.u) *
                       std::exp(-2.0 * r.eps_bar * r.eps_bar * vpow / (in.dp_max * in.dp_max));
    } else {
        r.block_term = 0.0;  // constant process: no deviation possible
    }
    r.raw = r.block_term + in.pe_sum + (t - a) * in.beta;
    r.clamped = clamp_probability(r.raw);
    return r;
}

bool threshold_check(std::uint64_t t, std::uint64_t alpha, std::uint64_t u, double eps, double gamma,
                     double beta_star, double dp0) {
    if (!(gamma > beta_star)) throw DomainError("threshold set needs gamma > beta*");
    if (!(eps > 0.0)) throw DomainError("threshold set needs eps > 0");
    if (t <= alpha) return false;
    const double lg = std::log(static_cast<double>(u) / (gamma - beta_star));
    const double rhs = dp0 * static_cast<double>(u) / (std::sqrt(2.0) * eps) * std::sqrt(std::max(lg, 0.0));
    return static_cast<double>(t - alpha) > rhs;
}

double theta(double kappa, std::uint64_t delay) {
    if (!(kappa >= 0.0)) throw DomainError("kappa must be nonnegative");
    const double d = static_cast<double>(std::max<std::uint64_t>(delay, 1));
    if (!(kappa * d < std::log(3.0))) {
        throw DomainError("theta >= 1: need kappa * max(D, 1) < log 3");
    }
    return std::max((std::exp(kappa * d) - 1.0) / 2.0, 0.5);
}

double beta_bound(std::uint64_t s, std::uint64_t delay, double kappa, double F, double omega_count,
                  std::size_t K) {
    const double th = theta(kappa, delay);
    const double mu = F * omega_count * static_cast<double>(K + 1);
    if (delay == 0) {
        if (s < 1) throw DomainError("beta bound with D = 0 needs s >= 1");
        return std::pow(th, (static_cast<double>(s) - 1.0) / 2.0) / std::sqrt(2.0) * std::log(mu);
    }
    if (s < 2 * delay + 1) throw DomainError("beta bound with D >= 1 needs s >= 2D + 1");
    const double d = static_cast<double>(delay);
    return std::pow(th, (static_cast<double>(s) - d + 1.0) / (2.0 * d)) / std::sqrt(2.0) * std::log(d * mu);
}

double beta_star(std::uint64_t t, std::uint64_t alpha, double beta, double s) {
    if (alpha > t) throw DomainError("alpha exceeds t");
    return static_cast<double>(t - alpha) * (beta + s);
}

Blocking default_blocking(std::uint64_t t) {
    if (t < 2) throw DomainError("blocking needs t >= 2");
    auto u = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(t)));
    while (u * u > t) --u;
    while ((u + 1) * (u + 1) <= t) ++u;
    const std::uint64_t v = (t - u) / u;
    return {u, v, t - u * v};
}

void BoundReport::add(std::string name, double value, bool probability) {
    entries.push_back({std::move(name), value, probability ? clamp_probability(value) : value, probability});
}

double BoundReport::get(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return e.raw;
    throw Error("bound report has no entry '" + name + "'");
}

bool BoundReport::has(const std::string& name) const {
    return std::any_of(entries.begin(), entries.end(), [&](const Entry& e) { return e.name == name; });
}

}  // namespace adpp::bounds
