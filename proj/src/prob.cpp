#include "adpp/prob.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace adpp {

namespace {

void check_same_size(const FiniteDistribution& p, const FiniteDistribution& q) {
    if (p.size() != q.size()) {
        throw DimensionError("distribution sizes differ: " + std::to_string(p.size()) + " vs " +
                             std::to_string(q.size()));
    }
}

}  // namespace

FiniteDistribution::FiniteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw ConfigError("distribution must have at least one outcome");
    double sum = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        const double p = probs_[i];
        if (!std::isfinite(p) || p < 0.0) {
            throw ConfigError("probability at outcome " + std::to_string(i) +
                              " is negative or not finite");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", sum);
        throw ConfigError(std::string("probabilities sum to ") + buf + ", expected 1");
    }
}

FiniteDistribution FiniteDistribution::point_mass(std::size_t size, OutcomeId at) {
    if (at >= size) throw DimensionError("point mass outside outcome range");
    std::vector<double> p(size, 0.0);
    p[at] = 1.0;
    return FiniteDistribution(std::move(p));
}

FiniteDistribution FiniteDistribution::uniform(std::size_t size) {
    if (size == 0) throw ConfigError("uniform distribution over zero outcomes");
    return FiniteDistribution(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

FiniteDistribution FiniteDistribution::product(std::span<const FiniteDistribution> factors) {
    if (factors.empty()) throw ConfigError("product of zero factors");
    std::vector<double> joint{1.0};
    for (const auto& f : factors) {
        std::vector<double> next;
        next.reserve(joint.size() * f.size());
        for (double a : joint)
            for (double b : f.probs()) next.push_back(a * b);
        joint = std::move(next);
    }
    // Products of valid factors can drift from 1 by a few ulps per factor.
    const double sum = std::accumulate(joint.begin(), joint.end(), 0.0);
    if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
        for (double& x : joint) x /= sum;
    }
    return FiniteDistribution(std::move(joint));
}

FiniteDistribution FiniteDistribution::mixture(const FiniteDistribution& a, const FiniteDistribution& b,
                                               double weight) {
    check_same_size(a, b);
    if (!(weight >= 0.0 && weight <= 1.0)) throw DomainError("mixture weight outside [0, 1]");
    std::vector<double> p(a.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = (1.0 - weight) * a[i] + weight * b[i];
    return FiniteDistribution(std::move(p));
}

ProductStateSpace::ProductStateSpace(std::vector<std::uint32_t> cardinalities)
    : cards_(std::move(cardinalities)) {
    if (cards_.empty()) throw ConfigError("state space needs at least one user");
    place_.assign(cards_.size(), 1);
    total_ = 1;
    for (std::size_t i = cards_.size(); i-- > 0;) {
        if (cards_[i] == 0) throw ConfigError("user " + std::to_string(i) + " has an empty state set");
        place_[i] = total_;
        total_ *= cards_[i];
        if (total_ > std::numeric_limits<OutcomeId>::max()) {
            throw ConfigError("joint state space too large");
        }
    }
}

OutcomeId ProductStateSpace::encode(std::span<const std::uint32_t> components) const {
    if (components.size() != cards_.size()) throw DimensionError("state tuple has wrong length");
    std::size_t id = 0;
    for (std::size_t i = 0; i < cards_.size(); ++i) {
        if (components[i] >= cards_[i]) throw DimensionError("state component out of range");
        id += components[i] * place_[i];
    }
    return static_cast<OutcomeId>(id);
}

std::vector<std::uint32_t> ProductStateSpace::decode(OutcomeId id) const {
    if (id >= total_) throw DimensionError("joint state id out of range");
    std::vector<std::uint32_t> out(cards_.size());
    for (std::size_t i = 0; i < cards_.size(); ++i) out[i] = component(id, i);
    return out;
}

CoveringSet::CoveringSet(std::vector<FiniteDistribution> members, double delta, double alpha_delta,
                         double beta_delta)
    : members_(std::move(members)), delta_(delta), alpha_(alpha_delta), beta_(beta_delta) {
    if (members_.empty()) throw ConfigError("covering set is empty");
    if (!(delta_ > 0.0)) throw ConfigError("covering radius delta must be positive");
    if (!(beta_ > 0.0 && alpha_ > beta_)) {
        throw ConfigError("support bounds must satisfy alpha_delta > beta_delta > 0");
    }
    const std::size_t n = members_.front().size();
    for (std::size_t j = 0; j < members_.size(); ++j) {
        const auto& m = members_[j];
        if (m.size() != n) throw DimensionError("covering members have different sizes");
        for (double p : m.probs()) {
            if (p != 0.0 && !(p > beta_ && p < alpha_)) {
                throw ConfigError("covering member " + std::to_string(j) +
                                  " violates beta_delta < P(w) < alpha_delta");
            }
        }
    }
}

CoveringSet CoveringSet::with_derived_support(std::vector<FiniteDistribution> members, double delta) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& m : members) {
        for (double p : m.probs()) {
            if (p == 0.0) continue;
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
    }
    if (members.empty()) throw ConfigError("covering set is empty");
    return CoveringSet(std::move(members), delta, hi * (1.0 + 1e-9), lo * (1.0 - 1e-9));
}

double CoveringSet::zeta() const {
    const double r = std::log(alpha_ / beta_);
    return r * r;
}

NonstationarySchedule NonstationarySchedule::geometric(FiniteDistribution initial,
                                                       FiniteDistribution limit, double rho) {
    if (initial.size() != limit.size()) throw DimensionError("schedule endpoints differ in size");
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("geometric schedule needs rho in (0, 1)");
    return NonstationarySchedule(Geometric{std::move(initial), std::move(limit), rho});
}

NonstationarySchedule NonstationarySchedule::piecewise(std::vector<Segment> segments) {
    if (segments.empty()) throw ConfigError("piecewise schedule has no segments");
    if (segments.front().start != 0) throw ConfigError("first schedule segment must start at t = 0");
    for (std::size_t i = 1; i < segments.size(); ++i) {
        if (segments[i].start <= segments[i - 1].start) {
            throw ConfigError("schedule switch times must be strictly increasing");
        }
        if (segments[i].dist.size() != segments[0].dist.size()) {
            throw DimensionError("schedule segments differ in size");
        }
    }
    return NonstationarySchedule(Piecewise{std::move(segments)});
}

NonstationarySchedule NonstationarySchedule::stationary(FiniteDistribution dist) {
    return piecewise({Segment{0, std::move(dist)}});
}

FiniteDistribution NonstationarySchedule::at(std::uint64_t t) const {
    if (const auto* g = as_geometric()) {
        const double w = std::pow(g->rho, static_cast<double>(t));
        return FiniteDistribution::mixture(g->limit, g->initial, w);
    }
    const auto& segs = std::get<Piecewise>(kind_).segments;
    auto it = std::upper_bound(segs.begin(), segs.end(), t,
                               [](std::uint64_t v, const Segment& s) { return v < s.start; });
    return std::prev(it)->dist;
}

const FiniteDistribution& NonstationarySchedule::limit() const {
    if (const auto* g = as_geometric()) return g->limit;
    return std::get<Piecewise>(kind_).segments.back().dist;
}

std::uint64_t NonstationarySchedule::settling_time() const {
    if (is_geometric()) return 0;
    return std::get<Piecewise>(kind_).segments.back().start;
}

double l1_distance(const FiniteDistribution& p, const FiniteDistribution& q) {
    check_same_size(p, q);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return s;
}

double tv_distance(const FiniteDistribution& p, const FiniteDistribution& q) {
    return 0.5 * l1_distance(p, q);
}

double metric_entropy(const CoveringSet& covering) {
    return std::log(static_cast<double>(covering.size()));
}

NearestMember nearest_member(const CoveringSet& covering, const FiniteDistribution& pi) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < covering.size(); ++j) {
        const double d = l1_distance(covering.member(j), pi);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return {best, best_d, best_d < covering.delta()};
}

OutcomeId sample(const FiniteDistribution& dist, Rng& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    OutcomeId last_supported = 0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const double p = dist[i];
        if (p <= 0.0) continue;
        cum += p;
        last_supported = static_cast<OutcomeId>(i);
        if (u < cum) return last_supported;
    }
    return last_supported;
}

double window_loglik(const FiniteDistribution& member, std::span<const OutcomeId> window) {
    if (window.empty()) throw DomainError("detection window is empty");
    double s = 0.0;
    for (OutcomeId w : window) {
        if (w >= member.size()) throw DimensionError("window outcome out of range");
        const double p = member[w];
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        s += std::log(p);
    }
    return s / static_cast<double>(window.size());
}

double divergence(const FiniteDistribution& pi_tau, const FiniteDistribution& p_j,
                  const FiniteDistribution& p_istar) {
    check_same_size(pi_tau, p_j);
    check_same_size(pi_tau, p_istar);
    double s = 0.0;
    for (std::size_t w = 0; w < pi_tau.size(); ++w) {
        if (pi_tau[w] == 0.0) continue;
        if (p_j[w] <= 0.0 || p_istar[w] <= 0.0) {
            throw DomainError("divergence undefined: member has zero mass on outcome " +
                              std::to_string(w));
        }
        s += pi_tau[w] * std::log(p_j[w] / p_istar[w]);
    }
    return s;
}

}  // namespace adpp
