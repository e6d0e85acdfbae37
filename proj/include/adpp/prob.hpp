#pragma once

// Finite probability spaces: distributions over an enumerated outcome set,
// product state spaces, covering sets and non-stationary schedules.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "adpp/errors.hpp"
#include "adpp/rng.hpp"

namespace adpp {

using OutcomeId = std::uint32_t;

inline constexpr double kProbabilitySumTolerance = 1e-12;

/// Probability vector over outcome ids 0..size()-1.
class FiniteDistribution {
public:
    FiniteDistribution() = default;

    /// Throws ConfigError if an entry is negative / non-finite or the entries
    /// do not sum to one within kProbabilitySumTolerance.
    explicit FiniteDistribution(std::vector<double> probs);

    static FiniteDistribution point_mass(std::size_t size, OutcomeId at);
    static FiniteDistribution uniform(std::size_t size);

    /// Joint law of independent components; component 0 is the most
    /// significant digit of the joint id (see ProductStateSpace).
    static FiniteDistribution product(std::span<const FiniteDistribution> factors);

    /// (1 - weight) * a + weight * b.
    static FiniteDistribution mixture(const FiniteDistribution& a, const FiniteDistribution& b,
                                      double weight);

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    std::span<const double> probs() const noexcept { return probs_; }

    bool operator==(const FiniteDistribution&) const = default;

private:
    std::vector<double> probs_;
};

/// Omega = Omega_1 x ... x Omega_N with a mixed-radix joint id, user 0 most
/// significant.
class ProductStateSpace {
public:
    ProductStateSpace() = default;
    explicit ProductStateSpace(std::vector<std::uint32_t> cardinalities);

    std::size_t users() const noexcept { return cards_.size(); }
    std::uint32_t cardinality(std::size_t user) const { return cards_[user]; }
    const std::vector<std::uint32_t>& cardinalities() const noexcept { return cards_; }
    std::size_t total() const noexcept { return total_; }

    OutcomeId encode(std::span<const std::uint32_t> components) const;
    std::vector<std::uint32_t> decode(OutcomeId id) const;
    std::uint32_t component(OutcomeId id, std::size_t user) const {
        return static_cast<std::uint32_t>((id / place_[user]) % cards_[user]);
    }

private:
    std::vector<std::uint32_t> cards_;
    std::vector<std::size_t> place_;
    std::size_t total_ = 0;
};

/// A finite delta-covering P_1..P_M with the support bounds
/// beta_delta < P_j(w) < alpha_delta on every supported outcome.
class CoveringSet {
public:
    CoveringSet(std::vector<FiniteDistribution> members, double delta, double alpha_delta,
                double beta_delta);

    /// Derives the tightest support bounds from the members (widened by a
    /// relative 1e-9 so the inequalities are strict).
    static CoveringSet with_derived_support(std::vector<FiniteDistribution> members, double delta);

    std::size_t size() const noexcept { return members_.size(); }
    const FiniteDistribution& member(std::size_t i) const { return members_[i]; }
    const std::vector<FiniteDistribution>& members() const noexcept { return members_; }
    double delta() const noexcept { return delta_; }
    double alpha_delta() const noexcept { return alpha_; }
    double beta_delta() const noexcept { return beta_; }
    std::size_t outcome_count() const noexcept { return members_.front().size(); }

    /// zeta_delta = [log(alpha_delta / beta_delta)]^2
    double zeta() const;

private:
    std::vector<FiniteDistribution> members_;
    double delta_;
    double alpha_;
    double beta_;
};

/// pi_t for t = 0, 1, ... converging to a limit pi.
class NonstationarySchedule {
public:
    /// pi_t = (1 - rho^t) * limit + rho^t * initial, rho in (0, 1).
    struct Geometric {
        FiniteDistribution initial;
        FiniteDistribution limit;
        double rho;
    };
    /// pi_t = dist of the last segment whose start <= t. The first segment
    /// must start at 0; the last segment is the limit.
    struct Segment {
        std::uint64_t start;
        FiniteDistribution dist;
    };
    struct Piecewise {
        std::vector<Segment> segments;
    };

    static NonstationarySchedule geometric(FiniteDistribution initial, FiniteDistribution limit,
                                           double rho);
    static NonstationarySchedule piecewise(std::vector<Segment> segments);
    static NonstationarySchedule stationary(FiniteDistribution dist);

    FiniteDistribution at(std::uint64_t t) const;
    const FiniteDistribution& limit() const;
    std::size_t outcome_count() const { return limit().size(); }

    /// Slot after which ||pi_t - pi||_1 is non-increasing.
    std::uint64_t settling_time() const;

    bool is_geometric() const { return std::holds_alternative<Geometric>(kind_); }
    const Geometric* as_geometric() const { return std::get_if<Geometric>(&kind_); }
    const Piecewise* as_piecewise() const { return std::get_if<Piecewise>(&kind_); }

private:
    explicit NonstationarySchedule(std::variant<Geometric, Piecewise> kind) : kind_(std::move(kind)) {}
    std::variant<Geometric, Piecewise> kind_;
};

double l1_distance(const FiniteDistribution& p, const FiniteDistribution& q);
double tv_distance(const FiniteDistribution& p, const FiniteDistribution& q);

/// Natural log of the member count.
double metric_entropy(const CoveringSet& covering);

struct NearestMember {
    std::size_t index;
    double distance;
    bool within_radius;  ///< distance < covering.delta()
};

/// Member closest in L1; ties go to the lowest index.
NearestMember nearest_member(const CoveringSet& covering, const FiniteDistribution& pi);

/// Inverse-CDF draw over the stored outcome order.
OutcomeId sample(const FiniteDistribution& dist, Rng& rng);

/// (1/w) * sum log member(w_s); -infinity if the member gives zero mass to
/// an observed outcome.
double window_loglik(const FiniteDistribution& member, std::span<const OutcomeId> window);

/// E_{pi_tau}[ log(P_j / P_istar) ]. Throws DomainError if either member is
/// zero on an outcome that pi_tau supports.
double divergence(const FiniteDistribution& pi_tau, const FiniteDistribution& p_j,
                  const FiniteDistribution& p_istar);

}  // namespace adpp
