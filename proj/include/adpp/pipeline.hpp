#pragma once

// Experiment orchestration behind the CLI: simulate -> lp -> empirics ->
// bounds -> compare. Each subcommand reads the configuration plus whatever
// earlier subcommands wrote into the output directory, and writes CSV.
//
// The report builders are exposed separately so tests can run the same
// computations in memory.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "adpp/bounds.hpp"
#include "adpp/config.hpp"
#include "adpp/empirics.hpp"
#include "adpp/lp.hpp"
#include "adpp/sim.hpp"

namespace adpp::pipeline {

/// Tolerances of the benchmark checks.
inline constexpr double kUtilityBelow = 0.03;  ///< tail utility may trail the optimum by this much
inline constexpr double kUtilityAbove = 0.01;  ///< ... or exceed it by this much
inline constexpr double kPenaltySlack = 0.01;  ///< tail mean penalty may exceed c_k by this much
inline constexpr double kCiMultiple = 3.0;     ///< half-widths allowed in bound comparisons
inline constexpr double kSensor3Optimum = 0.394;
inline constexpr double kSensor3OptimumTol = 0.001;

/// "modes: error_bound=... pac=..." for CSV comment lines.
std::string mode_comment(const ExperimentConfig& cfg);

struct LpReport {
    lp::LpSolution limit;  ///< LP under the schedule's limit
    std::string verify;    ///< empty when verify_optimal passes
    std::size_t istar = 0;
    lp::GapCase gap;  ///< member LP, c_hat, Delta
    std::vector<double> grid;
    std::vector<double> g;  ///< G(x) of the member LP on the grid
};

LpReport lp_report(const Problem& problem, double nu);

/// Raw detection-error bound and separation margin for slots 0..t-1; the
/// margin is NaN during warmup.
struct PeSequence {
    std::vector<double> raw;
    std::vector<double> margin;
};

PeSequence pe_sequence(const Problem& problem, std::uint64_t delay, const WindowSchedule& window, std::uint64_t t,
                       bounds::ErrorBoundMode mode);

/// The full bound table at the configured (V, D, w, t). Without a usable
/// kappa (absent, or kappa max(D,1) >= log 3) the mixing terms fall back to
/// the trivial beta = 1 and a note says so.
bounds::BoundReport bound_report(const ExperimentConfig& cfg, const LpReport& lp, std::optional<double> kappa);

struct Beta1Row {
    std::size_t k = 0;
    std::uint64_t s = 0;
    std::optional<empirics::Beta1Estimate> estimate;  ///< empty when every anchor was skipped
};

struct EmpiricsReport {
    empirics::ErrorRates rates;
    double post_warmup_rate = 0.0;  ///< mean over slots outside warmup
    empirics::GapReport gap;
    empirics::KappaEstimate kappa;
    std::uint64_t alpha = 0;  ///< first anchor slot
    std::vector<Beta1Row> beta1;
};

EmpiricsReport empirics_report(const EnsembleResult& ens, const ExperimentConfig& cfg, double lp_value);

/// One row of the comparison table.
struct Check {
    std::string name;
    double empirical = 0.0;
    double bound = 0.0;
    std::string mode;  ///< bound mode the comparison used, or "-"
    bool pass = false;
    std::string note;
};

/// Tail-window cost gap and penalties against the LP optimum.
std::vector<Check> gap_checks(const std::vector<double>& tail_mean, double lp_value, const CostModel& cost);

/// Post-warmup per-slot error rate against the bound at one window size.
/// `first` is the first slot compared (at least the end of warmup).
Check detection_check(const empirics::ErrorRates& rates, const PeSequence& pe, std::uint64_t first,
                      std::uint64_t window, bounds::ErrorBoundMode mode);

/// Mean error rate over [first, T).
double mean_rate(const empirics::ErrorRates& rates, std::uint64_t first);

/// beta_1 against its bound at the largest s, and the trend from the
/// smallest to the largest s, for every penalty index present in `rows`.
std::vector<Check> mixing_checks(const Problem& problem, std::uint64_t delay, const std::optional<double>& kappa,
                                 const std::vector<Beta1Row>& rows);

/// Ensemble CSVs: per-slot file and the compact per-run log.
void write_ensemble(const std::string& path, const std::string& comment, const EnsembleResult& ens);
void write_runs(const std::string& path, const std::string& comment, const EnsembleResult& ens);

/// Rebuilds an ensemble from a per-run log; p is recomputed from the model
/// and queue violations are not recoverable (reported as 0).
EnsembleResult load_runs(const std::string& path, const PreparedProblem& prep);

/// File tag of one sweep point, e.g. "V20_D0_w40".
std::string combo_tag(double V, std::uint64_t delay, const WindowSchedule& window);

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log);
int cmd_lp(const ExperimentConfig& cfg, std::ostream& log);
int cmd_bounds(const ExperimentConfig& cfg, std::ostream& log);
int cmd_empirics(const ExperimentConfig& cfg, std::ostream& log);
int cmd_compare(const ExperimentConfig& cfg, std::ostream& log);
int cmd_preset_dump(const ExperimentConfig& cfg, std::ostream& out);
/// simulate, lp, empirics, bounds, compare in order; stops at the first failure.
int cmd_all(const ExperimentConfig& cfg, std::ostream& log);

/// Command-line overrides applied on top of a loaded configuration.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::optional<std::uint64_t> horizon;
    std::optional<std::string> out;
    std::optional<std::string> mode;  ///< "literal" or "default"
};

/// A changed horizon rebuilds the sensor3 preset, whose radius is measured
/// over the horizon.
void apply_overrides(ExperimentConfig& cfg, const Overrides& o);

}  // namespace adpp::pipeline
