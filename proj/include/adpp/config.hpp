#pragma once

// Experiment configuration documents (JSON syntax). A document either names
// the "sensor3" preset or spells out the model, covering set and schedule.
// Validation collects every problem before reporting, each tagged with its
// JSON path; unknown keys are rejected with a spelling suggestion.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "adpp/bounds.hpp"
#include "adpp/sensor3.hpp"
#include "adpp/sim.hpp"

namespace adpp {

/// All validation problems of one document.
class ConfigErrors : public ConfigError {
public:
    explicit ConfigErrors(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct BoundSettings {
    double C = 0.0;                 ///< cap on the initial Lyapunov value
    double nu = 0.05;
    std::optional<double> kappa;    ///< otherwise estimated from traces when available
    double epsilon = 0.05;
    double gamma0 = 0.5;
    double gamma1 = 0.5;
    std::uint64_t t = 0;            ///< 0 = horizon
};

struct EmpiricsSettings {
    std::size_t anchors = 20;
    std::size_t min_runs = 100;
    std::size_t min_cell = 50;
    std::uint64_t alpha = 0;        ///< 0 = blocking alpha at the horizon
    std::uint64_t tail = 500;
};

struct ExperimentConfig {
    std::string preset;  ///< "sensor3" or empty
    sensor3::Options sensor3;
    std::shared_ptr<const Problem> problem;

    SimParams sim;
    std::vector<double> V_list;
    std::vector<std::uint64_t> D_list;
    std::vector<std::uint64_t> w_list;
    std::vector<std::uint64_t> s_list{5, 40};
    std::size_t runs = 1000;
    std::size_t workers = 0;
    std::string out = "out";

    bounds::ErrorBoundMode error_mode = bounds::ErrorBoundMode::hoeffding;
    bounds::PacMode pac_mode = bounds::PacMode::literal;
    BoundSettings bounds;
    EmpiricsSettings empirics;
};

/// Parses and validates a document. Throws ConfigErrors listing every problem
/// (parse errors carry line:column).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// The built-in sensor3 experiment with repo defaults.
ExperimentConfig sensor3_config();

/// Fully expanded document (explicit tables) that parse_config accepts and
/// that reproduces the same experiment.
std::string dump_config(const ExperimentConfig& cfg);

/// Levenshtein distance; used for unknown-key suggestions.
std::size_t edit_distance(const std::string& a, const std::string& b);

}  // namespace adpp
