// adpp: command-line front end for the ADPP simulation lab.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "adpp/config.hpp"
#include "adpp/errors.hpp"
#include "adpp/pipeline.hpp"

int main(int argc, char** argv) {
    using namespace adpp;
    CLI::App app{"ADPP simulation lab and guarantees engine"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path;
    std::uint64_t seed = 0, runs = 0, horizon = 0;
    std::string out, mode;
    app.add_option("--config", config_path, "configuration document (JSON); default is the sensor3 preset");
    auto* seed_opt = app.add_option("--seed", seed, "base seed of the ensemble");
    auto* runs_opt = app.add_option("--runs", runs, "ensemble size");
    auto* horizon_opt = app.add_option("--horizon", horizon, "slots per run");
    auto* out_opt = app.add_option("--out", out, "output directory");
    auto* mode_opt = app.add_option("--mode", mode, "detection-bound exponent form")
                         ->check(CLI::IsMember({"literal", "default"}));

    struct Sub {
        const char* name;
        const char* help;
        int (*fn)(const ExperimentConfig&, std::ostream&);
    };
    const Sub subs[] = {
        {"simulate", "run the ensembles of the sweep and write traces", &pipeline::cmd_simulate},
        {"lp", "solve the stationary-equivalent LP", &pipeline::cmd_lp},
        {"bounds", "evaluate the closed-form guarantees", &pipeline::cmd_bounds},
        {"empirics", "estimate error rates, beta_1 and kappa from runs.csv", &pipeline::cmd_empirics},
        {"compare", "join empirical values with their bounds", &pipeline::cmd_compare},
        {"preset-dump", "print the fully expanded configuration", &pipeline::cmd_preset_dump},
        {"all", "simulate, lp, empirics, bounds and compare in order", &pipeline::cmd_all},
    };
    for (const auto& s : subs) app.add_subcommand(s.name, s.help);

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = config_path.empty() ? sensor3_config() : load_config(config_path);
        pipeline::Overrides o;
        if (*seed_opt) o.seed = seed;
        if (*runs_opt) o.runs = runs;
        if (*horizon_opt) o.horizon = horizon;
        if (*out_opt) o.out = out;
        if (*mode_opt) o.mode = mode;
        pipeline::apply_overrides(cfg, o);

        for (const auto& s : subs) {
            if (!app.got_subcommand(s.name)) continue;
            std::ostream& stream = std::string(s.name) == "preset-dump" ? std::cout : std::cerr;
            return s.fn(cfg, stream);
        }
    } catch (const ConfigErrors& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
