#include "adpp/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace adpp {

using nlohmann::json;

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
    std::string s = "invalid configuration:";
    for (const auto& p : problems) s += "\n  " + p;
    return s;
}

/// Accumulates problems while walking the document.
class Checker {
public:
    void fail(const std::string& path, const std::string& msg) { problems_.push_back(path + ": " + msg); }
    bool ok() const { return problems_.empty(); }
    std::vector<std::string>& problems() { return problems_; }

    void keys(const json& obj, const std::string& path, const std::vector<std::string>& allowed) {
        for (const auto& [key, _] : obj.items()) {
            if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
            std::string best;
            std::size_t best_d = SIZE_MAX;
            for (const auto& a : allowed) {
                const std::size_t d = edit_distance(key, a);
                if (d < best_d) {
                    best_d = d;
                    best = a;
                }
            }
            std::string msg = "unknown key \"" + key + "\"";
            if (best_d <= std::max<std::size_t>(2, key.size() / 2)) msg += "; did you mean \"" + best + "\"?";
            fail(path.empty() ? key : path + "." + key, msg);
        }
    }

    std::optional<double> number(const json& obj, const std::string& key, const std::string& path) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj.at(key);
        const auto p = join(path, key);
        if (!v.is_number()) {
            fail(p, "expected a number");
            return std::nullopt;
        }
        const double x = v.get<double>();
        if (!std::isfinite(x)) {
            fail(p, "must be finite");
            return std::nullopt;
        }
        return x;
    }

    std::optional<std::uint64_t> count(const json& obj, const std::string& key, const std::string& path,
                                       std::uint64_t min_value) {
        if (!obj.contains(key)) return std::nullopt;
        return count_value(obj.at(key), join(path, key), min_value);
    }

    std::optional<std::uint64_t> count_value(const json& v, const std::string& p, std::uint64_t min_value) {
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            fail(p, "expected a nonnegative integer");
            return std::nullopt;
        }
        const auto x = v.get<std::uint64_t>();
        if (x < min_value) {
            fail(p, "must be at least " + std::to_string(min_value));
            return std::nullopt;
        }
        return x;
    }

    std::optional<std::string> string(const json& obj, const std::string& key, const std::string& path) {
        if (!obj.contains(key)) return std::nullopt;
        if (!obj.at(key).is_string()) {
            fail(join(path, key), "expected a string");
            return std::nullopt;
        }
        return obj.at(key).get<std::string>();
    }

    /// Probability vector; entries may be numbers or decimal strings.
    std::optional<FiniteDistribution> distribution(const json& v, const std::string& p) {
        if (!v.is_array() || v.empty()) {
            fail(p, "expected a nonempty array of probabilities");
            return std::nullopt;
        }
        std::vector<double> probs;
        bool good = true;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto& e = v[i];
            const auto ep = p + "[" + std::to_string(i) + "]";
            double x = 0.0;
            if (e.is_number()) {
                x = e.get<double>();
            } else if (e.is_string()) {
                const auto s = e.get<std::string>();
                char* end = nullptr;
                errno = 0;
                x = std::strtod(s.c_str(), &end);
                if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
                    fail(ep, "\"" + s + "\" is not a decimal number");
                    good = false;
                    continue;
                }
            } else {
                fail(ep, "expected a number or decimal string");
                good = false;
                continue;
            }
            probs.push_back(x);
        }
        if (!good) return std::nullopt;
        try {
            return FiniteDistribution(std::move(probs));
        } catch (const Error& e) {
            fail(p, e.what());
            return std::nullopt;
        }
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }

private:
    std::vector<std::string> problems_;
};

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

template <class T>
std::optional<std::vector<T>> list(Checker& ck, const json& obj, const std::string& key, const std::string& path,
                                   std::uint64_t min_value = 0) {
    if (!obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    const auto p = Checker::join(path, key);
    if (!v.is_array() || v.empty()) {
        ck.fail(p, "expected a nonempty array");
        return std::nullopt;
    }
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto ep = p + "[" + std::to_string(i) + "]";
        if constexpr (std::is_same_v<T, double>) {
            if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
                ck.fail(ep, "expected a finite number");
                return std::nullopt;
            }
            out.push_back(v[i].get<double>());
        } else {
            const auto x = ck.count_value(v[i], ep, min_value);
            if (!x) return std::nullopt;
            out.push_back(static_cast<T>(*x));
        }
    }
    return out;
}

struct ModelParts {
    std::optional<StrategySpace> space;
    std::optional<CostModel> cost;
    std::optional<CoveringSet> covering;
    std::optional<NonstationarySchedule> schedule;
};

void parse_model(Checker& ck, const json& m, ModelParts& parts) {
    const std::string path = "model";
    if (!m.is_object()) {
        ck.fail(path, "expected an object");
        return;
    }
    ck.keys(m, path, {"states", "actions", "cost_tables", "limits"});
    auto states = list<std::uint32_t>(ck, m, "states", path, 1);
    auto actions = list<std::uint32_t>(ck, m, "actions", path, 1);
    auto limits = list<double>(ck, m, "limits", path);
    if (!m.contains("states")) ck.fail(path + ".states", "required");
    if (!m.contains("actions")) ck.fail(path + ".actions", "required");
    if (!m.contains("cost_tables")) ck.fail(path + ".cost_tables", "required");
    if (!limits && !m.contains("limits")) limits = std::vector<double>{};
    if (!states || !actions) return;
    if (states->size() != actions->size()) {
        ck.fail(path, "states and actions must list the same number of users");
        return;
    }
    try {
        parts.space.emplace(ProductStateSpace(*states), ActionModel(*actions));
    } catch (const Error& e) {
        ck.fail(path, e.what());
        return;
    }
    if (!m.contains("cost_tables") || !limits) return;
    const auto& tabs = m.at("cost_tables");
    const auto tp = path + ".cost_tables";
    if (!tabs.is_array() || tabs.size() != limits->size() + 1) {
        ck.fail(tp, "expected K + 1 = " + std::to_string(limits->size() + 1) + " tables (one cost, K penalties)");
        return;
    }
    const std::size_t na = parts.space->actions().joint_count();
    const std::size_t ns = parts.space->states().total();
    std::vector<std::vector<double>> tables;
    for (std::size_t k = 0; k < tabs.size(); ++k) {
        const auto kp = tp + "[" + std::to_string(k) + "]";
        if (!tabs[k].is_array() || tabs[k].size() != na * ns) {
            ck.fail(kp, "expected |A| x |Omega| = " + std::to_string(na * ns) + " entries (action-major)");
            return;
        }
        std::vector<double> row;
        for (const auto& x : tabs[k]) {
            if (!x.is_number()) {
                ck.fail(kp, "entries must be numbers");
                return;
            }
            row.push_back(x.get<double>());
        }
        tables.push_back(std::move(row));
    }
    try {
        parts.cost.emplace(na, ns, std::move(tables), *limits);
    } catch (const Error& e) {
        ck.fail(path, e.what());
    }
}

void parse_covering(Checker& ck, const json& c, ModelParts& parts) {
    const std::string path = "covering";
    if (!c.is_object()) {
        ck.fail(path, "expected an object");
        return;
    }
    ck.keys(c, path, {"members", "delta", "alpha_delta", "beta_delta"});
    const auto delta = ck.number(c, "delta", path);
    if (!c.contains("delta")) ck.fail(path + ".delta", "required");
    const auto alpha = ck.number(c, "alpha_delta", path);
    const auto beta = ck.number(c, "beta_delta", path);
    if (alpha.has_value() != beta.has_value()) ck.fail(path, "give both alpha_delta and beta_delta, or neither");
    if (!c.contains("members") || !c.at("members").is_array() || c.at("members").empty()) {
        ck.fail(path + ".members", "expected a nonempty array of distributions");
        return;
    }
    std::vector<FiniteDistribution> members;
    bool good = true;
    for (std::size_t j = 0; j < c.at("members").size(); ++j) {
        auto d = ck.distribution(c.at("members")[j], path + ".members[" + std::to_string(j) + "]");
        if (d) {
            members.push_back(std::move(*d));
        } else {
            good = false;
        }
    }
    if (!good || !delta) return;
    try {
        if (alpha && beta) {
            parts.covering.emplace(std::move(members), *delta, *alpha, *beta);
        } else {
            parts.covering.emplace(CoveringSet::with_derived_support(std::move(members), *delta));
        }
    } catch (const Error& e) {
        ck.fail(path, e.what());
    }
}

void parse_schedule(Checker& ck, const json& s, ModelParts& parts) {
    const std::string path = "schedule";
    if (!s.is_object()) {
        ck.fail(path, "expected an object");
        return;
    }
    const auto kind = ck.string(s, "kind", path).value_or("");
    try {
        if (kind == "geometric") {
            ck.keys(s, path, {"kind", "initial", "limit", "rho"});
            std::optional<FiniteDistribution> a, b;
            if (s.contains("initial")) a = ck.distribution(s.at("initial"), path + ".initial");
            else ck.fail(path + ".initial", "required");
            if (s.contains("limit")) b = ck.distribution(s.at("limit"), path + ".limit");
            else ck.fail(path + ".limit", "required");
            const auto rho = ck.number(s, "rho", path);
            if (!rho) ck.fail(path + ".rho", "required number in (0, 1)");
            if (a && b && rho) parts.schedule.emplace(NonstationarySchedule::geometric(*a, *b, *rho));
        } else if (kind == "piecewise") {
            ck.keys(s, path, {"kind", "segments"});
            if (!s.contains("segments") || !s.at("segments").is_array()) {
                ck.fail(path + ".segments", "expected an array of {start, dist}");
                return;
            }
            std::vector<NonstationarySchedule::Segment> segs;
            bool good = true;
            for (std::size_t i = 0; i < s.at("segments").size(); ++i) {
                const auto& seg = s.at("segments")[i];
                const auto sp = path + ".segments[" + std::to_string(i) + "]";
                if (!seg.is_object()) {
                    ck.fail(sp, "expected an object");
                    good = false;
                    continue;
                }
                ck.keys(seg, sp, {"start", "dist"});
                const auto start = ck.count(seg, "start", sp, 0);
                std::optional<FiniteDistribution> d;
                if (seg.contains("dist")) d = ck.distribution(seg.at("dist"), sp + ".dist");
                else ck.fail(sp + ".dist", "required");
                if (!start || !d) {
                    good = false;
                    continue;
                }
                segs.push_back({*start, std::move(*d)});
            }
            if (good) parts.schedule.emplace(NonstationarySchedule::piecewise(std::move(segs)));
        } else if (kind == "stationary") {
            ck.keys(s, path, {"kind", "dist"});
            if (!s.contains("dist")) {
                ck.fail(path + ".dist", "required");
                return;
            }
            if (auto d = ck.distribution(s.at("dist"), path + ".dist")) {
                parts.schedule.emplace(NonstationarySchedule::stationary(std::move(*d)));
            }
        } else {
            ck.fail(path + ".kind", "expected \"geometric\", \"piecewise\" or \"stationary\"");
        }
    } catch (const Error& e) {
        ck.fail(path, e.what());
    }
}

std::optional<WindowSchedule> parse_window(Checker& ck, const json& w) {
    if (w.is_number_integer()) {
        const auto n = ck.count_value(w, "window", 1);
        if (n) return WindowSchedule::constant(*n);
        return std::nullopt;
    }
    if (!w.is_object()) {
        ck.fail("window", "expected a positive integer or {kind, ...}");
        return std::nullopt;
    }
    const auto kind = ck.string(w, "kind", "window").value_or("");
    if (kind == "constant") {
        ck.keys(w, "window", {"kind", "size"});
        const auto n = ck.count(w, "size", "window", 1);
        if (!n) {
            if (!w.contains("size")) ck.fail("window.size", "required");
            return std::nullopt;
        }
        return WindowSchedule::constant(*n);
    }
    if (kind == "sqrt") {
        ck.keys(w, "window", {"kind", "scale"});
        const double scale = ck.number(w, "scale", "window").value_or(1.0);
        if (!(scale > 0.0)) {
            ck.fail("window.scale", "must be positive");
            return std::nullopt;
        }
        return WindowSchedule{WindowSchedule::Kind::sqrt, 0, scale};
    }
    ck.fail("window.kind", "expected \"constant\" or \"sqrt\"");
    return std::nullopt;
}

void parse_sensor3_options(Checker& ck, const json& o, sensor3::Options& opts) {
    const std::string path = "sensor3";
    if (!o.is_object()) {
        ck.fail(path, "expected an object");
        return;
    }
    ck.keys(o, path, {"covering_seed", "members", "radius", "floor", "rho", "initial_member"});
    if (auto v = ck.count(o, "covering_seed", path, 0)) opts.covering_seed = *v;
    if (auto v = ck.count(o, "members", path, 1)) opts.members = *v;
    if (auto v = ck.count(o, "initial_member", path, 0)) opts.initial_member = *v;
    if (auto v = ck.number(o, "radius", path)) opts.radius = *v;
    if (auto v = ck.number(o, "floor", path)) opts.floor = *v;
    if (auto v = ck.number(o, "rho", path)) opts.rho = *v;
}

}  // namespace

ConfigErrors::ConfigErrors(std::vector<std::string> problems)
    : ConfigError(join_problems(problems)), problems_(std::move(problems)) {}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte);
        throw ConfigErrors({"line " + std::to_string(line) + ":" + std::to_string(col) + ": JSON parse error: " +
                            e.what()});
    }
    Checker ck;
    if (!doc.is_object()) throw ConfigErrors({"<root>: expected an object"});
    ck.keys(doc, "", {"preset", "sensor3", "model", "covering", "schedule", "V", "V_list", "D", "D_list", "window",
                      "w_list", "s_list", "horizon", "runs", "seed", "workers", "out", "modes", "bounds",
                      "empirics"});

    ExperimentConfig cfg;
    const auto preset = ck.string(doc, "preset", "");
    const bool is_sensor3 = preset.has_value() && *preset == "sensor3";
    if (preset && !is_sensor3) ck.fail("preset", "unknown preset \"" + *preset + "\"; the only preset is \"sensor3\"");

    sensor3::Defaults defaults;
    if (is_sensor3) {
        cfg.preset = "sensor3";
        cfg.sim.V = defaults.V;
        cfg.V_list = defaults.V_list;
        cfg.sim.delay = defaults.delay;
        cfg.sim.window = WindowSchedule::constant(defaults.window);
        cfg.sim.horizon = defaults.horizon;
        cfg.runs = defaults.runs;
        for (const char* k : {"model", "covering", "schedule"}) {
            if (doc.contains(k)) ck.fail(k, "not allowed together with a preset; use preset-dump to get an editable copy");
        }
    } else if (doc.contains("sensor3")) {
        ck.fail("sensor3", "options apply only with \"preset\": \"sensor3\"");
    }

    // Experiment scalars.
    if (auto v = ck.number(doc, "V", "")) {
        if (*v < 0.0) ck.fail("V", "must be nonnegative");
        cfg.sim.V = *v;
    }
    if (auto v = list<double>(ck, doc, "V_list", "")) {
        for (std::size_t i = 0; i < v->size(); ++i)
            if ((*v)[i] < 0.0) ck.fail("V_list[" + std::to_string(i) + "]", "must be nonnegative");
        cfg.V_list = *v;
    }
    if (auto v = ck.count(doc, "D", "", 0)) cfg.sim.delay = *v;
    if (auto v = list<std::uint64_t>(ck, doc, "D_list", "")) cfg.D_list = *v;
    if (doc.contains("window")) {
        if (auto w = parse_window(ck, doc.at("window"))) cfg.sim.window = *w;
    }
    if (auto v = list<std::uint64_t>(ck, doc, "w_list", "", 1)) cfg.w_list = *v;
    if (auto v = list<std::uint64_t>(ck, doc, "s_list", "", 1)) cfg.s_list = *v;
    if (auto v = ck.count(doc, "horizon", "", 1)) cfg.sim.horizon = *v;
    if (auto v = ck.count(doc, "runs", "", 1)) cfg.runs = *v;
    if (auto v = ck.count(doc, "seed", "", 0)) cfg.sim.seed = *v;
    if (auto v = ck.count(doc, "workers", "", 0)) cfg.workers = *v;
    if (auto v = ck.string(doc, "out", "")) cfg.out = *v;

    if (doc.contains("modes")) {
        const auto& m = doc.at("modes");
        if (!m.is_object()) {
            ck.fail("modes", "expected an object");
        } else {
            ck.keys(m, "modes", {"error_bound", "pac"});
            if (auto e = ck.string(m, "error_bound", "modes")) {
                if (*e == "default") cfg.error_mode = bounds::ErrorBoundMode::hoeffding;
                else if (*e == "literal") cfg.error_mode = bounds::ErrorBoundMode::literal;
                else ck.fail("modes.error_bound", "expected \"default\" or \"literal\"");
            }
            if (auto e = ck.string(m, "pac", "modes")) {
                if (*e == "literal") cfg.pac_mode = bounds::PacMode::literal;
                else if (*e == "strict") cfg.pac_mode = bounds::PacMode::strict;
                else ck.fail("modes.pac", "expected \"literal\" or \"strict\"");
            }
        }
    }
    if (doc.contains("bounds")) {
        const auto& b = doc.at("bounds");
        if (!b.is_object()) {
            ck.fail("bounds", "expected an object");
        } else {
            ck.keys(b, "bounds", {"C", "nu", "kappa", "epsilon", "gamma0", "gamma1", "t"});
            if (auto v = ck.number(b, "C", "bounds")) cfg.bounds.C = *v;
            if (auto v = ck.number(b, "nu", "bounds")) {
                if (!(*v > 0.0)) ck.fail("bounds.nu", "must be positive");
                cfg.bounds.nu = *v;
            }
            if (b.contains("kappa") && !b.at("kappa").is_null()) {
                if (auto v = ck.number(b, "kappa", "bounds")) {
                    if (*v < 0.0) ck.fail("bounds.kappa", "must be nonnegative");
                    cfg.bounds.kappa = *v;
                }
            }
            if (auto v = ck.number(b, "epsilon", "bounds")) {
                if (!(*v > 0.0)) ck.fail("bounds.epsilon", "must be positive");
                cfg.bounds.epsilon = *v;
            }
            if (auto v = ck.number(b, "gamma0", "bounds")) cfg.bounds.gamma0 = *v;
            if (auto v = ck.number(b, "gamma1", "bounds")) cfg.bounds.gamma1 = *v;
            if (auto v = ck.count(b, "t", "bounds", 0)) cfg.bounds.t = *v;
        }
    }
    if (doc.contains("empirics")) {
        const auto& e = doc.at("empirics");
        if (!e.is_object()) {
            ck.fail("empirics", "expected an object");
        } else {
            ck.keys(e, "empirics", {"anchors", "min_runs", "min_cell", "alpha", "tail"});
            if (auto v = ck.count(e, "anchors", "empirics", 1)) cfg.empirics.anchors = *v;
            if (auto v = ck.count(e, "min_runs", "empirics", 1)) cfg.empirics.min_runs = *v;
            if (auto v = ck.count(e, "min_cell", "empirics", 1)) cfg.empirics.min_cell = *v;
            if (auto v = ck.count(e, "alpha", "empirics", 0)) cfg.empirics.alpha = *v;
            if (auto v = ck.count(e, "tail", "empirics", 1)) cfg.empirics.tail = *v;
        }
    }

    // Model.
    if (is_sensor3) {
        if (doc.contains("sensor3")) parse_sensor3_options(ck, doc.at("sensor3"), cfg.sensor3);
        cfg.sensor3.horizon = cfg.sim.horizon;
        if (ck.ok()) {
            try {
                cfg.problem = sensor3::shared_problem(cfg.sensor3);
            } catch (const Error& e) {
                ck.fail("sensor3", e.what());
            }
        }
    } else if (!preset) {
        ModelParts parts;
        for (const char* k : {"model", "covering", "schedule"}) {
            if (!doc.contains(k)) ck.fail(k, "required unless a preset is named");
        }
        if (doc.contains("model")) parse_model(ck, doc.at("model"), parts);
        if (doc.contains("covering")) parse_covering(ck, doc.at("covering"), parts);
        if (doc.contains("schedule")) parse_schedule(ck, doc.at("schedule"), parts);
        if (parts.space && parts.cost && parts.covering && parts.schedule) {
            const std::size_t ns = parts.space->states().total();
            if (parts.covering->outcome_count() != ns) {
                ck.fail("covering.members", "members have " + std::to_string(parts.covering->outcome_count()) +
                                                " outcomes but the state space has " + std::to_string(ns));
            }
            if (parts.schedule->outcome_count() != ns) {
                ck.fail("schedule", "distributions have " + std::to_string(parts.schedule->outcome_count()) +
                                        " outcomes but the state space has " + std::to_string(ns));
            }
            if (ck.ok()) {
                cfg.problem = std::make_shared<const Problem>(
                    Problem{std::move(*parts.space), std::move(*parts.cost), std::move(*parts.covering),
                            std::move(*parts.schedule)});
            }
        }
    }

    if (cfg.V_list.empty()) cfg.V_list = {cfg.sim.V};
    if (cfg.D_list.empty()) cfg.D_list = {cfg.sim.delay};
    if (cfg.w_list.empty() && cfg.sim.window.kind == WindowSchedule::Kind::constant) {
        cfg.w_list = {cfg.sim.window.size};
    }
    if (!ck.ok()) throw ConfigErrors(std::move(ck.problems()));
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigErrors({path + ": cannot open configuration file"});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ExperimentConfig sensor3_config() { return parse_config(R"({"preset": "sensor3"})"); }

std::string dump_config(const ExperimentConfig& cfg) {
    if (!cfg.problem) throw ConfigError("configuration has no model");
    const auto& p = *cfg.problem;
    auto dist = [](const FiniteDistribution& d) { return json(std::vector<double>(d.probs().begin(), d.probs().end())); };

    json doc;
    json model;
    model["states"] = p.space.states().cardinalities();
    model["actions"] = p.space.actions().counts();
    json tables = json::array();
    for (std::size_t k = 0; k <= p.cost.penalties(); ++k) tables.push_back(p.cost.table(k));
    model["cost_tables"] = tables;
    model["limits"] = p.cost.limits();
    doc["model"] = model;

    json cov;
    json members = json::array();
    for (const auto& m : p.covering.members()) members.push_back(dist(m));
    cov["members"] = members;
    cov["delta"] = p.covering.delta();
    cov["alpha_delta"] = p.covering.alpha_delta();
    cov["beta_delta"] = p.covering.beta_delta();
    doc["covering"] = cov;

    json sched;
    if (const auto* g = p.schedule.as_geometric()) {
        sched["kind"] = "geometric";
        sched["initial"] = dist(g->initial);
        sched["limit"] = dist(g->limit);
        sched["rho"] = g->rho;
    } else {
        sched["kind"] = "piecewise";
        json segs = json::array();
        for (const auto& s : p.schedule.as_piecewise()->segments) segs.push_back({{"start", s.start}, {"dist", dist(s.dist)}});
        sched["segments"] = segs;
    }
    doc["schedule"] = sched;

    doc["V"] = cfg.sim.V;
    doc["V_list"] = cfg.V_list;
    doc["D"] = cfg.sim.delay;
    doc["D_list"] = cfg.D_list;
    if (cfg.sim.window.kind == WindowSchedule::Kind::constant) {
        doc["window"] = cfg.sim.window.size;
    } else {
        doc["window"] = {{"kind", "sqrt"}, {"scale", cfg.sim.window.scale}};
    }
    if (!cfg.w_list.empty()) doc["w_list"] = cfg.w_list;
    doc["s_list"] = cfg.s_list;
    doc["horizon"] = cfg.sim.horizon;
    doc["runs"] = cfg.runs;
    doc["seed"] = cfg.sim.seed;
    doc["workers"] = cfg.workers;
    doc["out"] = cfg.out;
    doc["modes"] = {{"error_bound", bounds::to_string(cfg.error_mode)}, {"pac", bounds::to_string(cfg.pac_mode)}};
    json b = {{"C", cfg.bounds.C},         {"nu", cfg.bounds.nu},         {"epsilon", cfg.bounds.epsilon},
              {"gamma0", cfg.bounds.gamma0}, {"gamma1", cfg.bounds.gamma1}, {"t", cfg.bounds.t}};
    b["kappa"] = cfg.bounds.kappa ? json(*cfg.bounds.kappa) : json(nullptr);
    doc["bounds"] = b;
    doc["empirics"] = {{"anchors", cfg.empirics.anchors}, {"min_runs", cfg.empirics.min_runs},
                       {"min_cell", cfg.empirics.min_cell}, {"alpha", cfg.empirics.alpha},
                       {"tail", cfg.empirics.tail}};
    return doc.dump(2) + "\n";
}

}  // namespace adpp
