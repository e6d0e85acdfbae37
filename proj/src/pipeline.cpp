#include "adpp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "adpp/csv.hpp"

namespace adpp::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string file(const ExperimentConfig& cfg, const std::string& name) { return (fs::path(cfg.out) / name).string(); }

std::string no_commas(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    return s;
}

std::uint64_t bound_horizon(const ExperimentConfig& cfg) { return cfg.bounds.t ? cfg.bounds.t : cfg.sim.horizon; }

std::uint64_t anchor_alpha(const ExperimentConfig& cfg) {
    if (cfg.empirics.alpha) return cfg.empirics.alpha;
    return cfg.sim.horizon >= 2 ? bounds::default_blocking(cfg.sim.horizon).alpha : 0;
}

std::vector<WindowSchedule> window_axis(const ExperimentConfig& cfg) {
    std::vector<WindowSchedule> out;
    if (cfg.sim.window.kind == WindowSchedule::Kind::sqrt) return {cfg.sim.window};
    for (auto w : cfg.w_list) out.push_back(WindowSchedule::constant(w));
    return out;
}

const Problem& problem_of(const ExperimentConfig& cfg) {
    if (!cfg.problem) throw ConfigError("configuration has no model");
    return *cfg.problem;
}

std::string pass_word(bool b) { return b ? "true" : "false"; }

/// Kappa from an existing empirics table, if that table defines one.
std::optional<double> kappa_from_empirics(const std::string& path) {
    if (!fs::exists(path)) return std::nullopt;
    const auto t = csv::read(path);
    const auto name = t.column("name");
    const auto value = t.column("value");
    for (const auto& r : t.rows) {
        if (r[name] != "kappa_hat") continue;
        const double x = csv::to_double(r[value]);
        if (std::isfinite(x)) return x;
    }
    return std::nullopt;
}

}  // namespace

std::string mode_comment(const ExperimentConfig& cfg) {
    return std::string("modes: error_bound=") + bounds::to_string(cfg.error_mode) +
           " pac=" + bounds::to_string(cfg.pac_mode);
}

std::string combo_tag(double V, std::uint64_t delay, const WindowSchedule& window) {
    std::string w = window.kind == WindowSchedule::Kind::sqrt ? "sqrt" + csv::num(window.scale)
                                                               : std::to_string(window.size);
    return "V" + csv::num(V) + "_D" + std::to_string(delay) + "_w" + w;
}

LpReport lp_report(const Problem& problem, double nu) {
    LpReport r;
    const auto& limit = problem.schedule.limit();
    const auto inst = lp::LpInstance::from_model(problem.space, limit, problem.cost);
    r.limit = lp::solve_lp(inst);
    if (r.limit.status == lp::LpStatus::optimal) r.verify = lp::verify_optimal(inst, r.limit);
    r.istar = nearest_member(problem.covering, limit).index;
    r.gap = lp::gap_case(problem.space, problem.cost, problem.covering, limit, nu);
    if (std::isfinite(r.gap.lp_member)) {
        const auto member = lp::LpInstance::from_model(problem.space, problem.covering.member(r.istar), problem.cost);
        r.grid = lp::probe_grid(problem.cost, r.gap.delta_gap);
        for (double x : r.grid) r.g.push_back(lp::g_of_x(member, x));
    }
    return r;
}

PeSequence pe_sequence(const Problem& problem, std::uint64_t delay, const WindowSchedule& window, std::uint64_t t,
                       bounds::ErrorBoundMode mode) {
    std::vector<FiniteDistribution> pis;
    pis.reserve(t);
    for (std::uint64_t s = 0; s < t; ++s) pis.push_back(problem.schedule.at(s));
    const auto& cov = problem.covering;
    const std::size_t istar = nearest_member(cov, problem.schedule.limit()).index;
    const auto divs = bounds::slot_divergences(pis, cov, istar);
    const double zeta = cov.zeta();
    PeSequence out;
    out.raw.resize(t);
    out.margin.assign(t, kNan);
    for (std::uint64_t tau = 0; tau < t; ++tau) {
        const std::uint64_t w = window.at(tau);
        double margin = kNan;
        if (!in_warmup(tau, delay, w)) {
            margin = bounds::detection_margin(divs, cov.size(), istar, tau, delay, w);
            out.margin[tau] = margin;
        }
        out.raw[tau] = bounds::pe_upper(tau, delay, w, zeta, margin, cov.size(), mode);
    }
    return out;
}

bounds::BoundReport bound_report(const ExperimentConfig& cfg, const LpReport& lp, std::optional<double> kappa) {
    const auto& problem = problem_of(cfg);
    const auto& cost = problem.cost;
    const auto& cov = problem.covering;
    const std::uint64_t t = bound_horizon(cfg);
    const std::uint64_t D = cfg.sim.delay;
    const std::size_t K = cost.penalties();
    if (lp.limit.status != lp::LpStatus::optimal || !std::isfinite(lp.gap.lp_member)) {
        throw DomainError("bounds need feasible LPs under the limit and under its nearest member");
    }

    bounds::BoundReport rep;
    rep.error_mode = cfg.error_mode;
    rep.pac_mode = cfg.pac_mode;

    const auto blk = bounds::default_blocking(t);
    const auto pe = pe_sequence(problem, D, cfg.sim.window, t, cfg.error_mode);
    rep.pe = pe.raw;
    rep.margin = pe.margin;
    std::vector<double> pe_clamped(t);
    for (std::uint64_t s = 0; s < t; ++s) pe_clamped[s] = bounds::clamp_probability(pe.raw[s]);

    const double F = static_cast<double>(problem.space.size());
    const auto M = cov.size();
    rep.add("t", static_cast<double>(t));
    rep.add("u", static_cast<double>(blk.u));
    rep.add("v", static_cast<double>(blk.v));
    rep.add("alpha", static_cast<double>(blk.alpha));
    rep.add("F", F);
    rep.add("members", static_cast<double>(M));
    rep.add("delta", cov.delta());
    rep.add("zeta", cov.zeta());
    rep.add("p_opt", lp.limit.value);
    rep.add("c_hat", lp.gap.c_hat);
    rep.add("gap_delta", lp.gap.delta_gap);

    // Detection errors over [alpha, t).
    double min_margin = std::numeric_limits<double>::infinity();
    std::uint64_t min_window = std::numeric_limits<std::uint64_t>::max();
    double pe_sum = 0.0;
    for (std::uint64_t s = blk.alpha; s < t; ++s) {
        pe_sum += pe_clamped[s];
        min_window = std::min(min_window, cfg.sim.window.at(s));
        if (std::isnan(pe.margin[s])) {
            min_margin = -std::numeric_limits<double>::infinity();  // warmup inside the interval
        } else {
            min_margin = std::min(min_margin, pe.margin[s]);
        }
    }
    if (std::isinf(min_margin) && min_margin < 0) {
        rep.notes.push_back("warmup extends past alpha; S_t_delta treated as vacuous");
        min_margin = 0.0;
    }
    rep.add("pe_up_last", pe.raw[t - 1], true);
    rep.add("pe_sum", pe_sum);
    rep.add("min_margin", min_margin);
    const auto sb = bounds::s_t_delta(t, blk.alpha, cov.zeta(), min_margin, min_window, M, cfg.error_mode);
    rep.add("S_t_delta", sb.s, true);
    rep.add("S_sum", sb.sum_bound);

    // Time-average stack.
    std::vector<FiniteDistribution> pis;
    pis.reserve(t);
    for (std::uint64_t s = 0; s < t; ++s) pis.push_back(problem.schedule.at(s));
    const auto b = bounds::b_sequence(problem.space, cost, problem.schedule, t);
    const auto jh = bounds::jbar_ht(pis, problem.schedule.limit(), cov.delta(), cost, b, D);
    rep.add("mean_distance", jh.mean_distance);
    rep.add("J_bar", jh.jbar);
    rep.add("H_bar", jh.hbar);
    const double rho = bounds::rho(cost);
    rep.add("rho", rho);
    bounds::PsiInputs pin;
    pin.t = t;
    pin.V = cfg.sim.V;
    pin.delay = D;
    pin.C = cfg.bounds.C;
    pin.c_hat = lp.gap.c_hat;
    pin.gap = lp.gap.delta_gap;
    pin.jbar = jh.jbar;
    pin.hbar = jh.hbar;
    pin.p_max0 = cost.p_max(0);
    pin.rho = rho;
    pin.F = F;
    pin.pe = pe_clamped;
    pin.b = b;
    const auto psi = bounds::psi_q_gamma(pin);
    rep.add("psi", psi.psi);
    rep.add("Gamma", psi.gamma);
    rep.add("Q_up", psi.q_up);

    // Mixing terms.
    double beta = 1.0;
    bool beta_ok = false;
    const double omega = static_cast<double>(problem.space.states().total());
    if (!kappa) {
        rep.notes.push_back("no kappa available; beta_1 taken as the trivial bound 1");
    } else {
        rep.add("kappa", *kappa);
        try {
            rep.add("theta", bounds::theta(*kappa, D));
            beta = bounds::beta_bound(blk.u, D, *kappa, F, omega, K);
            beta_ok = true;
            for (auto s : cfg.s_list) {
                try {
                    rep.add("beta_bound_s" + std::to_string(s), bounds::beta_bound(s, D, *kappa, F, omega, K));
                } catch (const DomainError& e) {
                    rep.notes.push_back("beta_bound at s = " + std::to_string(s) + ": " + e.what());
                }
            }
        } catch (const DomainError& e) {
            rep.notes.push_back(std::string("mixing bound inapplicable (") + e.what() +
                                "); beta_1 taken as the trivial bound 1");
        }
    }
    rep.add("beta_bound_u", beta);
    rep.add("beta_bound_applicable", beta_ok ? 1.0 : 0.0);
    const double bstar = bounds::beta_star(t, blk.alpha, beta, sb.s);
    rep.add("beta_star_0", bstar);
    rep.add("beta_star_1", bstar);

    // PAC right-hand sides. The running mean is replaced by the value the
    // stack above guarantees; epsilon is the slack over the floor.
    const double ta = static_cast<double>(t - blk.alpha);
    const double a = static_cast<double>(blk.alpha);
    for (std::size_t k = 0; k <= K; ++k) {
        bounds::PacInputs in;
        in.t = t;
        in.alpha = blk.alpha;
        in.u = blk.u;
        in.v = blk.v;
        in.dp_max = cost.dp_max(k);
        in.level = k == 0 ? lp.limit.value : cost.limit(k);
        const double excess = k == 0 ? (lp.gap.c_hat + 1.0) * lp.gap.delta_gap + psi.psi : psi.q_up;
        in.mean = in.level + excess;
        in.eps = excess + a * in.dp_max / ta + cfg.bounds.epsilon;
        in.beta = beta;
        in.pe_sum = pe_sum;
        in.mode = cfg.pac_mode;
        const auto r = bounds::pac_rhs(in);
        rep.add("eps_" + std::to_string(k), in.eps);
        rep.add("eps_bar_" + std::to_string(k), r.eps_bar);
        rep.add("pac_rhs_" + std::to_string(k), r.raw, true);
    }

    const double gammas[2] = {cfg.bounds.gamma0, cfg.bounds.gamma1};
    for (int i = 0; i < 2; ++i) {
        const std::string name = "in_T_" + std::to_string(i);
        try {
            const bool in = bounds::threshold_check(t, blk.alpha, blk.u, cfg.bounds.epsilon, gammas[i], bstar,
                                                    cost.dp_max(0));
            rep.add(name, in ? 1.0 : 0.0);
        } catch (const DomainError& e) {
            rep.add(name, 0.0);
            rep.notes.push_back(name + ": " + e.what());
        }
    }
    return rep;
}

double mean_rate(const empirics::ErrorRates& rates, std::uint64_t first) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::uint64_t t = first; t < rates.rate.size(); ++t, ++n) s += rates.rate[t];
    return n ? s / static_cast<double>(n) : kNan;
}

EmpiricsReport empirics_report(const EnsembleResult& ens, const ExperimentConfig& cfg, double lp_value) {
    const auto& problem = problem_of(cfg);
    EmpiricsReport r;
    r.rates = empirics::error_rate(ens);
    std::uint64_t first = 0;
    while (first < ens.horizon && in_warmup(first, cfg.sim.delay, cfg.sim.window.at(first))) ++first;
    r.post_warmup_rate = mean_rate(r.rates, first);
    r.gap = empirics::gap_report(ens, lp_value, problem.cost, cfg.empirics.tail);
    r.kappa = empirics::estimate_kappa(empirics::channel_samples(ens), cfg.empirics.min_cell);
    r.alpha = anchor_alpha(cfg);
    const empirics::Beta1Options opts{cfg.empirics.anchors, cfg.empirics.min_runs};
    for (std::size_t k = 0; k <= ens.penalties; ++k) {
        const auto pan = empirics::panel(ens, k);
        for (auto s : cfg.s_list) {
            Beta1Row row{k, s, std::nullopt};
            try {
                row.estimate = empirics::estimate_beta1(pan, s, r.alpha, opts);
            } catch (const Error&) {
            }
            r.beta1.push_back(std::move(row));
        }
    }
    return r;
}

std::vector<Check> gap_checks(const std::vector<double>& tail_mean, double lp_value, const CostModel& cost) {
    std::vector<Check> out;
    const double gap = tail_mean[0] - lp_value;
    out.push_back({"cost_gap_tail", gap, kUtilityBelow, "-", gap >= -kUtilityAbove && gap <= kUtilityBelow,
                   "tail mean cost minus LP optimum; allowed band [-" + csv::num(kUtilityAbove) + "; " +
                       csv::num(kUtilityBelow) + "]"});
    for (std::size_t k = 1; k <= cost.penalties(); ++k) {
        const double cap = cost.limit(k) + kPenaltySlack;
        out.push_back({"penalty_tail_" + std::to_string(k), tail_mean[k], cap, "-", tail_mean[k] <= cap,
                       "tail mean penalty vs c_k + " + csv::num(kPenaltySlack)});
    }
    return out;
}

Check detection_check(const empirics::ErrorRates& rates, const PeSequence& pe, std::uint64_t first,
                      std::uint64_t window, bounds::ErrorBoundMode mode) {
    Check c;
    c.name = "detection_w" + std::to_string(window);
    c.mode = std::string("error_bound=") + bounds::to_string(mode);
    std::size_t violations = 0, slots = 0;
    double worst = -std::numeric_limits<double>::infinity();
    double bound_sum = 0.0;
    for (std::uint64_t t = first; t < rates.rate.size() && t < pe.raw.size(); ++t) {
        const double cap = bounds::clamp_probability(pe.raw[t]) + kCiMultiple * rates.half_width[t];
        worst = std::max(worst, rates.rate[t] - cap);
        bound_sum += bounds::clamp_probability(pe.raw[t]);
        if (rates.rate[t] > cap) ++violations;
        ++slots;
    }
    c.empirical = mean_rate(rates, first);
    c.bound = slots ? bound_sum / static_cast<double>(slots) : kNan;
    c.pass = slots > 0 && violations == 0;
    c.note = std::to_string(slots) + " slots from " + std::to_string(first) + "; " + std::to_string(violations) +
             " above bound + 3 CI; worst excess " + csv::num(worst);
    return c;
}

std::vector<Check> mixing_checks(const Problem& problem, std::uint64_t delay, const std::optional<double>& kappa,
                                 const std::vector<Beta1Row>& rows) {
    std::vector<Check> out;
    std::map<std::size_t, std::map<std::uint64_t, const Beta1Row*>> by_k;
    for (const auto& r : rows) by_k[r.k][r.s] = &r;
    const double F = static_cast<double>(problem.space.size());
    const double omega = static_cast<double>(problem.space.states().total());
    const std::size_t K = problem.cost.penalties();
    for (const auto& [k, by_s] : by_k) {
        const auto lo = by_s.begin()->second;
        const auto hi = by_s.rbegin()->second;
        const std::string sk = std::to_string(k);

        Check b;
        b.name = "beta1_bound_k" + sk + "_s" + std::to_string(hi->s);
        b.mode = "-";
        if (!hi->estimate) {
            b.empirical = kNan;
            b.bound = kNan;
            b.note = "no anchor kept enough error-free runs";
        } else {
            b.empirical = hi->estimate->value;
            if (!kappa) {
                b.bound = kNan;
                b.pass = true;
                b.note = "kappa undefined; bound inapplicable";
            } else {
                try {
                    b.bound = bounds::beta_bound(hi->s, delay, *kappa, F, omega, K);
                    b.pass = b.empirical <= b.bound + kCiMultiple * hi->estimate->half_width;
                    b.note = "kappa_hat " + csv::num(*kappa) + "; CI " + csv::num(hi->estimate->half_width);
                } catch (const DomainError& e) {
                    b.bound = kNan;
                    b.pass = true;
                    b.note = "bound inapplicable: kappa_hat " + csv::num(*kappa) + " (" + e.what() + ")";
                }
            }
        }
        out.push_back(b);

        if (lo != hi) {
            Check tr;
            tr.name = "beta1_trend_k" + sk;
            tr.mode = "-";
            if (lo->estimate && hi->estimate) {
                tr.empirical = hi->estimate->value;
                tr.bound = lo->estimate->value;
                tr.pass = hi->estimate->value <= lo->estimate->value + lo->estimate->half_width +
                                                       hi->estimate->half_width;
                tr.note = "s " + std::to_string(hi->s) + " vs s " + std::to_string(lo->s) + " within joint CI";
            } else {
                tr.empirical = tr.bound = kNan;
                tr.note = "missing estimate";
            }
            out.push_back(tr);
        }
    }
    return out;
}

void write_ensemble(const std::string& path, const std::string& comment, const EnsembleResult& ens) {
    std::vector<std::string> cols{"t"};
    for (std::size_t k = 0; k < ens.width(); ++k) cols.push_back("mean_p" + std::to_string(k));
    cols.insert(cols.end(), {"error_rate", "error_half_width", "warmup"});
    csv::Writer w(path, comment, cols);
    const auto rates = empirics::error_rate(ens);
    for (std::uint64_t t = 0; t < ens.horizon; ++t) {
        std::vector<double> row{static_cast<double>(t)};
        for (std::size_t k = 0; k < ens.width(); ++k) row.push_back(ens.mean(t, k));
        row.insert(row.end(), {rates.rate[t], rates.half_width[t], static_cast<double>(rates.warmup[t])});
        w.row(row);
    }
}

void write_runs(const std::string& path, const std::string& comment, const EnsembleResult& ens) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot write " + path);
    std::fprintf(f, "# %s\nrun,t,omega,jstar,warmup,m\n", comment.c_str());
    for (std::size_t r = 0; r < ens.run_count(); ++r) {
        const auto& run = ens.runs[r];
        for (std::uint64_t t = 0; t < ens.horizon; ++t) {
            std::fprintf(f, "%zu,%llu,%llu,%u,%u,%llu\n", r, static_cast<unsigned long long>(t),
                         static_cast<unsigned long long>(run.omega[t]), run.jstar[t],
                         static_cast<unsigned>(run.warmup[t]), static_cast<unsigned long long>(run.m[t]));
        }
    }
    std::fclose(f);
}

EnsembleResult load_runs(const std::string& path, const PreparedProblem& prep) {
    std::ifstream in(path);
    if (!in) throw Error("missing input file " + path + " (run simulate first)");
    const auto& problem = prep.problem();
    EnsembleResult ens;
    ens.horizon = prep.horizon();
    ens.penalties = prep.penalties();
    ens.istar = prep.istar();
    ens.members = problem.covering.size();
    const std::size_t w = ens.width();
    const std::size_t ns = problem.space.states().total();
    const std::uint64_t F = problem.space.size();

    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "run,t,omega,jstar,warmup,m") throw Error(path + ": unexpected header \"" + line + "\"");
            header = true;
            continue;
        }
        unsigned long long v[6];
        const char* p = line.c_str();
        for (int i = 0; i < 6; ++i) {
            char* end = nullptr;
            v[i] = std::strtoull(p, &end, 10);
            if (end == p || (i < 5 && *end != ',') || (i == 5 && *end != '\0')) {
                throw Error(path + ":" + std::to_string(lineno) + ": malformed row");
            }
            p = end + 1;
        }
        const auto [run, t, omega, jstar, warm, m] = std::tuple(v[0], v[1], v[2], v[3], v[4], v[5]);
        if (t >= ens.horizon || omega >= ns || jstar >= ens.members || m >= F || warm > 1) {
            throw Error(path + ":" + std::to_string(lineno) + ": value out of range for this configuration");
        }
        if (run == ens.runs.size()) {
            if (!ens.runs.empty() && ens.runs.back().omega.size() != ens.horizon) {
                throw Error(path + ": run " + std::to_string(run - 1) + " is incomplete");
            }
            ens.runs.emplace_back();
            auto& nr = ens.runs.back();
            nr.omega.reserve(ens.horizon);
            nr.jstar.reserve(ens.horizon);
            nr.warmup.reserve(ens.horizon);
            nr.m.reserve(ens.horizon);
            nr.p.reserve(ens.horizon * w);
        }
        if (run + 1 != ens.runs.size() || t != ens.runs.back().omega.size()) {
            throw Error(path + ":" + std::to_string(lineno) + ": rows out of order");
        }
        auto& r = ens.runs.back();
        r.omega.push_back(omega);
        r.jstar.push_back(static_cast<std::uint32_t>(jstar));
        r.warmup.push_back(static_cast<std::uint8_t>(warm));
        r.m.push_back(m);
        const ActionId a = problem.space.apply(m, omega);
        for (std::size_t k = 0; k < w; ++k) r.p.push_back(problem.cost.value(k, a, omega));
    }
    if (ens.runs.empty()) throw Error(path + ": no runs");
    if (ens.runs.back().omega.size() != ens.horizon) throw Error(path + ": last run is incomplete");

    ens.mean_p.assign(ens.horizon * w, 0.0);
    for (auto& r : ens.runs) {
        r.final_avg.assign(w, 0.0);
        for (std::uint64_t t = 0; t < ens.horizon; ++t)
            for (std::size_t k = 0; k < w; ++k) {
                r.final_avg[k] += r.p[t * w + k];
                ens.mean_p[t * w + k] += r.p[t * w + k];
            }
        for (auto& x : r.final_avg) x /= static_cast<double>(ens.horizon);
    }
    for (auto& x : ens.mean_p) x /= static_cast<double>(ens.run_count());
    return ens;
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log) {
    fs::create_directories(cfg.out);
    auto problem = cfg.problem;
    if (!problem) throw ConfigError("configuration has no model");
    const PreparedProblem prep(problem, cfg.sim.horizon);
    const auto windows = window_axis(cfg);
    const std::string modes = mode_comment(cfg);
    const std::size_t K = problem->cost.penalties();

    struct Combo {
        double V;
        std::uint64_t D;
        WindowSchedule w;
    };
    std::vector<Combo> combos;
    for (double V : cfg.V_list)
        for (auto D : cfg.D_list)
            for (const auto& w : windows) combos.push_back({V, D, w});
    const std::string primary = combo_tag(cfg.sim.V, cfg.sim.delay, cfg.sim.window);
    if (std::none_of(combos.begin(), combos.end(),
                     [&](const Combo& c) { return combo_tag(c.V, c.D, c.w) == primary; })) {
        combos.push_back({cfg.sim.V, cfg.sim.delay, cfg.sim.window});
    }

    std::vector<std::string> cols{"V", "D", "window", "runs", "horizon"};
    for (std::size_t k = 0; k <= K; ++k) cols.push_back("tail_mean_p" + std::to_string(k));
    for (std::size_t k = 0; k <= K; ++k) cols.push_back("final_mean_p" + std::to_string(k));
    cols.insert(cols.end(), {"queue_violations", "post_warmup_error_rate", "tag"});
    csv::Writer summary(file(cfg, "simulate.csv"), modes + " seed=" + std::to_string(cfg.sim.seed), cols);

    for (const auto& c : combos) {
        SimParams params = cfg.sim;
        params.V = c.V;
        params.delay = c.D;
        params.window = c.w;
        const std::string tag = combo_tag(c.V, c.D, c.w);
        const std::string comment = modes + " " + tag + " seed=" + std::to_string(params.seed) +
                                    " runs=" + std::to_string(cfg.runs);
        const auto ens = run_ensemble(prep, params, cfg.runs, cfg.workers);
        write_ensemble(file(cfg, "ensemble_" + tag + ".csv"), comment, ens);

        // Trace of run 0.
        {
            std::vector<std::string> tc{"t", "omega", "jstar", "m"};
            for (std::size_t k = 0; k <= K; ++k) tc.push_back("p" + std::to_string(k));
            for (std::size_t k = 1; k <= K; ++k) tc.push_back("Q" + std::to_string(k));
            for (std::size_t k = 0; k <= K; ++k) tc.push_back("avg_p" + std::to_string(k));
            tc.push_back("warmup");
            csv::Writer tw(file(cfg, "trace_" + tag + ".csv"), comment + " run=0", tc);
            simulate(prep, params, 0, [&](const TraceRecord& r) {
                std::vector<std::string> row{std::to_string(r.t), std::to_string(r.omega), std::to_string(r.jstar),
                                             std::to_string(r.m)};
                for (double x : r.p) row.push_back(csv::num(x));
                for (double x : r.q) row.push_back(csv::num(x));
                for (double x : r.avg) row.push_back(csv::num(x));
                row.push_back(r.warmup ? "1" : "0");
                tw.row(row);
            });
        }
        if (tag == primary) write_runs(file(cfg, "runs.csv"), comment, ens);

        const auto gap = empirics::gap_report(ens, 0.0, problem->cost, cfg.empirics.tail);
        const auto rates = empirics::error_rate(ens);
        std::uint64_t first = 0;
        while (first < ens.horizon && in_warmup(first, c.D, c.w.at(first))) ++first;
        std::vector<std::string> row{csv::num(c.V), std::to_string(c.D),
                                     c.w.kind == WindowSchedule::Kind::sqrt ? "sqrt" : std::to_string(c.w.size),
                                     std::to_string(cfg.runs), std::to_string(cfg.sim.horizon)};
        for (double x : gap.tail_mean) row.push_back(csv::num(x));
        for (double x : gap.final_mean) row.push_back(csv::num(x));
        row.push_back(std::to_string(ens.queue_violations));
        row.push_back(csv::num(mean_rate(rates, first)));
        row.push_back(tag);
        summary.row(row);
        log << "simulate " << tag << ": " << cfg.runs << " runs, tail mean p0 " << csv::num(gap.tail_mean[0])
            << ", queue violations " << ens.queue_violations << "\n";
    }
    return 0;
}

int cmd_lp(const ExperimentConfig& cfg, std::ostream& log) {
    fs::create_directories(cfg.out);
    const auto& problem = problem_of(cfg);
    const auto r = lp_report(problem, cfg.bounds.nu);
    csv::Writer w(file(cfg, "lp.csv"), mode_comment(cfg), {"kind", "index", "value"});
    w.row({"status", "0", lp::to_string(r.limit.status)});
    if (r.limit.status != lp::LpStatus::optimal) {
        log << "lp: " << lp::to_string(r.limit.status) << "\n";
        return 1;
    }
    w.row({"value", "0", csv::num(r.limit.value)});
    w.row({"verified", "0", r.verify.empty() ? "true" : "false"});
    for (std::size_t m = 0; m < r.limit.theta.size(); ++m)
        if (r.limit.theta[m] != 0.0) w.row({"theta", std::to_string(m), csv::num(r.limit.theta[m])});
    for (std::size_t k = 0; k < r.limit.slacks.size(); ++k)
        w.row({"slack", std::to_string(k + 1), csv::num(r.limit.slacks[k])});
    w.row({"istar", "0", std::to_string(r.istar)});
    w.row({"member_value", std::to_string(r.istar), csv::num(r.gap.lp_member)});
    w.row({"distance", "0", csv::num(r.gap.distance)});
    w.row({"gap_delta", "0", csv::num(r.gap.delta_gap)});
    w.row({"c_hat", "0", csv::num(r.gap.c_hat)});
    w.row({"gap_inequality", "0", r.gap.holds ? "true" : "false"});
    {
        csv::Writer g(file(cfg, "lp_g.csv"), mode_comment(cfg), {"x", "G"});
        for (std::size_t i = 0; i < r.grid.size(); ++i) g.row(std::vector<double>{r.grid[i], r.g[i]});
    }
    log << "lp: optimal cost " << csv::num(r.limit.value) << " (utility " << csv::num(-r.limit.value) << "), "
        << r.limit.iterations << " pivots, " << (r.verify.empty() ? "verified" : "verification failed: " + r.verify)
        << "\n";
    log << "lp: nearest member " << r.istar << " at L1 " << csv::num(r.gap.distance) << ", value "
        << csv::num(r.gap.lp_member) << ", c_hat " << csv::num(r.gap.c_hat) << ", Delta "
        << csv::num(r.gap.delta_gap) << "\n";
    return r.verify.empty() ? 0 : 1;
}

int cmd_bounds(const ExperimentConfig& cfg, std::ostream& log) {
    fs::create_directories(cfg.out);
    const auto lp = lp_report(problem_of(cfg), cfg.bounds.nu);
    std::optional<double> kappa = cfg.bounds.kappa;
    std::string source = "configuration";
    if (!kappa) {
        kappa = kappa_from_empirics(file(cfg, "empirics.csv"));
        source = "empirics.csv";
    }
    auto rep = bound_report(cfg, lp, kappa);
    if (kappa) rep.notes.insert(rep.notes.begin(), "kappa from " + source);

    std::vector<std::string> cols{"value"};
    for (const auto& e : rep.entries) cols.push_back(e.name);
    csv::Writer w(file(cfg, "bounds.csv"), mode_comment(cfg), cols);
    std::vector<std::string> raw{"raw"}, clamped{"clamped"};
    for (const auto& e : rep.entries) {
        raw.push_back(csv::num(e.raw));
        clamped.push_back(csv::num(e.clamped));
    }
    w.row(raw);
    w.row(clamped);

    csv::Writer pw(file(cfg, "pe.csv"), mode_comment(cfg), {"tau", "margin", "pe_raw", "pe_clamped"});
    for (std::size_t t = 0; t < rep.pe.size(); ++t) {
        pw.row(std::vector<double>{static_cast<double>(t), rep.margin[t], rep.pe[t],
                                   bounds::clamp_probability(rep.pe[t])});
    }

    csv::Writer nw(file(cfg, "bounds_notes.csv"), mode_comment(cfg), {"note"});
    for (const auto& n : rep.notes) nw.row({no_commas(n)});

    log << "bounds (" << mode_comment(cfg) << "): psi " << csv::num(rep.get("psi")) << ", Q_up "
        << csv::num(rep.get("Q_up")) << ", pac_rhs_0 " << csv::num(rep.get("pac_rhs_0")) << "\n";
    for (const auto& n : rep.notes) log << "bounds: " << n << "\n";
    return 0;
}

int cmd_empirics(const ExperimentConfig& cfg, std::ostream& log) {
    const auto& problem = problem_of(cfg);
    const PreparedProblem prep(cfg.problem, cfg.sim.horizon);
    const auto ens = load_runs(file(cfg, "runs.csv"), prep);
    const auto lp = lp::solve_lp(lp::LpInstance::from_model(problem.space, problem.schedule.limit(), problem.cost));
    const double lp_value = lp.status == lp::LpStatus::optimal ? lp.value : kNan;
    const auto rep = empirics_report(ens, cfg, lp_value);
    const std::string modes = mode_comment(cfg);

    csv::Writer w(file(cfg, "empirics.csv"), modes + " runs=" + std::to_string(ens.run_count()),
                  {"name", "k", "s", "value", "half_width", "note"});
    auto put = [&](const std::string& name, std::size_t k, std::uint64_t s, double v, double hw, std::string note) {
        w.row({name, std::to_string(k), std::to_string(s), csv::num(v), csv::num(hw), no_commas(std::move(note))});
    };
    const auto& kap = rep.kappa;
    put("kappa_hat", 0, 0, kap.value.value_or(kNan), kNan,
        (kap.value ? std::string("pooled post-warmup error-free slots") : kap.note) + "; cells used " +
            std::to_string(kap.cells_used) + " excluded " + std::to_string(kap.cells_excluded) + " (floor " +
            std::to_string(cfg.empirics.min_cell) + ")");
    put("post_warmup_error_rate", 0, 0, rep.post_warmup_rate, kNan, "mean over slots after warmup");
    put("cost_gap_final", 0, 0, rep.gap.cost_gap, rep.gap.final_half_width[0], "final time average minus LP");
    for (std::size_t k = 0; k < rep.gap.final_mean.size(); ++k) {
        put("final_mean", k, 0, rep.gap.final_mean[k], rep.gap.final_half_width[k], "99% CI across runs");
        put("tail_mean", k, 0, rep.gap.tail_mean[k], kNan, "last " + std::to_string(rep.gap.tail) + " slots");
        if (k > 0) put("excess", k, 0, rep.gap.excess[k - 1], kNan, "max(0; final mean - c_k)");
    }
    for (const auto& b : rep.beta1) {
        if (b.estimate) {
            put("beta1", b.k, b.s, b.estimate->value, b.estimate->half_width,
                "max over " + std::to_string(b.estimate->anchors.size()) + " anchors from " +
                    std::to_string(rep.alpha));
        } else {
            put("beta1", b.k, b.s, kNan, kNan, "every anchor skipped (too few error-free runs)");
        }
    }

    csv::Writer aw(file(cfg, "beta1_anchors.csv"), modes,
                   {"k", "s", "anchor", "survivors", "tv", "half_width", "skipped"});
    for (const auto& b : rep.beta1) {
        if (!b.estimate) continue;
        for (const auto& a : b.estimate->anchors) {
            aw.row({std::to_string(b.k), std::to_string(b.s), std::to_string(a.t), std::to_string(a.survivors),
                    csv::num(a.tv), csv::num(a.half_width), a.skipped ? "1" : "0"});
        }
    }
    csv::Writer ew(file(cfg, "errors.csv"), modes, {"t", "rate", "half_width", "warmup"});
    for (std::size_t t = 0; t < rep.rates.rate.size(); ++t) {
        ew.row(std::vector<double>{static_cast<double>(t), rep.rates.rate[t], rep.rates.half_width[t],
                                   static_cast<double>(rep.rates.warmup[t])});
    }

    log << "empirics: " << ens.run_count() << " runs, post-warmup error rate " << csv::num(rep.post_warmup_rate)
        << "\n";
    log << "empirics: kappa_hat " << (kap.value ? csv::num(*kap.value) : "undefined (" + kap.note + ")") << "\n";
    for (const auto& b : rep.beta1) {
        log << "empirics: beta1 k=" << b.k << " s=" << b.s << " "
            << (b.estimate ? csv::num(b.estimate->value) + " +- " + csv::num(b.estimate->half_width)
                           : std::string("unavailable"))
            << "\n";
    }
    log << "empirics: final mean cost " << csv::num(rep.gap.final_mean[0]) << " vs LP " << csv::num(lp_value)
        << "\n";
    return 0;
}

int cmd_compare(const ExperimentConfig& cfg, std::ostream& log) {
    const auto& problem = problem_of(cfg);
    const std::string modes = mode_comment(cfg);
    std::vector<Check> checks;

    // LP.
    const auto lpt = csv::read(file(cfg, "lp.csv"));
    double lp_value = kNan;
    bool verified = false;
    for (const auto& r : lpt.rows) {
        if (r[0] == "value") lp_value = csv::to_double(r[2]);
        if (r[0] == "verified") verified = r[2] == "true";
    }
    checks.push_back({"lp_verified", lp_value, kNan, "-", verified, "optimality certificate of the limit LP"});
    if (cfg.preset == "sensor3") {
        checks.push_back({"lp_optimum", -lp_value, kSensor3Optimum, "-",
                          std::abs(-lp_value - kSensor3Optimum) <= kSensor3OptimumTol, "utility vs 0.394 +- 0.001"});
    }

    // Simulation summary.
    const auto sim = csv::read(file(cfg, "simulate.csv"));
    const std::size_t K = problem.cost.penalties();
    std::map<std::string, std::vector<double>> tail;
    std::map<std::string, double> tag_V;
    std::uint64_t violations = 0;
    for (const auto& r : sim.rows) {
        const auto tag = r[sim.column("tag")];
        std::vector<double> tm;
        for (std::size_t k = 0; k <= K; ++k) tm.push_back(csv::to_double(r[sim.column("tail_mean_p" + std::to_string(k))]));
        tail[tag] = tm;
        tag_V[tag] = csv::to_double(r[sim.column("V")]);
        violations += static_cast<std::uint64_t>(csv::to_double(r[sim.column("queue_violations")]));
    }
    const std::string primary = combo_tag(cfg.sim.V, cfg.sim.delay, cfg.sim.window);
    if (!tail.count(primary)) throw Error("simulate.csv has no row for " + primary);
    for (auto c : gap_checks(tail[primary], lp_value, problem.cost)) {
        c.name += "_" + primary;
        checks.push_back(c);
    }
    checks.push_back({"queue_bound", static_cast<double>(violations), 0.0, "-", violations == 0,
                      "slots with Q_k(t) outside [0; t (p_max - c_k)] over every sweep point"});

    // V tradeoff along the primary (D, w).
    {
        std::vector<std::pair<double, double>> gaps;
        for (const auto& [tag, tm] : tail) {
            if (tag == combo_tag(tag_V[tag], cfg.sim.delay, cfg.sim.window)) gaps.push_back({tag_V[tag], tm[0] - lp_value});
        }
        std::sort(gaps.begin(), gaps.end());
        if (gaps.size() >= 2) {
            checks.push_back({"v_tradeoff", gaps.front().second, gaps.back().second, "-",
                              gaps.front().second > gaps.back().second,
                              "cost gap at V " + csv::num(gaps.front().first) + " vs V " + csv::num(gaps.back().first)});
        }
    }

    // Detection at every window of the sweep, on a common slot range.
    {
        const auto windows = window_axis(cfg);
        std::uint64_t first = 0;
        for (const auto& w : windows)
            while (first < cfg.sim.horizon && in_warmup(first, cfg.sim.delay, w.at(first))) ++first;
        std::vector<std::pair<std::uint64_t, double>> means;
        for (const auto& w : windows) {
            const auto tag = combo_tag(cfg.sim.V, cfg.sim.delay, w);
            const auto et = csv::read(file(cfg, "ensemble_" + tag + ".csv"));
            empirics::ErrorRates rates;
            for (const auto& r : et.rows) {
                rates.rate.push_back(csv::to_double(r[et.column("error_rate")]));
                rates.half_width.push_back(csv::to_double(r[et.column("error_half_width")]));
                rates.warmup.push_back(static_cast<std::uint8_t>(csv::to_double(r[et.column("warmup")])));
            }
            const auto pe = pe_sequence(problem, cfg.sim.delay, w, cfg.sim.horizon, cfg.error_mode);
            auto c = detection_check(rates, pe, first, w.kind == WindowSchedule::Kind::sqrt ? 0 : w.size,
                                     cfg.error_mode);
            if (w.kind == WindowSchedule::Kind::sqrt) c.name = "detection_wsqrt";
            means.push_back({w.size, c.empirical});
            checks.push_back(c);
        }
        if (means.size() >= 2 && cfg.sim.window.kind == WindowSchedule::Kind::constant) {
            std::sort(means.begin(), means.end());
            bool dec = true;
            for (std::size_t i = 1; i < means.size(); ++i) dec = dec && means[i].second < means[i - 1].second;
            checks.push_back({"detection_trend", means.back().second, means.front().second, "-", dec,
                              "mean post-warmup error rate strictly decreasing from w " +
                                  std::to_string(means.front().first) + " to w " + std::to_string(means.back().first)});
        }
    }

    // Mixing.
    {
        const auto et = csv::read(file(cfg, "empirics.csv"));
        std::optional<double> kappa;
        std::vector<Beta1Row> rows;
        const auto cn = et.column("name"), ck = et.column("k"), cs = et.column("s"), cv = et.column("value"),
                   ch = et.column("half_width");
        for (const auto& r : et.rows) {
            const double v = csv::to_double(r[cv]);
            if (r[cn] == "kappa_hat" && std::isfinite(v)) kappa = v;
            if (r[cn] != "beta1") continue;
            Beta1Row row{static_cast<std::size_t>(csv::to_double(r[ck])),
                         static_cast<std::uint64_t>(csv::to_double(r[cs])), std::nullopt};
            if (std::isfinite(v)) {
                empirics::Beta1Estimate e;
                e.s = row.s;
                e.value = v;
                e.half_width = csv::to_double(r[ch]);
                row.estimate = e;
            }
            rows.push_back(row);
        }
        if (cfg.bounds.kappa) kappa = cfg.bounds.kappa;
        for (auto& c : mixing_checks(problem, cfg.sim.delay, kappa, rows)) checks.push_back(c);
    }

    // Bound table presence and mode labels.
    {
        const auto bt = csv::read(file(cfg, "bounds.csv"));
        const bool same_modes = !bt.comments.empty() && bt.comments.front() == modes;
        checks.push_back({"bounds_modes", kNan, kNan, modes, same_modes, "bounds.csv written under the active modes"});
    }

    std::size_t failed = 0;
    csv::Writer w(file(cfg, "compare.csv"), modes, {"check", "empirical", "bound", "mode", "pass", "note"});
    for (const auto& c : checks) {
        w.row({c.name, csv::num(c.empirical), csv::num(c.bound), c.mode, pass_word(c.pass), no_commas(c.note)});
        log << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << csv::num(c.empirical) << " vs "
            << csv::num(c.bound) << " [" << c.mode << "] " << c.note << "\n";
        if (!c.pass) ++failed;
    }
    log << "compare: " << checks.size() - failed << "/" << checks.size() << " checks pass\n";
    return failed == 0 ? 0 : 2;
}

int cmd_preset_dump(const ExperimentConfig& cfg, std::ostream& out) {
    out << dump_config(cfg);
    return 0;
}

int cmd_all(const ExperimentConfig& cfg, std::ostream& log) {
    for (auto* cmd : {&cmd_simulate, &cmd_lp, &cmd_empirics, &cmd_bounds, &cmd_compare}) {
        const int rc = cmd(cfg, log);
        if (rc != 0) return rc;
    }
    return 0;
}

void apply_overrides(ExperimentConfig& cfg, const Overrides& o) {
    if (o.seed) cfg.sim.seed = *o.seed;
    if (o.runs) {
        if (*o.runs == 0) throw ConfigError("--runs must be at least 1");
        cfg.runs = *o.runs;
    }
    if (o.out) cfg.out = *o.out;
    if (o.mode) {
        if (*o.mode == "literal") cfg.error_mode = bounds::ErrorBoundMode::literal;
        else if (*o.mode == "default") cfg.error_mode = bounds::ErrorBoundMode::hoeffding;
        else throw ConfigError("--mode must be \"literal\" or \"default\"");
    }
    if (o.horizon) {
        if (*o.horizon == 0) throw ConfigError("--horizon must be at least 1");
        cfg.sim.horizon = *o.horizon;
        if (cfg.preset == "sensor3") {
            cfg.sensor3.horizon = *o.horizon;
            cfg.problem = sensor3::shared_problem(cfg.sensor3);
        }
    }
}

}  // namespace adpp::pipeline
