#include "adpp/empirics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace adpp::empirics {

double binomial_half_width(double p, std::size_t n, double z) {
    if (n == 0) return 1.0;
    return z * std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

ErrorRates error_rate(const EnsembleResult& ens) {
    ErrorRates out;
    out.runs = ens.run_count();
    out.rate.assign(ens.horizon, 0.0);
    out.half_width.assign(ens.horizon, 0.0);
    out.warmup.assign(ens.horizon, 1);
    for (const auto& run : ens.runs) {
        for (std::uint64_t t = 0; t < ens.horizon; ++t) {
            if (run.jstar[t] != ens.istar) out.rate[t] += 1.0;
            if (!run.warmup[t]) out.warmup[t] = 0;
        }
    }
    for (std::uint64_t t = 0; t < ens.horizon; ++t) {
        out.rate[t] /= static_cast<double>(out.runs);
        out.half_width[t] = binomial_half_width(out.rate[t], out.runs);
    }
    return out;
}

double interval_error_rate(const EnsembleResult& ens, std::uint64_t first, std::uint64_t last) {
    if (first > last || last >= ens.horizon) throw DomainError("error interval outside the horizon");
    std::size_t bad = 0;
    for (const auto& run : ens.runs) {
        for (std::uint64_t t = first; t <= last; ++t) {
            if (run.jstar[t] != ens.istar) {
                ++bad;
                break;
            }
        }
    }
    return static_cast<double>(bad) / static_cast<double>(ens.run_count());
}

Panel panel(const EnsembleResult& ens, std::size_t k) {
    if (k > ens.penalties) throw DimensionError("penalty index out of range");
    Panel p;
    p.values.resize(ens.run_count());
    p.errors.resize(ens.run_count());
    for (std::size_t r = 0; r < ens.run_count(); ++r) {
        const auto& run = ens.runs[r];
        p.values[r].resize(ens.horizon);
        p.errors[r].resize(ens.horizon);
        for (std::uint64_t t = 0; t < ens.horizon; ++t) {
            p.values[r][t] = run.p_at(t, k, ens.width());
            p.errors[r][t] = run.jstar[t] != ens.istar ? 1 : 0;
        }
    }
    return p;
}

std::vector<std::uint64_t> anchor_grid(std::uint64_t alpha, std::uint64_t horizon, std::uint64_t s,
                                       std::size_t count) {
    std::vector<std::uint64_t> out;
    if (horizon < s + 1 || alpha > horizon - 1 - s || count == 0) return out;
    const std::uint64_t hi = horizon - 1 - s;
    const double lo_l = std::log(static_cast<double>(alpha) + 1.0);
    const double hi_l = std::log(static_cast<double>(hi) + 1.0);
    for (std::size_t i = 0; i < count; ++i) {
        const double f = count == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        auto t = static_cast<std::uint64_t>(std::llround(std::exp(lo_l + f * (hi_l - lo_l)) - 1.0));
        out.push_back(std::clamp(t, alpha, hi));
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double pair_tv(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty()) throw DimensionError("pair_tv needs equal, nonempty samples");
    std::map<std::pair<double, double>, std::size_t> joint;
    std::map<double, std::size_t> mx, my;
    for (std::size_t i = 0; i < x.size(); ++i) {
        ++joint[{x[i], y[i]}];
        ++mx[x[i]];
        ++my[y[i]];
    }
    const double n = static_cast<double>(x.size());
    double s = 0.0;
    for (const auto& [a, ca] : mx) {
        for (const auto& [b, cb] : my) {
            const auto it = joint.find({a, b});
            const double pj = it == joint.end() ? 0.0 : static_cast<double>(it->second) / n;
            s += std::abs(pj - static_cast<double>(ca) / n * static_cast<double>(cb) / n);
        }
    }
    return 0.5 * s;
}

double tv_half_width(std::size_t cells, std::size_t n) {
    if (n == 0) return 1.0;
    return 0.5 * std::sqrt(2.0 / static_cast<double>(n) *
                           (static_cast<double>(cells) * std::log(2.0) + std::log(100.0)));
}

Beta1Estimate estimate_beta1(const Panel& panel, std::uint64_t s, std::uint64_t alpha, const Beta1Options& opts) {
    Beta1Estimate est;
    est.s = s;
    const bool conditioned = !panel.errors.empty();
    bool any = false;
    for (std::uint64_t t : anchor_grid(alpha, panel.horizon(), s, opts.anchors)) {
        std::vector<double> x, y;
        for (std::size_t r = 0; r < panel.runs(); ++r) {
            bool clean = true;
            if (conditioned) {
                for (std::uint64_t u = t; u <= t + s && clean; ++u) clean = panel.errors[r][u] == 0;
            }
            if (!clean) continue;
            x.push_back(panel.values[r][t]);
            y.push_back(panel.values[r][t + s]);
        }
        Beta1Anchor a{t, x.size(), 0.0, 0.0, x.size() < opts.min_runs};
        if (!a.skipped) {
            a.tv = pair_tv(x, y);
            const std::size_t cx = std::set<double>(x.begin(), x.end()).size();
            const std::size_t cy = std::set<double>(y.begin(), y.end()).size();
            a.half_width = tv_half_width(cx * cy, x.size());
            if (!any || a.tv > est.value) {
                est.value = a.tv;
                est.half_width = a.half_width;
            }
            any = true;
        }
        est.anchors.push_back(a);
    }
    if (!any) throw Error("beta_1 estimate: no anchor kept enough error-free runs");
    return est;
}

KappaEstimate estimate_kappa(const std::vector<ChannelSample>& samples, std::size_t min_count) {
    KappaEstimate out;
    out.samples = samples.size();
    std::map<StrategyIndex, std::map<std::vector<double>, std::size_t>> cells;
    std::map<StrategyIndex, std::size_t> totals;
    for (const auto& s : samples) {
        ++cells[s.m][s.x];
        ++totals[s.m];
    }
    // Included conditional probabilities per strategy.
    std::map<StrategyIndex, std::map<std::vector<double>, double>> cond;
    for (const auto& [m, row] : cells) {
        for (const auto& [x, c] : row) {
            if (c < min_count) {
                ++out.cells_excluded;
                continue;
            }
            ++out.cells_used;
            cond[m][x] = static_cast<double>(c) / static_cast<double>(totals[m]);
        }
    }
    out.strategies = cond.size();
    if (out.strategies < 2) {
        out.note = "fewer than two strategies with an included cell";
        return out;
    }
    double best = 0.0;
    bool paired = false;
    for (auto a = cond.begin(); a != cond.end(); ++a) {
        for (auto b = std::next(a); b != cond.end(); ++b) {
            for (const auto& [x, pa] : a->second) {
                const auto it = b->second.find(x);
                if (it == b->second.end()) continue;
                paired = true;
                best = std::max(best, std::abs(std::log(pa / it->second)));
            }
        }
    }
    if (!paired) {
        out.note = "no cost value observed often enough under two different strategies";
        return out;
    }
    out.value = best;
    return out;
}

std::vector<ChannelSample> channel_samples(const EnsembleResult& ens) {
    std::vector<ChannelSample> out;
    const std::size_t w = ens.width();
    for (const auto& run : ens.runs) {
        for (std::uint64_t t = 0; t < ens.horizon; ++t) {
            if (run.warmup[t] || run.jstar[t] != ens.istar) continue;
            out.push_back({run.m[t], std::vector<double>(run.p.begin() + static_cast<std::ptrdiff_t>(t * w),
                                                         run.p.begin() + static_cast<std::ptrdiff_t>((t + 1) * w))});
        }
    }
    return out;
}

GapReport gap_report(const EnsembleResult& ens, double lp_value, const CostModel& cost, std::uint64_t tail) {
    GapReport g;
    g.lp_value = lp_value;
    const std::size_t w = ens.width();
    const auto n = static_cast<double>(ens.run_count());
    g.final_mean.assign(w, 0.0);
    g.final_half_width.assign(w, 0.0);
    for (const auto& run : ens.runs)
        for (std::size_t k = 0; k < w; ++k) g.final_mean[k] += run.final_avg[k];
    for (auto& x : g.final_mean) x /= n;
    if (ens.run_count() > 1) {
        for (std::size_t k = 0; k < w; ++k) {
            double ss = 0.0;
            for (const auto& run : ens.runs) {
                const double d = run.final_avg[k] - g.final_mean[k];
                ss += d * d;
            }
            g.final_half_width[k] = kZ99 * std::sqrt(ss / (n - 1.0) / n);
        }
    }
    g.cost_gap = g.final_mean[0] - lp_value;
    for (std::size_t k = 1; k < w; ++k) g.excess.push_back(std::max(0.0, g.final_mean[k] - cost.limit(k)));

    g.tail = std::min<std::uint64_t>(tail, ens.horizon);
    g.tail_mean.assign(w, 0.0);
    for (std::uint64_t t = ens.horizon - g.tail; t < ens.horizon; ++t)
        for (std::size_t k = 0; k < w; ++k) g.tail_mean[k] += ens.mean(t, k);
    if (g.tail > 0)
        for (auto& x : g.tail_mean) x /= static_cast<double>(g.tail);
    return g;
}

}  // namespace adpp::empirics
