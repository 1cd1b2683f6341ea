#include "gbbtrade/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gbbtrade/errors.hpp"

namespace gbbtrade {

namespace {

constexpr double kFeasTol = 1e-12;

// Actions not dominated in (r, g); identical pairs keep the lowest index.
std::vector<ActionScore> pareto_frontier(std::vector<ActionScore> items) {
    std::sort(items.begin(), items.end(), [](const ActionScore& a, const ActionScore& b) {
        if (a.r != b.r) return a.r > b.r;
        if (a.g != b.g) return a.g > b.g;
        return a.action < b.action;
    });
    std::vector<ActionScore> front;
    for (const auto& s : items) {
        if (front.empty() || s.g > front.back().g) front.push_back(s);
    }
    return front;
}

struct Candidate {
    double value = 0.0;
    Mixture support;
    bool found = false;

    void offer(double v, Mixture m) {
        if (!found || v > value) {
            value = v;
            support = std::move(m);
            found = true;
        }
    }
};

// Mixture x*neg + (1-x)*pos with the budget constraint tight.
void offer_tight_pair(Candidate& best, const ActionScore& neg, const ActionScore& pos) {
    const double x = pos.r / (pos.r - neg.r);
    const double v = x * neg.g + (1.0 - x) * pos.g;
    best.offer(v, Mixture{{neg.action, x}, {pos.action, 1.0 - x}});
}

LpSolution solve_one_constraint(std::span<const ActionScore> scores) {
    Candidate best;
    std::vector<ActionScore> pos;
    std::vector<ActionScore> neg;
    for (const auto& s : scores) {
        if (s.r >= 0.0) best.offer(s.g, Mixture{{s.action, 1.0}});
        if (s.r > 0.0) pos.push_back(s);
        if (s.r < 0.0) neg.push_back(s);
    }
    if (!best.found) throw InfeasibleError("no action satisfies the budget constraint on its own");
    const auto pos_front = pareto_frontier(std::move(pos));
    const auto neg_front = pareto_frontier(std::move(neg));
    for (const auto& n : neg_front) {
        for (const auto& p : pos_front) {
            // A pair only helps when the negative-revenue side is better.
            if (n.g > p.g) offer_tight_pair(best, n, p);
        }
    }
    return LpSolution{best.value, std::move(best.support)};
}

struct TwoConstraintAction {
    std::size_t action;
    double g;
    double c1;
    double c2;
};

LpSolution solve_two_constraints(const std::vector<TwoConstraintAction>& acts) {
    Candidate best;
    const std::size_t n = acts.size();
    auto feasible = [](double c) { return c >= -kFeasTol; };

    for (const auto& a : acts) {
        if (feasible(a.c1) && feasible(a.c2)) best.offer(a.g, Mixture{{a.action, 1.0}});
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto& a = acts[i];
            const auto& b = acts[j];
            for (int tight = 0; tight < 2; ++tight) {
                const double ca = tight == 0 ? a.c1 : a.c2;
                const double cb = tight == 0 ? b.c1 : b.c2;
                if (!((ca > 0.0 && cb < 0.0) || (ca < 0.0 && cb > 0.0))) continue;
                const double x = cb / (cb - ca);  // weight on a
                const double other = tight == 0 ? x * a.c2 + (1.0 - x) * b.c2
                                                : x * a.c1 + (1.0 - x) * b.c1;
                if (!feasible(other)) continue;
                best.offer(x * a.g + (1.0 - x) * b.g, Mixture{{a.action, x}, {b.action, 1.0 - x}});
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                const auto& a = acts[i];
                const auto& b = acts[j];
                const auto& c = acts[k];
                // Solve [c1; c2; 1] x = [0; 0; 1] by Cramer's rule.
                const double det = a.c1 * (b.c2 - c.c2) - b.c1 * (a.c2 - c.c2) + c.c1 * (a.c2 - b.c2);
                if (std::abs(det) < 1e-14) continue;
                const double xa = (b.c1 * c.c2 - c.c1 * b.c2) / det;
                const double xb = (c.c1 * a.c2 - a.c1 * c.c2) / det;
                const double xc = (a.c1 * b.c2 - b.c1 * a.c2) / det;
                if (xa < -kFeasTol || xb < -kFeasTol || xc < -kFeasTol) continue;
                best.offer(xa * a.g + xb * b.g + xc * c.g,
                           Mixture{{a.action, xa}, {b.action, xb}, {c.action, xc}});
            }
        }
    }
    if (!best.found) throw InfeasibleError("per-law budget constraints admit no mixture");
    return LpSolution{best.value, std::move(best.support)};
}

}  // namespace

FixedPriceOptimum opt_fixed(std::span<const MarketOutcome> outcomes) {
    // Round t contributes (b - s) on the closed interval s <= p <= b.
    std::vector<std::pair<double, double>> starts;
    std::vector<std::pair<double, double>> ends;
    std::vector<double> breaks{0.0, 1.0};
    for (const auto& o : outcomes) {
        breaks.push_back(o.s());
        breaks.push_back(o.b());
        if (o.s() <= o.b()) {
            starts.emplace_back(o.s(), o.b() - o.s());
            ends.emplace_back(o.b(), o.b() - o.s());
        }
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    std::sort(starts.begin(), starts.end());
    std::sort(ends.begin(), ends.end());

    std::vector<double> start_prefix{0.0};
    for (const auto& [x, w] : starts) start_prefix.push_back(start_prefix.back() + w);
    std::vector<double> end_prefix{0.0};
    for (const auto& [x, w] : ends) end_prefix.push_back(end_prefix.back() + w);

    auto value_at = [&](double p) {
        const auto opened = std::upper_bound(starts.begin(), starts.end(), p,
                                             [](double v, const auto& e) { return v < e.first; }) -
                            starts.begin();
        const auto closed = std::lower_bound(ends.begin(), ends.end(), p,
                                             [](const auto& e, double v) { return e.first < v; }) -
                            ends.begin();
        return start_prefix[opened] - end_prefix[closed];
    };

    FixedPriceOptimum best{value_at(breaks.front()), breaks.front()};
    for (std::size_t i = 0; i < breaks.size(); ++i) {
        if (i > 0) {
            const double mid = 0.5 * (breaks[i - 1] + breaks[i]);
            const double v = value_at(mid);
            if (v > best.value) best = {v, mid};
        }
        const double v = value_at(breaks[i]);
        if (v > best.value) best = {v, breaks[i]};
    }
    return best;
}

LpSolution opt_dist_grid(std::span<const ActionScore> scores) {
    if (scores.empty()) throw DomainError("opt_dist_grid needs at least one action");
    return solve_one_constraint(scores);
}

LpSolution opt_fixed_K(std::span<const LawMoments> laws, int k) {
    if (laws.empty()) throw DomainError("opt_fixed_K needs at least one law");
    if (k < 2) throw ResolutionError("grid resolution K must be >= 2");
    if (laws.size() > 2) {
        throw CapabilityError("opt_fixed_K supports at most 2 distinct laws, got " +
                              std::to_string(laws.size()));
    }
    const std::size_t n = laws.front().moments.size();
    for (const auto& law : laws) {
        if (law.moments.size() != n) throw DomainError("moment tables must share one grid");
    }
    const double slack = 1.0 / static_cast<double>(k);
    auto objective = [&](std::size_t a) {
        double g = 0.0;
        for (const auto& law : laws) g += static_cast<double>(law.rounds) * law.moments[a].gft;
        return g;
    };

    if (laws.size() == 1) {
        std::vector<ActionScore> scores;
        scores.reserve(n);
        for (std::size_t a = 0; a < n; ++a) {
            scores.push_back({a, objective(a), laws[0].moments[a].rev + slack});
        }
        return solve_one_constraint(scores);
    }
    std::vector<TwoConstraintAction> acts;
    acts.reserve(n);
    for (std::size_t a = 0; a < n; ++a) {
        acts.push_back({a, objective(a), laws[0].moments[a].rev + slack, laws[1].moments[a].rev + slack});
    }
    return solve_two_constraints(acts);
}

std::vector<LawMoments> law_moments(const CorruptionSchedule& schedule, int horizon,
                                    const GridSpec& grid) {
    std::vector<LawMoments> out;
    for (const auto& seg : schedule.distinct_laws(horizon)) {
        if (seg.rounds == 0) continue;
        out.push_back(LawMoments{seg.rounds, expected_moments(*seg.distribution, grid)});
    }
    return out;
}

std::vector<ActionScore> aggregate_scores(const CorruptionSchedule& schedule, int horizon,
                                          const GridSpec& grid) {
    std::vector<ActionScore> scores(grid.size());
    for (std::size_t a = 0; a < grid.size(); ++a) scores[a] = {a, 0.0, 0.0};
    for (const auto& law : law_moments(schedule, horizon, grid)) {
        const double n = static_cast<double>(law.rounds);
        for (std::size_t a = 0; a < grid.size(); ++a) {
            scores[a].g += n * law.moments[a].gft;
            scores[a].r += n * law.moments[a].rev;
        }
    }
    return scores;
}

PolicyValue realized_policy_value(const Mixture& policy, const GridSpec& grid,
                                  std::span<const MarketOutcome> outcomes) {
    PolicyValue v{0.0, 0.0};
    for (const auto& entry : policy) {
        if (entry.action >= grid.size()) throw DomainError("policy action is not on the grid");
        const PriceQuote& quote = grid.point(entry.action);
        double g = 0.0;
        double r = 0.0;
        for (const auto& o : outcomes) {
            g += gft(quote, o);
            r += rev(quote, o);
        }
        v.gft += entry.weight * g;
        v.rev += entry.weight * r;
    }
    return v;
}

PolicyValue policy_value(const Mixture& policy, std::span<const ActionScore> scores) {
    PolicyValue v{0.0, 0.0};
    for (const auto& entry : policy) {
        auto it = std::find_if(scores.begin(), scores.end(),
                               [&](const ActionScore& s) { return s.action == entry.action; });
        if (it == scores.end()) throw DomainError("policy action has no score");
        v.gft += entry.weight * it->g;
        v.rev += entry.weight * it->r;
    }
    return v;
}

BenchmarkReport compute_benchmarks(const ValuationSequence& seq, const GridSpec& grid) {
    BenchmarkReport report;
    report.grid_k = grid.k();
    report.horizon = static_cast<int>(seq.size());
    const auto fixed = opt_fixed(seq.outcomes());
    report.opt_fixed = fixed.value;
    report.opt_fixed_price = fixed.price;

    const int horizon = static_cast<int>(seq.size());
    const auto laws = law_moments(seq.schedule(), horizon, grid);
    const auto scores = aggregate_scores(seq.schedule(), horizon, grid);
    const auto dist = opt_dist_grid(scores);
    report.opt_dist_K = dist.value;
    report.supporting_policy = dist.support;
    if (laws.size() <= 2) report.opt_fixed_K = opt_fixed_K(laws, grid.k()).value;

    double diag = scores[grid.index(0, 0)].g;
    for (int i = 1; i < grid.k(); ++i) diag = std::max(diag, scores[grid.index(i, i)].g);
    report.best_fixed_grid_price = diag;
    return report;
}

}  // namespace gbbtrade
