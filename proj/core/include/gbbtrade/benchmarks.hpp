#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gbbtrade/schedule.hpp"
#include "gbbtrade/trade.hpp"

namespace gbbtrade {

// Objective and constraint coefficients of one action: g is (expected or
// summed) GFT, r is (expected or summed) revenue.
struct ActionScore {
    std::size_t action;
    double g;
    double r;
};

struct MixtureEntry {
    std::size_t action;
    double weight;
};
using Mixture = std::vector<MixtureEntry>;

struct LpSolution {
    double value;
    Mixture support;
};

struct FixedPriceOptimum {
    double value;
    double price;
};

// Best single price p in hindsight: max_p sum_t GFT((p,p), outcome_t), exact
// over the continuum by sweeping valuation breakpoints and the midpoints
// between them. Ties resolve to the lowest price.
FixedPriceOptimum opt_fixed(std::span<const MarketOutcome> outcomes);

// max sum pi(a) g(a) s.t. sum pi(a) r(a) >= 0 over the simplex. Some optimum
// mixes at most two actions, so this enumerates feasible singletons and
// tight pairs over the Pareto frontiers of the positive- and negative-revenue
// actions. Throws InfeasibleError when no action has r >= 0.
LpSolution opt_dist_grid(std::span<const ActionScore> scores);

// Coefficients of one distinct round law: `rounds` rounds share `moments`.
struct LawMoments {
    int rounds;
    std::vector<Moments> moments;
};

// Per-law relaxed budget balance: max sum_t E_pi[GFT_t] subject to
// E_pi[Rev_d] >= -1/K for every distinct law d. Supports at most two
// distinct laws (vertex enumeration over supports of size <= 3); more
// throws CapabilityError.
LpSolution opt_fixed_K(std::span<const LawMoments> laws, int k);

// Summed expected moments of every grid action over the schedule's rounds.
std::vector<ActionScore> aggregate_scores(const CorruptionSchedule& schedule, int horizon,
                                          const GridSpec& grid);
std::vector<LawMoments> law_moments(const CorruptionSchedule& schedule, int horizon,
                                    const GridSpec& grid);

struct PolicyValue {
    double gft;
    double rev;
};

// Sum over rounds of the mixture's GFT and revenue on realized outcomes.
PolicyValue realized_policy_value(const Mixture& policy, const GridSpec& grid,
                                  std::span<const MarketOutcome> outcomes);

// Linear evaluation against precomputed scores (indexed by action).
PolicyValue policy_value(const Mixture& policy, std::span<const ActionScore> scores);

struct BenchmarkReport {
    double opt_fixed = 0.0;       // continuum best fixed price, realized outcomes
    double opt_fixed_price = 0.0;
    double opt_dist_K = 0.0;      // budget balanced in expectation, on the grid
    Mixture supporting_policy;
    std::optional<double> opt_fixed_K;  // absent with more than two distinct laws
    double best_fixed_grid_price = 0.0;  // best diagonal grid action, expected moments
    int grid_k = 0;
    int horizon = 0;
};

BenchmarkReport compute_benchmarks(const ValuationSequence& seq, const GridSpec& grid);

}  // namespace gbbtrade
