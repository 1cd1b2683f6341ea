#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gbbtrade/trade.hpp"

namespace gbbtrade {

using LearnerRng = std::mt19937_64;

// Tunables of the full learner. `defaults(T)` gives the theory-driven
// choices; every field can be overridden afterwards.
struct LearnerParams {
    int horizon = 2;
    int grid_k = 2;             // primal grid resolution K
    double alpha = 0.5;         // exploration probability
    double lambda_cap = 1.0;    // M
    double dual_eta = 1.0;      // OGD step on the multiplier
    double primal_eta = 0.1;    // eta^P
    double gamma = 0.05;        // implicit-exploration bias of the primal
    int revmax_grid_k = 2;      // K' of the Rev-Max base prices
    double revmax_gamma = 0.05;
    double revmax_eta = 0.1;

    // K = ceil(T^(1/4)), alpha = T^(-1/4), M = 16 ln T, eta = 1/sqrt(T),
    // eta^P = 2 gamma = sqrt(ln|A| / (|A| T)) / M, Rev-Max uses K' = K and
    // EXP3-IX rates gamma' = sqrt(ln|B| / (|B| T)), eta' = 2 gamma'.
    static LearnerParams defaults(int horizon);

    void validate() const;
};

// Smallest integer k with k^4 >= n.
int ceil_fourth_root(long long n);

// Finite set of price pairs with its seller/buyer price groups (A_s, A_b).
class ActionSet {
public:
    explicit ActionSet(const GridSpec& grid);
    // Groups are formed by exact coordinate equality.
    explicit ActionSet(std::vector<PriceQuote> quotes);

    std::size_t size() const { return quotes_.size(); }
    const PriceQuote& quote(std::size_t a) const { return quotes_[a]; }
    const std::vector<PriceQuote>& quotes() const { return quotes_; }

    std::size_t seller_group(std::size_t a) const { return seller_group_[a]; }
    std::size_t buyer_group(std::size_t a) const { return buyer_group_[a]; }
    std::size_t num_seller_groups() const { return by_seller_.size(); }
    std::size_t num_buyer_groups() const { return by_buyer_.size(); }
    // Actions sharing seller price group g, i.e. {(p, q') : q' in A_b}.
    const std::vector<std::size_t>& with_seller_group(std::size_t g) const { return by_seller_[g]; }
    // Actions sharing buyer price group g, i.e. {(p', q) : p' in A_s}.
    const std::vector<std::size_t>& with_buyer_group(std::size_t g) const { return by_buyer_[g]; }

private:
    void index_groups(std::vector<std::size_t> seller, std::vector<std::size_t> buyer,
                      std::size_t n_seller, std::size_t n_buyer);

    std::vector<PriceQuote> quotes_;
    std::vector<std::size_t> seller_group_;
    std::vector<std::size_t> buyer_group_;
    std::vector<std::vector<std::size_t>> by_seller_;
    std::vector<std::vector<std::size_t>> by_buyer_;
};

// Multiplicative weights kept as log-weights. The cached linear weights are
// exp(log_w - shift); the shift follows the running maximum whenever the
// cached weights drift towards underflow.
class ExponentialWeights {
public:
    explicit ExponentialWeights(std::size_t n);
    ExponentialWeights(std::vector<double> log_weights, double shift);

    std::size_t size() const { return log_w_.size(); }
    double prob(std::size_t a) const { return w_[a] / total_; }
    std::vector<double> probs() const;
    // Action whose cumulative probability first exceeds u in [0,1).
    std::size_t draw(double u) const;

    // w(a) <- w(a) exp(-step(a)) for each (a, step) pair.
    void apply(std::span<const std::pair<std::size_t, double>> steps);

    const std::vector<double>& log_weights() const { return log_w_; }
    double shift() const { return shift_; }

private:
    void refresh();

    std::vector<double> log_w_;
    std::vector<double> w_;
    double shift_ = 0.0;
    double total_ = 0.0;
};

enum class Branch : int { Bandit = 0, Seller = 1, Buyer = 2 };

// One round of the primal sampler: base action, branch H, the uniform draw
// (U when H = 1, V when H = 2) and the posted quote.
struct ExplorationDraw {
    Branch branch;
    std::size_t base;
    PriceQuote base_quote;
    double uniform;
    PriceQuote posted;
};

struct EstimateEntry {
    std::size_t action;
    double tilde;  // with the implicit-exploration bias gamma
    double hat;    // importance-weighted, unbiased (gamma = 0)
};

// Sparse loss estimate of one round; actions not listed are 0. Only the
// realized branch contributes.
struct LossEstimate {
    Branch branch;
    double lambda;
    std::vector<EstimateEntry> entries;

    double tilde(std::size_t action) const;
    double hat(std::size_t action) const;
};

// EXP3.IX primal learner over an action set with one-bit feedback.
class PrimalState {
public:
    PrimalState(ActionSet actions, double alpha, double gamma, double eta);

    const ActionSet& actions() const { return actions_; }
    double alpha() const { return alpha_; }
    double gamma() const { return gamma_; }
    double eta() const { return eta_; }

    double pi_hat(std::size_t a) const { return weights_.prob(a); }
    std::vector<double> pi_hat() const { return weights_.probs(); }
    const ExponentialWeights& weights() const { return weights_; }
    void set_weights(ExponentialWeights w);

    ExplorationDraw sample(LearnerRng& rng) const;

    // Branch-wise importance-weighted losses
    //   H=1: (1 - 1(trade) 1(U <= p)) / (alpha/2 sum_p' pi(p', q^) + gamma) on (p, q^)
    //   H=2: (1 - 1(trade) 1(V >= q)) / (alpha/2 sum_q' pi(p^, q') + gamma) on (p^, q)
    //   H=0: (1 + lambda)(1 - (q^ - p^) 1(trade)) / ((1 - alpha) pi(p^, q^) + gamma)
    LossEstimate estimate(const ExplorationDraw& draw, const TradeFeedback& fb, double lambda) const;

    // Same as `estimate` on a caller-supplied distribution (used by checks
    // that freeze pi_hat).
    static LossEstimate estimate_with(const ActionSet& actions, std::span<const double> pi,
                                      double alpha, double gamma, const ExplorationDraw& draw,
                                      const TradeFeedback& fb, double lambda);
    static ExplorationDraw sample_with(const ActionSet& actions, std::span<const double> pi,
                                       double alpha, LearnerRng& rng);

    void update(const LossEstimate& est);

private:
    ActionSet actions_;
    double alpha_;
    double gamma_;
    double eta_;
    ExponentialWeights weights_;
};

// Projected online gradient descent on the Lagrange multiplier.
class DualState {
public:
    DualState(double cap, double eta, double lambda = 0.0);

    double lambda() const { return lambda_; }
    double cap() const { return cap_; }
    double eta() const { return eta_; }

    // lambda <- clip(lambda - eta * rev, 0, M).
    void update(double realized_rev);

private:
    double cap_;
    double eta_;
    double lambda_;
};

// Action set {(rho, min(rho + delta, 1))} over rho in {i/(K'-1)} and
// delta in {2^-j : j = 1..ceil(log2 T)}, plus (0, 1). Duplicates removed.
std::vector<PriceQuote> revmax_actions(int grid_k, int horizon);

// Smallest j with 2^j >= n.
int ceil_log2(long long n);

// Revenue-maximizing EXP3-IX bandit. Every action has q >= p, so no round it
// plays loses money.
class RevMaxLearner {
public:
    RevMaxLearner(std::vector<PriceQuote> actions, double gamma, double eta);

    const std::vector<PriceQuote>& actions() const { return actions_; }
    double prob(std::size_t a) const { return weights_.prob(a); }
    const ExponentialWeights& weights() const { return weights_; }
    void set_weights(ExponentialWeights w);

    PriceQuote propose(LearnerRng& rng);
    // Reward is the realized revenue (q - p) 1(trade).
    void observe(const TradeFeedback& fb);

    bool pending() const { return pending_.has_value(); }

private:
    std::vector<PriceQuote> actions_;
    double gamma_;
    double eta_;
    ExponentialWeights weights_;
    std::optional<std::size_t> pending_;
};

// Primal learner driven by the current multiplier, then a dual step on the
// realized revenue.
class PrimalDualLearner {
public:
    PrimalDualLearner(PrimalState primal, DualState dual);

    const PrimalState& primal() const { return primal_; }
    PrimalState& primal() { return primal_; }
    const DualState& dual() const { return dual_; }
    DualState& dual() { return dual_; }

    PriceQuote propose(LearnerRng& rng);
    void observe(const TradeFeedback& fb);

    bool pending() const { return pending_.has_value(); }
    const std::optional<ExplorationDraw>& last_draw() const { return last_draw_; }
    const std::optional<LossEstimate>& last_estimate() const { return last_estimate_; }

private:
    PrimalState primal_;
    DualState dual_;
    std::optional<ExplorationDraw> pending_;
    std::optional<ExplorationDraw> last_draw_;
    std::optional<LossEstimate> last_estimate_;
};

enum class Phase : int { RevMax = 0, PrimalDual = 1 };

const char* phase_name(Phase p);

// Rev-Max while the budget is strictly below 1.
inline Phase phase_for_budget(double budget) { return budget < 1.0 ? Phase::RevMax : Phase::PrimalDual; }

struct PhaseRecord {
    Phase phase;
    double budget_before;
    double rev;
};

struct BudgetState {
    double budget = 0.0;
    std::vector<PhaseRecord> phase_log;
};

// Budget switcher: rounds go to Rev-Max while the cumulative revenue is
// below 1, otherwise to the primal-dual learner. Only the active learner
// sees the round.
class BudgetBalancedLearner {
public:
    BudgetBalancedLearner(const LearnerParams& params, std::uint64_t seed);

    const LearnerParams& params() const { return params_; }
    const GridSpec& grid() const { return grid_; }
    const BudgetState& budget() const { return budget_; }
    const PrimalDualLearner& primal_dual() const { return pd_; }
    const RevMaxLearner& revmax() const { return rm_; }
    double lambda() const { return pd_.dual().lambda(); }

    // Phase the next proposal will use.
    Phase next_phase() const { return phase_for_budget(budget_.budget); }

    PriceQuote propose();
    void observe(const TradeFeedback& fb);

    // Snapshot between rounds (JSON), including the RNG state, so a restored
    // learner continues bit-identically.
    std::string checkpoint() const;
    static BudgetBalancedLearner restore(const std::string& json_text);

private:
    LearnerParams params_;
    GridSpec grid_;
    PrimalDualLearner pd_;
    RevMaxLearner rm_;
    BudgetState budget_;
    LearnerRng rng_;
    std::optional<Phase> pending_;
};

}  // namespace gbbtrade
