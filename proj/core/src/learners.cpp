#include "gbbtrade/learners.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "gbbtrade/errors.hpp"
#include "gbbtrade/random.hpp"
#include "json_codec.hpp"

namespace gbbtrade {

int ceil_fourth_root(long long n) {
    if (n <= 1) return 1;
    auto r = static_cast<long long>(std::floor(std::pow(static_cast<double>(n), 0.25)));
    while (r * r * r * r >= n && r > 1) --r;
    while (r * r * r * r < n) ++r;
    return static_cast<int>(r);
}

int ceil_log2(long long n) {
    int j = 0;
    while ((1LL << j) < n) ++j;
    return j;
}

LearnerParams LearnerParams::defaults(int horizon) {
    if (horizon < 2) throw ConfigError("horizon T must be >= 2");
    LearnerParams p;
    const double t = static_cast<double>(horizon);
    p.horizon = horizon;
    p.grid_k = std::max(2, ceil_fourth_root(horizon));
    p.alpha = std::pow(t, -0.25);
    p.lambda_cap = 16.0 * std::log(t);
    p.dual_eta = 1.0 / std::sqrt(t);
    const double n_actions = static_cast<double>(p.grid_k) * p.grid_k;
    p.primal_eta = std::sqrt(std::log(n_actions) / (n_actions * t)) / p.lambda_cap;
    p.gamma = 0.5 * p.primal_eta;
    p.revmax_grid_k = p.grid_k;
    const double n_rm = static_cast<double>(revmax_actions(p.revmax_grid_k, horizon).size());
    p.revmax_gamma = std::sqrt(std::log(n_rm) / (n_rm * t));
    p.revmax_eta = 2.0 * p.revmax_gamma;
    return p;
}

void LearnerParams::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("invalid learner parameter: " + what); };
    if (horizon < 2) fail("T must be >= 2");
    if (grid_k < 2) fail("K must be >= 2");
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha must lie in [0,1]");
    if (!(lambda_cap > 0.0)) fail("M must be positive");
    if (!(dual_eta > 0.0)) fail("dual eta must be positive");
    if (!(primal_eta > 0.0)) fail("primal eta must be positive");
    if (!(gamma >= 0.0)) fail("gamma must be >= 0");
    if (revmax_grid_k < 2) fail("Rev-Max K' must be >= 2");
    if (!(revmax_gamma >= 0.0)) fail("Rev-Max gamma must be >= 0");
    if (!(revmax_eta > 0.0)) fail("Rev-Max eta must be positive");
}

// ---------------------------------------------------------------- ActionSet

ActionSet::ActionSet(const GridSpec& grid) : quotes_(grid.points()) {
    std::vector<std::size_t> seller(quotes_.size());
    std::vector<std::size_t> buyer(quotes_.size());
    for (std::size_t a = 0; a < quotes_.size(); ++a) {
        seller[a] = static_cast<std::size_t>(grid.seller_index(a));
        buyer[a] = static_cast<std::size_t>(grid.buyer_index(a));
    }
    const auto k = static_cast<std::size_t>(grid.k());
    index_groups(std::move(seller), std::move(buyer), k, k);
}

ActionSet::ActionSet(std::vector<PriceQuote> quotes) : quotes_(std::move(quotes)) {
    if (quotes_.empty()) throw DomainError("action set must be nonempty");
    std::map<double, std::size_t> ps;
    std::map<double, std::size_t> qs;
    for (const auto& q : quotes_) {
        ps.emplace(q.p(), 0);
        qs.emplace(q.q(), 0);
    }
    std::size_t i = 0;
    for (auto& [v, g] : ps) g = i++;
    i = 0;
    for (auto& [v, g] : qs) g = i++;
    std::vector<std::size_t> seller(quotes_.size());
    std::vector<std::size_t> buyer(quotes_.size());
    for (std::size_t a = 0; a < quotes_.size(); ++a) {
        seller[a] = ps.at(quotes_[a].p());
        buyer[a] = qs.at(quotes_[a].q());
        for (std::size_t b = 0; b < a; ++b) {
            if (quotes_[b] == quotes_[a]) throw DomainError("action set contains a duplicate quote");
        }
    }
    index_groups(std::move(seller), std::move(buyer), ps.size(), qs.size());
}

void ActionSet::index_groups(std::vector<std::size_t> seller, std::vector<std::size_t> buyer,
                             std::size_t n_seller, std::size_t n_buyer) {
    seller_group_ = std::move(seller);
    buyer_group_ = std::move(buyer);
    by_seller_.assign(n_seller, {});
    by_buyer_.assign(n_buyer, {});
    for (std::size_t a = 0; a < quotes_.size(); ++a) {
        by_seller_[seller_group_[a]].push_back(a);
        by_buyer_[buyer_group_[a]].push_back(a);
    }
}

// ------------------------------------------------------- ExponentialWeights

namespace {
constexpr double kUnderflowGuard = 1e-100;
}

ExponentialWeights::ExponentialWeights(std::size_t n) : log_w_(n, 0.0), w_(n, 1.0) {
    if (n == 0) throw DomainError("exponential weights need at least one action");
    refresh();
}

ExponentialWeights::ExponentialWeights(std::vector<double> log_weights, double shift)
    : log_w_(std::move(log_weights)), w_(log_w_.size()), shift_(shift) {
    if (log_w_.empty()) throw DomainError("exponential weights need at least one action");
    refresh();
}

void ExponentialWeights::refresh() {
    double peak = 0.0;
    total_ = 0.0;
    for (std::size_t a = 0; a < log_w_.size(); ++a) {
        w_[a] = std::exp(log_w_[a] - shift_);
        total_ += w_[a];
        peak = std::max(peak, w_[a]);
    }
    if (peak < kUnderflowGuard || peak > 1.0 / kUnderflowGuard || !std::isfinite(total_)) {
        shift_ = *std::max_element(log_w_.begin(), log_w_.end());
        total_ = 0.0;
        for (std::size_t a = 0; a < log_w_.size(); ++a) {
            w_[a] = std::exp(log_w_[a] - shift_);
            total_ += w_[a];
        }
    }
    if (!(total_ > 0.0) || !std::isfinite(total_)) {
        throw NumericalError("exponential weights lost normalization");
    }
}

std::vector<double> ExponentialWeights::probs() const {
    std::vector<double> p(w_.size());
    for (std::size_t a = 0; a < w_.size(); ++a) p[a] = w_[a] / total_;
    return p;
}

std::size_t ExponentialWeights::draw(double u) const {
    const double target = u * total_;
    double acc = 0.0;
    for (std::size_t a = 0; a < w_.size(); ++a) {
        acc += w_[a];
        if (target < acc) return a;
    }
    for (std::size_t a = w_.size(); a-- > 0;) {
        if (w_[a] > 0.0) return a;
    }
    return w_.size() - 1;
}

void ExponentialWeights::apply(std::span<const std::pair<std::size_t, double>> steps) {
    if (steps.empty()) return;
    for (const auto& [a, step] : steps) {
        if (!std::isfinite(step)) throw NumericalError("non-finite weight update");
        log_w_[a] -= step;
    }
    refresh();
}

// ------------------------------------------------------------- PrimalState

namespace {

ExplorationDraw sample_draw(const ActionSet& actions, double alpha, LearnerRng& rng,
                            std::size_t base) {
    const double u_branch = uniform01(rng);
    const double u_price = uniform01(rng);
    Branch branch = Branch::Bandit;
    if (!(u_branch < 1.0 - alpha)) {
        branch = u_branch < 1.0 - 0.5 * alpha ? Branch::Seller : Branch::Buyer;
    }
    const PriceQuote& bq = actions.quote(base);
    switch (branch) {
        case Branch::Seller:
            return {branch, base, bq, u_price, PriceQuote(u_price, bq.q())};
        case Branch::Buyer:
            return {branch, base, bq, u_price, PriceQuote(bq.p(), u_price)};
        case Branch::Bandit:
            break;
    }
    return {branch, base, bq, u_price, bq};
}

template <class Prob>
LossEstimate estimate_draw(const ActionSet& actions, Prob pi, double alpha, double gamma,
                           const ExplorationDraw& draw, const TradeFeedback& fb, double lambda) {
    if (!(fb.posted == draw.posted)) {
        throw ContractViolation("feedback does not belong to this draw: posted quotes differ");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ContractViolation("Lagrange multiplier must be finite and >= 0");
    }
    LossEstimate est{draw.branch, lambda, {}};
    switch (draw.branch) {
        case Branch::Seller: {
            const auto& column = actions.with_buyer_group(actions.buyer_group(draw.base));
            double mass = 0.0;
            for (std::size_t a : column) mass += pi(a);
            const double denom = 0.5 * alpha * mass;
            est.entries.reserve(column.size());
            for (std::size_t a : column) {
                // 1(s <= U <= p, b >= q^) = 1(trade) 1(U <= p) since U was posted.
                const bool hit = fb.traded && draw.uniform <= actions.quote(a).p();
                const double num = hit ? 0.0 : 1.0;
                est.entries.push_back({a, num / (denom + gamma), num / denom});
            }
            break;
        }
        case Branch::Buyer: {
            const auto& row = actions.with_seller_group(actions.seller_group(draw.base));
            double mass = 0.0;
            for (std::size_t a : row) mass += pi(a);
            const double denom = 0.5 * alpha * mass;
            est.entries.reserve(row.size());
            for (std::size_t a : row) {
                const bool hit = fb.traded && draw.uniform >= actions.quote(a).q();
                const double num = hit ? 0.0 : 1.0;
                est.entries.push_back({a, num / (denom + gamma), num / denom});
            }
            break;
        }
        case Branch::Bandit: {
            const PriceQuote& bq = draw.base_quote;
            const double r = fb.traded ? bq.q() - bq.p() : 0.0;
            const double num = (1.0 + lambda) * (1.0 - r);
            const double denom = (1.0 - alpha) * pi(draw.base);
            est.entries.push_back({draw.base, num / (denom + gamma), num / denom});
            break;
        }
    }
    return est;
}

}  // namespace

double LossEstimate::tilde(std::size_t action) const {
    for (const auto& e : entries) {
        if (e.action == action) return e.tilde;
    }
    return 0.0;
}

double LossEstimate::hat(std::size_t action) const {
    for (const auto& e : entries) {
        if (e.action == action) return e.hat;
    }
    return 0.0;
}

PrimalState::PrimalState(ActionSet actions, double alpha, double gamma, double eta)
    : actions_(std::move(actions)), alpha_(alpha), gamma_(gamma), eta_(eta), weights_(actions_.size()) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0,1]");
    if (!(gamma >= 0.0)) throw DomainError("gamma must be >= 0");
    if (!(eta > 0.0)) throw DomainError("eta must be positive");
}

void PrimalState::set_weights(ExponentialWeights w) {
    if (w.size() != actions_.size()) throw DomainError("weight vector size does not match actions");
    weights_ = std::move(w);
}

ExplorationDraw PrimalState::sample(LearnerRng& rng) const {
    const std::size_t base = weights_.draw(uniform01(rng));
    return sample_draw(actions_, alpha_, rng, base);
}

ExplorationDraw PrimalState::sample_with(const ActionSet& actions, std::span<const double> pi,
                                         double alpha, LearnerRng& rng) {
    if (pi.size() != actions.size()) throw DomainError("distribution size does not match actions");
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t base = pi.size() - 1;
    for (std::size_t a = 0; a < pi.size(); ++a) {
        acc += pi[a];
        if (u < acc) {
            base = a;
            break;
        }
    }
    return sample_draw(actions, alpha, rng, base);
}

LossEstimate PrimalState::estimate(const ExplorationDraw& draw, const TradeFeedback& fb,
                                   double lambda) const {
    return estimate_draw(actions_, [this](std::size_t a) { return weights_.prob(a); }, alpha_, gamma_,
                         draw, fb, lambda);
}

LossEstimate PrimalState::estimate_with(const ActionSet& actions, std::span<const double> pi,
                                        double alpha, double gamma, const ExplorationDraw& draw,
                                        const TradeFeedback& fb, double lambda) {
    if (pi.size() != actions.size()) throw DomainError("distribution size does not match actions");
    return estimate_draw(actions, [pi](std::size_t a) { return pi[a]; }, alpha, gamma, draw, fb, lambda);
}

void PrimalState::update(const LossEstimate& est) {
    std::vector<std::pair<std::size_t, double>> steps;
    steps.reserve(est.entries.size());
    for (const auto& e : est.entries) {
        if (!(e.tilde >= 0.0) || !std::isfinite(e.tilde)) {
            throw NumericalError("loss estimate must be finite and >= 0");
        }
        if (e.tilde > 0.0) steps.emplace_back(e.action, eta_ * e.tilde);
    }
    weights_.apply(steps);
}

// --------------------------------------------------------------- DualState

DualState::DualState(double cap, double eta, double lambda) : cap_(cap), eta_(eta), lambda_(lambda) {
    if (!(cap > 0.0)) throw DomainError("multiplier cap M must be positive");
    if (!(eta > 0.0)) throw DomainError("dual step must be positive");
    if (!(lambda >= 0.0 && lambda <= cap)) throw DomainError("multiplier must lie in [0, M]");
}

void DualState::update(double realized_rev) {
    if (!(std::abs(realized_rev) <= 1.0)) throw DomainError("per-round revenue must lie in [-1,1]");
    lambda_ = std::clamp(lambda_ - eta_ * realized_rev, 0.0, cap_);
}

// ------------------------------------------------------------------ RevMax

std::vector<PriceQuote> revmax_actions(int grid_k, int horizon) {
    if (grid_k < 2) throw ResolutionError("Rev-Max grid resolution must be >= 2");
    const int levels = ceil_log2(horizon);
    std::vector<PriceQuote> out;
    auto push_unique = [&out](PriceQuote q) {
        if (std::find(out.begin(), out.end(), q) == out.end()) out.push_back(q);
    };
    const GridSpec base(grid_k);
    for (double rho : base.seller_prices()) {
        for (int j = 1; j <= levels; ++j) {
            push_unique(PriceQuote(rho, std::min(rho + std::ldexp(1.0, -j), 1.0)));
        }
    }
    push_unique(PriceQuote(0.0, 1.0));
    return out;
}

RevMaxLearner::RevMaxLearner(std::vector<PriceQuote> actions, double gamma, double eta)
    : actions_(std::move(actions)), gamma_(gamma), eta_(eta), weights_(actions_.size()) {
    for (const auto& a : actions_) {
        if (a.q() < a.p()) throw DomainError("Rev-Max actions must satisfy q >= p");
    }
    if (!(gamma >= 0.0)) throw DomainError("gamma must be >= 0");
    if (!(eta > 0.0)) throw DomainError("eta must be positive");
}

void RevMaxLearner::set_weights(ExponentialWeights w) {
    if (w.size() != actions_.size()) throw DomainError("weight vector size does not match actions");
    weights_ = std::move(w);
}

PriceQuote RevMaxLearner::propose(LearnerRng& rng) {
    if (pending_) throw ContractViolation("Rev-Max proposed twice without feedback");
    const std::size_t a = weights_.draw(uniform01(rng));
    pending_ = a;
    return actions_[a];
}

void RevMaxLearner::observe(const TradeFeedback& fb) {
    if (!pending_) throw ContractViolation("Rev-Max received feedback without a proposal");
    const std::size_t a = *pending_;
    if (!(fb.posted == actions_[a])) throw ContractViolation("feedback does not match Rev-Max proposal");
    pending_.reset();
    // Gain form: the importance-weighted revenue raises the played action.
    const double gain = realized_rev(fb) / (weights_.prob(a) + gamma_);
    const std::pair<std::size_t, double> step{a, -eta_ * gain};
    weights_.apply(std::span(&step, 1));
}

// ------------------------------------------------------------- PrimalDual

PrimalDualLearner::PrimalDualLearner(PrimalState primal, DualState dual)
    : primal_(std::move(primal)), dual_(dual) {}

PriceQuote PrimalDualLearner::propose(LearnerRng& rng) {
    if (pending_) throw ContractViolation("primal-dual proposed twice without feedback");
    pending_ = primal_.sample(rng);
    return pending_->posted;
}

void PrimalDualLearner::observe(const TradeFeedback& fb) {
    if (!pending_) throw ContractViolation("primal-dual received feedback without a proposal");
    LossEstimate est = primal_.estimate(*pending_, fb, dual_.lambda());
    primal_.update(est);
    dual_.update(realized_rev(fb));
    last_draw_ = std::move(pending_);
    pending_.reset();
    last_estimate_ = std::move(est);
}

// ---------------------------------------------------------- Budget switcher

const char* phase_name(Phase p) { return p == Phase::RevMax ? "RevMax" : "PrimalDual"; }

BudgetBalancedLearner::BudgetBalancedLearner(const LearnerParams& params, std::uint64_t seed)
    : params_(params),
      grid_((params.validate(), params.grid_k)),
      pd_(PrimalState(ActionSet(grid_), params.alpha, params.gamma, params.primal_eta),
          DualState(params.lambda_cap, params.dual_eta)),
      rm_(revmax_actions(params.revmax_grid_k, params.horizon), params.revmax_gamma, params.revmax_eta),
      rng_(seed) {}

PriceQuote BudgetBalancedLearner::propose() {
    if (pending_) throw ContractViolation("propose called twice without feedback");
    const Phase phase = next_phase();
    pending_ = phase;
    return phase == Phase::RevMax ? rm_.propose(rng_) : pd_.propose(rng_);
}

void BudgetBalancedLearner::observe(const TradeFeedback& fb) {
    if (!pending_) throw ContractViolation("feedback without a pending proposal");
    const Phase phase = *pending_;
    if (phase == Phase::RevMax) {
        rm_.observe(fb);
    } else {
        pd_.observe(fb);
    }
    pending_.reset();
    const double r = realized_rev(fb);
    budget_.phase_log.push_back(PhaseRecord{phase, budget_.budget, r});
    budget_.budget += r;
}

namespace {

nlohmann::json params_to_json(const LearnerParams& p) {
    return {{"T", p.horizon},           {"K", p.grid_k},
            {"alpha", p.alpha},         {"M", p.lambda_cap},
            {"dual_eta", p.dual_eta},   {"primal_eta", p.primal_eta},
            {"gamma", p.gamma},         {"revmax_K", p.revmax_grid_k},
            {"revmax_gamma", p.revmax_gamma}, {"revmax_eta", p.revmax_eta}};
}

LearnerParams params_from_json(const nlohmann::json& j) {
    using detail::require;
    LearnerParams p;
    p.horizon = require<int>(j, "T");
    p.grid_k = require<int>(j, "K");
    p.alpha = require<double>(j, "alpha");
    p.lambda_cap = require<double>(j, "M");
    p.dual_eta = require<double>(j, "dual_eta");
    p.primal_eta = require<double>(j, "primal_eta");
    p.gamma = require<double>(j, "gamma");
    p.revmax_grid_k = require<int>(j, "revmax_K");
    p.revmax_gamma = require<double>(j, "revmax_gamma");
    p.revmax_eta = require<double>(j, "revmax_eta");
    return p;
}

nlohmann::json weights_to_json(const ExponentialWeights& w) {
    return {{"log_w", w.log_weights()}, {"shift", w.shift()}};
}

ExponentialWeights weights_from_json(const nlohmann::json& j) {
    return ExponentialWeights(detail::require<std::vector<double>>(j, "log_w"),
                              detail::require<double>(j, "shift"));
}

}  // namespace

std::string BudgetBalancedLearner::checkpoint() const {
    if (pending_) throw ContractViolation("checkpoint requested mid-round");
    nlohmann::json j;
    j["params"] = params_to_json(params_);
    j["budget"] = budget_.budget;
    auto& log = j["phase_log"] = nlohmann::json::array();
    for (const auto& r : budget_.phase_log) {
        log.push_back({static_cast<int>(r.phase), r.budget_before, r.rev});
    }
    j["lambda"] = pd_.dual().lambda();
    j["primal"] = weights_to_json(pd_.primal().weights());
    j["revmax"] = weights_to_json(rm_.weights());
    std::ostringstream rng_state;
    rng_state << rng_;
    j["rng"] = rng_state.str();
    return j.dump();
}

BudgetBalancedLearner BudgetBalancedLearner::restore(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    using detail::require;
    BudgetBalancedLearner learner(params_from_json(require<nlohmann::json>(j, "params")), 0);
    learner.budget_.budget = require<double>(j, "budget");
    for (const auto& r : require<nlohmann::json>(j, "phase_log")) {
        learner.budget_.phase_log.push_back(
            PhaseRecord{static_cast<Phase>(r.at(0).get<int>()), r.at(1).get<double>(), r.at(2).get<double>()});
    }
    learner.pd_.dual() = DualState(learner.params_.lambda_cap, learner.params_.dual_eta,
                                   require<double>(j, "lambda"));
    learner.pd_.primal().set_weights(weights_from_json(require<nlohmann::json>(j, "primal")));
    learner.rm_.set_weights(weights_from_json(require<nlohmann::json>(j, "revmax")));
    std::istringstream rng_state(require<std::string>(j, "rng"));
    rng_state >> learner.rng_;
    if (!rng_state) throw ConfigError("checkpoint RNG state is malformed");
    return learner;
}

}  // namespace gbbtrade
