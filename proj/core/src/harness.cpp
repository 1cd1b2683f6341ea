#include "gbbtrade/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "gbbtrade/errors.hpp"
#include "gbbtrade/random.hpp"
#include "json_codec.hpp"

namespace gbbtrade {

namespace {

constexpr std::uint64_t kLearnerStream = 0x6c6561726e657200ULL;
constexpr std::uint64_t kIntervalStream = 0x696e74657276616cULL;

const std::vector<std::string> kKnownChecks{"decomposition", "unbiasedness", "bias_direction",
                                            "dual_interval"};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

const char* learner_name(LearnerKind k) {
    switch (k) {
        case LearnerKind::BudgetBalanced:
            return "gbb";
        case LearnerKind::RevMaxOnly:
            return "revmax";
        case LearnerKind::PrimalDualOnly:
            return "primal_dual";
    }
    return "unknown";
}

LearnerKind parse_learner(const std::string& name) {
    if (name == "gbb") return LearnerKind::BudgetBalanced;
    if (name == "revmax") return LearnerKind::RevMaxOnly;
    if (name == "primal_dual") return LearnerKind::PrimalDualOnly;
    throw ConfigError("unknown learner '" + name + "' (expected gbb, revmax or primal_dual)");
}

LearnerParams ParamOverrides::resolve(int horizon) const {
    LearnerParams p = LearnerParams::defaults(horizon);
    if (grid_k) {
        p.grid_k = *grid_k;
        if (!primal_eta && p.grid_k >= 2) {
            const double n = static_cast<double>(p.grid_k) * p.grid_k;
            p.primal_eta = std::sqrt(std::log(n) / (n * horizon)) / (lambda_cap ? *lambda_cap : p.lambda_cap);
            p.gamma = 0.5 * p.primal_eta;
        }
        if (!revmax_grid_k) p.revmax_grid_k = *grid_k;
    }
    if (alpha) p.alpha = *alpha;
    if (lambda_cap) p.lambda_cap = *lambda_cap;
    if (dual_eta) p.dual_eta = *dual_eta;
    if (primal_eta) {
        p.primal_eta = *primal_eta;
        p.gamma = 0.5 * p.primal_eta;
    }
    if (gamma) p.gamma = *gamma;
    if (revmax_grid_k) p.revmax_grid_k = *revmax_grid_k;
    if (revmax_grid_k || grid_k) {
        if (p.revmax_grid_k >= 2) {
            const double n = static_cast<double>(revmax_actions(p.revmax_grid_k, horizon).size());
            p.revmax_gamma = std::sqrt(std::log(n) / (n * horizon));
            p.revmax_eta = 2.0 * p.revmax_gamma;
        }
    }
    if (revmax_gamma) p.revmax_gamma = *revmax_gamma;
    if (revmax_eta) p.revmax_eta = *revmax_eta;
    p.validate();
    return p;
}

void ExperimentConfig::validate() const {
    if (horizon < 2) throw ConfigError("T must be >= 2");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (!schedule) throw ConfigError("a schedule is required");
    schedule->validate_horizon(horizon);
    if (benchmark_grid_k && *benchmark_grid_k < 2) throw ConfigError("benchmark_K must be >= 2");
    if (learners.empty()) throw ConfigError("at least one learner is required");
    if (dual_intervals < 1) throw ConfigError("dual_intervals must be >= 1");
    for (const auto& c : checks) {
        if (std::find(kKnownChecks.begin(), kKnownChecks.end(), c) == kKnownChecks.end()) {
            throw ConfigError("unknown check '" + c + "'");
        }
    }
    overrides.resolve(horizon);
}

// ----------------------------------------------------------------- config

ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir) {
    using detail::require;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> known{"T",        "seeds",          "schedule", "schedule_file",
                                                "params",   "benchmark_K",    "learners", "checks",
                                                "dual_intervals", "corruption", "workers"};
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }

    ExperimentConfig cfg;
    cfg.horizon = require<int>(j, "T");
    cfg.seeds = require<std::vector<std::uint64_t>>(j, "seeds");
    if (j.contains("schedule") == j.contains("schedule_file")) {
        throw ConfigError("exactly one of 'schedule' or 'schedule_file' is required");
    }
    if (j.contains("schedule")) {
        cfg.schedule = std::make_shared<const CorruptionSchedule>(detail::schedule_from_json(j.at("schedule")));
    } else {
        std::filesystem::path path = require<std::string>(j, "schedule_file");
        if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
        cfg.schedule = std::make_shared<const CorruptionSchedule>(load_schedule(path.string()));
    }
    if (j.contains("params")) {
        const auto& p = j.at("params");
        static const std::vector<std::string> param_keys{"K",        "alpha", "M",        "dual_eta",
                                                         "primal_eta", "gamma", "revmax_K", "revmax_gamma",
                                                         "revmax_eta"};
        for (const auto& [key, value] : p.items()) {
            if (std::find(param_keys.begin(), param_keys.end(), key) == param_keys.end()) {
                throw ConfigError("unknown parameter '" + key + "'");
            }
        }
        auto& o = cfg.overrides;
        if (p.contains("K")) o.grid_k = require<int>(p, "K");
        if (p.contains("alpha")) o.alpha = require<double>(p, "alpha");
        if (p.contains("M")) o.lambda_cap = require<double>(p, "M");
        if (p.contains("dual_eta")) o.dual_eta = require<double>(p, "dual_eta");
        if (p.contains("primal_eta")) o.primal_eta = require<double>(p, "primal_eta");
        if (p.contains("gamma")) o.gamma = require<double>(p, "gamma");
        if (p.contains("revmax_K")) o.revmax_grid_k = require<int>(p, "revmax_K");
        if (p.contains("revmax_gamma")) o.revmax_gamma = require<double>(p, "revmax_gamma");
        if (p.contains("revmax_eta")) o.revmax_eta = require<double>(p, "revmax_eta");
    }
    if (j.contains("benchmark_K")) cfg.benchmark_grid_k = require<int>(j, "benchmark_K");
    if (j.contains("learners")) {
        cfg.learners.clear();
        for (const auto& name : require<std::vector<std::string>>(j, "learners")) {
            cfg.learners.push_back(parse_learner(name));
        }
    }
    if (j.contains("checks")) cfg.checks = require<std::vector<std::string>>(j, "checks");
    if (j.contains("dual_intervals")) cfg.dual_intervals = require<int>(j, "dual_intervals");
    if (j.contains("workers")) cfg.workers = require<int>(j, "workers");
    if (j.contains("corruption")) {
        const auto& c = j.at("corruption");
        CorruptionTemplate tmpl{detail::distribution_from_json(require<nlohmann::json>(c, "distribution"))};
        const auto placement = c.contains("placement") ? require<std::string>(c, "placement") : "front";
        if (placement == "front") {
            tmpl.placement = CorruptionTemplate::Placement::Front;
        } else if (placement == "spread") {
            tmpl.placement = CorruptionTemplate::Placement::Spread;
        } else {
            throw ConfigError("corruption placement must be 'front' or 'spread'");
        }
        cfg.corruption = std::move(tmpl);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

// ------------------------------------------------------------- experiment

namespace {

// Max over intervals and lambda in {0, M} of sum_{t in I} (lambda_t - lambda) rev_t.
DualIntervalReport interval_regret(std::vector<double> lambdas, const std::vector<double>& revs, double eta,
                                   double cap, const std::vector<Interval>& intervals) {
    DualIntervalReport out;
    std::vector<double> weighted{0.0};
    std::vector<double> plain{0.0};
    for (std::size_t t = 0; t < revs.size(); ++t) {
        weighted.push_back(weighted.back() + lambdas[t] * revs[t]);
        plain.push_back(plain.back() + revs[t]);
    }
    bool first = true;
    for (const auto& iv : intervals) {
        if (iv.first < 1 || iv.last < iv.first || iv.last > static_cast<int>(revs.size())) {
            throw DomainError("interval outside the revenue sequence");
        }
        const double w = weighted[iv.last] - weighted[iv.first - 1];
        const double r = plain[iv.last] - plain[iv.first - 1];
        const double bound = cap * cap / (2.0 * eta) + eta * (iv.last - iv.first + 1) / 2.0;
        for (double lam : {0.0, cap}) {
            const double g = w - lam * r;
            if (first || g - bound > out.max_excess) out.max_excess = g - bound;
            if (first || g > out.max_regret) {
                out.max_regret = g;
                out.worst = iv;
                out.worst_lambda = lam;
                first = false;
            }
        }
    }
    out.lambdas = std::move(lambdas);
    return out;
}

}  // namespace

RegretReport run_single(const ExperimentConfig& cfg, LearnerKind kind, std::uint64_t seed) {
    const LearnerParams params = cfg.overrides.resolve(cfg.horizon);
    const ValuationSequence seq = sample_sequence(cfg.schedule, cfg.horizon, seed);

    RegretReport report;
    report.seed = seed;
    report.learner = kind;
    report.params = params;
    report.horizon = cfg.horizon;
    report.rounds.reserve(seq.size());

    const std::uint64_t learner_seed = derive_seed(seed, kLearnerStream);
    const GridSpec grid(params.grid_k);

    // Primal-dual rounds, kept for the post-hoc diagnostics.
    std::vector<double> pd_lambdas;
    std::vector<double> pd_revs;
    std::vector<double> best_lagrangian(grid.size(), 0.0);
    double learner_lagrangian = 0.0;

    auto record = [&](int t, Phase phase, const PriceQuote& quote, const MarketOutcome& o, double lambda) {
        const double g = gft(quote, o);
        const double r = rev(quote, o);
        report.total_gft += g;
        report.total_rev += r;
        report.rounds.push_back(RoundRecord{t, phase, quote.p(), quote.q(), trades(quote, o), g, r,
                                            report.total_rev, lambda, report.total_gft});
        report.min_budget = std::min(report.min_budget, report.total_rev);
        if (phase == Phase::RevMax) {
            ++report.revmax_rounds;
        } else {
            ++report.primal_dual_rounds;
            pd_lambdas.push_back(lambda);
            pd_revs.push_back(r);
            learner_lagrangian += g + lambda * r;
            for (std::size_t a = 0; a < grid.size(); ++a) {
                const PriceQuote& qa = grid.point(a);
                if (trades(qa, o)) best_lagrangian[a] += (o.b() - o.s()) + lambda * (qa.q() - qa.p());
            }
        }
    };

    switch (kind) {
        case LearnerKind::BudgetBalanced: {
            BudgetBalancedLearner learner(params, learner_seed);
            for (int t = 1; t <= cfg.horizon; ++t) {
                const MarketOutcome& o = seq[static_cast<std::size_t>(t - 1)];
                const double lambda = learner.lambda();
                const Phase phase = learner.next_phase();
                const PriceQuote quote = learner.propose();
                learner.observe(observe(quote, o));
                record(t, phase, quote, o, lambda);
            }
            break;
        }
        case LearnerKind::RevMaxOnly: {
            LearnerRng rng(learner_seed);
            RevMaxLearner learner(revmax_actions(params.revmax_grid_k, params.horizon), params.revmax_gamma,
                                  params.revmax_eta);
            for (int t = 1; t <= cfg.horizon; ++t) {
                const MarketOutcome& o = seq[static_cast<std::size_t>(t - 1)];
                const PriceQuote quote = learner.propose(rng);
                learner.observe(observe(quote, o));
                record(t, Phase::RevMax, quote, o, 0.0);
            }
            break;
        }
        case LearnerKind::PrimalDualOnly: {
            LearnerRng rng(learner_seed);
            PrimalDualLearner learner(PrimalState(ActionSet(grid), params.alpha, params.gamma, params.primal_eta),
                                      DualState(params.lambda_cap, params.dual_eta));
            for (int t = 1; t <= cfg.horizon; ++t) {
                const MarketOutcome& o = seq[static_cast<std::size_t>(t - 1)];
                const double lambda = learner.dual().lambda();
                const PriceQuote quote = learner.propose(rng);
                learner.observe(observe(quote, o));
                record(t, Phase::PrimalDual, quote, o, lambda);
            }
            break;
        }
    }

    const GridSpec bench_grid(cfg.benchmark_grid_k.value_or(params.grid_k));
    report.bench = compute_benchmarks(seq, bench_grid);
    const RegretPair regrets = regret_against(report, report.bench);
    report.regret_F = regrets.regret_F;
    report.regret_D = regrets.regret_D;
    report.corruption_C = cfg.schedule->tv_budget();
    if (cfg.schedule->base().is_box_mixture()) report.sigma = smoothness_of(cfg.schedule->base().box_mixture());

    if (!pd_revs.empty()) {
        const int n = static_cast<int>(pd_revs.size());
        const auto intervals = random_intervals(n, cfg.dual_intervals, derive_seed(seed, kIntervalStream));
        report.dual_interval_regret = interval_regret(pd_lambdas, pd_revs, params.dual_eta, params.lambda_cap, intervals).max_regret;
        report.dual_interval_bound = params.lambda_cap * params.lambda_cap / (2.0 * params.dual_eta) +
                                     params.dual_eta * static_cast<double>(n) / 2.0;
        report.primal_lagrangian_regret =
            *std::max_element(best_lagrangian.begin(), best_lagrangian.end()) - learner_lagrangian;
    }
    return report;
}

std::vector<RegretReport> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    struct Job {
        LearnerKind kind;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (LearnerKind k : cfg.learners) {
        for (std::uint64_t s : cfg.seeds) jobs.push_back({k, s});
    }
    std::vector<RegretReport> out(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                out[i] = run_single(cfg, jobs[i].kind, jobs[i].seed);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    unsigned n_workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers)
                                         : std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(jobs.size()));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

RegretPair regret_against(const RegretReport& report, const BenchmarkReport& bench) {
    if (report.horizon != bench.horizon || static_cast<int>(report.rounds.size()) != bench.horizon) {
        throw HorizonMismatch("report covers " + std::to_string(report.rounds.size()) +
                              " rounds but the benchmark covers " + std::to_string(bench.horizon));
    }
    return RegretPair{bench.opt_fixed - report.total_gft, bench.opt_dist_K - report.total_gft};
}

// ---------------------------------------------------------------- reports

std::string report_csv(const RegretReport& report) {
    std::string out = "t,phase,p,q,traded,gft,rev,budget,lambda\n";
    out.reserve(out.size() + report.rounds.size() * 96);
    for (const auto& r : report.rounds) {
        out += std::to_string(r.t);
        out += ',';
        out += phase_name(r.phase);
        for (double v : {r.p, r.q}) {
            out += ',';
            out += fmt_double(v);
        }
        out += r.traded ? ",1" : ",0";
        for (double v : {r.gft, r.rev, r.budget, r.lambda}) {
            out += ',';
            out += fmt_double(v);
        }
        out += '\n';
    }
    return out;
}

std::string report_summary_json(const RegretReport& report) {
    nlohmann::json j;
    const auto& p = report.params;
    j["seed"] = report.seed;
    j["learner"] = learner_name(report.learner);
    j["T"] = report.horizon;
    j["parameters"] = {{"K", p.grid_k},
                       {"alpha", p.alpha},
                       {"M", p.lambda_cap},
                       {"dual_eta", p.dual_eta},
                       {"primal_eta", p.primal_eta},
                       {"gamma", p.gamma},
                       {"revmax_K", p.revmax_grid_k},
                       {"revmax_gamma", p.revmax_gamma},
                       {"revmax_eta", p.revmax_eta}};
    j["totals"] = {{"gft", report.total_gft},
                   {"rev", report.total_rev},
                   {"min_budget", report.min_budget},
                   {"revmax_rounds", report.revmax_rounds},
                   {"primal_dual_rounds", report.primal_dual_rounds}};
    nlohmann::json support = nlohmann::json::array();
    for (const auto& e : report.bench.supporting_policy) support.push_back({{"action", e.action}, {"weight", e.weight}});
    j["benchmarks"] = {{"opt_fixed", report.bench.opt_fixed},
                       {"opt_fixed_price", report.bench.opt_fixed_price},
                       {"opt_dist_K", report.bench.opt_dist_K},
                       {"opt_dist_K_support", support},
                       {"best_fixed_grid_price", report.bench.best_fixed_grid_price},
                       {"benchmark_K", report.bench.grid_k},
                       {"note", "opt_dist_K is solved on the benchmark grid only; the continuum "
                                "distributional optimum can exceed it by a discretization gap of "
                                "order T/K + C"}};
    if (report.bench.opt_fixed_K) {
        j["benchmarks"]["opt_fixed_K"] = *report.bench.opt_fixed_K;
    } else {
        j["benchmarks"]["opt_fixed_K"] = nullptr;
    }
    j["regret"] = {{"regret_F", report.regret_F}, {"regret_D", report.regret_D}};
    j["environment"] = {{"C", report.corruption_C}};
    if (report.sigma) {
        j["environment"]["sigma"] = *report.sigma;
    } else {
        j["environment"]["sigma"] = nullptr;
    }
    j["diagnostics"] = {{"dual_interval_regret", report.dual_interval_regret},
                        {"dual_interval_bound", report.dual_interval_bound},
                        {"primal_lagrangian_regret", report.primal_lagrangian_regret}};
    return j.dump(2) + "\n";
}

std::vector<std::string> write_report(const RegretReport& report, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    const std::string stem =
        (std::filesystem::path(dir) / (std::string(learner_name(report.learner)) + "_seed" +
                                       std::to_string(report.seed)))
            .string();
    std::vector<std::pair<std::string, std::string>> files{{stem + ".csv", report_csv(report)},
                                                           {stem + "_summary.json", report_summary_json(report)}};
    std::vector<std::string> written;
    for (const auto& [path, body] : files) {
        std::ofstream out(path, std::ios::binary);
        out << body;
        if (!out) throw IoError("cannot write " + path);
        written.push_back(path);
    }
    return written;
}

// ----------------------------------------------------------------- checks

std::vector<double> expected_primal_loss(const Distribution& env, const GridSpec& grid, double lambda) {
    std::vector<double> loss(grid.size());
    for (std::size_t a = 0; a < grid.size(); ++a) {
        const ExpectedTrade e = expected_trade(env, grid.point(a));
        loss[a] = (1.0 - e.seller) + (1.0 - e.buyer) + (1.0 + lambda) * (1.0 - e.rev);
    }
    return loss;
}

UnbiasednessReport check_unbiasedness(const Distribution& env, const GridSpec& grid,
                                      const std::vector<double>& pi_hat, double alpha, double lambda,
                                      long long n_samples, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("unbiasedness needs alpha in (0,1)");
    if (n_samples < 2) throw DomainError("unbiasedness needs at least two samples");
    const ActionSet actions(grid);
    if (pi_hat.size() != actions.size()) throw DomainError("pi_hat size does not match the grid");
    for (double v : pi_hat) {
        if (!(v > 0.0)) throw DomainError("pi_hat must be strictly positive");
    }

    LearnerRng algo_rng(derive_seed(seed, 1));
    StreamRng env_rng(derive_seed(seed, 2));
    std::vector<double> sum(actions.size(), 0.0);
    std::vector<double> sumsq(actions.size(), 0.0);
    for (long long i = 0; i < n_samples; ++i) {
        const MarketOutcome o = sample(env, env_rng);
        const ExplorationDraw draw = PrimalState::sample_with(actions, pi_hat, alpha, algo_rng);
        const LossEstimate est =
            PrimalState::estimate_with(actions, pi_hat, alpha, 0.0, draw, observe(draw.posted, o), lambda);
        for (const auto& e : est.entries) {
            sum[e.action] += e.hat;
            sumsq[e.action] += e.hat * e.hat;
        }
    }

    UnbiasednessReport rep;
    rep.samples = n_samples;
    rep.expected = expected_primal_loss(env, grid, lambda);
    const double n = static_cast<double>(n_samples);
    for (std::size_t a = 0; a < actions.size(); ++a) {
        const double mean = sum[a] / n;
        const double var = std::max(0.0, (sumsq[a] - n * mean * mean) / (n - 1.0));
        const double se = std::sqrt(var / n);
        const double diff = mean - rep.expected[a];
        double z = 0.0;
        if (se > 0.0) {
            z = diff / se;
        } else if (diff != 0.0) {
            z = std::copysign(std::numeric_limits<double>::infinity(), diff);
        }
        rep.mean.push_back(mean);
        rep.stderr_.push_back(se);
        rep.z.push_back(z);
        rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
    }
    return rep;
}

DualIntervalReport check_dual_interval_regret(const std::vector<double>& revs, double eta, double cap,
                                              const std::vector<Interval>& intervals) {
    DualState dual(cap, eta);
    std::vector<double> lambdas;
    lambdas.reserve(revs.size());
    for (double r : revs) {
        lambdas.push_back(dual.lambda());
        dual.update(r);
    }
    return interval_regret(std::move(lambdas), revs, eta, cap, intervals);
}

std::vector<Interval> random_intervals(int horizon, int count, std::uint64_t seed) {
    if (horizon < 1) throw DomainError("intervals need a horizon >= 1");
    StreamRng rng(seed);
    std::vector<Interval> out;
    out.reserve(static_cast<std::size_t>(count));
    auto pick = [&] {
        return 1 + std::min(horizon - 1, static_cast<int>(uniform01(rng) * horizon));
    };
    for (int i = 0; i < count; ++i) {
        int a = pick();
        int b = pick();
        if (a > b) std::swap(a, b);
        out.push_back({a, b});
    }
    return out;
}

BiasDirectionReport check_bias_direction(std::shared_ptr<const CorruptionSchedule> schedule, int horizon,
                                         const LearnerParams& params, std::uint64_t seed) {
    params.validate();
    const ValuationSequence seq = sample_sequence(std::move(schedule), horizon, seed);
    const GridSpec grid(params.grid_k);
    LearnerRng rng(derive_seed(seed, kLearnerStream));
    PrimalDualLearner learner(PrimalState(ActionSet(grid), params.alpha, params.gamma, params.primal_eta),
                              DualState(params.lambda_cap, params.dual_eta));
    BiasDirectionReport rep;
    for (const auto& o : seq.outcomes()) {
        const PriceQuote quote = learner.propose(rng);
        learner.observe(observe(quote, o));
        ++rep.rounds;
        for (const auto& e : learner.last_estimate()->entries) {
            ++rep.entries;
            if (e.tilde > e.hat) ++rep.violations;
        }
    }
    return rep;
}

DecompositionReport check_decomposition(long long n, std::uint64_t seed) {
    StreamRng rng(seed);
    // A quarter of the coordinates come from a coarse lattice so ties such as
    // s == p or b == q are exercised.
    auto coord = [&] {
        const double u = uniform01(rng);
        if (uniform01(rng) < 0.25) return std::floor(u * 5.0) / 4.0 > 1.0 ? 1.0 : std::floor(u * 5.0) / 4.0;
        return u;
    };
    DecompositionReport rep;
    for (long long i = 0; i < n; ++i) {
        const PriceQuote quote(coord(), coord());
        const MarketOutcome o(coord(), coord());
        const double lhs = seller_term(quote, o) + buyer_term(quote, o) + rev(quote, o);
        rep.max_abs_error = std::max(rep.max_abs_error, std::abs(lhs - gft(quote, o)));
        ++rep.tuples;
    }
    return rep;
}

// ------------------------------------------------------------------ sweep

CorruptionSchedule corrupted_schedule(const Distribution& base, const CorruptionTemplate& tmpl, double c,
                                      int horizon) {
    if (!(c >= 0.0)) throw ScheduleError("corruption budget must be >= 0");
    if (c == 0.0) return CorruptionSchedule(base);
    const double tv = tv_distance(tmpl.distribution, base);
    if (!(tv > 0.0)) throw ScheduleError("corruption template equals the base law; C > 0 is unreachable");
    const double rounds_exact = c / tv;
    const auto n = static_cast<int>(std::llround(rounds_exact));
    if (std::abs(static_cast<double>(n) * tv - c) > 1e-9) {
        throw ScheduleError("C = " + fmt_double(c) + " is not a whole number of rounds at TV " + fmt_double(tv));
    }
    if (n > horizon) throw ScheduleError("C needs more corrupted rounds than the horizon");
    std::vector<Override> overrides;
    if (tmpl.placement == CorruptionTemplate::Placement::Front) {
        overrides.push_back(Override{1, n, tmpl.distribution});
    } else {
        for (int i = 0; i < n; ++i) {
            const int t = 1 + static_cast<int>((static_cast<double>(i) + 0.5) * horizon / n);
            overrides.push_back(Override{t, t, tmpl.distribution});
        }
    }
    return CorruptionSchedule(base, std::move(overrides));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("slope fit needs >= 2 paired points");
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("log-log fit needs positive values");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx == 0.0) throw DomainError("slope fit needs distinct x values");
    return sxy / sxx;
}

SweepTable run_sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values) {
    if (values.size() < 2) throw ConfigError("a sweep needs at least two axis values");
    if (!std::is_sorted(values.begin(), values.end())) throw ConfigError("sweep axis values must be ascending");
    if (axis == SweepAxis::Corruption && !cfg.corruption) {
        throw ConfigError("a corruption sweep needs a 'corruption' template in the config");
    }
    SweepTable table{axis, {}, std::nullopt};
    for (double v : values) {
        ExperimentConfig c = cfg;
        c.learners = {cfg.learners.front()};
        if (axis == SweepAxis::Horizon) {
            c.horizon = static_cast<int>(std::llround(v));
            if (c.schedule->last_override_round() > c.horizon) {
                throw ConfigError("schedule overrides exceed horizon " + std::to_string(c.horizon));
            }
        } else {
            c.schedule = std::make_shared<const CorruptionSchedule>(
                corrupted_schedule(cfg.schedule->base(), *cfg.corruption, v, cfg.horizon));
        }
        const auto reports = run_experiment(c);
        std::vector<double> rf;
        std::vector<double> rd;
        double opt = 0.0;
        double cc = 0.0;
        for (const auto& r : reports) {
            rf.push_back(r.regret_F);
            rd.push_back(r.regret_D);
            opt += r.bench.opt_dist_K;
            cc += r.corruption_C;
        }
        auto mean_se = [](const std::vector<double>& xs) {
            const double n = static_cast<double>(xs.size());
            const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
            double ss = 0.0;
            for (double x : xs) ss += (x - m) * (x - m);
            const double se = xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
            return std::pair{m, se};
        };
        const auto [mf, sf] = mean_se(rf);
        const auto [md, sd] = mean_se(rd);
        const double n = static_cast<double>(reports.size());
        table.rows.push_back(SweepRow{v, mf, md, sf, sd, opt / n, cc / n, static_cast<int>(reports.size())});
    }
    if (axis == SweepAxis::Horizon) {
        std::vector<double> xs;
        std::vector<double> ys;
        for (const auto& r : table.rows) {
            xs.push_back(r.axis_value);
            ys.push_back(r.mean_regret_D);
        }
        bool positive = std::all_of(ys.begin(), ys.end(), [](double y) { return y > 0.0; });
        if (positive) table.loglog_slope_D = loglog_slope(xs, ys);
    }
    return table;
}

std::string sweep_csv(const SweepTable& table) {
    std::string out = table.axis == SweepAxis::Horizon ? "T" : "C";
    out += ",mean_regret_F,mean_regret_D,se_regret_F,se_regret_D,mean_opt_dist_K,mean_C,runs\n";
    for (const auto& r : table.rows) {
        out += fmt_double(r.axis_value);
        for (double v : {r.mean_regret_F, r.mean_regret_D, r.se_regret_F, r.se_regret_D, r.mean_opt_dist_K,
                         r.mean_corruption_C}) {
            out += ',';
            out += fmt_double(v);
        }
        out += ',' + std::to_string(r.runs) + '\n';
    }
    if (table.loglog_slope_D) out += "# loglog_slope_regret_D," + fmt_double(*table.loglog_slope_D) + '\n';
    return out;
}

// ------------------------------------------------------------ check suite

std::vector<CheckResult> run_checks(const ExperimentConfig& cfg, long long samples) {
    cfg.validate();
    if (samples < 2) throw ConfigError("checks need at least two samples");
    const LearnerParams params = cfg.overrides.resolve(cfg.horizon);
    const std::uint64_t seed = cfg.seeds.front();
    const std::vector<std::string> names = cfg.checks.empty() ? kKnownChecks : cfg.checks;
    std::vector<CheckResult> out;
    for (const auto& name : names) {
        if (name == "decomposition") {
            const auto rep = check_decomposition(samples, seed);
            out.push_back({name, rep.max_abs_error <= 1e-12, rep.max_abs_error, 1e-12,
                           std::to_string(rep.tuples) + " tuples"});
        } else if (name == "unbiasedness") {
            const GridSpec grid(params.grid_k);
            const std::vector<double> pi(grid.size(), 1.0 / static_cast<double>(grid.size()));
            const double alpha = params.alpha > 0.0 && params.alpha < 1.0 ? params.alpha : 0.5;
            double worst = 0.0;
            std::string detail;
            for (double lambda : {0.0, 1.0, params.lambda_cap}) {
                const auto rep = check_unbiasedness(cfg.schedule->base(), grid, pi, alpha, lambda, samples,
                                                    derive_seed(seed, static_cast<std::uint64_t>(lambda * 1000.0)));
                worst = std::max(worst, rep.max_abs_z);
                detail += "lambda=" + fmt_double(lambda) + " max|z|=" + fmt_double(rep.max_abs_z) + "; ";
            }
            out.push_back({name, worst <= 4.0, worst, 4.0, detail});
        } else if (name == "bias_direction") {
            const auto rep = check_bias_direction(cfg.schedule, cfg.horizon, params, seed);
            out.push_back({name, rep.violations == 0, static_cast<double>(rep.violations), 0.0,
                           std::to_string(rep.entries) + " entries over " + std::to_string(rep.rounds) + " rounds"});
        } else if (name == "dual_interval") {
            // Revenue of uniformly random grid quotes on the config's sequence.
            const auto seq = sample_sequence(cfg.schedule, cfg.horizon, seed);
            const GridSpec grid(params.grid_k);
            LearnerRng rng(derive_seed(seed, kLearnerStream));
            std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
            std::vector<double> revs;
            revs.reserve(seq.size());
            for (const auto& o : seq.outcomes()) revs.push_back(rev(grid.point(pick(rng)), o));
            const auto intervals = random_intervals(cfg.horizon, cfg.dual_intervals, derive_seed(seed, kIntervalStream));
            const auto rep = check_dual_interval_regret(revs, params.dual_eta, params.lambda_cap, intervals);
            out.push_back({name, rep.max_excess <= 0.0, rep.max_excess, 0.0,
                           "max interval regret " + fmt_double(rep.max_regret)});
        }
    }
    return out;
}

}  // namespace gbbtrade
