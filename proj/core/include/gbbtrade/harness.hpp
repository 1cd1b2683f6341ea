#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gbbtrade/benchmarks.hpp"
#include "gbbtrade/learners.hpp"
#include "gbbtrade/schedule.hpp"

namespace gbbtrade {

enum class LearnerKind {
    BudgetBalanced,  // the full switcher
    RevMaxOnly,      // the revenue bandit alone
    PrimalDualOnly,  // primal-dual without the budget guard (not GBB)
};

const char* learner_name(LearnerKind k);
LearnerKind parse_learner(const std::string& name);

// Optional per-field overrides of LearnerParams::defaults(T).
struct ParamOverrides {
    std::optional<int> grid_k;
    std::optional<double> alpha;
    std::optional<double> lambda_cap;
    std::optional<double> dual_eta;
    std::optional<double> primal_eta;
    std::optional<double> gamma;
    std::optional<int> revmax_grid_k;
    std::optional<double> revmax_gamma;
    std::optional<double> revmax_eta;

    // Defaults for `horizon` with the overrides applied. When only the
    // primal step is overridden, gamma follows as eta^P / 2.
    LearnerParams resolve(int horizon) const;
};

// Corruption template used by C sweeps: `distribution` replaces the base on
// enough rounds to reach the requested C.
struct CorruptionTemplate {
    enum class Placement { Front, Spread };
    Distribution distribution;
    Placement placement = Placement::Front;
};

struct ExperimentConfig {
    int horizon = 2;
    std::vector<std::uint64_t> seeds;
    std::shared_ptr<const CorruptionSchedule> schedule;
    ParamOverrides overrides;
    std::optional<int> benchmark_grid_k;  // defaults to the learner's K
    std::vector<LearnerKind> learners{LearnerKind::BudgetBalanced};
    std::vector<std::string> checks;
    int dual_intervals = 100;
    std::optional<CorruptionTemplate> corruption;  // only used by C sweeps
    int workers = 0;                               // 0 = hardware concurrency

    void validate() const;
};

// Parses the JSON config. `base_dir` resolves a relative "schedule_file".
ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

struct RoundRecord {
    int t;
    Phase phase;
    double p;
    double q;
    bool traded;
    double gft;
    double rev;
    double budget;  // cumulative revenue after the round
    double lambda;  // multiplier in force during the round
    double cum_gft;
};

struct RegretReport {
    std::uint64_t seed = 0;
    LearnerKind learner = LearnerKind::BudgetBalanced;
    LearnerParams params;
    int horizon = 0;
    std::vector<RoundRecord> rounds;

    double total_gft = 0.0;
    double total_rev = 0.0;
    double min_budget = 0.0;
    int revmax_rounds = 0;
    int primal_dual_rounds = 0;

    BenchmarkReport bench;
    double regret_F = 0.0;
    double regret_D = 0.0;
    double corruption_C = 0.0;
    std::optional<double> sigma;

    // Diagnostics computed after the run with full knowledge of the outcomes.
    double dual_interval_regret = 0.0;   // max over sampled intervals, primal-dual rounds
    double dual_interval_bound = 0.0;    // M^2/(2 eta) + eta n/2 on those rounds
    double primal_lagrangian_regret = 0.0;  // best grid action minus learner, primal-dual rounds
};

// One report per (learner, seed), learners outer, seeds inner; each report
// is reproducible from (cfg, seed) alone.
std::vector<RegretReport> run_experiment(const ExperimentConfig& cfg);

RegretReport run_single(const ExperimentConfig& cfg, LearnerKind learner, std::uint64_t seed);

struct RegretPair {
    double regret_F;
    double regret_D;
};

// regret_F = Opt^F - sum GFT, regret_D = Opt^D_K - sum GFT.
RegretPair regret_against(const RegretReport& report, const BenchmarkReport& bench);

// Files: <dir>/<learner>_seed<seed>.csv and <dir>/<learner>_seed<seed>_summary.json
std::string report_csv(const RegretReport& report);
std::string report_summary_json(const RegretReport& report);
std::vector<std::string> write_report(const RegretReport& report, const std::string& dir);

// ------------------------------------------------------------------ checks

struct UnbiasednessReport {
    std::vector<double> mean;      // empirical mean of the gamma = 0 estimator
    std::vector<double> expected;  // closed-form loss
    std::vector<double> stderr_;
    std::vector<double> z;
    double max_abs_z = 0.0;
    long long samples = 0;
};

// Monte Carlo mean of the unbiased estimator under a frozen pi_hat and
// multiplier versus (1 - E L) + (1 - E R) + (1 + lambda)(1 - E Rev).
UnbiasednessReport check_unbiasedness(const Distribution& env, const GridSpec& grid,
                                      const std::vector<double>& pi_hat, double alpha, double lambda,
                                      long long n_samples, std::uint64_t seed);

// Closed-form loss of every grid action.
std::vector<double> expected_primal_loss(const Distribution& env, const GridSpec& grid, double lambda);

struct Interval {
    int first;  // 1-based, inclusive
    int last;
};

struct DualIntervalReport {
    double max_regret = 0.0;
    Interval worst{1, 1};
    double worst_lambda = 0.0;
    // Largest regret minus M^2/(2 eta) + eta len/2 over the same intervals;
    // <= 0 means the per-interval bound held everywhere.
    double max_excess = 0.0;
    std::vector<double> lambdas;  // lambda_t used at each round
};

// Runs projected OGD from lambda_1 = 0 on the revenue sequence and returns
// the largest sum_{t in I} (lambda_t - lambda) rev_t over the intervals and
// lambda in {0, M} (endpoints suffice: the objective is linear in lambda).
DualIntervalReport check_dual_interval_regret(const std::vector<double>& revs, double eta, double cap,
                                              const std::vector<Interval>& intervals);

std::vector<Interval> random_intervals(int horizon, int count, std::uint64_t seed);

struct BiasDirectionReport {
    long long rounds = 0;
    long long entries = 0;
    long long violations = 0;
};

// Runs the primal-dual learner on the schedule and counts realized-branch
// entries with tilde > hat.
BiasDirectionReport check_bias_direction(std::shared_ptr<const CorruptionSchedule> schedule, int horizon,
                                         const LearnerParams& params, std::uint64_t seed);

struct DecompositionReport {
    long long tuples = 0;
    double max_abs_error = 0.0;
};

// seller_term + buyer_term + rev versus gft on random (p, q, s, b).
DecompositionReport check_decomposition(long long n, std::uint64_t seed);

// ------------------------------------------------------------------- sweep

enum class SweepAxis { Horizon, Corruption };

struct SweepRow {
    double axis_value;
    double mean_regret_F;
    double mean_regret_D;
    double se_regret_F;
    double se_regret_D;
    double mean_opt_dist_K;
    double mean_corruption_C;
    int runs;
};

struct SweepTable {
    SweepAxis axis;
    std::vector<SweepRow> rows;
    std::optional<double> loglog_slope_D;  // fitted for the horizon axis
};

// Horizon sweep: cfg.horizon is replaced by each value. Corruption sweep:
// cfg.corruption must be set; the schedule's base is kept and the template
// is applied on enough rounds to reach each C.
SweepTable run_sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values);

// Schedule with C reached by replacing whole rounds with `tmpl`.
CorruptionSchedule corrupted_schedule(const Distribution& base, const CorruptionTemplate& tmpl, double c,
                                      int horizon);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

std::string sweep_csv(const SweepTable& table);

// ------------------------------------------------------------ check suite

struct CheckResult {
    std::string name;
    bool passed;
    double statistic;  // compared against threshold
    double threshold;
    std::string detail;
};

// Runs the checks named in cfg.checks (all four when empty) on the config's
// base law and parameters; `samples` scales the Monte Carlo work.
std::vector<CheckResult> run_checks(const ExperimentConfig& cfg, long long samples);

}  // namespace gbbtrade
