#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gbbtrade/errors.hpp"
#include "gbbtrade/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct Options {
    std::string config;
    std::string out;
    std::string seeds;
    bool quiet = false;
    long long samples = 100000;
    std::string axis = "T";
    std::string values;
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        const auto last = item.find_last_not_of(" \t");
        if (first == std::string::npos) throw gbbtrade::ConfigError("empty entry in --seeds");
        item = item.substr(first, last - first + 1);
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || item.front() == '-') throw gbbtrade::ConfigError("bad seed '" + item + "'");
        seeds.push_back(v);
    }
    if (seeds.empty()) throw gbbtrade::ConfigError("--seeds is empty");
    return seeds;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0) throw gbbtrade::ConfigError("bad axis value '" + item + "'");
        values.push_back(v);
    }
    return values;
}

std::string output_dir(const Options& opt) {
    if (!opt.out.empty()) return opt.out;
    if (const char* env = std::getenv("GBBTRADE_OUT_DIR"); env != nullptr && *env != '\0') return env;
    return "gbbtrade_out";
}

gbbtrade::ExperimentConfig load(const Options& opt) {
    if (!std::filesystem::exists(opt.config)) {
        throw gbbtrade::IoError("config file not found: " + opt.config);
    }
    auto cfg = gbbtrade::load_config(opt.config);
    if (!opt.seeds.empty()) cfg.seeds = parse_seed_list(opt.seeds);
    return cfg;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << body;
    if (!out) throw gbbtrade::IoError("cannot write " + path.string());
}

int cmd_run(const Options& opt) {
    const auto cfg = load(opt);
    const std::string dir = output_dir(opt);
    for (const auto& report : gbbtrade::run_experiment(cfg)) {
        const auto files = gbbtrade::write_report(report, dir);
        if (!opt.quiet) {
            std::printf("%s seed=%llu gft=%.4f rev=%.4f min_budget=%.4f regret_F=%.4f regret_D=%.4f -> %s\n",
                        gbbtrade::learner_name(report.learner), static_cast<unsigned long long>(report.seed),
                        report.total_gft, report.total_rev, report.min_budget, report.regret_F, report.regret_D,
                        files.front().c_str());
        }
    }
    if (cfg.checks.empty()) return kExitOk;
    bool ok = true;
    for (const auto& c : gbbtrade::run_checks(cfg, opt.samples)) {
        ok = ok && c.passed;
        if (!opt.quiet || !c.passed) {
            std::printf("check %s: %s (%.6g vs %.6g) %s\n", c.name.c_str(), c.passed ? "pass" : "FAIL", c.statistic,
                        c.threshold, c.detail.c_str());
        }
    }
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_bench(const Options& opt) {
    const auto cfg = load(opt);
    const auto params = cfg.overrides.resolve(cfg.horizon);
    const gbbtrade::GridSpec grid(cfg.benchmark_grid_k.value_or(params.grid_k));
    const std::string dir = output_dir(opt);
    for (std::uint64_t seed : cfg.seeds) {
        const auto seq = gbbtrade::sample_sequence(cfg.schedule, cfg.horizon, seed);
        const auto b = gbbtrade::compute_benchmarks(seq, grid);
        nlohmann::json j;
        j["seed"] = seed;
        j["T"] = b.horizon;
        j["benchmark_K"] = b.grid_k;
        j["opt_fixed"] = b.opt_fixed;
        j["opt_fixed_price"] = b.opt_fixed_price;
        j["opt_dist_K"] = b.opt_dist_K;
        j["opt_fixed_K"] = b.opt_fixed_K ? nlohmann::json(*b.opt_fixed_K) : nlohmann::json(nullptr);
        j["best_fixed_grid_price"] = b.best_fixed_grid_price;
        j["C"] = cfg.schedule->tv_budget();
        nlohmann::json support = nlohmann::json::array();
        for (const auto& e : b.supporting_policy) {
            const auto& q = grid.point(e.action);
            support.push_back({{"p", q.p()}, {"q", q.q()}, {"weight", e.weight}});
        }
        j["opt_dist_K_support"] = support;
        const auto path = std::filesystem::path(dir) / ("bench_seed" + std::to_string(seed) + ".json");
        write_file(path, j.dump(2) + "\n");
        if (!opt.quiet) {
            std::printf("seed=%llu opt_fixed=%.4f (p=%.4f) opt_dist_K=%.4f -> %s\n",
                        static_cast<unsigned long long>(seed), b.opt_fixed, b.opt_fixed_price, b.opt_dist_K,
                        path.string().c_str());
        }
    }
    return kExitOk;
}

int cmd_check(const Options& opt) {
    const auto cfg = load(opt);
    const auto results = gbbtrade::run_checks(cfg, opt.samples);
    nlohmann::json j = nlohmann::json::array();
    bool ok = true;
    for (const auto& c : results) {
        ok = ok && c.passed;
        j.push_back({{"check", c.name},
                     {"passed", c.passed},
                     {"statistic", c.statistic},
                     {"threshold", c.threshold},
                     {"detail", c.detail}});
        if (!opt.quiet || !c.passed) {
            std::printf("%-15s %s  stat=%.6g threshold=%.6g  %s\n", c.name.c_str(), c.passed ? "pass" : "FAIL",
                        c.statistic, c.threshold, c.detail.c_str());
        }
    }
    write_file(std::filesystem::path(output_dir(opt)) / "checks.json", j.dump(2) + "\n");
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_sweep(const Options& opt) {
    const auto cfg = load(opt);
    gbbtrade::SweepAxis axis;
    if (opt.axis == "T") {
        axis = gbbtrade::SweepAxis::Horizon;
    } else if (opt.axis == "C") {
        axis = gbbtrade::SweepAxis::Corruption;
    } else {
        throw gbbtrade::ConfigError("--axis must be T or C");
    }
    const auto table = gbbtrade::run_sweep(cfg, axis, parse_values(opt.values));
    const std::string csv = gbbtrade::sweep_csv(table);
    write_file(std::filesystem::path(output_dir(opt)) / ("sweep_" + opt.axis + ".csv"), csv);
    if (!opt.quiet) {
        std::printf("%10s %14s %14s %10s %10s\n", opt.axis.c_str(), "regret_F", "regret_D", "se_F", "se_D");
        for (const auto& r : table.rows) {
            std::printf("%10.6g %14.4f %14.4f %10.4f %10.4f\n", r.axis_value, r.mean_regret_F, r.mean_regret_D,
                        r.se_regret_F, r.se_regret_D);
        }
        if (table.loglog_slope_D) std::printf("log-log slope of regret_D: %.4f\n", *table.loglog_slope_D);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Budget-balanced bilateral trade experiments"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&opt](CLI::App* sub) {
        sub->add_option("--config", opt.config, "Experiment config (JSON)")->required();
        sub->add_option("--out", opt.out, "Output directory (default: $GBBTRADE_OUT_DIR or ./gbbtrade_out)");
        sub->add_option("--seeds", opt.seeds, "Comma-separated seeds overriding the config");
        sub->add_flag("--quiet", opt.quiet, "Only print failures");
    };
    auto* run = app.add_subcommand("run", "Run an experiment and write per-seed reports");
    add_common(run);
    run->add_option("--samples", opt.samples, "Monte Carlo samples for configured checks");
    auto* bench = app.add_subcommand("bench", "Compute benchmark values for the config's schedule and grid");
    add_common(bench);
    auto* check = app.add_subcommand("check", "Run estimator, dual and decomposition checks");
    add_common(check);
    check->add_option("--samples", opt.samples, "Monte Carlo samples per check");
    auto* sweep = app.add_subcommand("sweep", "Vary T or C and print a scaling table");
    add_common(sweep);
    sweep->add_option("--axis", opt.axis, "T or C")->check(CLI::IsMember({"T", "C"}));
    sweep->add_option("--values", opt.values, "Ascending comma-separated axis values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) return cmd_run(opt);
        if (*bench) return cmd_bench(opt);
        if (*check) return cmd_check(opt);
        return cmd_sweep(opt);
    } catch (const gbbtrade::Error& e) {
        std::fprintf(stderr, "gbbtrade: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "gbbtrade: unexpected error: %s\n", e.what());
        return kExitUsage;
    }
}
