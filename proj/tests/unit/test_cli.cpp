#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string output;
};

Result run_cli(const std::string& args) {
    const std::string cmd = std::string(GBBTRADE_CLI) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return {-1, ""};
    std::string out;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr) out += buf.data();
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("gbbtrade_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        std::ofstream(dir_ / "minimal.json") << R"({
  "T": 100,
  "seeds": [1],
  "schedule": {"base": {"type": "box_mixture", "components": [{"weight": 1, "box": [0, 1, 0, 1]}]}}
})";
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string cfg() const { return "--config " + (dir_ / "minimal.json").string(); }
    std::string out() const { return "--out " + (dir_ / "out").string(); }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, RunWritesOneReportPair) {
    const auto r = run_cli("run " + cfg() + " " + out());
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_TRUE(fs::exists(dir_ / "out" / "gbb_seed1.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "out" / "gbb_seed1_summary.json"));
    EXPECT_EQ(std::distance(fs::directory_iterator(dir_ / "out"), fs::directory_iterator{}), 2);
}

TEST_F(Cli, MissingConfigNamesThePath) {
    const auto r = run_cli("run --config " + (dir_ / "absent.json").string() + " " + out());
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.output.find((dir_ / "absent.json").string()), std::string::npos) << r.output;
}

TEST_F(Cli, SeedOverrideReachesTheSummary) {
    const auto r = run_cli("run " + cfg() + " " + out() + " --seeds 7,9 --quiet");
    ASSERT_EQ(r.code, 0) << r.output;
    std::ifstream in(dir_ / "out" / "gbb_seed9_summary.json");
    ASSERT_TRUE(in.good());
    const auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j.at("seed").get<int>(), 9);
    EXPECT_EQ(j.at("T").get<int>(), 100);
    EXPECT_FALSE(fs::exists(dir_ / "out" / "gbb_seed1.csv"));
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run_cli("").code, 2);
    EXPECT_EQ(run_cli("run").code, 2);
    EXPECT_EQ(run_cli("launch " + cfg()).code, 2);
    EXPECT_EQ(run_cli("run " + cfg() + " --seeds x").code, 2);
    EXPECT_EQ(run_cli("sweep " + cfg() + " --axis Q --values 1,2").code, 2);
    EXPECT_EQ(run_cli("--help").code, 0);
}

TEST_F(Cli, CheckAndBench) {
    auto r = run_cli("check " + cfg() + " " + out() + " --samples 20000");
    ASSERT_EQ(r.code, 0) << r.output;
    std::ifstream in(dir_ / "out" / "checks.json");
    const auto j = nlohmann::json::parse(in);
    ASSERT_EQ(j.size(), 4u);
    for (const auto& c : j) EXPECT_TRUE(c.at("passed").get<bool>()) << c.dump();

    r = run_cli("bench " + cfg() + " " + out());
    ASSERT_EQ(r.code, 0) << r.output;
    std::ifstream bin(dir_ / "out" / "bench_seed1.json");
    const auto b = nlohmann::json::parse(bin);
    EXPECT_GE(b.at("opt_fixed").get<double>(), 0.0);
}

TEST_F(Cli, SweepOverHorizon) {
    const auto r = run_cli("sweep " + cfg() + " " + out() + " --axis T --values 64,128");
    ASSERT_EQ(r.code, 0) << r.output;
    std::ifstream in(dir_ / "out" / "sweep_T.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header.rfind("T,mean_regret_F", 0), 0u);
    int rows = 0;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line[0] != '#') ++rows;
    }
    EXPECT_EQ(rows, 2);
}

TEST_F(Cli, ShippedConfigsLoad) {
    for (const char* name : {"minimal.json", "uniform_sweep.json", "corrupted.json"}) {
        const auto r = run_cli("bench --quiet --config " + (fs::path(GBBTRADE_CONFIG_DIR) / name).string() + " " + out());
        EXPECT_EQ(r.code, 0) << name << ": " << r.output;
    }
}
