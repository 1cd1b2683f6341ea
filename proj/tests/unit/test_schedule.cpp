#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "gbbtrade/errors.hpp"
#include "gbbtrade/schedule.hpp"

using namespace gbbtrade;

namespace {

Distribution uniform() { return Distribution(BoxMixture::uniform()); }

std::shared_ptr<const CorruptionSchedule> share(CorruptionSchedule s) {
    return std::make_shared<const CorruptionSchedule>(std::move(s));
}

}  // namespace

TEST(Schedule, PointMassBaseRepeats) {
    const auto seq = sample_sequence(share(CorruptionSchedule(Distribution(PointMass::at(0.2, 0.8)))), 3, 1);
    ASSERT_EQ(seq.size(), 3u);
    for (const auto& o : seq.outcomes()) EXPECT_EQ(o, MarketOutcome(0.2, 0.8));
}

TEST(Schedule, OverrideReplacesExactlyItsRounds) {
    const CorruptionSchedule sched(uniform(), {Override{2, 2, Distribution(PointMass::at(0.0, 1.0))}});
    const auto seq = sample_sequence(share(sched), 5, 9);
    EXPECT_EQ(seq[1], MarketOutcome(0.0, 1.0));
    EXPECT_NE(seq[0], MarketOutcome(0.0, 1.0));
    EXPECT_DOUBLE_EQ(sched.tv_budget(), 1.0);
}

TEST(Schedule, OverridingOneRoundLeavesOthersUntouched) {
    auto clean = sample_sequence(share(CorruptionSchedule(uniform())), 50, 4);
    auto dirty = sample_sequence(
        share(CorruptionSchedule(uniform(), {Override{10, 12, Distribution(PointMass::at(0.5, 0.5))}})), 50, 4);
    for (int t = 1; t <= 50; ++t) {
        if (t >= 10 && t <= 12) continue;
        EXPECT_EQ(clean[t - 1], dirty[t - 1]) << "round " << t;
    }
}

TEST(Schedule, Reproducible) {
    const auto sched = share(CorruptionSchedule(uniform()));
    const auto a = sample_sequence(sched, 1000, 77);
    const auto b = sample_sequence(sched, 1000, 77);
    const auto c = sample_sequence(sched, 1000, 78);
    EXPECT_EQ(a.outcomes(), b.outcomes());
    EXPECT_NE(a.outcomes(), c.outcomes());
}

TEST(Schedule, RejectsBadRanges) {
    const Distribution pm(PointMass::at(0.1, 0.9));
    EXPECT_THROW(CorruptionSchedule(uniform(), {Override{0, 3, pm}}), ScheduleError);
    EXPECT_THROW(CorruptionSchedule(uniform(), {Override{5, 4, pm}}), ScheduleError);
    EXPECT_THROW(CorruptionSchedule(uniform(), {Override{1, 5, pm}, Override{5, 6, pm}}), ScheduleError);
    const auto sched = share(CorruptionSchedule(uniform(), {Override{8, 12, pm}}));
    EXPECT_THROW(sample_sequence(sched, 10, 1), ScheduleError);
    EXPECT_NO_THROW(sample_sequence(sched, 12, 1));
}

TEST(Schedule, BudgetIsZeroIffOverridesMatchBase) {
    const CorruptionSchedule same(uniform(), {Override{1, 10, uniform()}});
    EXPECT_EQ(same.tv_budget(), 0.0);
    const CorruptionSchedule partial(
        uniform(), {Override{1, 4, Distribution(BoxMixture::uniform(Box{0.0, 0.5, 0.0, 1.0}))}});
    EXPECT_NEAR(partial.tv_budget(), 4 * 0.5, 1e-12);
}

TEST(Schedule, DistinctLawsCountRounds) {
    const Distribution pm(PointMass::at(0.1, 0.9));
    const CorruptionSchedule sched(uniform(), {Override{1, 3, pm}, Override{7, 7, pm}, Override{9, 9, uniform()}});
    const auto laws = sched.distinct_laws(10);
    ASSERT_EQ(laws.size(), 2u);
    EXPECT_EQ(*laws[0].distribution, uniform());
    EXPECT_EQ(laws[0].rounds, 6);
    EXPECT_EQ(laws[1].rounds, 4);
}

TEST(ScheduleJson, RoundTrip) {
    const CorruptionSchedule sched(
        Distribution(BoxMixture({{0.25, Box{0.0, 0.5, 0.5, 1.0}}, {0.75, Box{0.0, 1.0, 0.0, 1.0}}})),
        {Override{3, 4, Distribution(PointMass({{0.5, MarketOutcome(0.2, 0.8)}, {0.5, MarketOutcome(0.9, 0.1)}}))}});
    const auto back = parse_schedule(schedule_to_json(sched));
    EXPECT_EQ(back.base(), sched.base());
    ASSERT_EQ(back.overrides().size(), 1u);
    EXPECT_EQ(back.overrides()[0].first, 3);
    EXPECT_EQ(back.overrides()[0].last, 4);
    EXPECT_EQ(back.overrides()[0].distribution, sched.overrides()[0].distribution);
    EXPECT_DOUBLE_EQ(back.tv_budget(), sched.tv_budget());
}

TEST(ScheduleJson, DeclaredBudgetMustMatch) {
    const char* good = R"({"base": {"type": "box_mixture", "components": [{"weight": 1, "box": [0, 1, 0, 1]}]},
        "overrides": [{"rounds": [1, 2], "distribution": {"type": "point_mass", "atoms": [{"weight": 1, "s": 0, "b": 1}]}}],
        "declared_C": 2})";
    EXPECT_DOUBLE_EQ(parse_schedule(good).tv_budget(), 2.0);
    std::string bad = good;
    bad.replace(bad.find("\"declared_C\": 2"), 15, "\"declared_C\": 3");
    EXPECT_THROW(parse_schedule(bad), ScheduleError);
}

TEST(ScheduleJson, MalformedInputs) {
    EXPECT_THROW(parse_schedule("not json"), ConfigError);
    EXPECT_THROW(parse_schedule(R"({"overrides": []})"), ConfigError);
    EXPECT_THROW(parse_schedule(R"({"base": {"type": "gaussian"}})"), ConfigError);
    EXPECT_THROW(parse_schedule(R"({"base": {"type": "point_mass", "atoms": [{"weight": 1, "s": 2, "b": 0}]}})"),
                 ConfigError);
}

TEST(ScheduleJson, LoadFromFile) {
    const auto path = std::filesystem::temp_directory_path() / "gbbtrade_schedule_test.json";
    {
        std::ofstream out(path);
        out << schedule_to_json(CorruptionSchedule(Distribution(PointMass::at(0.3, 0.6))));
    }
    EXPECT_EQ(load_schedule(path.string()).base(), Distribution(PointMass::at(0.3, 0.6)));
    std::filesystem::remove(path);
    EXPECT_THROW(load_schedule(path.string()), ConfigError);
}
