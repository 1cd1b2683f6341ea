#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gbbtrade/distribution.hpp"

namespace gbbtrade {

// Rounds [first, last] (1-based, inclusive) drawn from `distribution`
// instead of the base law.
struct Override {
    int first;
    int last;
    Distribution distribution;

    int rounds() const { return last - first + 1; }
};

// Base law plus per-round replacements; the corruption budget C is the
// summed total variation of the replacements from the base.
class CorruptionSchedule {
public:
    explicit CorruptionSchedule(Distribution base, std::vector<Override> overrides = {});

    const Distribution& base() const { return base_; }
    const std::vector<Override>& overrides() const { return overrides_; }

    double tv_budget() const { return tv_budget_; }

    // Law of round t (1-based).
    const Distribution& at(int t) const;

    // Largest round index touched by an override (0 when none).
    int last_override_round() const;

    // Throws ScheduleError if an override falls outside [1, horizon].
    void validate_horizon(int horizon) const;

    struct Segment {
        const Distribution* distribution;
        int rounds;
    };
    // Distinct laws with their round counts over [1, horizon]; the base law
    // comes first. Overrides equal to the base merge into it.
    std::vector<Segment> distinct_laws(int horizon) const;

private:
    Distribution base_;
    std::vector<Override> overrides_;
    double tv_budget_ = 0.0;
};

// Outcomes drawn before any learner runs; immutable afterwards.
class ValuationSequence {
public:
    ValuationSequence(std::vector<MarketOutcome> outcomes, std::uint64_t seed,
                      std::shared_ptr<const CorruptionSchedule> schedule)
        : outcomes_(std::move(outcomes)), seed_(seed), schedule_(std::move(schedule)) {}

    const std::vector<MarketOutcome>& outcomes() const { return outcomes_; }
    std::size_t size() const { return outcomes_.size(); }
    const MarketOutcome& operator[](std::size_t i) const { return outcomes_[i]; }
    std::uint64_t seed() const { return seed_; }
    const CorruptionSchedule& schedule() const { return *schedule_; }
    const std::shared_ptr<const CorruptionSchedule>& schedule_ptr() const { return schedule_; }

private:
    std::vector<MarketOutcome> outcomes_;
    std::uint64_t seed_;
    std::shared_ptr<const CorruptionSchedule> schedule_;
};

// Round t uses its own stream derived from (seed, t).
ValuationSequence sample_sequence(std::shared_ptr<const CorruptionSchedule> schedule, int horizon,
                                  std::uint64_t seed);

// Schedule file (JSON):
//   {
//     "base": <distribution>,
//     "overrides": [ {"rounds": [first, last], "distribution": <distribution>}, ... ],
//     "declared_C": <number, optional>
//   }
// <distribution> is either
//   {"type": "box_mixture", "components": [{"weight": w, "box": [s0, s1, b0, b1]}, ...]}
// or
//   {"type": "point_mass", "atoms": [{"weight": w, "s": s, "b": b}, ...]}
// A declared C that differs from the computed one by more than 1e-9 is rejected.
CorruptionSchedule parse_schedule(const std::string& json_text);
CorruptionSchedule load_schedule(const std::string& path);
std::string schedule_to_json(const CorruptionSchedule& schedule);

}  // namespace gbbtrade
