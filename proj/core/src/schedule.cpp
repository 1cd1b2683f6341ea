#include "gbbtrade/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gbbtrade/errors.hpp"
#include "json_codec.hpp"

namespace gbbtrade {

CorruptionSchedule::CorruptionSchedule(Distribution base, std::vector<Override> overrides)
    : base_(std::move(base)), overrides_(std::move(overrides)) {
    std::sort(overrides_.begin(), overrides_.end(),
              [](const Override& a, const Override& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < overrides_.size(); ++i) {
        const Override& o = overrides_[i];
        if (o.first < 1 || o.last < o.first) {
            throw ScheduleError("override range [" + std::to_string(o.first) + ", " +
                                std::to_string(o.last) + "] is not a valid 1-based range");
        }
        if (i > 0 && o.first <= overrides_[i - 1].last) {
            throw ScheduleError("override ranges overlap at round " + std::to_string(o.first));
        }
        tv_budget_ += static_cast<double>(o.rounds()) * tv_distance(o.distribution, base_);
    }
}

const Distribution& CorruptionSchedule::at(int t) const {
    auto it = std::upper_bound(overrides_.begin(), overrides_.end(), t,
                               [](int round, const Override& o) { return round < o.first; });
    if (it == overrides_.begin()) return base_;
    --it;
    return t <= it->last ? it->distribution : base_;
}

int CorruptionSchedule::last_override_round() const {
    return overrides_.empty() ? 0 : overrides_.back().last;
}

void CorruptionSchedule::validate_horizon(int horizon) const {
    if (last_override_round() > horizon) {
        throw ScheduleError("override touches round " + std::to_string(last_override_round()) +
                            " beyond horizon " + std::to_string(horizon));
    }
}

std::vector<CorruptionSchedule::Segment> CorruptionSchedule::distinct_laws(int horizon) const {
    validate_horizon(horizon);
    std::vector<Segment> out{{&base_, horizon}};
    for (const Override& o : overrides_) {
        out[0].rounds -= o.rounds();
        auto it = std::find_if(out.begin(), out.end(), [&](const Segment& s) {
            return *s.distribution == o.distribution;
        });
        if (it == out.end()) {
            out.push_back({&o.distribution, o.rounds()});
        } else {
            it->rounds += o.rounds();
        }
    }
    return out;
}

ValuationSequence sample_sequence(std::shared_ptr<const CorruptionSchedule> schedule, int horizon,
                                  std::uint64_t seed) {
    if (horizon < 1) throw ScheduleError("horizon must be >= 1");
    schedule->validate_horizon(horizon);
    std::vector<MarketOutcome> outcomes;
    outcomes.reserve(static_cast<std::size_t>(horizon));
    for (int t = 1; t <= horizon; ++t) {
        StreamRng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        outcomes.push_back(sample(schedule->at(t), rng));
    }
    return ValuationSequence(std::move(outcomes), seed, std::move(schedule));
}

CorruptionSchedule parse_schedule(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("schedule is not valid JSON: ") + e.what());
    }
    return detail::schedule_from_json(j);
}

CorruptionSchedule load_schedule(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open schedule file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_schedule(ss.str());
}

std::string schedule_to_json(const CorruptionSchedule& schedule) {
    return detail::schedule_to_json(schedule).dump(2);
}

}  // namespace gbbtrade
