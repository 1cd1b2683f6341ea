#pragma once

// Private JSON mapping shared by the schedule, config and report writers.

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "gbbtrade/errors.hpp"
#include "gbbtrade/schedule.hpp"

namespace gbbtrade::detail {

template <class T>
T require(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw ConfigError(std::string("missing required key '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

inline nlohmann::json distribution_to_json(const Distribution& d) {
    nlohmann::json j;
    if (d.is_point_mass()) {
        j["type"] = "point_mass";
        j["atoms"] = nlohmann::json::array();
        for (const auto& a : d.point_mass().atoms()) {
            j["atoms"].push_back({{"weight", a.weight}, {"s", a.outcome.s()}, {"b", a.outcome.b()}});
        }
    } else {
        j["type"] = "box_mixture";
        j["components"] = nlohmann::json::array();
        for (const auto& c : d.box_mixture().components()) {
            j["components"].push_back(
                {{"weight", c.weight}, {"box", {c.box.s0, c.box.s1, c.box.b0, c.box.b1}}});
        }
    }
    return j;
}

inline Distribution distribution_from_json(const nlohmann::json& j) {
    const auto type = require<std::string>(j, "type");
    try {
        if (type == "point_mass") {
            std::vector<Atom> atoms;
            for (const auto& a : j.at("atoms")) {
                atoms.push_back(Atom{require<double>(a, "weight"),
                                     MarketOutcome(require<double>(a, "s"), require<double>(a, "b"))});
            }
            return Distribution(PointMass(std::move(atoms)));
        }
        if (type == "box_mixture") {
            std::vector<BoxComponent> comps;
            for (const auto& c : j.at("components")) {
                const auto box = require<std::vector<double>>(c, "box");
                if (box.size() != 4) throw ConfigError("box must be [s0, s1, b0, b1]");
                comps.push_back(BoxComponent{require<double>(c, "weight"),
                                             Box{box[0], box[1], box[2], box[3]}});
            }
            return Distribution(BoxMixture(std::move(comps)));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed distribution: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid distribution: ") + e.what());
    }
    throw ConfigError("unknown distribution type '" + type + "'");
}

inline nlohmann::json schedule_to_json(const CorruptionSchedule& s) {
    nlohmann::json j;
    j["base"] = distribution_to_json(s.base());
    j["overrides"] = nlohmann::json::array();
    for (const auto& o : s.overrides()) {
        j["overrides"].push_back(
            {{"rounds", {o.first, o.last}}, {"distribution", distribution_to_json(o.distribution)}});
    }
    j["declared_C"] = s.tv_budget();
    return j;
}

inline CorruptionSchedule schedule_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("schedule must be a JSON object");
    Distribution base = distribution_from_json(require<nlohmann::json>(j, "base"));
    std::vector<Override> overrides;
    if (j.contains("overrides")) {
        for (const auto& o : j.at("overrides")) {
            const auto rounds = require<std::vector<int>>(o, "rounds");
            if (rounds.size() != 2) throw ConfigError("override rounds must be [first, last]");
            overrides.push_back(Override{rounds[0], rounds[1],
                                         distribution_from_json(require<nlohmann::json>(o, "distribution"))});
        }
    }
    CorruptionSchedule schedule(std::move(base), std::move(overrides));
    if (j.contains("declared_C")) {
        const double declared = require<double>(j, "declared_C");
        if (std::abs(declared - schedule.tv_budget()) > 1e-9) {
            throw ScheduleError("declared C = " + std::to_string(declared) +
                                " does not match computed C = " + std::to_string(schedule.tv_budget()));
        }
    }
    return schedule;
}

}  // namespace gbbtrade::detail
