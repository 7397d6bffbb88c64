#pragma once

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "aoi_tandem/scenario.hpp"

namespace aoit {

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                                const std::string& where, int source_index) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return it.key() == k; });
        if (!known)
            throw ValidationError(it.key(), source_index, "unknown key \"" + it.key() + "\" in " + where);
    }
}

inline double require_number(const nlohmann::json& obj, const char* key, const std::string& where,
                             int source_index) {
    if (!obj.contains(key))
        throw ValidationError(key, source_index, "missing key \"" + std::string(key) + "\" in " + where);
    if (!obj[key].is_number())
        throw ValidationError(key, source_index, "key \"" + std::string(key) + "\" in " + where + " must be a number");
    return obj[key].get<double>();
}

}  // namespace detail

/// Parses a scenario document. Unknown keys anywhere are rejected; gain_floor
/// defaults to 1e-6 and label to "" when absent. The result is validated.
inline Scenario scenario_from_json(const nlohmann::json& doc) {
    if (!doc.is_object())
        throw ValidationError("document", -1, "scenario document must be a JSON object");
    detail::reject_unknown_keys(doc, {"label", "channel", "sources"}, "scenario", -1);

    Scenario sc;
    if (doc.contains("label")) {
        if (!doc["label"].is_string())
            throw ValidationError("label", -1, "label must be a string");
        sc.label = doc["label"].get<std::string>();
    }

    if (!doc.contains("channel"))
        throw ValidationError("channel", -1, "missing key \"channel\"");
    const nlohmann::json& ch = doc["channel"];
    if (!ch.is_object())
        throw ValidationError("channel", -1, "channel must be an object");
    detail::reject_unknown_keys(ch,
                                {"tx_power_w", "distance_m", "pathloss_exp", "noise_density_w_per_hz",
                                 "bandwidth_hz", "gain_floor"},
                                "channel", -1);
    sc.channel.tx_power_w = detail::require_number(ch, "tx_power_w", "channel", -1);
    sc.channel.distance_m = detail::require_number(ch, "distance_m", "channel", -1);
    sc.channel.pathloss_exp = detail::require_number(ch, "pathloss_exp", "channel", -1);
    sc.channel.noise_density_w_per_hz = detail::require_number(ch, "noise_density_w_per_hz", "channel", -1);
    sc.channel.bandwidth_hz = detail::require_number(ch, "bandwidth_hz", "channel", -1);
    sc.channel.gain_floor = ch.contains("gain_floor") ? detail::require_number(ch, "gain_floor", "channel", -1) : 1e-6;

    if (!doc.contains("sources"))
        throw ValidationError("sources", -1, "missing key \"sources\"");
    const nlohmann::json& srcs = doc["sources"];
    if (!srcs.is_array())
        throw ValidationError("sources", -1, "sources must be an array");
    int idx = 0;
    for (const nlohmann::json& s : srcs) {
        if (!s.is_object())
            throw ValidationError("sources", idx, "each source must be an object");
        detail::reject_unknown_keys(s,
                                    {"priority", "lambda_pkt_per_s", "raw_size_bits", "processed_size_bits",
                                     "proc_rate_bits_per_s"},
                                    "source", idx);
        SourceSpec spec;
        const double prio = detail::require_number(s, "priority", "source", idx);
        if (!s["priority"].is_number_integer())
            throw ValidationError("priority", idx, "priority must be an integer");
        spec.priority = static_cast<int>(prio);
        spec.arrival_rate = detail::require_number(s, "lambda_pkt_per_s", "source", idx);
        spec.raw_size_bits = detail::require_number(s, "raw_size_bits", "source", idx);
        spec.processed_size_bits = detail::require_number(s, "processed_size_bits", "source", idx);
        spec.proc_rate_bits_per_s = detail::require_number(s, "proc_rate_bits_per_s", "source", idx);
        sc.sources.push_back(spec);
        ++idx;
    }

    validate_scenario(sc);
    return sc;
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
    nlohmann::json doc;
    doc["label"] = sc.label;
    doc["channel"] = {{"tx_power_w", sc.channel.tx_power_w},
                      {"distance_m", sc.channel.distance_m},
                      {"pathloss_exp", sc.channel.pathloss_exp},
                      {"noise_density_w_per_hz", sc.channel.noise_density_w_per_hz},
                      {"bandwidth_hz", sc.channel.bandwidth_hz},
                      {"gain_floor", sc.channel.gain_floor}};
    doc["sources"] = nlohmann::json::array();
    for (const SourceSpec& s : sc.sources)
        doc["sources"].push_back({{"priority", s.priority},
                                  {"lambda_pkt_per_s", s.arrival_rate},
                                  {"raw_size_bits", s.raw_size_bits},
                                  {"processed_size_bits", s.processed_size_bits},
                                  {"proc_rate_bits_per_s", s.proc_rate_bits_per_s}});
    return doc;
}

/// Loads, parses, and validates a scenario file.
inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open scenario file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("document", -1, "invalid JSON in " + path + ": " + e.what());
    }
    return scenario_from_json(doc);
}

}  // namespace aoit
