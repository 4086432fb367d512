#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pams/activation.hpp"
#include "pams/inner_solver.hpp"
#include "pams/params.hpp"
#include "pams/schemes.hpp"
#include "pams/topology.hpp"

namespace pams {

using json = nlohmann::json;

inline void to_json(json& j, const SystemParams& p) {
    j = json{{"pb_watts", p.pb_watts},
             {"noise_watts", p.noise_watts},
             {"bandwidth_hz", p.bandwidth_hz},
             {"frame_s", p.frame_s},
             {"gamma", p.gamma},
             {"kappa", p.kappa},
             {"intensity_cycles_per_bit", p.intensity_cycles_per_bit},
             {"carrier_hz", p.carrier_hz},
             {"refractive_index", p.refractive_index},
             {"height_m", p.height_m},
             {"region_m", {p.region_x_m, p.region_y_m}}};
}

/// Accepts either *_watts or *_dbm spellings for the two power fields
/// (exactly one of each pair); unlisted fields keep their defaults.
inline void from_json(const json& j, SystemParams& p) {
    p = SystemParams::defaults();
    auto power = [&](const char* watts_key, const char* dbm_key, double& out) {
        const bool has_watts = j.contains(watts_key);
        const bool has_dbm = j.contains(dbm_key);
        if (has_watts && has_dbm)
            throw ConfigError(std::string("params: give exactly one of ") + watts_key + " / " +
                              dbm_key);
        if (has_watts) out = j.at(watts_key).get<double>();
        if (has_dbm) out = dbm_to_watts(j.at(dbm_key).get<double>());
    };
    power("pb_watts", "pb_dbm", p.pb_watts);
    power("noise_watts", "noise_dbm", p.noise_watts);
    if (j.contains("bandwidth_hz")) p.bandwidth_hz = j.at("bandwidth_hz").get<double>();
    if (j.contains("frame_s")) p.frame_s = j.at("frame_s").get<double>();
    if (j.contains("gamma")) p.gamma = j.at("gamma").get<double>();
    if (j.contains("kappa")) p.kappa = j.at("kappa").get<double>();
    if (j.contains("intensity_cycles_per_bit"))
        p.intensity_cycles_per_bit = j.at("intensity_cycles_per_bit").get<double>();
    if (j.contains("carrier_hz")) p.carrier_hz = j.at("carrier_hz").get<double>();
    if (j.contains("refractive_index"))
        p.refractive_index = j.at("refractive_index").get<double>();
    if (j.contains("height_m")) p.height_m = j.at("height_m").get<double>();
    if (j.contains("region_m")) {
        const auto& r = j.at("region_m");
        if (!r.is_array() || r.size() != 2)
            throw ConfigError("params: region_m must be [D_x, D_y]");
        p.region_x_m = r[0].get<double>();
        p.region_y_m = r[1].get<double>();
    }
    p.validate();
}

inline void to_json(json& j, const DevicePos& d) { j = json{d.x_m, d.y_m}; }

inline void from_json(const json& j, DevicePos& d) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("topology: device must be [x, y]");
    d.x_m = j[0].get<double>();
    d.y_m = j[1].get<double>();
}

inline void to_json(json& j, const Topology& t) {
    j = json{{"pa_x_m", t.pa_x_m}, {"devices", t.devices}, {"height_m", t.height_m}};
}

inline void from_json(const json& j, Topology& t) {
    t.pa_x_m = j.at("pa_x_m").get<std::vector<double>>();
    t.devices = j.at("devices").get<std::vector<DevicePos>>();
    t.height_m = j.at("height_m").get<double>();
    t.validate();
}

inline void to_json(json& j, const ActivationPattern& p) {
    j = json::array();
    for (auto b : p.bits()) j.push_back(static_cast<int>(b));
}

inline void from_json(const json& j, ActivationPattern& p) {
    std::vector<std::uint8_t> bits;
    for (const auto& v : j) bits.push_back(v.get<int>() != 0 ? 1 : 0);
    p = ActivationPattern(std::move(bits));
}

inline void to_json(json& j, const InnerSolution& s) {
    j = json{{"t0_s", s.t0_s},
             {"tau_s", s.tau_s},
             {"power_w", s.power_w},
             {"freq_hz", s.freq_hz},
             {"offload_energy_j", s.offload_energy_j},
             {"active", s.active},
             {"z_star", s.z_star},
             {"lambda", s.lambda},
             {"alpha", s.alpha},
             {"offload_bits", s.offload_bits},
             {"local_bits", s.local_bits},
             {"objective_bits", s.objective_bits}};
}

inline void to_json(json& j, const ActivationSet& s) {
    j = json{{"downlink", s.downlink}, {"uplink", s.uplink}};
}

inline void to_json(json& j, const SchemeSolution& s) {
    j = json{{"scheme", scheme_config_name(s.config)},
             {"activations", s.activations},
             {"inner", s.inner}};
    if (s.noma_view) {
        j["noma_view"] = json{{"t1_s", s.noma_view->t1_s}, {"power_w", s.noma_view->power_w}};
    }
}

} // namespace pams
