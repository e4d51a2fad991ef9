#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hosim/core.hpp"
#include "hosim/mobility.hpp"

namespace hosim {

enum class Tier { Macro, Small };

inline const char* tier_name(Tier t) { return t == Tier::Macro ? "macro" : "small"; }

// Full experiment description. Geometry, radio and timing parameters first,
// then the tuning knobs of the triggering mechanisms and the learning
// pipeline. Every field maps to one key of the flat config-file format.
struct ScenarioConfig {
    // Geometry and population (desk-scale defaults; configs/table1.conf
    // carries the full-scale parameter set).
    double area_width_m = 300.0;
    double area_height_m = 300.0;
    int macro_count = 2;
    int small_count = 4;
    double bs_spacing_m = 350.0;

    // Radio per tier.
    double macro_freq_ghz = 2.0;
    double small_freq_ghz = 28.0;
    double macro_tx_dbm = 43.0;
    double small_tx_dbm = 40.0;
    double macro_bw_mhz = 20.0;
    double small_bw_mhz = 100.0;

    // UEs and timing.
    int ue_count = 10;
    double ue_speed_kmh = 30.0;
    long sim_duration_steps = 2000;
    double step_seconds = 1.0;
    double ho_prep_ms = 10.0;
    double ho_exec_ms = 10.0;
    double noise_figure_db = 7.0;
    double pingpong_window_s = 1.0;
    std::uint64_t rng_seed = 1;

    // Mobility.
    int heading_epoch_steps = 20;

    // Channel. fading_avg_draws is the number of independent Rayleigh
    // power fades averaged into one per-step measurement (a one-second
    // step spans many coherence intervals; 1 = raw single-draw fading).
    bool rayleigh_enabled = true;
    int fading_avg_draws = 16;

    // A3 baseline (time-to-trigger expressed in whole steps).
    double a3_hom_db = 2.0;
    int a3_ttt_steps = 1;

    // HO failure classification and radio-link-failure thresholds.
    double gamma_out_db = -8.0;
    double gamma_fail_db = -6.0;
    double rlf_sinr_db = -10.0;

    // Expert FLHA baseline.
    double expert_threshold = 0.5;

    // Latency model.
    double packet_bytes = 1500.0;
    double edge_latency_ms = 1.0;

    // History collection.
    long min_history_samples = 1000;

    // Subtractive clustering.
    double clu_alpha = 16.0;
    double clu_beta = 12.0;
    double clu_epsilon = 0.005;
    double clu_delta = 2.8284271247461903;  // sqrt(8)
    double clu_width_coeff = 0.5;           // influence radius sqrt(4/alpha)
    double clu_merge_tol = 0.05;

    // Q-learning.
    double q_learning_rate = 0.1;
    double q_discount = 0.9;
    double q_epsilon_start = 0.5;
    double q_epsilon_end = 0.05;
    int q_epochs = 200;
    int q_episode_steps = 200;

    double ue_speed_mps() const { return ue_speed_kmh / 3.6; }
    Rect area() const { return Rect{area_width_m, area_height_m}; }
    double tier_freq_ghz(Tier t) const { return t == Tier::Macro ? macro_freq_ghz : small_freq_ghz; }
    double tier_tx_dbm(Tier t) const { return t == Tier::Macro ? macro_tx_dbm : small_tx_dbm; }
    double tier_bw_mhz(Tier t) const { return t == Tier::Macro ? macro_bw_mhz : small_bw_mhz; }
};

struct BaseStation {
    int id = 0;
    Tier tier = Tier::Macro;
    Vec2 position;
    double freq_ghz = 0.0;
    double tx_dbm = 0.0;
    double bw_mhz = 0.0;
};

struct HoInProgress {
    int target_bs = 0;
    long completion_step = 0;
};

struct UserEquipment {
    int id = 0;
    Vec2 position;
    MobilityState mobility;
    int serving_bs = -1;
    std::optional<HoInProgress> ho_in_progress;
};

// One validation finding. `field` names the offending config key so tests
// and error messages can pinpoint it.
struct Violation {
    std::string field;
    std::string message;
};

inline std::vector<Violation> validate_config(const ScenarioConfig& c) {
    std::vector<Violation> v;
    auto positive = [&](double value, const char* field) {
        if (!(value > 0.0)) v.push_back({field, std::string(field) + " must be strictly positive"});
    };
    positive(c.area_width_m, "area_width_m");
    positive(c.area_height_m, "area_height_m");
    positive(c.bs_spacing_m, "bs_spacing_m");
    positive(c.macro_freq_ghz, "macro_freq_ghz");
    positive(c.small_freq_ghz, "small_freq_ghz");
    positive(c.macro_bw_mhz, "macro_bw_mhz");
    positive(c.small_bw_mhz, "small_bw_mhz");
    positive(c.ue_speed_kmh, "ue_speed_kmh");
    positive(c.step_seconds, "step_seconds");
    positive(c.pingpong_window_s, "pingpong_window_s");
    positive(c.packet_bytes, "packet_bytes");

    if (c.macro_count < 0) v.push_back({"macro_count", "macro_count must be non-negative"});
    if (c.small_count < 0) v.push_back({"small_count", "small_count must be non-negative"});
    if (c.macro_count + c.small_count < 2)
        v.push_back({"macro_count", "macro_count + small_count must be at least 2 for a handover to be possible"});
    if (c.ue_count <= 0) v.push_back({"ue_count", "ue_count must be strictly positive"});
    if (c.sim_duration_steps <= 0)
        v.push_back({"sim_duration_steps", "sim_duration_steps must be strictly positive"});
    if (c.ho_prep_ms < 0.0) v.push_back({"ho_prep_ms", "ho_prep_ms must be non-negative"});
    if (c.ho_exec_ms < 0.0) v.push_back({"ho_exec_ms", "ho_exec_ms must be non-negative"});
    if (!(c.ho_prep_ms + c.ho_exec_ms < c.step_seconds * 1000.0))
        v.push_back({"ho_prep_ms", "ho_prep_ms + ho_exec_ms must be below step_seconds*1000 so a handover completes within one step"});
    if (c.heading_epoch_steps < 1)
        v.push_back({"heading_epoch_steps", "heading_epoch_steps must be at least 1"});
    if (c.fading_avg_draws < 1)
        v.push_back({"fading_avg_draws", "fading_avg_draws must be at least 1"});
    if (c.a3_ttt_steps < 1) v.push_back({"a3_ttt_steps", "a3_ttt_steps must be at least 1"});
    if (c.a3_hom_db < 0.0) v.push_back({"a3_hom_db", "a3_hom_db must be non-negative"});
    if (!(c.expert_threshold >= 0.0 && c.expert_threshold <= 1.0))
        v.push_back({"expert_threshold", "expert_threshold must lie in [0,1]"});
    if (c.edge_latency_ms < 0.0) v.push_back({"edge_latency_ms", "edge_latency_ms must be non-negative"});
    if (c.min_history_samples < 1)
        v.push_back({"min_history_samples", "min_history_samples must be at least 1"});

    if (!(c.clu_alpha > 0.0)) v.push_back({"clu_alpha", "clu_alpha must be strictly positive"});
    if (!(c.clu_beta > 0.0)) v.push_back({"clu_beta", "clu_beta must be strictly positive"});
    if (!(c.clu_epsilon > 0.0 && c.clu_epsilon < 1.0))
        v.push_back({"clu_epsilon", "clu_epsilon must lie in (0,1)"});
    if (!(c.clu_delta > 0.0)) v.push_back({"clu_delta", "clu_delta must be strictly positive"});
    if (!(c.clu_width_coeff > 0.0)) v.push_back({"clu_width_coeff", "clu_width_coeff must be strictly positive"});
    if (!(c.clu_merge_tol >= 0.0 && c.clu_merge_tol < 1.0))
        v.push_back({"clu_merge_tol", "clu_merge_tol must lie in [0,1)"});

    if (!(c.q_learning_rate > 0.0 && c.q_learning_rate < 1.0))
        v.push_back({"q_learning_rate", "q_learning_rate must lie in (0,1)"});
    if (!(c.q_discount > 0.0 && c.q_discount < 1.0))
        v.push_back({"q_discount", "q_discount must lie in (0,1)"});
    if (!(c.q_epsilon_start >= 0.0 && c.q_epsilon_start <= 1.0))
        v.push_back({"q_epsilon_start", "q_epsilon_start must lie in [0,1]"});
    if (!(c.q_epsilon_end >= 0.0 && c.q_epsilon_end <= 1.0))
        v.push_back({"q_epsilon_end", "q_epsilon_end must lie in [0,1]"});
    if (c.q_epsilon_start < c.q_epsilon_end)
        v.push_back({"q_epsilon_start", "q_epsilon_start must be >= q_epsilon_end"});
    if (c.q_epochs < 1) v.push_back({"q_epochs", "q_epochs must be at least 1"});
    if (c.q_episode_steps < 1) v.push_back({"q_episode_steps", "q_episode_steps must be at least 1"});

    return v;
}

// Throws ConfigError on any violation, except for fields listed in
// `ignored` (sim::run tolerates a zero-duration config, for example).
inline void throw_if_invalid(const ScenarioConfig& c,
                             const std::vector<std::string>& ignored = {}) {
    std::string msg;
    for (const auto& viol : validate_config(c)) {
        bool skip = false;
        for (const auto& ig : ignored)
            if (viol.field == ig) skip = true;
        if (skip) continue;
        if (!msg.empty()) msg += "; ";
        msg += viol.message;
    }
    if (!msg.empty()) throw ConfigError("invalid config: " + msg);
}

namespace detail {

using FieldSetter = std::function<void(ScenarioConfig&, const std::string&)>;

inline double parse_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double d = 0.0;
    try {
        d = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as a number");
    }
    if (pos != value.size())
        throw ConfigError("config key '" + key + "': trailing characters in '" + value + "'");
    return d;
}

inline long parse_long(const std::string& key, const std::string& value) {
    double d = parse_double(key, value);
    long l = static_cast<long>(d);
    if (static_cast<double>(l) != d)
        throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
    return l;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}

inline const std::map<std::string, FieldSetter>& config_fields() {
    static const std::map<std::string, FieldSetter> fields = [] {
        std::map<std::string, FieldSetter> m;
        auto dbl = [&m](const char* key, double ScenarioConfig::* member) {
            m[key] = [key, member](ScenarioConfig& c, const std::string& v) { c.*member = parse_double(key, v); };
        };
        auto itg = [&m](const char* key, int ScenarioConfig::* member) {
            m[key] = [key, member](ScenarioConfig& c, const std::string& v) { c.*member = static_cast<int>(parse_long(key, v)); };
        };
        auto lng = [&m](const char* key, long ScenarioConfig::* member) {
            m[key] = [key, member](ScenarioConfig& c, const std::string& v) { c.*member = parse_long(key, v); };
        };
        dbl("area_width_m", &ScenarioConfig::area_width_m);
        dbl("area_height_m", &ScenarioConfig::area_height_m);
        itg("macro_count", &ScenarioConfig::macro_count);
        itg("small_count", &ScenarioConfig::small_count);
        dbl("bs_spacing_m", &ScenarioConfig::bs_spacing_m);
        dbl("macro_freq_ghz", &ScenarioConfig::macro_freq_ghz);
        dbl("small_freq_ghz", &ScenarioConfig::small_freq_ghz);
        dbl("macro_tx_dbm", &ScenarioConfig::macro_tx_dbm);
        dbl("small_tx_dbm", &ScenarioConfig::small_tx_dbm);
        dbl("macro_bw_mhz", &ScenarioConfig::macro_bw_mhz);
        dbl("small_bw_mhz", &ScenarioConfig::small_bw_mhz);
        itg("ue_count", &ScenarioConfig::ue_count);
        dbl("ue_speed_kmh", &ScenarioConfig::ue_speed_kmh);
        lng("sim_duration_steps", &ScenarioConfig::sim_duration_steps);
        dbl("step_seconds", &ScenarioConfig::step_seconds);
        dbl("ho_prep_ms", &ScenarioConfig::ho_prep_ms);
        dbl("ho_exec_ms", &ScenarioConfig::ho_exec_ms);
        dbl("noise_figure_db", &ScenarioConfig::noise_figure_db);
        dbl("pingpong_window_s", &ScenarioConfig::pingpong_window_s);
        m["rng_seed"] = [](ScenarioConfig& c, const std::string& v) {
            c.rng_seed = static_cast<std::uint64_t>(parse_long("rng_seed", v));
        };
        itg("heading_epoch_steps", &ScenarioConfig::heading_epoch_steps);
        m["rayleigh_enabled"] = [](ScenarioConfig& c, const std::string& v) {
            c.rayleigh_enabled = parse_bool("rayleigh_enabled", v);
        };
        itg("fading_avg_draws", &ScenarioConfig::fading_avg_draws);
        dbl("a3_hom_db", &ScenarioConfig::a3_hom_db);
        itg("a3_ttt_steps", &ScenarioConfig::a3_ttt_steps);
        dbl("gamma_out_db", &ScenarioConfig::gamma_out_db);
        dbl("gamma_fail_db", &ScenarioConfig::gamma_fail_db);
        dbl("rlf_sinr_db", &ScenarioConfig::rlf_sinr_db);
        dbl("expert_threshold", &ScenarioConfig::expert_threshold);
        dbl("packet_bytes", &ScenarioConfig::packet_bytes);
        dbl("edge_latency_ms", &ScenarioConfig::edge_latency_ms);
        lng("min_history_samples", &ScenarioConfig::min_history_samples);
        dbl("clu_alpha", &ScenarioConfig::clu_alpha);
        dbl("clu_beta", &ScenarioConfig::clu_beta);
        dbl("clu_epsilon", &ScenarioConfig::clu_epsilon);
        dbl("clu_delta", &ScenarioConfig::clu_delta);
        dbl("clu_width_coeff", &ScenarioConfig::clu_width_coeff);
        dbl("clu_merge_tol", &ScenarioConfig::clu_merge_tol);
        dbl("q_learning_rate", &ScenarioConfig::q_learning_rate);
        dbl("q_discount", &ScenarioConfig::q_discount);
        dbl("q_epsilon_start", &ScenarioConfig::q_epsilon_start);
        dbl("q_epsilon_end", &ScenarioConfig::q_epsilon_end);
        itg("q_epochs", &ScenarioConfig::q_epochs);
        itg("q_episode_steps", &ScenarioConfig::q_episode_steps);
        return m;
    }();
    return fields;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

// Flat key = value format, '#' starts a comment, blank lines ignored.
// Unknown keys are an error so typos surface instead of silently applying
// a default. Missing keys keep their defaults.
inline ScenarioConfig parse_config(std::istream& in) {
    ScenarioConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        auto& fields = detail::config_fields();
        auto it = fields.find(key);
        if (it == fields.end())
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        it->second(cfg, value);
    }
    return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

}  // namespace hosim
