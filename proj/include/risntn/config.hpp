// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "controller.hpp"
#include "errors.hpp"
#include "geometry.hpp"

namespace risntn {

struct Region {
    double x_min = 40.0, x_max = 80.0;
    double y_min = 12.0, y_max = 18.0;

    UserPos2D centre() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
};

struct TrialCounts {
    std::size_t summary = 5000;
    std::size_t tradeoff_realizations = 300;
    std::size_t tradeoff_grid_x = 5;
    std::size_t tradeoff_grid_y = 3;
    std::size_t switching_trajectories = 260;
    std::size_t switching_blocks = 200;
    double switching_step_m = 0.01;
    std::vector<double> switching_noise_grid{0.25, 1.0, 4.0, 16.0, 36.0, 100.0};
    std::size_t family_trials = 2000;
    std::vector<double> family_xi_grid{0.01, 0.02, 0.04, 0.06, 0.08, 0.1, 0.15, 0.2, 0.25,
                                       0.3,  0.4,  0.5,  0.6,  0.7,  0.8, 0.9,  1.0};
    std::size_t decision_x_points = 21;
    std::size_t decision_xi_points = 25;
    std::size_t decision_realizations = 100;
    std::size_t psucc_trials = 2000;
    std::vector<std::size_t> psucc_n_grid{64, 128, 256, 512, 1024};
    std::vector<unsigned> psucc_b_grid{1, 2, 3, 4, 5, 6};
    std::size_t spatial_nx = 21;
    std::size_t spatial_ny = 7;
    std::size_t spatial_realizations = 100;
    std::size_t peb_x_points = 21;
    std::size_t peb_x_realizations = 300;
};

struct ExperimentConfig {
    std::uint64_t seed = 20240601;

    // physics
    double carrier_freq_hz = 2.2e9;
    double bandwidth_hz = 20e6;
    double noise_figure_db = 7.0;
    double eirp_density_dbw_per_mhz = 31.0;
    double speed_of_light = 3e8;
    double atm_su_db = 1.0;
    double atm_sr_db = 0.8;
    double excess_su_db = 0.0;
    double excess_sr_db = 0.0;
    double kappa_d = 1e-2;
    double kappa_r = 1e-2;

    // geometry
    Vec3 satellite{350000.0, 0.0, 600000.0};
    Vec3 ris{100.0, 0.0, 20.0};
    double user_height = 1.5;
    Region region;

    // RIS and codebook
    std::size_t n_elements = 1024;
    unsigned phase_bits = 3;
    double element_spacing = 0.5;
    std::size_t codebook_size = 9;
    std::vector<UserPos2D> anchors; // empty: evenly spaced default
    std::optional<std::string> codebook_file;

    // blockage
    double xi_min = 0.01;
    double xi_max = 1.0;

    // shadowing
    double sigma_ru_db = 6.0;
    double corr_distance_m = 20.0;
    double meas_noise_var_db2 = 4.0;
    std::optional<double> filter_q_x;
    std::optional<double> filter_r_x;

    // controller
    ModePolicy policy;
    double nu = 1.2;
    std::optional<double> gamma_ref_db;
    std::optional<double> peb_ref_m;

    // success thresholds
    double snr_threshold_db = 6.0;
    double peb_threshold_m = 18.0;

    TrialCounts trials;

    friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);
};

// -----------------------------------------------------------------------------
// JSON mapping
// -----------------------------------------------------------------------------

namespace detail {

using nlohmann::json;

inline json vec3_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }

template <class T>
json opt_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

class Reader {
public:
    Reader(const json& root, const std::string& text) : root_(root), text_(text) {}

    template <class T>
    void get(const char* section, const char* key, T& out) const {
        const json* node = find(section, key);
        if (!node) return;
        try {
            out = node->get<T>();
        } catch (const json::exception&) {
            fail(section, key, "has the wrong type");
        }
    }

    template <class T>
    void get_opt(const char* section, const char* key, std::optional<T>& out) const {
        const json* node = find(section, key);
        if (!node) return;
        if (node->is_null()) {
            out.reset();
            return;
        }
        T v{};
        try {
            v = node->get<T>();
        } catch (const json::exception&) {
            fail(section, key, "has the wrong type");
        }
        out = v;
    }

    void get_vec3(const char* section, const char* key, Vec3& out) const {
        std::vector<double> v;
        get(section, key, v);
        if (find(section, key)) {
            if (v.size() != 3) fail(section, key, "must be an array of 3 numbers");
            out = {v[0], v[1], v[2]};
        }
    }

    void get_points(const char* section, const char* key, std::vector<UserPos2D>& out) const {
        std::vector<std::vector<double>> v;
        get(section, key, v);
        if (!find(section, key)) return;
        out.clear();
        for (const auto& p : v) {
            if (p.size() != 2) fail(section, key, "must be an array of [x, y] pairs");
            out.push_back({p[0], p[1]});
        }
    }

    [[noreturn]] void fail(const char* section, const char* key, const std::string& why) const {
        const std::string field = section ? std::string(section) + "." + key : std::string(key);
        throw ParseError("config field '" + field + "' " + why, line_of(key), field);
    }

private:
    const json* find(const char* section, const char* key) const {
        const json* base = &root_;
        if (section) {
            auto it = root_.find(section);
            if (it == root_.end()) return nullptr;
            base = &*it;
        }
        auto it = base->find(key);
        return it == base->end() ? nullptr : &*it;
    }

    std::size_t line_of(const char* key) const {
        const auto pos = text_.find("\"" + std::string(key) + "\"");
        if (pos == std::string::npos) return 0;
        return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
    }

    const json& root_;
    const std::string& text_;
};

} // namespace detail

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    using nlohmann::json;
    using detail::opt_json;
    using detail::vec3_json;
    json anchors = json::array();
    for (const auto& a : c.anchors) anchors.push_back(json::array({a.x, a.y}));
    const TrialCounts& t = c.trials;
    return json{
        {"seed", c.seed},
        {"physics",
         {{"carrier_freq_hz", c.carrier_freq_hz},
          {"bandwidth_hz", c.bandwidth_hz},
          {"noise_figure_db", c.noise_figure_db},
          {"eirp_density_dbw_per_mhz", c.eirp_density_dbw_per_mhz},
          {"speed_of_light", c.speed_of_light},
          {"atm_su_db", c.atm_su_db},
          {"atm_sr_db", c.atm_sr_db},
          {"excess_su_db", c.excess_su_db},
          {"excess_sr_db", c.excess_sr_db},
          {"kappa_d", c.kappa_d},
          {"kappa_r", c.kappa_r}}},
        {"geometry",
         {{"satellite", vec3_json(c.satellite)},
          {"ris", vec3_json(c.ris)},
          {"user_height", c.user_height},
          {"x_min", c.region.x_min},
          {"x_max", c.region.x_max},
          {"y_min", c.region.y_min},
          {"y_max", c.region.y_max}}},
        {"ris",
         {{"n_elements", c.n_elements},
          {"phase_bits", c.phase_bits},
          {"element_spacing", c.element_spacing},
          {"codebook_size", c.codebook_size},
          {"anchors", anchors},
          {"codebook_file", opt_json(c.codebook_file)}}},
        {"blockage", {{"xi_min", c.xi_min}, {"xi_max", c.xi_max}}},
        {"shadowing",
         {{"sigma_ru_db", c.sigma_ru_db},
          {"corr_distance_m", c.corr_distance_m},
          {"meas_noise_var_db2", c.meas_noise_var_db2},
          {"filter_q_x", opt_json(c.filter_q_x)},
          {"filter_r_x", opt_json(c.filter_r_x)}}},
        {"policy",
         {{"xi_l", c.policy.xi_l},
          {"xi_h", c.policy.xi_h},
          {"alpha_c", c.policy.alpha_c},
          {"alpha_b", c.policy.alpha_b},
          {"alpha_p", c.policy.alpha_p},
          {"nu", c.nu},
          {"gamma_ref_db", opt_json(c.gamma_ref_db)},
          {"peb_ref_m", opt_json(c.peb_ref_m)}}},
        {"thresholds", {{"snr_db", c.snr_threshold_db}, {"peb_m", c.peb_threshold_m}}},
        {"trials",
         {{"summary", t.summary},
          {"tradeoff_realizations", t.tradeoff_realizations},
          {"tradeoff_grid_x", t.tradeoff_grid_x},
          {"tradeoff_grid_y", t.tradeoff_grid_y},
          {"switching_trajectories", t.switching_trajectories},
          {"switching_blocks", t.switching_blocks},
          {"switching_step_m", t.switching_step_m},
          {"switching_noise_grid", t.switching_noise_grid},
          {"family_trials", t.family_trials},
          {"family_xi_grid", t.family_xi_grid},
          {"decision_x_points", t.decision_x_points},
          {"decision_xi_points", t.decision_xi_points},
          {"decision_realizations", t.decision_realizations},
          {"psucc_trials", t.psucc_trials},
          {"psucc_n_grid", t.psucc_n_grid},
          {"psucc_b_grid", t.psucc_b_grid},
          {"spatial_nx", t.spatial_nx},
          {"spatial_ny", t.spatial_ny},
          {"spatial_realizations", t.spatial_realizations},
          {"peb_x_points", t.peb_x_points},
          {"peb_x_realizations", t.peb_x_realizations}}},
    };
}

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return config_to_json(a) == config_to_json(b);
}

/// Every violated invariant, in a stable order.
inline std::vector<std::string> config_violations(const ExperimentConfig& c) {
    std::vector<std::string> v;
    auto need = [&](bool ok, const char* msg) {
        if (!ok) v.emplace_back(msg);
    };
    need(c.carrier_freq_hz > 0.0, "physics.carrier_freq_hz must be > 0");
    need(c.bandwidth_hz > 0.0, "physics.bandwidth_hz must be > 0");
    need(c.speed_of_light > 0.0, "physics.speed_of_light must be > 0");
    need(c.kappa_d > 0.0, "physics.kappa_d must be > 0");
    need(c.kappa_r > 0.0, "physics.kappa_r must be > 0");
    need(c.satellite.z > c.ris.z && c.ris.z > c.user_height && c.user_height >= 0.0,
         "geometry: satellite z > ris z > user_height >= 0 required");
    need(c.region.x_min < c.region.x_max, "geometry: x_min < x_max required");
    need(c.region.y_min < c.region.y_max, "geometry: y_min < y_max required");
    need(c.n_elements >= 1, "ris.n_elements must be >= 1");
    need(c.phase_bits >= 1 && c.phase_bits <= 16, "ris.phase_bits must be in 1..16");
    need(c.element_spacing > 0.0, "ris.element_spacing must be > 0");
    need(c.codebook_size >= 3 && c.codebook_size % 3 == 0, "ris.codebook_size must be a positive multiple of 3");
    need(c.anchors.empty() || c.anchors.size() * 3 == c.codebook_size, "ris.anchors must hold codebook_size/3 points");
    need(c.xi_min > 0.0 && c.xi_min <= c.xi_max && c.xi_max <= 1.0, "blockage: 0 < xi_min <= xi_max <= 1 required");
    need(c.sigma_ru_db >= 0.0, "shadowing.sigma_ru_db must be >= 0");
    need(c.corr_distance_m > 0.0, "shadowing.corr_distance_m must be > 0");
    need(c.meas_noise_var_db2 > 0.0, "shadowing.meas_noise_var_db2 must be > 0");
    need(!c.filter_q_x || *c.filter_q_x >= 0.0, "shadowing.filter_q_x must be >= 0");
    need(!c.filter_r_x || *c.filter_r_x > 0.0, "shadowing.filter_r_x must be > 0");
    need(0.0 < c.policy.xi_l && c.policy.xi_l < c.policy.xi_h && c.policy.xi_h <= 1.0,
         "policy: 0 < xi_l < xi_h <= 1 required");
    need(1.0 >= c.policy.alpha_c && c.policy.alpha_c > c.policy.alpha_b && c.policy.alpha_b > c.policy.alpha_p &&
             c.policy.alpha_p >= 0.0,
         "policy: 1 >= alpha_c > alpha_b > alpha_p >= 0 required");
    need(c.nu >= 0.0, "policy.nu must be >= 0");
    need(!c.peb_ref_m || *c.peb_ref_m > 0.0, "policy.peb_ref_m must be > 0");
    need(c.peb_threshold_m > 0.0, "thresholds.peb_m must be > 0");
    const TrialCounts& t = c.trials;
    need(t.summary >= 1 && t.tradeoff_realizations >= 1 && t.tradeoff_grid_x >= 1 && t.tradeoff_grid_y >= 1 &&
             t.switching_trajectories >= 1 && t.family_trials >= 1 && t.decision_x_points >= 1 &&
             t.decision_xi_points >= 1 && t.decision_realizations >= 1 && t.psucc_trials >= 1 && t.spatial_nx >= 1 &&
             t.spatial_ny >= 1 && t.spatial_realizations >= 1 && t.peb_x_points >= 1 && t.peb_x_realizations >= 1,
         "trials: all counts must be >= 1");
    need(t.switching_blocks >= 2, "trials.switching_blocks must be >= 2");
    need(t.switching_step_m > 0.0, "trials.switching_step_m must be > 0");
    need(!t.switching_noise_grid.empty(), "trials.switching_noise_grid must be nonempty");
    for (double r : t.switching_noise_grid)
        if (!(r > 0.0)) {
            v.emplace_back("trials.switching_noise_grid entries must be > 0");
            break;
        }
    need(!t.family_xi_grid.empty(), "trials.family_xi_grid must be nonempty");
    for (double x : t.family_xi_grid)
        if (!(x > 0.0 && x <= 1.0)) {
            v.emplace_back("trials.family_xi_grid entries must lie in (0,1]");
            break;
        }
    need(!t.psucc_n_grid.empty() && !t.psucc_b_grid.empty(), "trials: psucc grids must be nonempty");
    for (auto n : t.psucc_n_grid)
        if (n < 1) {
            v.emplace_back("trials.psucc_n_grid entries must be >= 1");
            break;
        }
    for (auto b : t.psucc_b_grid)
        if (b < 1 || b > 16) {
            v.emplace_back("trials.psucc_b_grid entries must be in 1..16");
            break;
        }
    return v;
}

inline void validate_config(const ExperimentConfig& c) {
    auto v = config_violations(c);
    if (!v.empty()) throw ValidationError(std::move(v));
}

/// Rejects keys that do not exist in the reference layout, recursing into objects.
inline void check_known_keys(const nlohmann::json& given, const nlohmann::json& ref, const std::string& path,
                             const std::string& text) {
    for (auto it = given.begin(); it != given.end(); ++it) {
        const std::string field = path.empty() ? it.key() : path + "." + it.key();
        if (!ref.contains(it.key())) {
            const auto pos = text.find("\"" + it.key() + "\"");
            const std::size_t line =
                pos == std::string::npos
                    ? 0
                    : 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
            throw ParseError("unknown config key '" + field + "'", line, field);
        }
        const auto& r = ref.at(it.key());
        if (r.is_object()) {
            if (!it.value().is_object()) throw ParseError("config section '" + field + "' must be an object", 0, field);
            check_known_keys(it.value(), r, field, text);
        }
    }
}

/// Parses config text; missing keys keep their defaults. Empty text yields the defaults.
inline ExperimentConfig parse_config(const std::string& text) {
    using nlohmann::json;
    ExperimentConfig c;
    const bool blank = text.find_first_not_of(" \t\r\n") == std::string::npos;
    json root = json::object();
    if (!blank) {
        try {
            root = json::parse(text);
        } catch (const json::parse_error& e) {
            const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
            const std::size_t line =
                1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte ? byte - 1 : 0), '\n'));
            throw ParseError(std::string("config syntax error: ") + e.what(), line, "");
        }
        if (!root.is_object()) throw ParseError("config root must be an object", 1, "");
    }
    check_known_keys(root, config_to_json(c), "", text);

    const detail::Reader r(root, text);
    r.get(nullptr, "seed", c.seed);
    r.get("physics", "carrier_freq_hz", c.carrier_freq_hz);
    r.get("physics", "bandwidth_hz", c.bandwidth_hz);
    r.get("physics", "noise_figure_db", c.noise_figure_db);
    r.get("physics", "eirp_density_dbw_per_mhz", c.eirp_density_dbw_per_mhz);
    r.get("physics", "speed_of_light", c.speed_of_light);
    r.get("physics", "atm_su_db", c.atm_su_db);
    r.get("physics", "atm_sr_db", c.atm_sr_db);
    r.get("physics", "excess_su_db", c.excess_su_db);
    r.get("physics", "excess_sr_db", c.excess_sr_db);
    r.get("physics", "kappa_d", c.kappa_d);
    r.get("physics", "kappa_r", c.kappa_r);
    r.get_vec3("geometry", "satellite", c.satellite);
    r.get_vec3("geometry", "ris", c.ris);
    r.get("geometry", "user_height", c.user_height);
    r.get("geometry", "x_min", c.region.x_min);
    r.get("geometry", "x_max", c.region.x_max);
    r.get("geometry", "y_min", c.region.y_min);
    r.get("geometry", "y_max", c.region.y_max);
    r.get("ris", "n_elements", c.n_elements);
    r.get("ris", "phase_bits", c.phase_bits);
    r.get("ris", "element_spacing", c.element_spacing);
    r.get("ris", "codebook_size", c.codebook_size);
    r.get_points("ris", "anchors", c.anchors);
    r.get_opt("ris", "codebook_file", c.codebook_file);
    r.get("blockage", "xi_min", c.xi_min);
    r.get("blockage", "xi_max", c.xi_max);
    r.get("shadowing", "sigma_ru_db", c.sigma_ru_db);
    r.get("shadowing", "corr_distance_m", c.corr_distance_m);
    r.get("shadowing", "meas_noise_var_db2", c.meas_noise_var_db2);
    r.get_opt("shadowing", "filter_q_x", c.filter_q_x);
    r.get_opt("shadowing", "filter_r_x", c.filter_r_x);
    r.get("policy", "xi_l", c.policy.xi_l);
    r.get("policy", "xi_h", c.policy.xi_h);
    r.get("policy", "alpha_c", c.policy.alpha_c);
    r.get("policy", "alpha_b", c.policy.alpha_b);
    r.get("policy", "alpha_p", c.policy.alpha_p);
    r.get("policy", "nu", c.nu);
    r.get_opt("policy", "gamma_ref_db", c.gamma_ref_db);
    r.get_opt("policy", "peb_ref_m", c.peb_ref_m);
    r.get("thresholds", "snr_db", c.snr_threshold_db);
    r.get("thresholds", "peb_m", c.peb_threshold_m);
    TrialCounts& t = c.trials;
    r.get("trials", "summary", t.summary);
    r.get("trials", "tradeoff_realizations", t.tradeoff_realizations);
    r.get("trials", "tradeoff_grid_x", t.tradeoff_grid_x);
    r.get("trials", "tradeoff_grid_y", t.tradeoff_grid_y);
    r.get("trials", "switching_trajectories", t.switching_trajectories);
    r.get("trials", "switching_blocks", t.switching_blocks);
    r.get("trials", "switching_step_m", t.switching_step_m);
    r.get("trials", "switching_noise_grid", t.switching_noise_grid);
    r.get("trials", "family_trials", t.family_trials);
    r.get("trials", "family_xi_grid", t.family_xi_grid);
    r.get("trials", "decision_x_points", t.decision_x_points);
    r.get("trials", "decision_xi_points", t.decision_xi_points);
    r.get("trials", "decision_realizations", t.decision_realizations);
    r.get("trials", "psucc_trials", t.psucc_trials);
    r.get("trials", "psucc_n_grid", t.psucc_n_grid);
    r.get("trials", "psucc_b_grid", t.psucc_b_grid);
    r.get("trials", "spatial_nx", t.spatial_nx);
    r.get("trials", "spatial_ny", t.spatial_ny);
    r.get("trials", "spatial_realizations", t.spatial_realizations);
    r.get("trials", "peb_x_points", t.peb_x_points);
    r.get("trials", "peb_x_realizations", t.peb_x_realizations);

    validate_config(c);
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidConfig("cannot open config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

inline std::string serialize_config(const ExperimentConfig& c) { return config_to_json(c).dump(2) + "\n"; }

} // namespace risntn
