#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "hosim/channel.hpp"
#include "hosim/mobility.hpp"
#include "hosim/rng.hpp"
#include "hosim/scenario.hpp"

namespace hosim {

namespace detail {

// Grid coordinates spread edge-to-edge over one axis: n == 1 sits at the
// middle, n >= 2 spans [0, extent] with n-1 equal gaps.
inline std::vector<double> spread_axis(int n, double extent) {
    std::vector<double> xs;
    if (n <= 0) return xs;
    if (n == 1) {
        xs.push_back(extent / 2.0);
        return xs;
    }
    for (int i = 0; i < n; ++i) xs.push_back(extent * i / (n - 1));
    return xs;
}

}  // namespace detail

// Square-grid layout: small cells fill a near-square grid spread over the
// area, macros sit at the centroids of macro_count vertical slices (the
// centers of the two halves in the canonical two-macro scenario). A small
// cell landing on a macro position is displaced by one nominal spacing so
// every link stays geometrically distinct.
inline std::vector<BaseStation> place_stations(const ScenarioConfig& cfg) {
    std::vector<BaseStation> stations;
    const double W = cfg.area_width_m;
    const double H = cfg.area_height_m;

    for (int i = 0; i < cfg.macro_count; ++i) {
        BaseStation bs;
        bs.id = static_cast<int>(stations.size());
        bs.tier = Tier::Macro;
        bs.position = Vec2{(i + 0.5) * W / cfg.macro_count, H / 2.0};
        bs.freq_ghz = cfg.macro_freq_ghz;
        bs.tx_dbm = cfg.macro_tx_dbm;
        bs.bw_mhz = cfg.macro_bw_mhz;
        stations.push_back(bs);
    }

    if (cfg.small_count > 0) {
        int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.small_count))));
        int rows = (cfg.small_count + cols - 1) / cols;
        auto xs = detail::spread_axis(cols, W);
        auto ys = detail::spread_axis(rows, H);

        // The area must admit the requested count at roughly the nominal
        // spacing; refuse overcrowded grids.
        double realized = std::numeric_limits<double>::infinity();
        if (cols > 1) realized = std::min(realized, W / (cols - 1));
        if (rows > 1) realized = std::min(realized, H / (rows - 1));
        if (cfg.small_count >= 2 && realized < cfg.bs_spacing_m / 2.0)
            throw ConfigError("grid cannot fit " + std::to_string(cfg.small_count) +
                              " small cells in the area at approximately " +
                              std::to_string(cfg.bs_spacing_m) + " m spacing");

        int placed = 0;
        for (int j = 0; j < rows && placed < cfg.small_count; ++j) {
            for (int i = 0; i < cols && placed < cfg.small_count; ++i) {
                Vec2 p{xs[i], ys[j]};
                for (const auto& m : stations) {
                    if (m.tier == Tier::Macro && distance(p, m.position) < 1e-9) {
                        double shifted = p.x + cfg.bs_spacing_m;
                        p.x = shifted <= W ? shifted : std::max(0.0, p.x - cfg.bs_spacing_m);
                        break;
                    }
                }
                BaseStation bs;
                bs.id = static_cast<int>(stations.size());
                bs.tier = Tier::Small;
                bs.position = p;
                bs.freq_ghz = cfg.small_freq_ghz;
                bs.tx_dbm = cfg.small_tx_dbm;
                bs.bw_mhz = cfg.small_bw_mhz;
                stations.push_back(bs);
                ++placed;
            }
        }
    }
    return stations;
}

// Initial attachment: the station with maximum fading-free SINR at the UE
// position, so the choice is a pure function of geometry.
inline int max_sinr_station(const Vec2& pos, const std::vector<BaseStation>& stations,
                            const NoiseModel& noise) {
    UserEquipment probe;
    probe.position = pos;
    NoiseModel quiet = noise;
    quiet.rayleigh_enabled = false;
    Rng unused(0);
    auto meas = measure(probe, stations, quiet, unused);
    int best = meas.front().bs_id;
    double best_sinr = meas.front().sinr_db;
    for (const auto& m : meas) {
        if (m.sinr_db > best_sinr) {
            best_sinr = m.sinr_db;
            best = m.bs_id;
        }
    }
    return best;
}

inline std::pair<std::vector<BaseStation>, std::vector<UserEquipment>> build_topology(
    const ScenarioConfig& cfg, Rng& rng) {
    throw_if_invalid(cfg, {"sim_duration_steps"});
    auto stations = place_stations(cfg);

    NoiseModel noise{-174.0, cfg.noise_figure_db, cfg.rayleigh_enabled, cfg.fading_avg_draws};
    std::vector<UserEquipment> ues;
    ues.reserve(cfg.ue_count);
    for (int i = 0; i < cfg.ue_count; ++i) {
        UserEquipment ue;
        ue.id = i;
        ue.position = Vec2{rng.uniform(0.0, cfg.area_width_m), rng.uniform(0.0, cfg.area_height_m)};
        ue.mobility.heading_rad = rng.uniform(0.0, 2.0 * kPi);
        ue.mobility.speed_mps = cfg.ue_speed_mps();
        ue.mobility.redraw_countdown_steps = cfg.heading_epoch_steps;
        ue.serving_bs = max_sinr_station(ue.position, stations, noise);
        ues.push_back(ue);
    }
    return {std::move(stations), std::move(ues)};
}

}  // namespace hosim
