#pragma once

#include <vector>

#include "hosim/core.hpp"
#include "hosim/rng.hpp"
#include "hosim/scenario.hpp"

namespace hosim {

// One measured link between a UE and one base station; the three decision
// metrics every triggering mechanism consumes.
struct LinkMeasurement {
    int bs_id = -1;
    double rsrp_dbm = 0.0;
    double sinr_db = 0.0;
    double distance_m = 0.0;
};

struct NoiseModel {
    double thermal_noise_dbm_per_hz = -174.0;
    double noise_figure_db = 0.0;
    bool rayleigh_enabled = true;
    // Independent Rayleigh power fades averaged into one per-step
    // measurement. One step spans many fading coherence intervals at
    // vehicular speeds, so the filtered measurement sees the mean of
    // several draws; 1 keeps the raw single-draw fade.
    int fading_avg_draws = 1;

    double noise_power_dbm(double bw_mhz) const {
        return thermal_noise_dbm_per_hz + 10.0 * std::log10(bw_mhz * 1e6) + noise_figure_db;
    }
};

// Distances below this clamp evaluate the path loss at 10 m, avoiding the
// log singularity at d -> 0.
constexpr double kMinPathLossDistanceM = 10.0;

// NLOS closed forms, urban macro for the macro tier and urban micro for the
// small-cell tier, with default antenna heights absorbed into the constants.
inline double path_loss_db(Tier tier, double freq_ghz, double distance_m) {
    if (!(freq_ghz > 0.0))
        throw std::invalid_argument("path_loss_db: frequency must be strictly positive");
    double d = std::max(distance_m, kMinPathLossDistanceM);
    if (tier == Tier::Macro)
        return 13.54 + 39.08 * std::log10(d) + 20.0 * std::log10(freq_ghz);
    return 22.4 + 35.3 * std::log10(d) + 21.3 * std::log10(freq_ghz);
}

// 10*log10( mW(signal) / (sum mW(interferers) + mW(noise)) )
inline double sinr_db(double signal_dbm, const std::vector<double>& interferer_dbm,
                      double noise_dbm) {
    double denom_mw = dbm_to_mw(noise_dbm);
    for (double i : interferer_dbm) denom_mw += dbm_to_mw(i);
    return mw_to_dbm(dbm_to_mw(signal_dbm) / denom_mw);
}

// Per-link Rayleigh fade in dB, i.i.d. per link per step. With avg_draws
// above 1 the exponential power fade is replaced by the mean of that many
// draws, modelling the per-step averaging of the measurement chain.
inline double rayleigh_fade_db(Rng& rng, int avg_draws = 1) {
    double e = 0.0;
    for (int k = 0; k < avg_draws; ++k) e += rng.exponential();
    return -10.0 * std::log10(e / avg_draws);
}

// Measures every station from the UE position. Interference is co-tier
// only: the two tiers occupy different carrier bands.
inline std::vector<LinkMeasurement> measure(const UserEquipment& ue,
                                            const std::vector<BaseStation>& stations,
                                            const NoiseModel& noise, Rng& rng) {
    if (stations.empty()) throw DataError("measure: station list is empty");
    const std::size_t n = stations.size();
    std::vector<LinkMeasurement> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const BaseStation& bs = stations[i];
        double d = distance(ue.position, bs.position);
        double rsrp = bs.tx_dbm - path_loss_db(bs.tier, bs.freq_ghz, d);
        if (noise.rayleigh_enabled) rsrp += rayleigh_fade_db(rng, noise.fading_avg_draws);
        out[i] = LinkMeasurement{bs.id, rsrp, 0.0, d};
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> interferers;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) continue;
            if (stations[k].tier == stations[i].tier) interferers.push_back(out[k].rsrp_dbm);
        }
        out[i].sinr_db = sinr_db(out[i].rsrp_dbm, interferers,
                                 noise.noise_power_dbm(stations[i].bw_mhz));
    }
    return out;
}

}  // namespace hosim
