#pragma once

#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "hosim/channel.hpp"
#include "hosim/cluster.hpp"
#include "hosim/handover.hpp"
#include "hosim/kpi.hpp"
#include "hosim/mobility.hpp"
#include "hosim/qlearn.hpp"
#include "hosim/rng.hpp"
#include "hosim/scenario.hpp"
#include "hosim/topology.hpp"

namespace hosim {

// Mutable world state stepped by both the evaluation loop and the training
// environment, so training and evaluation share one set of dynamics.
struct World {
    ScenarioConfig cfg;
    std::vector<BaseStation> stations;
    std::vector<UserEquipment> ues;
    NoiseModel noise;
    std::vector<Rng> ue_streams;
    std::vector<std::vector<LinkMeasurement>> meas;  // per UE, refreshed each step

    World(const ScenarioConfig& config, std::uint64_t master_seed) : cfg(config) {
        noise = NoiseModel{-174.0, cfg.noise_figure_db, cfg.rayleigh_enabled,
                           cfg.fading_avg_draws};
        Rng topo_rng(derive_seed(master_seed, "topology"));
        auto [st, u] = build_topology(cfg, topo_rng);
        stations = std::move(st);
        ues = std::move(u);
        for (const auto& ue : ues)
            ue_streams.emplace_back(derive_seed(master_seed, "ue/" + std::to_string(ue.id)));
        meas.resize(ues.size());
        measure_all();
    }

    void advance_mobility() {
        for (std::size_t i = 0; i < ues.size(); ++i) {
            auto [p, st] = step_position(ues[i].position, ues[i].mobility, cfg.step_seconds,
                                         cfg.area(), ue_streams[i], cfg.heading_epoch_steps);
            ues[i].position = p;
            ues[i].mobility = st;
        }
    }

    void measure_all() {
        for (std::size_t i = 0; i < ues.size(); ++i)
            meas[i] = measure(ues[i], stations, noise, ue_streams[i]);
    }

    const LinkMeasurement& serving_meas(std::size_t i) const {
        return meas[i][static_cast<std::size_t>(ues[i].serving_bs)];
    }

    std::vector<LinkMeasurement> neighbour_meas(std::size_t i) const {
        std::vector<LinkMeasurement> out;
        out.reserve(meas[i].size() - 1);
        for (const auto& m : meas[i])
            if (m.bs_id != ues[i].serving_bs) out.push_back(m);
        return out;
    }

    int best_sinr_station(std::size_t i) const {
        int best = meas[i].front().bs_id;
        double best_sinr = meas[i].front().sinr_db;
        for (const auto& m : meas[i]) {
            if (m.sinr_db > best_sinr) {
                best_sinr = m.sinr_db;
                best = m.bs_id;
            }
        }
        return best;
    }

    int attached_count(int bs_id) const {
        int n = 0;
        for (const auto& ue : ues) n += ue.serving_bs == bs_id ? 1 : 0;
        return n;
    }
};

struct RunResult {
    std::vector<HOEvent> events;
    std::vector<LinkRecord> links;
    KpiReport report;
};

namespace detail {

struct A3History {
    std::deque<double> serving_rsrp;
    std::deque<double> best_rsrp;
    std::deque<int> best_id;

    void push(double serving, double best, int id, std::size_t cap) {
        serving_rsrp.push_back(serving);
        best_rsrp.push_back(best);
        best_id.push_back(id);
        while (serving_rsrp.size() > cap) {
            serving_rsrp.pop_front();
            best_rsrp.pop_front();
            best_id.pop_front();
        }
    }

    void clear() {
        serving_rsrp.clear();
        best_rsrp.clear();
        best_id.clear();
    }
};

}  // namespace detail

// One full deterministic run: per step, position update, measurement,
// decision, execution, logging, in that order and in ascending UE id.
// The observer is called once per UE per step with the serving link,
// which is how history collection taps the loop.
template <typename Observer>
RunResult run_with_observer(const ScenarioConfig& cfg, const TriggerMechanism& mech,
                            std::uint64_t master_seed, long steps, Observer&& observe) {
    throw_if_invalid(cfg, {"sim_duration_steps"});
    World world(cfg, master_seed);
    const std::size_t n_ue = world.ues.size();

    std::optional<CompiledFlha> flha;
    if (mech.kind != MechKind::A3Rsrp) flha.emplace(mech.flha);

    std::vector<detail::A3History> a3_hist(n_ue);
    std::vector<PingPongMemory> pp(n_ue);
    std::vector<bool> reattach(n_ue, false);
    std::vector<int> pending_switch(n_ue, -1);
    std::vector<bool> ho_flag(n_ue, false);

    const double ho_latency_s = (cfg.ho_prep_ms + cfg.ho_exec_ms) / 1000.0;
    const double edge_latency_s = cfg.edge_latency_ms / 1000.0;
    const double packet_bits = cfg.packet_bytes * 8.0;

    RunResult result;
    for (long step = 0; step < steps; ++step) {
        world.advance_mobility();
        world.measure_all();

        std::fill(pending_switch.begin(), pending_switch.end(), -1);
        std::fill(ho_flag.begin(), ho_flag.end(), false);

        for (std::size_t i = 0; i < n_ue; ++i) {
            UserEquipment& ue = world.ues[i];
            observe(step, ue, world.serving_meas(i));

            if (reattach[i]) {
                // Recovery after a failed handover: rejoin the strongest
                // cell, no mechanism decision this step.
                int best = world.best_sinr_station(i);
                if (best != ue.serving_bs) {
                    ue.serving_bs = best;
                    a3_hist[i].clear();
                }
                reattach[i] = false;
                continue;
            }
            if (ue.ho_in_progress && ue.ho_in_progress->completion_step > step) continue;

            const auto& serving = world.serving_meas(i);
            auto neighbours = world.neighbour_meas(i);

            std::optional<int> target;
            if (mech.kind == MechKind::A3Rsrp) {
                const LinkMeasurement* best = nullptr;
                for (const auto& m : neighbours)
                    if (!best || m.rsrp_dbm > best->rsrp_dbm) best = &m;
                if (best) {
                    a3_hist[i].push(serving.rsrp_dbm, best->rsrp_dbm, best->bs_id,
                                    static_cast<std::size_t>(mech.a3.ttt_steps));
                    target = a3_decide(a3_hist[i].serving_rsrp, a3_hist[i].best_rsrp,
                                       a3_hist[i].best_id, mech.a3.hom_db, mech.a3.ttt_steps);
                }
            } else if (flha->decide(serving)) {
                target = select_target(neighbours);
            }

            if (target && *target != ue.serving_bs) {
                double target_sinr = 0.0;
                std::vector<double> others;
                for (const auto& m : neighbours) {
                    if (m.bs_id == *target)
                        target_sinr = m.sinr_db;
                    else
                        others.push_back(m.sinr_db);
                }
                HOEvent event;
                event.step = step;
                event.ue_id = ue.id;
                event.source_bs = ue.serving_bs;
                event.target_bs = *target;
                event.outcome = classify_ho(serving.sinr_db, target_sinr, others,
                                            FailureThresholds{cfg.gamma_out_db, cfg.gamma_fail_db});
                if (!event.failed()) {
                    event.pingpong = is_pingpong(pp[i], event.source_bs, event.target_bs, step,
                                                 cfg.step_seconds, cfg.pingpong_window_s);
                    pp[i] = PingPongMemory{true, event.source_bs, event.target_bs, step};
                    pending_switch[i] = *target;
                } else {
                    reattach[i] = true;
                }
                ue.ho_in_progress = HoInProgress{*target, step};
                ho_flag[i] = true;
                result.events.push_back(event);
            }
        }

        // Data accounting happens on the pre-switch serving cell: during
        // the handover window the UE still receives from the source.
        for (std::size_t i = 0; i < n_ue; ++i) {
            const UserEquipment& ue = world.ues[i];
            const auto& serving = world.serving_meas(i);
            const BaseStation& bs = world.stations[static_cast<std::size_t>(ue.serving_bs)];
            double share_hz = bs.bw_mhz * 1e6 / world.attached_count(ue.serving_bs);
            double rate = throughput(share_hz, serving.sinr_db);

            LinkRecord rec;
            rec.step = step;
            rec.ue_id = ue.id;
            rec.serving_bs = ue.serving_bs;
            rec.sinr_db = serving.sinr_db;
            rec.ho_this_step = ho_flag[i];
            if (rate > 0.0 && std::isfinite(rate)) {
                rec.rate_bps = rate;
                rec.latency_s = latency(packet_bits, rate, serving.distance_m, cfg.bs_spacing_m,
                                        edge_latency_s, ho_flag[i] ? ho_latency_s : 0.0);
            } else {
                rec.outage = true;
            }
            result.links.push_back(rec);
        }

        // Successful handovers switch the connection at step completion.
        for (std::size_t i = 0; i < n_ue; ++i) {
            if (pending_switch[i] >= 0) {
                world.ues[i].serving_bs = pending_switch[i];
                a3_hist[i].clear();
            }
            world.ues[i].ho_in_progress.reset();
        }
    }

    result.report = compute_report(result.events, result.links, cfg.ue_count, steps);
    return result;
}

inline RunResult run(const ScenarioConfig& cfg, const TriggerMechanism& mech,
                     std::uint64_t master_seed) {
    return run_with_observer(cfg, mech, master_seed, cfg.sim_duration_steps,
                             [](long, const UserEquipment&, const LinkMeasurement&) {});
}

// Records every UE's serving-link metrics per step under the A3 baseline
// and normalizes them against the observed ranges.
inline HistoryDataset collect_history(const ScenarioConfig& cfg, long steps,
                                      std::uint64_t master_seed) {
    throw_if_invalid(cfg, {"sim_duration_steps"});
    if (steps * cfg.ue_count < cfg.min_history_samples)
        throw DataError("insufficient history: " + std::to_string(steps) + " steps x " +
                        std::to_string(cfg.ue_count) + " UEs is below the minimum of " +
                        std::to_string(cfg.min_history_samples) + " samples");

    TriggerMechanism a3;
    a3.kind = MechKind::A3Rsrp;
    a3.a3 = A3Params{cfg.a3_hom_db, cfg.a3_ttt_steps};

    HistoryDataset ds;
    ds.raw.reserve(static_cast<std::size_t>(steps) * static_cast<std::size_t>(cfg.ue_count));
    run_with_observer(cfg, a3, master_seed, steps,
                      [&ds](long, const UserEquipment&, const LinkMeasurement& m) {
                          ds.raw.push_back({m.rsrp_dbm, m.sinr_db, m.distance_m});
                      });
    normalize_history(ds);
    return ds;
}

// Q-learning environment over the same world dynamics: every UE is an
// agent feeding the shared table; triggering switches to the max-SINR
// neighbour at the next step; an agent's episode ends on radio-link
// failure. Episodes start from a uniformly random attachment (exploring
// starts), so poor serving states are visited under both actions instead
// of only the ones a good policy would reach.
class HandoverEnv {
  public:
    HandoverEnv(const ScenarioConfig& cfg, const MfBundle& mfs) : cfg_(cfg), mfs_(mfs) {}

    void begin_episode(Rng& rng) {
        world_.emplace(cfg_, rng.next_u64());
        pending_.assign(world_->ues.size(), -1);
        for (auto& ue : world_->ues)
            ue.serving_bs = static_cast<int>(rng.uniform_int(world_->stations.size()));
    }

    int agent_count() const { return static_cast<int>(world_->ues.size()); }

    FuzzyState observe(int agent) const {
        return encode_state(world_->serving_meas(static_cast<std::size_t>(agent)), mfs_);
    }

    Action apply(int agent, Action requested, Rng&) {
        auto i = static_cast<std::size_t>(agent);
        pending_[i] = -1;
        if (requested == Action::Maintain) return Action::Maintain;
        auto target = select_target(world_->neighbour_meas(i));
        if (!target) return Action::Maintain;  // degenerate topology guard
        pending_[i] = *target;
        return Action::Trigger;
    }

    void advance(Rng&) {
        for (std::size_t i = 0; i < pending_.size(); ++i)
            if (pending_[i] >= 0) world_->ues[i].serving_bs = pending_[i];
        world_->advance_mobility();
        world_->measure_all();
    }

    double reward_of(int agent) const { return reward(observe(agent), mfs_); }

    bool terminal(int agent) const {
        return world_->serving_meas(static_cast<std::size_t>(agent)).sinr_db < cfg_.rlf_sinr_db;
    }

  private:
    ScenarioConfig cfg_;
    MfBundle mfs_;
    std::optional<World> world_;
    std::vector<int> pending_;
};

}  // namespace hosim
