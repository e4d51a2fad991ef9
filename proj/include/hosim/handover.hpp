#pragma once

#include <deque>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "hosim/channel.hpp"
#include "hosim/core.hpp"
#include "hosim/fuzzy.hpp"
#include "hosim/qlearn.hpp"

namespace hosim {

enum class MechKind { A3Rsrp, FlhaExpert, FlhaQ, FlhaSon };

inline const char* mech_name(MechKind k) {
    switch (k) {
        case MechKind::A3Rsrp: return "a3";
        case MechKind::FlhaExpert: return "flha-expert";
        case MechKind::FlhaQ: return "flha-q";
        case MechKind::FlhaSon: return "flha-son";
    }
    return "?";
}

inline std::optional<MechKind> mech_from_name(const std::string& name) {
    if (name == "a3") return MechKind::A3Rsrp;
    if (name == "flha-expert") return MechKind::FlhaExpert;
    if (name == "flha-q") return MechKind::FlhaQ;
    if (name == "flha-son") return MechKind::FlhaSon;
    return std::nullopt;
}

struct A3Params {
    double hom_db = 2.0;
    int ttt_steps = 1;
};

struct FlhaMechanism {
    MfBundle mfs;
    RuleBase rulebase;
    MembershipFunction output_mf;
    double threshold = 0.5;
};

struct TriggerMechanism {
    MechKind kind = MechKind::A3Rsrp;
    A3Params a3;
    FlhaMechanism flha;  // unused for the A3 baseline
};

// A3 entering condition over the recent history: the best neighbour must
// exceed the serving RSRP by the hysteresis margin for ttt consecutive
// steps. Histories shorter than the window cannot trigger yet.
inline std::optional<int> a3_decide(const std::deque<double>& serving_rsrp,
                                    const std::deque<double>& best_neighbour_rsrp,
                                    const std::deque<int>& best_neighbour_id, double hom_db,
                                    int ttt_steps) {
    const std::size_t n = serving_rsrp.size();
    if (n < static_cast<std::size_t>(ttt_steps)) return std::nullopt;
    for (std::size_t k = n - static_cast<std::size_t>(ttt_steps); k < n; ++k)
        if (!(best_neighbour_rsrp[k] > serving_rsrp[k] + hom_db)) return std::nullopt;
    return best_neighbour_id.back();
}

// Crisp HO factor of the serving link through the full inference pipeline.
// Inference failures (no rule fired) fall back to "maintain", signalled by
// an empty optional.
inline std::optional<double> flha_ho_factor(const LinkMeasurement& serving,
                                            const FlhaMechanism& mech) {
    try {
        auto grades = grades_from(mech.mfs.rsrp, normalize(serving.rsrp_dbm, mech.mfs.rsrp),
                                  mech.mfs.sinr, normalize(serving.sinr_db, mech.mfs.sinr),
                                  mech.mfs.dist, normalize(serving.distance_m, mech.mfs.dist));
        return defuzzify(infer(mech.rulebase, mech.output_mf, grades));
    } catch (const InferenceError&) {
        return std::nullopt;
    }
}

// Strictly greater than the threshold triggers.
inline bool flha_decide(const LinkMeasurement& serving, const FlhaMechanism& mech) {
    auto factor = flha_ho_factor(serving, mech);
    return factor.has_value() && *factor > mech.threshold;
}

// The per-step hot path evaluates thousands of decisions, so rules are
// compiled against their membership functions once per run: antecedent
// labels become set indices, consequent curves are pre-sampled on the
// output grid, and rules sharing a consequent collapse into one clipped
// curve under the max of their firing strengths. Results are bit-identical
// to infer() + defuzzify().
class CompiledFlha {
  public:
    explicit CompiledFlha(const FlhaMechanism& mech) : mech_(mech) {
        std::map<std::string, int> group_of;
        for (const auto& rule : mech_.rulebase.rules) {
            auto [it, inserted] = group_of.try_emplace(rule.consequent,
                                                       static_cast<int>(curves_.size()));
            if (inserted) {
                const FuzzySet& out = mech_.output_mf.set_by_label(rule.consequent);
                std::array<double, kOutputGridSize> curve{};
                for (int i = 0; i < kOutputGridSize; ++i)
                    curve[i] = membership(out, Aggregate::grid_point(i));
                curves_.push_back(curve);
            }
            rules_.push_back(CompiledRule{set_index(mech_.mfs.rsrp, rule.rsrp),
                                          set_index(mech_.mfs.sinr, rule.sinr),
                                          set_index(mech_.mfs.dist, rule.d), it->second});
        }
    }

    std::optional<double> ho_factor(const LinkMeasurement& serving) const {
        auto g_rsrp = fuzzify(mech_.mfs.rsrp, normalize(serving.rsrp_dbm, mech_.mfs.rsrp)).grades;
        auto g_sinr = fuzzify(mech_.mfs.sinr, normalize(serving.sinr_db, mech_.mfs.sinr)).grades;
        auto g_d = fuzzify(mech_.mfs.dist, normalize(serving.distance_m, mech_.mfs.dist)).grades;

        std::vector<double> group_w(curves_.size(), 0.0);
        for (const auto& r : rules_) {
            double w = std::min({g_rsrp[r.rsrp], g_sinr[r.sinr], g_d[r.d]});
            if (w > group_w[static_cast<std::size_t>(r.group)])
                group_w[static_cast<std::size_t>(r.group)] = w;
        }

        Aggregate agg;
        for (std::size_t g = 0; g < curves_.size(); ++g) {
            double w = group_w[g];
            if (w <= 0.0) continue;
            const auto& curve = curves_[g];
            for (int i = 0; i < kOutputGridSize; ++i) {
                double clipped = std::min(w, curve[i]);
                if (clipped > agg.y[i]) agg.y[i] = clipped;
            }
        }
        try {
            return defuzzify(agg);
        } catch (const InferenceError&) {
            return std::nullopt;
        }
    }

    bool decide(const LinkMeasurement& serving) const {
        auto factor = ho_factor(serving);
        return factor.has_value() && *factor > mech_.threshold;
    }

  private:
    struct CompiledRule {
        std::size_t rsrp, sinr, d;
        int group;
    };

    static std::size_t set_index(const MembershipFunction& mf, const std::string& label) {
        for (std::size_t i = 0; i < mf.sets.size(); ++i)
            if (mf.sets[i].label == label) return i;
        throw DataError("rule references unknown label '" + label + "' for " +
                        metric_name(mf.metric));
    }

    FlhaMechanism mech_;
    std::vector<CompiledRule> rules_;
    std::vector<std::array<double, kOutputGridSize>> curves_;
};

// HO target: the neighbour with maximum SINR, ties to the lower id. An
// empty candidate list yields no target and the caller maintains.
inline std::optional<int> select_target(const std::vector<LinkMeasurement>& neighbours) {
    if (neighbours.empty()) return std::nullopt;
    const LinkMeasurement* best = &neighbours.front();
    for (const auto& m : neighbours)
        if (m.sinr_db > best->sinr_db || (m.sinr_db == best->sinr_db && m.bs_id < best->bs_id))
            best = &m;
    return best->bs_id;
}

enum class Outcome { Success, TooEarly, TooLate, WrongCell };

inline const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Success: return "success";
        case Outcome::TooEarly: return "too_early";
        case Outcome::TooLate: return "too_late";
        case Outcome::WrongCell: return "wrong_cell";
    }
    return "?";
}

struct HOEvent {
    long step = 0;
    int ue_id = 0;
    int source_bs = 0;
    int target_bs = 0;
    Outcome outcome = Outcome::Success;
    bool pingpong = false;

    bool failed() const { return outcome != Outcome::Success; }
};

struct FailureThresholds {
    double gamma_out_db = -8.0;   // source collapse during the HO window
    double gamma_fail_db = -6.0;  // minimum usable target SINR at completion
};

// Outcome classification on the trigger step's measurements: the source
// dropping below gamma_out means the trigger came too late; a target below
// gamma_fail was either the wrong cell (some other neighbour was usable)
// or simply too early.
inline Outcome classify_ho(double source_sinr_db, double target_sinr_db,
                           const std::vector<double>& other_neighbour_sinr_db,
                           const FailureThresholds& th) {
    if (source_sinr_db < th.gamma_out_db) return Outcome::TooLate;
    if (target_sinr_db < th.gamma_fail_db) {
        for (double s : other_neighbour_sinr_db)
            if (s > th.gamma_fail_db) return Outcome::WrongCell;
        return Outcome::TooEarly;
    }
    return Outcome::Success;
}

// Last successful handover of one UE, kept for ping-pong detection.
struct PingPongMemory {
    bool valid = false;
    int source_bs = 0;
    int target_bs = 0;
    long step = 0;
};

// A successful A->B handover is a ping-pong when the previous successful
// handover was B->A and happened within the window.
inline bool is_pingpong(const PingPongMemory& prev, int source_bs, int target_bs, long step,
                        double step_seconds, double window_s) {
    if (!prev.valid) return false;
    if (prev.source_bs != target_bs || prev.target_bs != source_bs) return false;
    return static_cast<double>(step - prev.step) * step_seconds <= window_s;
}

// --- event log --------------------------------------------------------------

inline void save_events(const std::string& path, const std::vector<HOEvent>& events) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write event log: " + path);
    out << "step,ue,source,target,outcome,failure_kind,pingpong\n";
    for (const auto& e : events) {
        out << e.step << "," << e.ue_id << "," << e.source_bs << "," << e.target_bs << ","
            << (e.failed() ? "failure" : "success") << ","
            << (e.failed() ? outcome_name(e.outcome) : "-") << "," << (e.pingpong ? 1 : 0)
            << "\n";
    }
}

inline std::vector<HOEvent> load_events(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open event log: " + path);
    std::vector<HOEvent> events;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("step,", 0) == 0) continue;
        auto f = detail::split_csv(line);
        if (f.size() != 7) throw DataError(path + ": malformed event row: " + line);
        HOEvent e;
        e.step = std::stol(f[0]);
        e.ue_id = std::stoi(f[1]);
        e.source_bs = std::stoi(f[2]);
        e.target_bs = std::stoi(f[3]);
        if (f[4] == "success") {
            e.outcome = Outcome::Success;
        } else if (f[5] == "too_early") {
            e.outcome = Outcome::TooEarly;
        } else if (f[5] == "too_late") {
            e.outcome = Outcome::TooLate;
        } else {
            e.outcome = Outcome::WrongCell;
        }
        e.pingpong = f[6] == "1";
        events.push_back(e);
    }
    return events;
}

}  // namespace hosim
