#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hosim/cluster.hpp"
#include "hosim/core.hpp"
#include "hosim/fuzzy.hpp"
#include "hosim/handover.hpp"
#include "hosim/qlearn.hpp"
#include "hosim/scenario.hpp"
#include "hosim/sim.hpp"

namespace hosim {

inline ClusteringParams clustering_params(const ScenarioConfig& cfg) {
    ClusteringParams p;
    p.alpha = cfg.clu_alpha;
    p.beta = cfg.clu_beta;
    p.epsilon_reject = cfg.clu_epsilon;
    p.delta = cfg.clu_delta;
    p.width_coefficient = cfg.clu_width_coeff;
    p.merge_tol = cfg.clu_merge_tol;
    return p;
}

inline QLearnParams qlearn_params(const ScenarioConfig& cfg) {
    QLearnParams p;
    p.learning_rate = cfg.q_learning_rate;
    p.discount = cfg.q_discount;
    p.epsilon_start = cfg.q_epsilon_start;
    p.epsilon_end = cfg.q_epsilon_end;
    p.epochs = cfg.q_epochs;
    p.episode_steps = cfg.q_episode_steps;
    return p;
}

// Static engineering ranges for the expert baseline, which must work
// without any collected history.
struct ExpertBounds {
    double rsrp_min = -120.0, rsrp_max = -40.0;
    double sinr_min = -20.0, sinr_max = 30.0;
};

inline MfBundle expert_mfs(const ScenarioConfig& cfg, const ClusteringParams& params) {
    ExpertBounds b;
    double d_max = std::hypot(cfg.area_width_m, cfg.area_height_m);
    MfBundle mfs;
    mfs.rsrp = uniform_mf(3, b.rsrp_min, b.rsrp_max, Metric::Rsrp, Polarity::Benefit, params);
    mfs.sinr = uniform_mf(3, b.sinr_min, b.sinr_max, Metric::Sinr, Polarity::Benefit, params);
    mfs.dist = uniform_mf(3, 0.0, d_max, Metric::Distance, Polarity::Cost, params);
    return mfs;
}

// The fixed experience-based rule table: 27 rules over the three 3-set
// inputs. Each antecedent label contributes its shortfall from the best
// level (remember that a low distance label means a far UE), and the
// summed shortfall maps onto the 5-level output ladder.
inline RuleBase expert_rules() {
    const std::vector<std::string> in_labels = {"low", "medium", "high"};
    auto consequent = [](int score) -> std::string {
        if (score >= 5) return "very-high";
        if (score == 4) return "high";
        if (score == 3) return "medium";
        if (score == 2) return "low";
        return "very-low";
    };
    RuleBase rb;
    rb.origin = RuleOrigin::Expert;
    for (int r = 0; r < 3; ++r)
        for (int s = 0; s < 3; ++s)
            for (int d = 0; d < 3; ++d)
                rb.rules.push_back(FuzzyRule{in_labels[r], in_labels[s], in_labels[d],
                                             consequent((2 - r) + (2 - s) + (2 - d))});
    rb.validate();
    return rb;
}

inline FlhaMechanism expert_mechanism(const ScenarioConfig& cfg) {
    auto params = clustering_params(cfg);
    FlhaMechanism m;
    m.mfs = expert_mfs(cfg, params);
    m.rulebase = expert_rules();
    m.output_mf = uniform_mf(5, 0.0, 1.0, Metric::HoFactor, Polarity::Benefit, params);
    m.threshold = cfg.expert_threshold;
    return m;
}

enum class TrainVariant { Son, GenericQ };

struct TrainedArtifacts {
    MfBundle mfs;
    RuleBase rulebase;
    MembershipFunction output_mf;
    double threshold = 0.5;
    QTable table;
    std::map<FuzzyState, double> dq;
};

// Membership functions for one trained variant: subtractive clustering of
// the history for the self-configured variant, evenly spaced sets for the
// plain Q-learning one.
inline MfBundle build_input_mfs(const HistoryDataset& ds, TrainVariant variant,
                                const ClusteringParams& params) {
    MfBundle mfs;
    const Metric metrics[3] = {Metric::Rsrp, Metric::Sinr, Metric::Distance};
    MembershipFunction* slots[3] = {&mfs.rsrp, &mfs.sinr, &mfs.dist};
    if (variant == TrainVariant::Son) {
        auto centers = subtractive_cluster(ds.matrix(), params);
        for (int j = 0; j < 3; ++j) {
            auto centers_1d = project_centers(centers, static_cast<std::size_t>(j), params.merge_tol);
            *slots[j] = build_mf(centers_1d, ds.raw_min[static_cast<std::size_t>(j)],
                                 ds.raw_max[static_cast<std::size_t>(j)], metrics[j],
                                 kHistoryPolarity[static_cast<std::size_t>(j)], params);
        }
    } else {
        for (int j = 0; j < 3; ++j)
            *slots[j] = uniform_mf(3, ds.raw_min[static_cast<std::size_t>(j)],
                                   ds.raw_max[static_cast<std::size_t>(j)], metrics[j],
                                   kHistoryPolarity[static_cast<std::size_t>(j)], params);
    }
    return mfs;
}

inline TrainedArtifacts train_pipeline(const ScenarioConfig& cfg, const HistoryDataset& ds,
                                       TrainVariant variant, std::uint64_t master_seed) {
    auto params = clustering_params(cfg);
    params.validate();
    TrainedArtifacts art;
    art.mfs = build_input_mfs(ds, variant, params);

    HandoverEnv env(cfg, art.mfs);
    Rng rng(derive_seed(master_seed, variant == TrainVariant::Son ? "train/son" : "train/q"));
    art.table = train(env, qlearn_params(cfg), rng);
    art.dq = delta_q(art.table);

    auto extracted = extract_rules(art.dq, params);
    art.rulebase = std::move(extracted.rulebase);
    art.output_mf = std::move(extracted.output_mf);
    art.threshold = select_threshold(art.dq, art.mfs, art.rulebase, art.output_mf);
    return art;
}

// --- artifact directory -----------------------------------------------------
//
// Fixed layout per trained variant:
//   <dir>/mfs/rsrp.txt  mfs/sinr.txt  mfs/distance.txt  mfs/ho_factor.txt
//   <dir>/rules.txt  <dir>/qtable.txt  <dir>/threshold.txt
// The self-optimised variant lives at the artifact root, the plain
// Q-learning variant under q/.

inline std::string variant_dir(const std::string& root, MechKind kind) {
    if (kind == MechKind::FlhaQ) return root + "/q";
    return root;
}

inline void save_threshold(const std::string& path, double threshold) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write threshold file: " + path);
    out << "# ho triggering threshold\n" << detail::fmt_g17(threshold) << "\n";
}

inline double load_threshold(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open threshold file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        return std::stod(line);
    }
    throw DataError("threshold file has no value: " + path);
}

inline void save_artifacts(const std::string& dir, const TrainedArtifacts& art) {
    namespace fs = std::filesystem;
    fs::create_directories(dir + "/mfs");
    save_mf(dir + "/mfs/rsrp.txt", art.mfs.rsrp);
    save_mf(dir + "/mfs/sinr.txt", art.mfs.sinr);
    save_mf(dir + "/mfs/distance.txt", art.mfs.dist);
    save_mf(dir + "/mfs/ho_factor.txt", art.output_mf);
    save_rules(dir + "/rules.txt", art.rulebase);
    save_qtable(dir + "/qtable.txt", art.table, art.dq, art.rulebase);
    save_threshold(dir + "/threshold.txt", art.threshold);
}

inline FlhaMechanism load_flha(const std::string& dir) {
    FlhaMechanism m;
    m.mfs.rsrp = load_mf_file(dir + "/mfs/rsrp.txt");
    m.mfs.sinr = load_mf_file(dir + "/mfs/sinr.txt");
    m.mfs.dist = load_mf_file(dir + "/mfs/distance.txt");
    m.output_mf = load_mf_file(dir + "/mfs/ho_factor.txt");
    m.rulebase = load_rules_file(dir + "/rules.txt");
    m.threshold = load_threshold(dir + "/threshold.txt");
    return m;
}

// Builds a ready-to-run mechanism. The baselines need no artifacts; the
// trained variants load them from the artifact directory.
inline TriggerMechanism make_mechanism(MechKind kind, const ScenarioConfig& cfg,
                                       const std::string& artifact_root = "") {
    TriggerMechanism mech;
    mech.kind = kind;
    switch (kind) {
        case MechKind::A3Rsrp:
            mech.a3 = A3Params{cfg.a3_hom_db, cfg.a3_ttt_steps};
            break;
        case MechKind::FlhaExpert:
            mech.flha = expert_mechanism(cfg);
            break;
        case MechKind::FlhaQ:
        case MechKind::FlhaSon:
            if (artifact_root.empty())
                throw DataError(std::string(mech_name(kind)) +
                                " requires a trained artifact directory");
            mech.flha = load_flha(variant_dir(artifact_root, kind));
            break;
    }
    return mech;
}

}  // namespace hosim
