#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "hosim/channel.hpp"
#include "hosim/cluster.hpp"
#include "hosim/core.hpp"
#include "hosim/fuzzy.hpp"
#include "hosim/rng.hpp"

namespace hosim {

// Dominant fuzzy labels of the serving link's three decision metrics.
struct FuzzyState {
    std::string rsrp;
    std::string sinr;
    std::string d;

    bool operator<(const FuzzyState& o) const {
        if (rsrp != o.rsrp) return rsrp < o.rsrp;
        if (sinr != o.sinr) return sinr < o.sinr;
        return d < o.d;
    }
    bool operator==(const FuzzyState& o) const {
        return rsrp == o.rsrp && sinr == o.sinr && d == o.d;
    }
};

enum class Action { Trigger, Maintain };

struct QLearnParams {
    double learning_rate = 0.1;
    double discount = 0.9;
    double epsilon_start = 0.5;
    double epsilon_end = 0.05;
    int epochs = 200;
    int episode_steps = 200;

    void validate() const {
        if (!(learning_rate > 0.0 && learning_rate < 1.0))
            throw ConfigError("learning rate must lie in (0,1)");
        if (!(discount > 0.0 && discount < 1.0)) throw ConfigError("discount must lie in (0,1)");
        if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0) ||
            !(epsilon_end >= 0.0 && epsilon_end <= 1.0) || epsilon_start < epsilon_end)
            throw ConfigError("epsilon schedule must satisfy 1 >= start >= end >= 0");
        if (epochs < 1 || episode_steps < 1)
            throw ConfigError("epochs and episode_steps must be at least 1");
    }
};

struct QTable {
    struct Entry {
        double q_trigger = 0.0;
        double q_maintain = 0.0;
        long n_trigger = 0;
        long n_maintain = 0;

        double q_max() const { return std::max(q_trigger, q_maintain); }
        // Greedy action; ties prefer triggering.
        Action greedy() const { return q_trigger >= q_maintain ? Action::Trigger : Action::Maintain; }
    };

    std::map<FuzzyState, Entry> entries;  // only visited states are present

    double q_max_of(const FuzzyState& s) const {
        auto it = entries.find(s);
        return it == entries.end() ? 0.0 : it->second.q_max();
    }
    Action greedy_of(const FuzzyState& s) const {
        auto it = entries.find(s);
        return it == entries.end() ? Action::Trigger : it->second.greedy();
    }
};

// The bundle of per-metric membership functions shared by every FLHA stage.
struct MfBundle {
    MembershipFunction rsrp;
    MembershipFunction sinr;
    MembershipFunction dist;
};

// Fuzzify the serving link into its state vector: normalize each metric,
// take the dominant label.
inline FuzzyState encode_state(const LinkMeasurement& serving, const MfBundle& mfs) {
    auto dominant = [](const MembershipFunction& mf, double raw) {
        auto f = fuzzify(mf, normalize(raw, mf));
        return mf.sets[static_cast<std::size_t>(f.dominant)].label;
    };
    return FuzzyState{dominant(mfs.rsrp, serving.rsrp_dbm), dominant(mfs.sinr, serving.sinr_db),
                      dominant(mfs.dist, serving.distance_m)};
}

// Reward of landing in a state: the sum of the three fuzzy-set centers, so
// better radio conditions (and shorter distances) earn more.
inline double reward(const FuzzyState& s, const MfBundle& mfs) {
    return mfs.rsrp.set_by_label(s.rsrp).center_v + mfs.sinr.set_by_label(s.sinr).center_v +
           mfs.dist.set_by_label(s.d).center_v;
}

inline double epsilon_at_epoch(const QLearnParams& p, int epoch) {
    if (p.epochs <= 1) return p.epsilon_start;
    double t = static_cast<double>(epoch) / (p.epochs - 1);
    return p.epsilon_start + (p.epsilon_end - p.epsilon_start) * t;
}

inline Action select_action(const QTable& table, const FuzzyState& s, double epsilon, Rng& rng) {
    if (rng.uniform01() < epsilon)
        return rng.uniform01() < 0.5 ? Action::Trigger : Action::Maintain;
    return table.greedy_of(s);
}

// Tabular Q-learning over an environment. The Env concept:
//   void begin_episode(Rng&);
//   int agent_count() const;
//   FuzzyState observe(int agent) const;
//   Action apply(int agent, Action requested, Rng&);   // returns the action taken
//   void advance(Rng&);
//   double reward_of(int agent) const;                 // at the post-advance state
//   bool terminal(int agent) const;
//
// Each epoch runs one episode of at most episode_steps steps. An agent
// reaching a terminal state takes one final update bootstrapping with
// zero and then sits out the rest of the episode; the episode ends when
// every agent is done or the step budget runs out. Epsilon anneals
// linearly across epochs.
template <typename Env>
QTable train(Env& env, const QLearnParams& params, Rng& rng) {
    params.validate();
    QTable table;
    std::vector<FuzzyState> state;
    std::vector<Action> acted;
    std::vector<char> alive;

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        const double eps = epsilon_at_epoch(params, epoch);
        env.begin_episode(rng);
        const int agents = env.agent_count();
        state.assign(static_cast<std::size_t>(agents), FuzzyState{});
        acted.assign(static_cast<std::size_t>(agents), Action::Maintain);
        alive.assign(static_cast<std::size_t>(agents), 1);
        for (int a = 0; a < agents; ++a) state[static_cast<std::size_t>(a)] = env.observe(a);

        for (int step = 0; step < params.episode_steps; ++step) {
            int live = 0;
            for (int a = 0; a < agents; ++a) {
                if (!alive[static_cast<std::size_t>(a)]) continue;
                ++live;
                Action requested = select_action(table, state[static_cast<std::size_t>(a)], eps, rng);
                acted[static_cast<std::size_t>(a)] = env.apply(a, requested, rng);
            }
            if (live == 0) break;
            env.advance(rng);

            for (int a = 0; a < agents; ++a) {
                if (!alive[static_cast<std::size_t>(a)]) continue;
                const FuzzyState next = env.observe(a);
                const double r = env.reward_of(a);
                const bool term = env.terminal(a);
                auto& e = table.entries[state[static_cast<std::size_t>(a)]];
                const double q_next = term ? 0.0 : table.q_max_of(next);
                if (acted[static_cast<std::size_t>(a)] == Action::Trigger) {
                    e.q_trigger += params.learning_rate * (r + params.discount * q_next - e.q_trigger);
                    e.n_trigger += 1;
                } else {
                    e.q_maintain += params.learning_rate * (r + params.discount * q_next - e.q_maintain);
                    e.n_maintain += 1;
                }
                state[static_cast<std::size_t>(a)] = next;
                if (term) alive[static_cast<std::size_t>(a)] = 0;
            }
        }
    }
    return table;
}

// Per-state preference for triggering over maintaining.
inline std::map<FuzzyState, double> delta_q(const QTable& table) {
    if (table.entries.empty()) throw DataError("delta_q of an empty Q-table");
    std::map<FuzzyState, double> dq;
    for (const auto& [s, e] : table.entries) dq[s] = e.q_trigger - e.q_maintain;
    return dq;
}

// Keeps only states whose both actions were sampled at least min_visits
// times; a delta-Q built on one or two TD updates is noise, and one noisy
// rule is enough to destabilise the whole triggering policy.
inline std::map<FuzzyState, double> filter_reliable(const QTable& table,
                                                    const std::map<FuzzyState, double>& dq,
                                                    long min_visits) {
    std::map<FuzzyState, double> out;
    for (const auto& [s, v] : dq) {
        const auto& e = table.entries.at(s);
        if (e.n_trigger >= min_visits && e.n_maintain >= min_visits) out[s] = v;
    }
    if (out.empty())
        throw DataError("no state reached " + std::to_string(min_visits) +
                        " visits per action; train longer or lower q_min_visits");
    return out;
}

struct ExtractedRules {
    RuleBase rulebase;
    MembershipFunction output_mf;
};

// Turns the trained table into fuzzy rules: delta-Q values are min-max
// normalized, clustered in 1-D to form the HO-factor output sets, and each
// state becomes one rule whose consequent is the output set nearest its
// normalized delta-Q. Ascending delta-Q therefore maps to a non-decreasing
// position on the output ladder.
inline ExtractedRules extract_rules(const std::map<FuzzyState, double>& dq,
                                    const ClusteringParams& params) {
    if (dq.size() < 2) throw DataError("rule extraction needs at least 2 states");
    double lo = dq.begin()->second;
    double hi = lo;
    for (const auto& [s, v] : dq) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi - lo > 0.0))
        throw DataError("rule extraction failed: all delta-Q values identical "
                        "(degenerate policy, train longer)");

    DataMatrix points;
    points.reserve(dq.size());
    for (const auto& [s, v] : dq) points.push_back({(v - lo) / (hi - lo)});

    auto centers = subtractive_cluster(points, params);
    auto centers_1d = project_centers(centers, 0, params.merge_tol);
    auto output_mf = build_mf(centers_1d, lo, hi, Metric::HoFactor, Polarity::Benefit, params);

    RuleBase rb;
    rb.origin = RuleOrigin::Learned;
    for (const auto& [s, v] : dq) {
        double x = (v - lo) / (hi - lo);
        std::size_t nearest = 0;
        for (std::size_t i = 1; i < output_mf.sets.size(); ++i)
            if (std::fabs(output_mf.sets[i].center_v - x) <
                std::fabs(output_mf.sets[nearest].center_v - x))
                nearest = i;
        rb.rules.push_back(FuzzyRule{s.rsrp, s.sinr, s.d, output_mf.sets[nearest].label});
    }
    rb.validate();
    return ExtractedRules{std::move(rb), std::move(output_mf)};
}

// The triggering threshold: run the state with delta-Q closest to zero
// (the indifference point) through the learned inference pipeline and use
// the resulting crisp HO factor.
inline double select_threshold(const std::map<FuzzyState, double>& dq, const MfBundle& mfs,
                               const RuleBase& rulebase, const MembershipFunction& output_mf) {
    if (dq.empty()) throw DataError("threshold selection on an empty delta-Q map");
    auto best = dq.begin();
    for (auto it = dq.begin(); it != dq.end(); ++it) {
        double a = std::fabs(it->second);
        double b = std::fabs(best->second);
        if (a < b || (a == b && it->second < best->second)) best = it;
    }
    const FuzzyState& s = best->first;
    auto grades = grades_from(mfs.rsrp, mfs.rsrp.set_by_label(s.rsrp).center_v, mfs.sinr,
                              mfs.sinr.set_by_label(s.sinr).center_v, mfs.dist,
                              mfs.dist.set_by_label(s.d).center_v);
    return defuzzify(infer(rulebase, output_mf, grades));
}

// Text export mirroring the learned-rule table layout: one row per state
// sorted by ascending delta-Q, with the action values alongside.
inline void save_qtable(const std::string& path, const QTable& table,
                        const std::map<FuzzyState, double>& dq, const RuleBase& rulebase) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write Q-table file: " + path);
    std::map<std::string, std::string> consequent;
    for (const auto& r : rulebase.rules) consequent[r.rsrp + "|" + r.sinr + "|" + r.d] = r.consequent;

    std::vector<std::pair<FuzzyState, double>> rows(dq.begin(), dq.end());
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });

    out << "rule_no,rsrp,sinr,d,q_trigger,q_maintain,delta_q,ho_factor\n";
    char buf[64];
    int no = 1;
    for (const auto& [s, v] : rows) {
        const auto& e = table.entries.at(s);
        auto it = consequent.find(s.rsrp + "|" + s.sinr + "|" + s.d);
        out << no++ << "," << s.rsrp << "," << s.sinr << "," << s.d << ",";
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f", e.q_trigger, e.q_maintain, v);
        out << buf << "," << (it == consequent.end() ? "-" : it->second) << "\n";
    }
}

}  // namespace hosim
