#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hosim/core.hpp"

namespace hosim {

enum class Metric { Rsrp, Sinr, Distance, HoFactor };
enum class Polarity { Benefit, Cost };

inline const char* metric_name(Metric m) {
    switch (m) {
        case Metric::Rsrp: return "rsrp";
        case Metric::Sinr: return "sinr";
        case Metric::Distance: return "d";
        case Metric::HoFactor: return "ho_factor";
    }
    return "?";
}

// Linguistic ladder shared by every membership function. Ladder index
// doubles as the ordering used by the rule-monotonicity checks.
inline const std::vector<std::string>& label_ladder() {
    static const std::vector<std::string> ladder = {"very-low", "low", "medium", "high", "very-high"};
    return ladder;
}

inline int ladder_index(const std::string& label) {
    const auto& ladder = label_ladder();
    for (std::size_t i = 0; i < ladder.size(); ++i)
        if (ladder[i] == label) return static_cast<int>(i);
    throw DataError("unknown linguistic label: " + label);
}

// Label subsets per set count: 2 -> {low, high}, 3 adds medium, 4 skips
// medium in favour of the very-* extremes, 5 is the full ladder.
inline std::vector<std::string> ladder_for_count(std::size_t k) {
    switch (k) {
        case 2: return {"low", "high"};
        case 3: return {"low", "medium", "high"};
        case 4: return {"very-low", "low", "high", "very-high"};
        case 5: return label_ladder();
        default:
            throw DataError("no label ladder for " + std::to_string(k) +
                            " fuzzy sets (supported: 2..5)");
    }
}

// Bell-shaped set over the normalized [0,1] axis: grade 1 at the center,
// exactly 0.5 one width away, falling off with slope controlled by b.
struct FuzzySet {
    std::string label;
    double center_v = 0.5;
    double width_sigma = 0.1;
    double slope_b = 2.0;
};

inline double membership(const FuzzySet& s, double x) {
    double t = std::fabs((x - s.center_v) / s.width_sigma);
    return 1.0 / (1.0 + std::pow(t, s.slope_b));
}

struct MembershipFunction {
    Metric metric = Metric::Rsrp;
    std::vector<FuzzySet> sets;  // ascending centers
    double raw_min = 0.0;
    double raw_max = 1.0;
    Polarity polarity = Polarity::Benefit;

    const FuzzySet& set_by_label(const std::string& label) const {
        for (const auto& s : sets)
            if (s.label == label) return s;
        throw DataError(std::string("membership function for ") + metric_name(metric) +
                        " has no set labelled '" + label + "'");
    }

    void validate() const {
        if (sets.size() < 2)
            throw DataError(std::string("membership function for ") + metric_name(metric) +
                            " needs at least 2 sets");
        std::set<std::string> labels;
        for (std::size_t i = 0; i < sets.size(); ++i) {
            if (!(sets[i].width_sigma > 0.0) || !(sets[i].slope_b > 0.0))
                throw DataError("fuzzy set parameters must be strictly positive");
            if (i > 0 && !(sets[i].center_v > sets[i - 1].center_v))
                throw DataError("fuzzy set centers must be strictly increasing");
            if (!labels.insert(sets[i].label).second)
                throw DataError("duplicate fuzzy set label: " + sets[i].label);
        }
        if (!(raw_min < raw_max))
            throw ConfigError(std::string("degenerate bounds for ") + metric_name(metric));
    }
};

// Min-max normalization clamped to [0,1]; cost metrics are inverted so a
// large raw distance lands near 0 and the ascending label ladder applies
// to every metric uniformly.
inline double normalize(double raw, const MembershipFunction& mf) {
    if (!(mf.raw_min < mf.raw_max))
        throw ConfigError(std::string("degenerate normalization bounds for ") + metric_name(mf.metric));
    double t = (raw - mf.raw_min) / (mf.raw_max - mf.raw_min);
    t = std::clamp(t, 0.0, 1.0);
    return mf.polarity == Polarity::Benefit ? t : 1.0 - t;
}

struct Fuzzified {
    std::vector<double> grades;  // one per set, same order as mf.sets
    int dominant = 0;            // index of the max grade, ties to the lower center
};

inline Fuzzified fuzzify(const MembershipFunction& mf, double x) {
    Fuzzified f;
    f.grades.reserve(mf.sets.size());
    for (const auto& s : mf.sets) f.grades.push_back(membership(s, x));
    f.dominant = 0;
    for (std::size_t i = 1; i < f.grades.size(); ++i)
        if (f.grades[i] > f.grades[f.dominant]) f.dominant = static_cast<int>(i);
    return f;
}

struct FuzzyRule {
    std::string rsrp;
    std::string sinr;
    std::string d;
    std::string consequent;  // label of the HO-factor membership function

    std::string antecedent_key() const { return rsrp + "|" + sinr + "|" + d; }
};

enum class RuleOrigin { Expert, Learned };

struct RuleBase {
    std::vector<FuzzyRule> rules;
    RuleOrigin origin = RuleOrigin::Expert;

    void validate() const {
        std::set<std::string> seen;
        for (const auto& r : rules)
            if (!seen.insert(r.antecedent_key()).second)
                throw DataError("duplicate rule antecedent: " + r.antecedent_key());
    }
};

// Grades of every label of the three input metrics, the working state the
// inference engine consumes.
struct PerMetricGrades {
    std::map<std::string, double> rsrp;
    std::map<std::string, double> sinr;
    std::map<std::string, double> d;
};

inline PerMetricGrades grades_from(const MembershipFunction& mf_rsrp, double x_rsrp,
                                   const MembershipFunction& mf_sinr, double x_sinr,
                                   const MembershipFunction& mf_d, double x_d) {
    PerMetricGrades g;
    for (const auto& s : mf_rsrp.sets) g.rsrp[s.label] = membership(s, x_rsrp);
    for (const auto& s : mf_sinr.sets) g.sinr[s.label] = membership(s, x_sinr);
    for (const auto& s : mf_d.sets) g.d[s.label] = membership(s, x_d);
    return g;
}

constexpr int kOutputGridSize = 1001;

// Aggregated fuzzy output sampled uniformly over [0,1].
struct Aggregate {
    std::array<double, kOutputGridSize> y{};

    static double grid_point(int i) { return static_cast<double>(i) / (kOutputGridSize - 1); }
};

namespace detail {
inline double grade_of(const std::map<std::string, double>& grades, const std::string& label,
                       const char* metric) {
    auto it = grades.find(label);
    if (it == grades.end())
        throw InferenceError(std::string("rule references unknown ") + metric + " label '" +
                             label + "'");
    return it->second;
}
}  // namespace detail

// Max-min inference: each rule fires with the minimum of its antecedent
// grades, clips its consequent set there, and the aggregate is the
// pointwise maximum over rules.
inline Aggregate infer(const RuleBase& rulebase, const MembershipFunction& output_mf,
                       const PerMetricGrades& grades) {
    if (rulebase.rules.empty()) throw InferenceError("inference on an empty rule base");
    Aggregate agg;
    for (const auto& rule : rulebase.rules) {
        double w = detail::grade_of(grades.rsrp, rule.rsrp, "rsrp");
        w = std::min(w, detail::grade_of(grades.sinr, rule.sinr, "sinr"));
        w = std::min(w, detail::grade_of(grades.d, rule.d, "d"));
        if (w <= 0.0) continue;
        const FuzzySet& out = output_mf.set_by_label(rule.consequent);
        for (int i = 0; i < kOutputGridSize; ++i) {
            double clipped = std::min(w, membership(out, Aggregate::grid_point(i)));
            if (clipped > agg.y[i]) agg.y[i] = clipped;
        }
    }
    return agg;
}

// Centroid defuzzification by trapezoidal quadrature over the sampling
// grid. An identically zero aggregate means no rule fired.
inline double defuzzify(const Aggregate& agg) {
    double num = 0.0;
    double den = 0.0;
    for (int i = 0; i + 1 < kOutputGridSize; ++i) {
        double h0 = Aggregate::grid_point(i);
        double h1 = Aggregate::grid_point(i + 1);
        double dx = h1 - h0;
        den += 0.5 * (agg.y[i] + agg.y[i + 1]) * dx;
        num += 0.5 * (agg.y[i] * h0 + agg.y[i + 1] * h1) * dx;
    }
    if (!(den > 0.0)) throw InferenceError("defuzzification of an all-zero aggregate: no rule fired");
    return num / den;
}

// Crossover-slope assignment: b chosen per adjacent pair so each set's
// grade at the midpoint between centers is 0.25 (the ~25% overlap rule),
// then averaged per set and clamped to [2, 12]. Midpoints inside one width
// of a center cannot reach 0.25; they take the clamp floor.
inline void assign_slopes(std::vector<FuzzySet>& sets) {
    if (sets.size() < 2) {
        for (auto& s : sets) s.slope_b = 2.0;
        return;
    }
    std::vector<double> sum(sets.size(), 0.0);
    std::vector<int> cnt(sets.size(), 0);
    for (std::size_t i = 0; i + 1 < sets.size(); ++i) {
        double mid = 0.5 * (sets[i].center_v + sets[i + 1].center_v);
        for (std::size_t j : {i, i + 1}) {
            double t = std::fabs(mid - sets[j].center_v) / sets[j].width_sigma;
            double b = t > 1.0 ? std::log(3.0) / std::log(t) : 2.0;
            sum[j] += std::clamp(b, 2.0, 12.0);
            cnt[j] += 1;
        }
    }
    for (std::size_t j = 0; j < sets.size(); ++j)
        sets[j].slope_b = std::clamp(sum[j] / cnt[j], 2.0, 12.0);
}

// --- plain-text serialization ---------------------------------------------
//
// One row per set: metric,label,center,sigma,b. Bounds and polarity ride in
// comment lines so a file is self-contained and diff-friendly.

namespace detail {
inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace detail

inline void save_mf(std::ostream& out, const MembershipFunction& mf) {
    out << "# bounds," << detail::fmt_g17(mf.raw_min) << "," << detail::fmt_g17(mf.raw_max) << "\n";
    out << "# polarity," << (mf.polarity == Polarity::Benefit ? "benefit" : "cost") << "\n";
    out << "metric,label,center,sigma,b\n";
    for (const auto& s : mf.sets)
        out << metric_name(mf.metric) << "," << s.label << "," << detail::fmt_g17(s.center_v)
            << "," << detail::fmt_g17(s.width_sigma) << "," << detail::fmt_g17(s.slope_b) << "\n";
}

inline void save_mf(const std::string& path, const MembershipFunction& mf) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write membership function file: " + path);
    save_mf(out, mf);
}

namespace detail {
inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline Metric metric_from_name(const std::string& name) {
    if (name == "rsrp") return Metric::Rsrp;
    if (name == "sinr") return Metric::Sinr;
    if (name == "d") return Metric::Distance;
    if (name == "ho_factor") return Metric::HoFactor;
    throw DataError("unknown metric name: " + name);
}
}  // namespace detail

inline MembershipFunction load_mf(std::istream& in, const std::string& origin = "<stream>") {
    MembershipFunction mf;
    bool have_metric = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# bounds,", 0) == 0) {
            auto f = detail::split_csv(line.substr(2));
            if (f.size() != 3) throw DataError(origin + ": malformed bounds line");
            mf.raw_min = std::stod(f[1]);
            mf.raw_max = std::stod(f[2]);
            continue;
        }
        if (line.rfind("# polarity,", 0) == 0) {
            auto f = detail::split_csv(line.substr(2));
            mf.polarity = (f.at(1) == "cost") ? Polarity::Cost : Polarity::Benefit;
            continue;
        }
        if (line[0] == '#' || line.rfind("metric,", 0) == 0) continue;
        auto f = detail::split_csv(line);
        if (f.size() != 5) throw DataError(origin + ": malformed set row: " + line);
        if (!have_metric) {
            mf.metric = detail::metric_from_name(f[0]);
            have_metric = true;
        }
        mf.sets.push_back(FuzzySet{f[1], std::stod(f[2]), std::stod(f[3]), std::stod(f[4])});
    }
    mf.validate();
    return mf;
}

inline MembershipFunction load_mf_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open membership function file: " + path);
    return load_mf(in, path);
}

// One row per rule: three antecedent labels then the consequent label.
inline void save_rules(std::ostream& out, const RuleBase& rb) {
    out << "# origin," << (rb.origin == RuleOrigin::Expert ? "expert" : "learned") << "\n";
    out << "rsrp,sinr,d,ho_factor\n";
    for (const auto& r : rb.rules)
        out << r.rsrp << "," << r.sinr << "," << r.d << "," << r.consequent << "\n";
}

inline void save_rules(const std::string& path, const RuleBase& rb) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write rule file: " + path);
    save_rules(out, rb);
}

inline RuleBase load_rules(std::istream& in, const std::string& origin = "<stream>") {
    RuleBase rb;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# origin,", 0) == 0) {
            rb.origin = line.find("learned") != std::string::npos ? RuleOrigin::Learned
                                                                  : RuleOrigin::Expert;
            continue;
        }
        if (line[0] == '#' || line.rfind("rsrp,", 0) == 0) continue;
        auto f = detail::split_csv(line);
        if (f.size() != 4) throw DataError(origin + ": malformed rule row: " + line);
        rb.rules.push_back(FuzzyRule{f[0], f[1], f[2], f[3]});
    }
    rb.validate();
    return rb;
}

inline RuleBase load_rules_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open rule file: " + path);
    return load_rules(in, path);
}

}  // namespace hosim
