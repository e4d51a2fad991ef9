#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "hosim/core.hpp"
#include "hosim/fuzzy.hpp"

namespace hosim {

struct ClusteringParams {
    double alpha = 16.0;           // influence range of the potential kernel
    double beta = 12.0;            // squash range of the subtraction kernel
    double epsilon_reject = 0.005; // rejection ratio, stops center selection
    double delta = 2.8284271247461903;  // width divisor, sqrt(8)
    double width_coefficient = 0.5;     // influence radius sqrt(4/alpha) for alpha=16
    double merge_tol = 0.05;            // per-dimension center-merge tolerance

    void validate() const {
        if (!(alpha > 0.0) || !(beta > 0.0) || !(delta > 0.0) || !(width_coefficient > 0.0))
            throw ConfigError("clustering parameters must be strictly positive");
        if (!(epsilon_reject > 0.0 && epsilon_reject < 1.0))
            throw ConfigError("rejection ratio must lie in (0,1)");
        if (!(merge_tol >= 0.0 && merge_tol < 1.0))
            throw ConfigError("merge tolerance must lie in [0,1)");
    }
};

// Row-major data matrix of normalized samples; clustering is agnostic to
// the number of dimensions.
using DataMatrix = std::vector<std::vector<double>>;

namespace detail {
inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}
}  // namespace detail

// Potential of each point: sum over the other points of exp(-alpha*dist^2).
inline std::vector<double> potentials(const DataMatrix& points, double alpha) {
    const std::size_t n = points.size();
    std::vector<double> p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) continue;
            s += std::exp(-alpha * detail::sq_dist(points[i], points[k]));
        }
        p[i] = s;
    }
    return p;
}

struct ClusterCenter {
    std::vector<double> coords;
    double potential = 0.0;
};

// One-pass subtractive clustering. The highest-potential point becomes the
// first center; after each selection the potentials are reduced around it
// and the next candidate is accepted while its potential stays above
// epsilon times the first one. Centers are always input points.
inline std::vector<ClusterCenter> subtractive_cluster(const DataMatrix& points,
                                                      const ClusteringParams& params) {
    params.validate();
    const std::size_t n = points.size();
    if (n == 0) throw DataError("subtractive clustering on an empty dataset");

    std::vector<double> p = potentials(points, params.alpha);
    auto argmax = [&p]() {
        std::size_t best = 0;
        for (std::size_t i = 1; i < p.size(); ++i)
            if (p[i] > p[best]) best = i;
        return best;
    };

    std::vector<ClusterCenter> centers;
    std::size_t first = argmax();
    const double p_first = p[first];
    centers.push_back({points[first], p_first});

    while (centers.size() < n) {
        const auto& last = centers.back();
        for (std::size_t i = 0; i < n; ++i)
            p[i] -= last.potential * std::exp(-params.beta * detail::sq_dist(points[i], last.coords));
        std::size_t cand = argmax();
        if (!(p[cand] > params.epsilon_reject * p_first)) break;
        centers.push_back({points[cand], p[cand]});
    }
    return centers;
}

// Coordinate projection with iterative merging: values closer than the
// tolerance collapse to their mean until the sequence is stable.
inline std::vector<double> project_centers(const std::vector<ClusterCenter>& centers,
                                           std::size_t dim, double merge_tol) {
    if (centers.empty()) throw DataError("projection of an empty center list");
    std::vector<double> vals;
    vals.reserve(centers.size());
    for (const auto& c : centers) vals.push_back(c.coords.at(dim));
    std::sort(vals.begin(), vals.end());

    bool merged = true;
    while (merged && vals.size() > 1) {
        merged = false;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            if (vals[i + 1] - vals[i] < merge_tol) {
                double mean = 0.5 * (vals[i] + vals[i + 1]);
                vals[i] = mean;
                vals.erase(vals.begin() + static_cast<std::ptrdiff_t>(i) + 1);
                merged = true;
                break;
            }
        }
    }
    return vals;
}

// Builds the membership function for one metric from its projected cluster
// centers. Widths follow sigma = width_coefficient * range / delta on the
// normalized axis (range 1), labels walk the ascending ladder.
inline MembershipFunction build_mf(const std::vector<double>& centers_1d,
                                   double raw_min, double raw_max, Metric metric,
                                   Polarity polarity, const ClusteringParams& params) {
    if (centers_1d.size() < 2)
        throw DataError(std::string("cannot build a membership function for ") +
                        metric_name(metric) + ": fewer than 2 cluster centers (widen the "
                        "rejection ratio or lower the merge tolerance)");
    if (centers_1d.size() > label_ladder().size())
        throw DataError(std::string("cannot build a membership function for ") +
                        metric_name(metric) + ": more than 5 cluster centers (raise the "
                        "rejection ratio or the merge tolerance)");

    MembershipFunction mf;
    mf.metric = metric;
    mf.raw_min = raw_min;
    mf.raw_max = raw_max;
    mf.polarity = polarity;

    const double sigma = params.width_coefficient * 1.0 / params.delta;
    auto labels = ladder_for_count(centers_1d.size());
    for (std::size_t i = 0; i < centers_1d.size(); ++i)
        mf.sets.push_back(FuzzySet{labels[i], centers_1d[i], sigma, 2.0});
    assign_slopes(mf.sets);
    mf.validate();
    return mf;
}

// Evenly spaced sets over [0,1]; the uniform layout used by the expert
// baseline and the non-clustered learned variant.
inline MembershipFunction uniform_mf(std::size_t k, double raw_min, double raw_max,
                                     Metric metric, Polarity polarity,
                                     const ClusteringParams& params) {
    std::vector<double> centers;
    for (std::size_t i = 0; i < k; ++i)
        centers.push_back(static_cast<double>(i) / (static_cast<double>(k) - 1.0));
    return build_mf(centers, raw_min, raw_max, metric, polarity, params);
}

// --- measurement history ----------------------------------------------------

// Serving-link samples collected during a baseline run, stored both raw and
// normalized. Metric order is fixed: RSRP, SINR, distance. The distance
// column is normalized with cost polarity, so far means near 0.
struct HistoryDataset {
    std::vector<std::array<double, 3>> raw;
    std::vector<std::array<double, 3>> norm;
    std::array<double, 3> raw_min{};
    std::array<double, 3> raw_max{};
    std::vector<std::string> warnings;

    std::size_t size() const { return raw.size(); }

    DataMatrix matrix() const {
        DataMatrix m;
        m.reserve(norm.size());
        for (const auto& row : norm) m.push_back({row[0], row[1], row[2]});
        return m;
    }
};

inline constexpr std::array<Polarity, 3> kHistoryPolarity = {Polarity::Benefit, Polarity::Benefit,
                                                             Polarity::Cost};
inline constexpr std::array<const char*, 3> kHistoryColumns = {"rsrp_dbm", "sinr_db", "distance_m"};

// Normalizes the raw columns in place against their observed min/max.
inline void normalize_history(HistoryDataset& ds) {
    if (ds.raw.empty()) throw DataError("cannot normalize an empty history dataset");
    for (int j = 0; j < 3; ++j) {
        ds.raw_min[j] = ds.raw[0][j];
        ds.raw_max[j] = ds.raw[0][j];
        for (const auto& row : ds.raw) {
            ds.raw_min[j] = std::min(ds.raw_min[j], row[j]);
            ds.raw_max[j] = std::max(ds.raw_max[j], row[j]);
        }
        if (!(ds.raw_max[j] - ds.raw_min[j] > 1e-9))
            ds.warnings.push_back(std::string("history column ") + kHistoryColumns[j] +
                                  " is near-constant; clustering would yield a single center");
    }
    ds.norm.clear();
    ds.norm.reserve(ds.raw.size());
    for (const auto& row : ds.raw) {
        std::array<double, 3> n{};
        for (int j = 0; j < 3; ++j) {
            double span = ds.raw_max[j] - ds.raw_min[j];
            double t = span > 0.0 ? (row[j] - ds.raw_min[j]) / span : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            n[j] = kHistoryPolarity[j] == Polarity::Benefit ? t : 1.0 - t;
        }
        ds.norm.push_back(n);
    }
}

inline void save_history(const std::string& path, const HistoryDataset& ds) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write history file: " + path);
    for (int j = 0; j < 3; ++j)
        out << "# bounds," << kHistoryColumns[j] << "," << detail::fmt_g17(ds.raw_min[j]) << ","
            << detail::fmt_g17(ds.raw_max[j]) << "\n";
    out << "rsrp_dbm,sinr_db,distance_m,rsrp_norm,sinr_norm,d_norm\n";
    char buf[160];
    for (std::size_t i = 0; i < ds.raw.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.9f,%.9f,%.9f\n", ds.raw[i][0],
                      ds.raw[i][1], ds.raw[i][2], ds.norm[i][0], ds.norm[i][1], ds.norm[i][2]);
        out << buf;
    }
}

inline HistoryDataset load_history(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open history file: " + path);
    HistoryDataset ds;
    std::string line;
    int bounds_seen = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# bounds,", 0) == 0) {
            auto f = detail::split_csv(line.substr(2));
            if (f.size() != 4) throw DataError(path + ": malformed bounds line");
            for (int j = 0; j < 3; ++j) {
                if (f[1] == kHistoryColumns[j]) {
                    ds.raw_min[j] = std::stod(f[2]);
                    ds.raw_max[j] = std::stod(f[3]);
                    ++bounds_seen;
                }
            }
            continue;
        }
        if (line[0] == '#' || line.rfind("rsrp_dbm,", 0) == 0) continue;
        auto f = detail::split_csv(line);
        if (f.size() != 6) throw DataError(path + ": malformed history row: " + line);
        ds.raw.push_back({std::stod(f[0]), std::stod(f[1]), std::stod(f[2])});
        ds.norm.push_back({std::stod(f[3]), std::stod(f[4]), std::stod(f[5])});
    }
    if (bounds_seen != 3) throw DataError(path + ": missing normalization bounds header");
    if (ds.raw.empty()) throw DataError(path + ": history file has no samples");
    return ds;
}

}  // namespace hosim
