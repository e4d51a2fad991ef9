#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "hosim/core.hpp"
#include "hosim/kpi.hpp"
#include "hosim/pipeline.hpp"
#include "hosim/sim.hpp"

namespace hosim {

struct CompareSpec {
    std::vector<double> speeds_kmh;
    std::vector<MechKind> mechanisms;
    std::vector<std::uint64_t> seeds;
};

struct CellResult {
    double speed_kmh = 0.0;
    MechKind mech = MechKind::A3Rsrp;
    std::uint64_t seed = 0;
    KpiReport report;
};

// Full cross-product of (speed, mechanism, seed) runs. A failing cell
// aborts the sweep with the offending combination in the message.
inline std::vector<CellResult> run_matrix(const ScenarioConfig& base_cfg, const CompareSpec& spec,
                                          const std::string& artifact_root) {
    std::vector<CellResult> results;
    for (double speed : spec.speeds_kmh) {
        for (MechKind kind : spec.mechanisms) {
            ScenarioConfig cfg = base_cfg;
            cfg.ue_speed_kmh = speed;
            TriggerMechanism mech = make_mechanism(kind, cfg, artifact_root);
            for (std::uint64_t seed : spec.seeds) {
                try {
                    CellResult cell;
                    cell.speed_kmh = speed;
                    cell.mech = kind;
                    cell.seed = seed;
                    cell.report = run(cfg, mech, seed).report;
                    results.push_back(std::move(cell));
                } catch (const std::exception& e) {
                    throw DataError("compare cell failed (mechanism=" +
                                    std::string(mech_name(kind)) + ", speed=" +
                                    std::to_string(speed) + ", seed=" + std::to_string(seed) +
                                    "): " + e.what());
                }
            }
        }
    }
    return results;
}

namespace detail {

struct KpiColumn {
    const char* name;
    double KpiReport::* field;
};

inline const std::vector<KpiColumn>& kpi_columns() {
    static const std::vector<KpiColumn> cols = {
        {"ho_ratio", &KpiReport::ho_ratio},
        {"pingpong_ratio", &KpiReport::pingpong_ratio},
        {"failure_ratio", &KpiReport::failure_ratio},
        {"sum_throughput_bps", &KpiReport::sum_throughput_bps},
        {"mean_latency_s", &KpiReport::mean_latency_s},
    };
    return cols;
}

inline double mean_kpi(const std::vector<CellResult>& results, double speed, MechKind mech,
                       double KpiReport::* field) {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : results) {
        if (c.speed_kmh == speed && c.mech == mech) {
            sum += c.report.*field;
            n += 1;
        }
    }
    return n > 0 ? sum / n : 0.0;
}

inline std::string speed_tag(double speed) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", speed);
    return buf;
}

inline void write_speed_kpi_table(const std::string& path, const std::vector<CellResult>& results,
                                  double speed, const std::vector<MechKind>& mechanisms) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write comparison table: " + path);
    out << "mechanism,seed,ho_ratio,pingpong_ratio,failure_ratio,sum_throughput_bps,"
           "mean_latency_s,outage_steps\n";
    char buf[224];
    for (MechKind m : mechanisms) {
        for (const auto& c : results) {
            if (c.speed_kmh != speed || c.mech != m) continue;
            std::snprintf(buf, sizeof buf, "%s,%llu,%.9f,%.9f,%.9f,%.3f,%.9f,%ld\n", mech_name(m),
                          static_cast<unsigned long long>(c.seed), c.report.ho_ratio,
                          c.report.pingpong_ratio, c.report.failure_ratio,
                          c.report.sum_throughput_bps, c.report.mean_latency_s,
                          c.report.outage_steps);
            out << buf;
        }
    }
}

// Per-speed figure file: one row per (speed, mechanism) with the seed-mean
// of one KPI.
inline void write_kpi_vs_speed(const std::string& path, const std::vector<CellResult>& results,
                               const CompareSpec& spec, double KpiReport::* field,
                               const char* value_name) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write figure file: " + path);
    out << "speed_kmh,mechanism," << value_name << "\n";
    char buf[96];
    for (double speed : spec.speeds_kmh) {
        for (MechKind m : spec.mechanisms) {
            std::snprintf(buf, sizeof buf, "%g,%s,%.9f\n", speed, mech_name(m),
                          mean_kpi(results, speed, m, field));
            out << buf;
        }
    }
}

// Time-series figure file: cumulative per-step count, seed-mean.
inline void write_count_timeseries(const std::string& path, const std::vector<CellResult>& results,
                                   const CompareSpec& spec, int StepKpi::* field,
                                   const char* value_name) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write figure file: " + path);
    out << "speed_kmh,mechanism,step," << value_name << "\n";
    char buf[96];
    for (double speed : spec.speeds_kmh) {
        for (MechKind m : spec.mechanisms) {
            std::vector<double> cum;
            int n_seeds = 0;
            for (const auto& c : results) {
                if (c.speed_kmh != speed || c.mech != m) continue;
                n_seeds += 1;
                if (cum.size() < c.report.time_series.size())
                    cum.resize(c.report.time_series.size(), 0.0);
                double acc = 0.0;
                for (std::size_t i = 0; i < c.report.time_series.size(); ++i) {
                    acc += c.report.time_series[i].*field;
                    cum[i] += acc;
                }
            }
            for (std::size_t i = 0; i < cum.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%g,%s,%zu,%.6f\n", speed, mech_name(m), i,
                              n_seeds > 0 ? cum[i] / n_seeds : 0.0);
                out << buf;
            }
        }
    }
}

}  // namespace detail

// Writes the per-speed KPI tables, the gain table against the proposed
// variant, and the eight figure files.
inline void write_compare_outputs(const std::string& out_dir, const CompareSpec& spec,
                                  const std::vector<CellResult>& results) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    for (double speed : spec.speeds_kmh)
        detail::write_speed_kpi_table(out_dir + "/kpi_speed" + detail::speed_tag(speed) + ".csv",
                                      results, speed, spec.mechanisms);

    // Gains are measured against the self-optimised variant when present,
    // otherwise against the first mechanism in the list.
    MechKind reference = spec.mechanisms.front();
    for (MechKind m : spec.mechanisms)
        if (m == MechKind::FlhaSon) reference = m;
    {
        std::ofstream out(out_dir + "/gains.csv");
        if (!out) throw DataError("cannot write gains table");
        out << "speed_kmh,mechanism,kpi,proposed,competitor,gain\n";
        char buf[192];
        for (double speed : spec.speeds_kmh) {
            for (MechKind m : spec.mechanisms) {
                for (const auto& col : detail::kpi_columns()) {
                    double p = detail::mean_kpi(results, speed, reference, col.field);
                    double c = detail::mean_kpi(results, speed, m, col.field);
                    double g = p == 0.0 ? std::nan("") : (p - c) / p;
                    std::snprintf(buf, sizeof buf, "%g,%s,%s,%.9g,%.9g,%.9g\n", speed,
                                  mech_name(m), col.name, p, c, g);
                    out << buf;
                }
            }
        }
    }

    detail::write_kpi_vs_speed(out_dir + "/fig08_ho_ratio.csv", results, spec,
                               &KpiReport::ho_ratio, "ho_ratio");
    detail::write_count_timeseries(out_dir + "/fig09_ho_count_ts.csv", results, spec,
                                   &StepKpi::ho_count, "cum_ho_count");
    detail::write_kpi_vs_speed(out_dir + "/fig10_pingpong_ratio.csv", results, spec,
                               &KpiReport::pingpong_ratio, "pingpong_ratio");
    detail::write_count_timeseries(out_dir + "/fig11_pingpong_ts.csv", results, spec,
                                   &StepKpi::pingpong_count, "cum_pingpong_count");
    detail::write_kpi_vs_speed(out_dir + "/fig12_hof_ratio.csv", results, spec,
                               &KpiReport::failure_ratio, "failure_ratio");
    detail::write_count_timeseries(out_dir + "/fig13_hof_ts.csv", results, spec,
                                   &StepKpi::failure_count, "cum_failure_count");
    detail::write_kpi_vs_speed(out_dir + "/fig14_throughput.csv", results, spec,
                               &KpiReport::sum_throughput_bps, "sum_throughput_bps");
    detail::write_kpi_vs_speed(out_dir + "/fig15_latency.csv", results, spec,
                               &KpiReport::mean_latency_s, "mean_latency_s");
}

}  // namespace hosim
