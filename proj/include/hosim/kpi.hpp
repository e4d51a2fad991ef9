#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "hosim/core.hpp"
#include "hosim/handover.hpp"

namespace hosim {

// Per-UE per-step link record; together with the event log it is the
// complete input of every KPI.
struct LinkRecord {
    long step = 0;
    int ue_id = 0;
    int serving_bs = 0;
    double sinr_db = 0.0;
    double rate_bps = 0.0;
    double latency_s = 0.0;
    bool ho_this_step = false;
    bool outage = false;
};

// Handovers triggered per UE per decision step.
inline double ho_ratio(const std::vector<HOEvent>& events, int ue_count, long total_steps) {
    if (total_steps < 1) throw DataError("ho_ratio needs at least one step");
    return static_cast<double>(events.size()) / (static_cast<double>(ue_count) * total_steps);
}

// Ping-pong handovers over all triggered handovers; 0 when none happened.
inline double pingpong_ratio(const std::vector<HOEvent>& events) {
    if (events.empty()) return 0.0;
    long pp = 0;
    for (const auto& e : events) pp += e.pingpong ? 1 : 0;
    return static_cast<double>(pp) / static_cast<double>(events.size());
}

inline double failure_ratio(const std::vector<HOEvent>& events) {
    if (events.empty()) return 0.0;
    long f = 0;
    for (const auto& e : events) f += e.failed() ? 1 : 0;
    return static_cast<double>(f) / static_cast<double>(events.size());
}

// Shannon rate of one link.
inline double throughput(double bandwidth_hz, double sinr_db) {
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("throughput: bandwidth must be positive");
    return bandwidth_hz * std::log2(1.0 + std::pow(10.0, sinr_db / 10.0));
}

// Transmission + proportional propagation + handover latency.
inline double latency(double packet_bits, double rate_bps, double distance_m,
                      double edge_distance_m, double edge_latency_s, double ho_latency_s) {
    if (!(rate_bps > 0.0)) throw DataError("latency undefined at zero rate (outage)");
    return packet_bits / rate_bps + edge_latency_s * distance_m / edge_distance_m + ho_latency_s;
}

// Relative gain of the proposed mechanism over a competitor.
inline double gain(double kpi_proposed, double kpi_competitor) {
    if (kpi_proposed == 0.0) throw DataError("gain undefined for a zero proposed KPI");
    return (kpi_proposed - kpi_competitor) / kpi_proposed;
}

struct StepKpi {
    long step = 0;
    int ho_count = 0;
    int pingpong_count = 0;
    int failure_count = 0;
    double sum_throughput_bps = 0.0;
    double mean_latency_s = 0.0;
    int outage_count = 0;
};

struct KpiReport {
    double ho_ratio = 0.0;
    double pingpong_ratio = 0.0;
    double failure_ratio = 0.0;
    double sum_throughput_bps = 0.0;  // mean over steps of the per-step sum
    double mean_latency_s = 0.0;      // over non-outage UE-steps
    long outage_steps = 0;
    std::vector<StepKpi> time_series;
};

// Pure post-processing of the persisted logs, so a report is always
// recomputable from the files alone.
inline KpiReport compute_report(const std::vector<HOEvent>& events,
                                const std::vector<LinkRecord>& links, int ue_count,
                                long total_steps) {
    KpiReport rep;
    rep.time_series.assign(static_cast<std::size_t>(std::max<long>(total_steps, 0)), StepKpi{});
    for (long s = 0; s < total_steps; ++s) rep.time_series[static_cast<std::size_t>(s)].step = s;

    for (const auto& e : events) {
        auto& ts = rep.time_series.at(static_cast<std::size_t>(e.step));
        ts.ho_count += 1;
        ts.pingpong_count += e.pingpong ? 1 : 0;
        ts.failure_count += e.failed() ? 1 : 0;
    }

    std::vector<long> latency_counts(rep.time_series.size(), 0);
    for (const auto& l : links) {
        auto& ts = rep.time_series.at(static_cast<std::size_t>(l.step));
        if (l.outage) {
            ts.outage_count += 1;
            rep.outage_steps += 1;
            continue;
        }
        ts.sum_throughput_bps += l.rate_bps;
        ts.mean_latency_s += l.latency_s;
        latency_counts[static_cast<std::size_t>(l.step)] += 1;
    }

    double lat_sum = 0.0;
    long lat_n = 0;
    double thr_sum = 0.0;
    for (std::size_t i = 0; i < rep.time_series.size(); ++i) {
        auto& ts = rep.time_series[i];
        lat_sum += ts.mean_latency_s;
        lat_n += latency_counts[i];
        thr_sum += ts.sum_throughput_bps;
        ts.mean_latency_s = latency_counts[i] > 0 ? ts.mean_latency_s / latency_counts[i] : 0.0;
    }

    if (total_steps > 0) {
        rep.ho_ratio = ho_ratio(events, ue_count, total_steps);
        rep.sum_throughput_bps = thr_sum / static_cast<double>(total_steps);
    }
    rep.pingpong_ratio = pingpong_ratio(events);
    rep.failure_ratio = failure_ratio(events);
    rep.mean_latency_s = lat_n > 0 ? lat_sum / static_cast<double>(lat_n) : 0.0;
    return rep;
}

// --- serialization ----------------------------------------------------------

inline void save_links(const std::string& path, const std::vector<LinkRecord>& links) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write link records: " + path);
    out << "step,ue,serving,sinr_db,rate_bps,latency_s,ho_this_step,outage\n";
    char buf[128];
    for (const auto& l : links) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.9f", l.sinr_db, l.rate_bps, l.latency_s);
        out << l.step << "," << l.ue_id << "," << l.serving_bs << "," << buf << ","
            << (l.ho_this_step ? 1 : 0) << "," << (l.outage ? 1 : 0) << "\n";
    }
}

inline std::vector<LinkRecord> load_links(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open link records: " + path);
    std::vector<LinkRecord> links;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("step,", 0) == 0) continue;
        auto f = detail::split_csv(line);
        if (f.size() != 8) throw DataError(path + ": malformed link row: " + line);
        LinkRecord l;
        l.step = std::stol(f[0]);
        l.ue_id = std::stoi(f[1]);
        l.serving_bs = std::stoi(f[2]);
        l.sinr_db = std::stod(f[3]);
        l.rate_bps = std::stod(f[4]);
        l.latency_s = std::stod(f[5]);
        l.ho_this_step = f[6] == "1";
        l.outage = f[7] == "1";
        links.push_back(l);
    }
    return links;
}

inline void save_kpi_report(const std::string& summary_path, const std::string& timeseries_path,
                            const KpiReport& rep) {
    {
        std::ofstream out(summary_path);
        if (!out) throw DataError("cannot write KPI summary: " + summary_path);
        out << "ho_ratio,pingpong_ratio,failure_ratio,sum_throughput_bps,mean_latency_s,outage_steps\n";
        char buf[192];
        std::snprintf(buf, sizeof buf, "%.9f,%.9f,%.9f,%.3f,%.9f,%ld\n", rep.ho_ratio,
                      rep.pingpong_ratio, rep.failure_ratio, rep.sum_throughput_bps,
                      rep.mean_latency_s, rep.outage_steps);
        out << buf;
    }
    {
        std::ofstream out(timeseries_path);
        if (!out) throw DataError("cannot write KPI time series: " + timeseries_path);
        out << "step,ho_count,pingpong_count,failure_count,sum_throughput_bps,mean_latency_s,outage_count\n";
        char buf[192];
        for (const auto& ts : rep.time_series) {
            std::snprintf(buf, sizeof buf, "%ld,%d,%d,%d,%.3f,%.9f,%d\n", ts.step, ts.ho_count,
                          ts.pingpong_count, ts.failure_count, ts.sum_throughput_bps,
                          ts.mean_latency_s, ts.outage_count);
            out << buf;
        }
    }
}

}  // namespace hosim
