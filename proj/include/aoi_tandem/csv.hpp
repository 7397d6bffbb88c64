#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>

#include "aoi_tandem/analysis.hpp"
#include "aoi_tandem/des.hpp"

namespace aoit {

/// 9 significant digits, the precision used by every CSV emitted here.
inline std::string format_sig9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string format_cell(const std::optional<double>& v, const char* marker = "UNSTABLE") {
    return v ? format_sig9(*v) : std::string(marker);
}

/// Writes content to a temporary sibling and renames it into place, so a
/// failed run never leaves a partial file behind.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open output file: " + tmp.string());
        out << content;
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("failed writing output file: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw std::runtime_error("cannot move output into place: " + path);
    }
}

/// One row per source plus a trailing globals row. The globals row reuses the
/// source columns: lambda holds the total arrival rate, rho the busy
/// probability, E_ZP the mean residual processing time, E_ZT the mixed mean
/// transmission time, mu the transmission load rho_T, and E_WT the mean
/// transmission-queue length E[N^T].
inline std::string analytic_report_csv(const AnalyticReport& rep) {
    std::string out = "priority,lambda,rho,E_ZP,E_WP,E_ZT,mu,E_WT,paoi\n";
    double total_lambda = 0.0;
    for (const SourceAnalysis& s : rep.sources) {
        total_lambda += s.arrival_rate;
        out += std::to_string(s.priority) + ',' + format_sig9(s.arrival_rate) + ',' +
               format_sig9(s.rho) + ',' + format_sig9(s.proc_time) + ',' + format_cell(s.wait_proc) +
               ',' + format_sig9(s.tx_time) + ',' + format_cell(s.mu) + ',' + format_cell(s.wait_tx) +
               ',' + format_cell(s.paoi) + '\n';
    }
    out += "global," + format_sig9(total_lambda) + ',' + format_sig9(rep.busy_probability) + ',' +
           format_sig9(rep.residual_proc) + ",," + format_sig9(rep.mixed_tx_time) + ',' +
           format_sig9(rep.rho_t) + ',' + format_cell(rep.queue_len_tx) + ",\n";
    return out;
}

inline std::string sim_report_csv(const SimReport& rep) {
    std::string out = "priority,delivered,paoi_mean,paoi_ci95,wait_proc_mean,wait_tx_mean,tx_time_mean\n";
    for (const SourceSimStats& s : rep.sources)
        out += std::to_string(s.priority) + ',' + std::to_string(s.delivered) + ',' +
               format_sig9(s.paoi_mean) + ',' + format_sig9(s.paoi_ci95) + ',' +
               format_sig9(s.wait_proc_mean) + ',' + format_sig9(s.wait_tx_mean) + ',' +
               format_sig9(s.tx_time_mean) + '\n';
    out += "global,horizon=" + format_sig9(rep.horizon) +
           ",proc_busy_fraction=" + format_sig9(rep.proc_busy_fraction) +
           ",tx_utilization=" + format_sig9(rep.tx_utilization) +
           ",tx_count_time_avg=" + format_sig9(rep.tx_count_time_avg) +
           ",tx_sojourn_mean=" + format_sig9(rep.tx_sojourn_mean) +
           ",stability_warning=" + (rep.stability_warning ? "true" : "false") + '\n';
    return out;
}

/// Delivered-packet trace, departure order.
inline std::string trace_csv(std::span<const PacketRecord> trace) {
    std::string out = "source,seq,t_arrival,t_proc_start,t_proc_end,t_tx_start,t_depart\n";
    for (const PacketRecord& r : trace)
        out += std::to_string(r.source) + ',' + std::to_string(r.seq) + ',' +
               format_sig9(r.t_arrival) + ',' + format_sig9(r.t_proc_start) + ',' +
               format_sig9(r.t_proc_end) + ',' + format_sig9(r.t_tx_start) + ',' +
               format_sig9(r.t_depart) + '\n';
    return out;
}

}  // namespace aoit
