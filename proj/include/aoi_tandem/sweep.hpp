#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "aoi_tandem/analysis.hpp"
#include "aoi_tandem/csv.hpp"
#include "aoi_tandem/des.hpp"

namespace aoit {

/// Grid over the basic arrival rate: at each point lambda_j = m_j * lambda_b.
/// Empty multipliers default to m_j = j.
struct SweepSpec {
    double from = 0.0;
    double to = 0.0;
    int steps = 2;
    std::vector<double> multipliers;
};

struct SweepCell {
    std::optional<double> analytic_paoi;  // empty when that class is unstable analytically
    std::optional<double> sim_paoi;
    std::optional<double> sim_ci95;
    std::optional<double> rel_err;        // |analytic - sim| / sim, where both exist
};

struct SweepRow {
    double lambda_b = 0.0;
    std::vector<SweepCell> cells;  // one per source
    bool sim_stability_warning = false;
};

struct SweepTable {
    std::vector<SweepRow> rows;  // ascending lambda_b
    std::vector<std::optional<double>> argmin_analytic;  // lambda_b minimizing each class's analytic PAoI
    std::vector<std::optional<double>> argmin_sim;
};

inline void validate_sweep_spec(const SweepSpec& spec, std::size_t source_count) {
    if (!(spec.from < spec.to))
        throw ValidationError("from", -1, "sweep range must satisfy from < to");
    if (spec.steps < 2)
        throw ValidationError("steps", -1, "sweep needs at least 2 steps");
    if (!spec.multipliers.empty() && spec.multipliers.size() != source_count)
        throw ValidationError("multipliers", -1, "need one multiplier per source");
    for (double m : spec.multipliers)
        if (!(m > 0.0)) throw ValidationError("multipliers", -1, "multipliers must be > 0");
}

/// The base scenario with every arrival rate replaced by m_j * lambda_b.
inline Scenario scenario_at(const Scenario& base, const SweepSpec& spec, double lambda_b) {
    Scenario sc = base;
    for (std::size_t j = 0; j < sc.sources.size(); ++j) {
        const double m = spec.multipliers.empty() ? static_cast<double>(j + 1) : spec.multipliers[j];
        sc.sources[j].arrival_rate = m * lambda_b;
    }
    return sc;
}

/// Sweep concurrency cap: AOI_TANDEM_THREADS when set, machine parallelism
/// otherwise.
inline unsigned sweep_thread_cap() {
    if (const char* env = std::getenv("AOI_TANDEM_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

/// Runs analysis (always) and simulation (unless analytic_only) at every grid
/// point. Points execute concurrently with per-point seeds seed XOR index;
/// rows are gathered by index, so the table never depends on scheduling.
/// Unstable points are recorded as empty cells, not errors.
inline SweepTable run_sweep(const Scenario& base, const SweepSpec& spec, const SimConfig& sim_cfg,
                            const QuadratureSettings& quad = {}, bool analytic_only = false,
                            unsigned thread_cap = 0) {
    validate_scenario(base);
    validate_sweep_spec(spec, base.sources.size());

    const int points = spec.steps;
    const std::size_t source_count = base.sources.size();
    SweepTable table;
    table.rows.resize(static_cast<std::size_t>(points));

    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= points) return;
            try {
                const double lambda_b =
                    spec.from + (spec.to - spec.from) * static_cast<double>(i) / (points - 1);
                const Scenario sc = scenario_at(base, spec, lambda_b);

                SweepRow row;
                row.lambda_b = lambda_b;
                row.cells.resize(source_count);

                const AnalyticReport rep = analyze_partial(sc, quad);
                for (std::size_t j = 0; j < source_count; ++j)
                    row.cells[j].analytic_paoi = rep.sources[j].paoi;

                if (!analytic_only) {
                    SimConfig cfg = sim_cfg;
                    cfg.seed = sim_cfg.seed ^ static_cast<std::uint64_t>(i);
                    cfg.retain_trace = false;
                    const SimOutput sim = run_simulation(sc, cfg);
                    row.sim_stability_warning = sim.report.stability_warning;
                    for (std::size_t j = 0; j < source_count; ++j) {
                        const SourceSimStats& st = sim.report.sources[j];
                        if (!std::isnan(st.paoi_mean)) {
                            row.cells[j].sim_paoi = st.paoi_mean;
                            row.cells[j].sim_ci95 = st.paoi_ci95;
                            if (row.cells[j].analytic_paoi && st.paoi_mean > 0.0)
                                row.cells[j].rel_err =
                                    std::abs(*row.cells[j].analytic_paoi - st.paoi_mean) / st.paoi_mean;
                        }
                    }
                }
                table.rows[static_cast<std::size_t>(i)] = std::move(row);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    unsigned threads = thread_cap ? thread_cap : sweep_thread_cap();
    threads = std::min<unsigned>(threads, static_cast<unsigned>(points));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    table.argmin_analytic.resize(source_count);
    table.argmin_sim.resize(source_count);
    for (std::size_t j = 0; j < source_count; ++j) {
        std::optional<double> best_analytic, best_sim;
        for (const SweepRow& row : table.rows) {
            const SweepCell& c = row.cells[j];
            if (c.analytic_paoi && (!best_analytic || *c.analytic_paoi < *best_analytic)) {
                best_analytic = c.analytic_paoi;
                table.argmin_analytic[j] = row.lambda_b;
            }
            if (c.sim_paoi && (!best_sim || *c.sim_paoi < *best_sim)) {
                best_sim = c.sim_paoi;
                table.argmin_sim[j] = row.lambda_b;
            }
        }
    }
    return table;
}

/// Wide CSV: lambda_b, per-source analytic PAoI, per-source simulated PAoI,
/// per-source CI half-width, per-source relative error, then two trailing
/// argmin rows. Missing values print as UNSTABLE (analytic) or empty (sim).
inline std::string sweep_csv(const SweepTable& table, std::size_t source_count) {
    std::string out = "lambda_b";
    for (std::size_t j = 1; j <= source_count; ++j) out += ",analytic_paoi_" + std::to_string(j);
    for (std::size_t j = 1; j <= source_count; ++j) out += ",sim_paoi_" + std::to_string(j);
    for (std::size_t j = 1; j <= source_count; ++j) out += ",sim_ci95_" + std::to_string(j);
    for (std::size_t j = 1; j <= source_count; ++j) out += ",rel_err_" + std::to_string(j);
    out += ",sim_stability_warning\n";

    for (const SweepRow& row : table.rows) {
        out += format_sig9(row.lambda_b);
        for (const SweepCell& c : row.cells) out += ',' + format_cell(c.analytic_paoi);
        for (const SweepCell& c : row.cells) out += ',' + format_cell(c.sim_paoi, "");
        for (const SweepCell& c : row.cells) out += ',' + format_cell(c.sim_ci95, "");
        for (const SweepCell& c : row.cells) out += ',' + format_cell(c.rel_err, "");
        out += row.sim_stability_warning ? ",true\n" : ",false\n";
    }

    out += "argmin_analytic";
    for (std::size_t j = 0; j < source_count; ++j) out += ',' + format_cell(table.argmin_analytic[j], "");
    out += std::string(3 * source_count, ',') + ",\n";
    out += "argmin_simulated";
    for (std::size_t j = 0; j < source_count; ++j) out += ',' + format_cell(table.argmin_sim[j], "");
    out += std::string(3 * source_count, ',') + ",\n";
    return out;
}

// ---------------------------------------------------------------------------
// Single-scenario analytic-vs-simulated comparison.
// ---------------------------------------------------------------------------

struct CompareRow {
    int priority = 0;
    double analytic_paoi = 0.0;
    double sim_paoi = 0.0;
    double sim_ci95 = 0.0;
    double rel_err = 0.0;
};

struct CompareReport {
    std::vector<CompareRow> rows;
    bool sim_stability_warning = false;
};

/// Analytic chain (strict: throws on instability) against one simulation run.
inline CompareReport compare_scenario(const Scenario& sc, const SimConfig& cfg,
                                      const QuadratureSettings& quad = {}) {
    const AnalyticReport rep = analyze(sc, quad);
    const SimOutput sim = run_simulation(sc, cfg);

    CompareReport out;
    out.sim_stability_warning = sim.report.stability_warning;
    for (std::size_t j = 0; j < sc.sources.size(); ++j) {
        CompareRow row;
        row.priority = static_cast<int>(j) + 1;
        row.analytic_paoi = *rep.sources[j].paoi;
        row.sim_paoi = sim.report.sources[j].paoi_mean;
        row.sim_ci95 = sim.report.sources[j].paoi_ci95;
        row.rel_err = std::abs(row.analytic_paoi - row.sim_paoi) / row.sim_paoi;
        out.rows.push_back(row);
    }
    return out;
}

inline std::string compare_csv(const CompareReport& rep) {
    std::string out = "priority,analytic_paoi,sim_paoi,sim_ci95,rel_err\n";
    for (const CompareRow& r : rep.rows)
        out += std::to_string(r.priority) + ',' + format_sig9(r.analytic_paoi) + ',' +
               format_sig9(r.sim_paoi) + ',' + format_sig9(r.sim_ci95) + ',' +
               format_sig9(r.rel_err) + '\n';
    return out;
}

}  // namespace aoit
