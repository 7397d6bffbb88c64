// aoi_tandem: average peak-age analysis and simulation for a preprocessing +
// transmission tandem queue.
//
// Exit codes: 0 success, 1 validation or I/O error, 2 instability.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aoi_tandem/aoi_tandem.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitUnstable = 2;

int run_analyze(const std::string& scenario_path, const std::string& out_path) {
    const aoit::Scenario sc = aoit::load_scenario(scenario_path);
    const aoit::AnalyticReport rep = aoit::analyze_partial(sc);
    aoit::write_file_atomic(out_path, aoit::analytic_report_csv(rep));
    if (!rep.stable()) {
        if (rep.first_unstable_class)
            std::cerr << "unstable: processing class " << *rep.first_unstable_class
                      << " (cumulative load >= 1); markers written\n";
        else
            std::cerr << "unstable: transmission load " << rep.rho_t << " >= 1; markers written\n";
        return kExitUnstable;
    }
    return kExitOk;
}

int run_simulate(const std::string& scenario_path, const aoit::SimConfig& cfg,
                 const std::string& out_path, const std::string& trace_path) {
    const aoit::Scenario sc = aoit::load_scenario(scenario_path);
    aoit::SimConfig effective = cfg;
    effective.retain_trace = !trace_path.empty();
    const aoit::SimOutput sim = aoit::run_simulation(sc, effective);
    aoit::write_file_atomic(out_path, aoit::sim_report_csv(sim.report));
    if (!trace_path.empty()) aoit::write_file_atomic(trace_path, aoit::trace_csv(sim.trace));
    if (sim.report.stability_warning) std::cerr << "warning: run shows signs of instability\n";
    return kExitOk;
}

int run_compare(const std::string& scenario_path, const aoit::SimConfig& cfg,
                const std::string& out_path) {
    const aoit::Scenario sc = aoit::load_scenario(scenario_path);
    const aoit::CompareReport rep = aoit::compare_scenario(sc, cfg);
    aoit::write_file_atomic(out_path, aoit::compare_csv(rep));
    return kExitOk;
}

int run_sweep_cmd(const std::string& scenario_path, const aoit::SweepSpec& spec,
                  const aoit::SimConfig& cfg, bool analytic_only, const std::string& out_path) {
    const aoit::Scenario sc = aoit::load_scenario(scenario_path);
    const aoit::SweepTable table = aoit::run_sweep(sc, spec, cfg, {}, analytic_only);
    aoit::write_file_atomic(out_path, aoit::sweep_csv(table, sc.sources.size()));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Average peak age of information for a priority-preprocessing + "
                 "Rayleigh-link tandem queue: closed-form analysis, discrete-event "
                 "simulation, and cross-validation"};
    app.require_subcommand(1);

    std::string scenario_path, out_path, trace_path;
    aoit::SimConfig sim_cfg;
    aoit::SweepSpec sweep_spec;
    bool analytic_only = false;

    CLI::App* analyze = app.add_subcommand("analyze", "Write the analytic per-source report");
    analyze->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    analyze->add_option("--out", out_path, "Output CSV path")->required();

    CLI::App* simulate = app.add_subcommand("simulate", "Run the discrete-event simulation");
    simulate->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    simulate->add_option("--seed", sim_cfg.seed, "RNG master seed");
    simulate->add_option("--packets", sim_cfg.n_packets, "Delivered-packet budget");
    simulate->add_option("--warmup", sim_cfg.warmup_fraction, "Warmup fraction discarded from statistics");
    simulate->add_option("--out", out_path, "Output CSV path")->required();
    simulate->add_option("--trace", trace_path, "Optional per-packet trace CSV path");

    CLI::App* compare = app.add_subcommand("compare", "Analytic vs simulated PAoI for one scenario");
    compare->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    compare->add_option("--seed", sim_cfg.seed, "RNG master seed");
    compare->add_option("--packets", sim_cfg.n_packets, "Delivered-packet budget");
    compare->add_option("--warmup", sim_cfg.warmup_fraction, "Warmup fraction discarded from statistics");
    compare->add_option("--out", out_path, "Output CSV path")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "Sweep the basic arrival rate lambda_b");
    sweep->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    sweep->add_option("--from", sweep_spec.from, "First lambda_b (packets/s)")->required();
    sweep->add_option("--to", sweep_spec.to, "Last lambda_b (packets/s)")->required();
    sweep->add_option("--steps", sweep_spec.steps, "Grid size (>= 2)")->required();
    sweep->add_option("--multipliers", sweep_spec.multipliers,
                      "Per-source multipliers m_j (lambda_j = m_j * lambda_b); default 1,2,...,J")
        ->delimiter(',');
    sweep->add_flag("--analytic-only", analytic_only, "Skip the simulation at every grid point");
    sweep->add_option("--seed", sim_cfg.seed, "RNG master seed (point i uses seed XOR i)");
    sweep->add_option("--packets", sim_cfg.n_packets, "Delivered-packet budget per point");
    sweep->add_option("--warmup", sim_cfg.warmup_fraction, "Warmup fraction discarded from statistics");
    sweep->add_option("--out", out_path, "Output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (analyze->parsed()) return run_analyze(scenario_path, out_path);
        if (simulate->parsed()) return run_simulate(scenario_path, sim_cfg, out_path, trace_path);
        if (compare->parsed()) return run_compare(scenario_path, sim_cfg, out_path);
        if (sweep->parsed()) return run_sweep_cmd(scenario_path, sweep_spec, sim_cfg, analytic_only, out_path);
    } catch (const aoit::UnstableClass& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUnstable;
    } catch (const aoit::UnstableTransmission& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUnstable;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    }
    return kExitInputError;
}
