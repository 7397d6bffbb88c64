#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "aoi_tandem/errors.hpp"
#include "aoi_tandem/quadrature.hpp"
#include "aoi_tandem/rng.hpp"
#include "aoi_tandem/scenario.hpp"

namespace aoit {

// ---------------------------------------------------------------------------
// Preprocessing stage (non-preemptive priority M/G/1 with deterministic
// per-class service).
// ---------------------------------------------------------------------------

/// Mean residual service time seen by a Poisson arrival, by renewal-reward:
/// E[(Z^P)^2] / (2 E[Z^P]) over the arrival-weighted class mix, which reduces
/// to sum(rho_j * Z_j) / (2 sum(rho_j)).
inline double residual_processing_time(const LoadSummary& loads) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < loads.per_source_rho.size(); ++j) {
        num += loads.per_source_rho[j] * loads.per_source_proc_time[j];
        den += loads.per_source_rho[j];
    }
    if (!(den > 0.0)) throw DegenerateLoad();
    return num / (2.0 * den);
}

/// Mean waiting time of priority class j (1-based) in the non-preemptive
/// priority queue:
///
///   sum_k rho_k^2/lambda_k
///   ----------------------------------------------------
///   2 (1 - sum_{i<=j} rho_i) (1 - [j>1] sum_{i<j} rho_i)
///
/// Throws UnstableClass(j) when either denominator factor is <= 0, i.e. the
/// cumulative load of classes up to j (or up to j-1) has reached 1.
inline double waiting_time_processing(int priority, const LoadSummary& loads) {
    const int klass_count = static_cast<int>(loads.per_source_rho.size());
    if (priority < 1 || priority > klass_count)
        throw std::invalid_argument("waiting_time_processing: priority out of range");

    double second_moment_sum = 0.0;  // sum_k rho_k^2/lambda_k == sum_k rho_k * Z_k
    for (int k = 0; k < klass_count; ++k)
        second_moment_sum += loads.per_source_rho[k] * loads.per_source_proc_time[k];

    double cum = 0.0;
    for (int i = 0; i < priority; ++i) cum += loads.per_source_rho[i];
    const double up_to_j = 1.0 - cum;
    const double up_to_prev = priority == 1 ? 1.0 : 1.0 - (cum - loads.per_source_rho[priority - 1]);
    if (!(up_to_j > 0.0) || !(up_to_prev > 0.0)) throw UnstableClass(priority);

    return second_moment_sum / (2.0 * up_to_j * up_to_prev);
}

// ---------------------------------------------------------------------------
// Transmission stage (Rayleigh-faded Shannon-rate service).
// ---------------------------------------------------------------------------

/// Density of the unfloored transmission time xi / ln(1 + gbar*h) at t, with
/// h a unit-mean exponential gain. Derived by the monotone change of variable
/// h(t) = (e^{xi/t} - 1) / gbar.
inline double transmission_time_density_core(double t, double xi, double gbar) {
    if (!(t > 0.0) || !(xi > 0.0)) return 0.0;
    const double a = xi / t;
    if (a > 690.0) return 0.0;  // e^a would overflow; the density has underflowed long before
    const double exponent = a + (1.0 - std::exp(a)) / gbar;
    if (exponent < -745.0) return 0.0;
    return (xi / gbar) * std::exp(exponent) / (t * t);
}

inline double transmission_time_density(double t, double processed_bits, const ChannelSpec& ch) {
    return transmission_time_density_core(t, tx_time_scale(processed_bits, ch.bandwidth_hz), mean_snr(ch));
}

/// Mean of the floored transmission time xi / ln(1 + gbar * max(h, h_min)),
/// evaluated in the gain domain: the probability mass below the floor
/// contributes an atom at the clamped value, and the rest is the integral of
/// e^{-h} xi / ln(1 + gbar h) from h_min up to the cutoff. The truncated tail
/// beyond h_up is bounded by e^{-h_up} * xi / ln(1 + gbar*h_up).
inline double expected_tx_time_core(double xi, double gbar, double h_min,
                                    const QuadratureSettings& q = {}) {
    if (xi == 0.0) return 0.0;
    if (!(h_min > 0.0)) throw FloorRequired();
    if (!(q.upper_gain_cutoff > h_min))
        throw std::invalid_argument("expected_tx_time: upper_gain_cutoff must exceed gain_floor");

    const double atom = -std::expm1(-h_min) * xi / std::log1p(gbar * h_min);
    const auto body = integrate_adaptive(
        [xi, gbar](double h) { return std::exp(-h) * xi / std::log1p(gbar * h); },
        h_min, q.upper_gain_cutoff, q);
    return atom + body.value;
}

inline double expected_transmission_time(const Scenario& sc, int priority,
                                         const QuadratureSettings& q = {}) {
    if (priority < 1 || priority > static_cast<int>(sc.sources.size()))
        throw std::invalid_argument("expected_transmission_time: priority out of range");
    const SourceSpec& s = sc.sources[priority - 1];
    return expected_tx_time_core(tx_time_scale(s.processed_size_bits, sc.channel.bandwidth_hz),
                                 mean_snr(sc.channel), sc.channel.gain_floor, q);
}

/// Arrival-rate-weighted mean transmission time across classes.
inline double mixed_transmission_time(const Scenario& sc, const std::vector<double>& per_source_tx) {
    if (per_source_tx.size() != sc.sources.size())
        throw std::invalid_argument("mixed_transmission_time: size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < per_source_tx.size(); ++j) {
        num += sc.sources[j].arrival_rate * per_source_tx[j];
        den += sc.sources[j].arrival_rate;
    }
    return num / den;
}

/// Inputs of the transmission-queue waiting-time approximation, all taken
/// from the preprocessing analysis.
struct TxStageInputs {
    std::vector<double> arrival_rates;  // lambda_j
    std::vector<double> wait_proc;      // E[W_j^P]
    std::vector<double> tx_times;       // E[Z_j^T]
    double busy_probability = 0.0;      // processor busy probability
    double mixed_tx_time = 0.0;         // arrival-weighted E[Z^T]
};

/// Offered load of the transmission queue, sum_j lambda_j E[Z_j^T].
inline double transmission_load(const TxStageInputs& in) {
    double rho = 0.0;
    for (std::size_t j = 0; j < in.arrival_rates.size(); ++j)
        rho += in.arrival_rates[j] * in.tx_times[j];
    return rho;
}

/// Ratio of class j's transmission-queue waiting time to class 1's. The
/// backlog a class-j packet finds is approximated as proportional to the work
/// it would find in the preprocessing queue; mu_1 = 1 by definition.
inline double mu_ratio(const TxStageInputs& in, int priority) {
    if (priority < 1 || priority > static_cast<int>(in.arrival_rates.size()))
        throw std::invalid_argument("mu_ratio: priority out of range");
    if (priority == 1) return 1.0;

    const int j = priority - 1;
    const double base = in.busy_probability * in.mixed_tx_time;
    double inner = base + in.arrival_rates[j] * in.wait_proc[j] * in.tx_times[j];
    for (int i = 0; i < j; ++i)
        inner += in.arrival_rates[i] * (in.wait_proc[i] + in.wait_proc[j]) * in.tx_times[i];
    const double denom = in.arrival_rates[0] * (base + in.arrival_rates[0] * in.wait_proc[0] * in.tx_times[0]);
    return in.arrival_rates[j] * inner / denom;
}

/// Maximum-entropy approximation of the mean waiting time of class j in the
/// FCFS transmission queue:
///
///   mu_j * rho_T^2 / (sum_i lambda_i mu_i * (1 - rho_T))
///
/// For a single class this is exactly rho_T E[Z^T] / (1 - rho_T).
inline double waiting_time_transmission(const TxStageInputs& in, int priority) {
    const double rho_t = transmission_load(in);
    if (rho_t >= 1.0) throw UnstableTransmission(rho_t);
    double weighted = 0.0;
    for (std::size_t i = 0; i < in.arrival_rates.size(); ++i)
        weighted += in.arrival_rates[i] * mu_ratio(in, static_cast<int>(i) + 1);
    return mu_ratio(in, priority) * rho_t * rho_t / (weighted * (1.0 - rho_t));
}

// ---------------------------------------------------------------------------
// Assembly.
// ---------------------------------------------------------------------------

/// The five additive components of a class's average peak age.
struct PaoiTerms {
    double interarrival = 0.0;  // 1/lambda_j
    double proc_time = 0.0;     // E[Z_j^P]
    double wait_proc = 0.0;     // E[W_j^P]
    double tx_time = 0.0;       // E[Z_j^T]
    double wait_tx = 0.0;       // E[W_j^T]
};

inline double average_paoi(const PaoiTerms& t) {
    return t.interarrival + t.proc_time + t.wait_proc + t.tx_time + t.wait_tx;
}

struct SourceAnalysis {
    int priority = 0;
    double arrival_rate = 0.0;
    double rho = 0.0;
    double proc_time = 0.0;            // E[Z_j^P]
    std::optional<double> wait_proc;   // E[W_j^P]; empty when the class is unstable
    double tx_time = 0.0;              // E[Z_j^T]
    std::optional<double> mu;          // empty when the processing stage is unstable
    std::optional<double> wait_tx;     // E[W_j^T]; empty when either stage is unstable
    std::optional<double> paoi;        // sum of the five components
};

struct AnalyticReport {
    std::vector<SourceAnalysis> sources;
    double busy_probability = 0.0;
    double residual_proc = 0.0;             // E[Z_R^P]
    double mixed_tx_time = 0.0;             // E[Z^T]
    double rho_t = 0.0;                     // transmission load
    std::optional<double> queue_len_tx;     // E[N^T] = rho_T/(1-rho_T); empty when rho_T >= 1
    std::optional<int> first_unstable_class;
    bool transmission_unstable = false;

    bool stable() const { return !first_unstable_class.has_value() && !transmission_unstable; }
};

/// Full analytic chain, tolerant of instability: unavailable expectations are
/// left empty and flagged instead of throwing. When any processing class is
/// unstable the transmission-queue approximation has no defined inputs, so
/// mu, E[W^T], and PAoI are empty for every class.
inline AnalyticReport analyze_partial(const Scenario& sc, const QuadratureSettings& q = {}) {
    validate_scenario(sc);
    const LoadSummary loads = load_summary(sc);
    const int klass_count = static_cast<int>(sc.sources.size());

    AnalyticReport rep;
    rep.busy_probability = loads.busy_probability;
    rep.residual_proc = residual_processing_time(loads);

    for (int j = 1; j <= klass_count; ++j) {
        SourceAnalysis row;
        row.priority = j;
        row.arrival_rate = sc.sources[j - 1].arrival_rate;
        row.rho = loads.per_source_rho[j - 1];
        row.proc_time = loads.per_source_proc_time[j - 1];
        row.tx_time = expected_transmission_time(sc, j, q);
        if (!rep.first_unstable_class) {
            try {
                row.wait_proc = waiting_time_processing(j, loads);
            } catch (const UnstableClass& e) {
                rep.first_unstable_class = e.priority;
            }
        }
        rep.sources.push_back(row);
    }

    std::vector<double> tx_times;
    for (const SourceAnalysis& row : rep.sources) tx_times.push_back(row.tx_time);
    rep.mixed_tx_time = mixed_transmission_time(sc, tx_times);

    TxStageInputs inputs;
    for (const SourceAnalysis& row : rep.sources) {
        inputs.arrival_rates.push_back(row.arrival_rate);
        inputs.wait_proc.push_back(row.wait_proc.value_or(0.0));
        inputs.tx_times.push_back(row.tx_time);
    }
    inputs.busy_probability = rep.busy_probability;
    inputs.mixed_tx_time = rep.mixed_tx_time;
    rep.rho_t = transmission_load(inputs);
    if (rep.rho_t < 1.0) rep.queue_len_tx = rep.rho_t / (1.0 - rep.rho_t);

    if (rep.first_unstable_class) return rep;

    rep.transmission_unstable = rep.rho_t >= 1.0;
    for (SourceAnalysis& row : rep.sources) {
        row.mu = mu_ratio(inputs, row.priority);
        if (!rep.transmission_unstable) {
            row.wait_tx = waiting_time_transmission(inputs, row.priority);
            row.paoi = average_paoi({1.0 / row.arrival_rate, row.proc_time, *row.wait_proc,
                                     row.tx_time, *row.wait_tx});
        }
    }
    return rep;
}

/// Strict analytic chain: fails fast with the first instability, processing
/// classes in priority order before the transmission stage.
inline AnalyticReport analyze(const Scenario& sc, const QuadratureSettings& q = {}) {
    AnalyticReport rep = analyze_partial(sc, q);
    if (rep.first_unstable_class) throw UnstableClass(*rep.first_unstable_class);
    if (rep.transmission_unstable) throw UnstableTransmission(rep.rho_t);
    return rep;
}

// ---------------------------------------------------------------------------
// Monte-Carlo oracle for the transmission-time expectation.
// ---------------------------------------------------------------------------

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean of xi / ln(1 + gbar * max(h, h_min)) over n i.i.d. unit-mean
/// exponential draws. Deterministic for a given seed; independent of the
/// quadrature path it cross-checks.
inline McEstimate mc_transmission_time_core(double xi, double gbar, double h_min,
                                            std::uint64_t n_draws, std::uint64_t seed) {
    if (n_draws < 100000)
        throw std::invalid_argument("mc_transmission_time: need at least 1e5 draws");
    if (xi == 0.0) return {0.0, 0.0};
    if (!(h_min > 0.0)) throw FloorRequired();

    Rng rng(seed);
    double mean = 0.0, m2 = 0.0;
    for (std::uint64_t i = 0; i < n_draws; ++i) {
        const double h = std::max(rng.exponential(1.0), h_min);
        const double v = xi / std::log1p(gbar * h);
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
    }
    const double n = static_cast<double>(n_draws);
    return {mean, std::sqrt(m2 / (n - 1.0) / n)};
}

inline McEstimate mc_transmission_time(double processed_bits, const ChannelSpec& ch,
                                       std::uint64_t n_draws, std::uint64_t seed) {
    return mc_transmission_time_core(tx_time_scale(processed_bits, ch.bandwidth_hz), mean_snr(ch),
                                     ch.gain_floor, n_draws, seed);
}

}  // namespace aoit
