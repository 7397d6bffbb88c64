#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "aoi_tandem/errors.hpp"

namespace aoit {

/// One traffic class. Priority 1 is served first at the preprocessor; packets
/// arrive as a Poisson stream and shrink from raw_size_bits to
/// processed_size_bits before entering the transmission queue.
struct SourceSpec {
    int priority = 1;
    double arrival_rate = 0.0;         // packets/s
    double raw_size_bits = 0.0;
    double processed_size_bits = 0.0;  // strictly smaller than raw_size_bits
    double proc_rate_bits_per_s = 0.0;
};

/// Rayleigh-faded point-to-point link between aggregator and destination.
/// gain_floor is the lower clamp applied to every fading draw; it must be
/// positive before any transmission-time expectation is computed, otherwise
/// the mean transmission time diverges.
struct ChannelSpec {
    double tx_power_w = 0.0;
    double distance_m = 0.0;
    double pathloss_exp = 0.0;  // must exceed 2
    double noise_density_w_per_hz = 0.0;
    double bandwidth_hz = 0.0;
    double gain_floor = 1e-6;
};

struct Scenario {
    std::string label;
    ChannelSpec channel;
    std::vector<SourceSpec> sources;  // listed in priority order 1..J
};

/// Per-class loads of the preprocessing stage. busy_probability equals
/// total_rho: the fraction of time the processor is serving.
struct LoadSummary {
    std::vector<double> per_source_rho;
    std::vector<double> per_source_proc_time;
    double total_rho = 0.0;
    double busy_probability = 0.0;
};

/// Deterministic per-class preprocessing time (raw - processed) / proc_rate.
inline double processing_time(const SourceSpec& s) {
    return (s.raw_size_bits - s.processed_size_bits) / s.proc_rate_bits_per_s;
}

inline double noise_power_w(const ChannelSpec& c) {
    return c.noise_density_w_per_hz * c.bandwidth_hz;
}

/// SNR at unit fading gain: p d^-alpha / (N0 B). The realized per-packet SNR
/// is mean_snr(c) * h with h a unit-mean exponential draw.
inline double mean_snr(const ChannelSpec& c) {
    return c.tx_power_w * std::pow(c.distance_m, -c.pathloss_exp) / noise_power_w(c);
}

/// Time constant of the Shannon-rate service time: a packet of `bits` takes
/// tx_time_scale / ln(1 + snr) seconds.
inline double tx_time_scale(double bits, double bandwidth_hz) {
    return bits * std::numbers::ln2 / bandwidth_hz;
}

/// Checks every type invariant and returns the scenario unchanged. Throws
/// ValidationError naming the first violated field and the source index.
inline const Scenario& validate_scenario(const Scenario& sc) {
    if (sc.sources.empty())
        throw ValidationError("sources", -1, "scenario must contain at least one source");

    for (std::size_t i = 0; i < sc.sources.size(); ++i) {
        const SourceSpec& s = sc.sources[i];
        const int idx = static_cast<int>(i);
        if (!(s.arrival_rate > 0.0))
            throw ValidationError("lambda_pkt_per_s", idx, "arrival rate must be > 0");
        if (!(s.raw_size_bits > 0.0))
            throw ValidationError("raw_size_bits", idx, "raw size must be > 0");
        if (!(s.proc_rate_bits_per_s > 0.0))
            throw ValidationError("proc_rate_bits_per_s", idx, "processing rate must be > 0");
        if (!(s.processed_size_bits > 0.0))
            throw ValidationError("processed_size_bits", idx, "processed size must be > 0");
        if (!(s.processed_size_bits < s.raw_size_bits))
            throw ValidationError("processed_size_bits", idx,
                                  "processed size must be strictly smaller than raw size");
    }

    for (std::size_t i = 0; i < sc.sources.size(); ++i) {
        const int p = sc.sources[i].priority;
        if (p == static_cast<int>(i) + 1) continue;
        int seen = 0;
        for (const SourceSpec& other : sc.sources)
            if (other.priority == p) ++seen;
        throw ValidationError("priority", static_cast<int>(i),
                              seen > 1 ? "duplicate priority " + std::to_string(p)
                                       : "priorities must be exactly 1..J in list order");
    }

    const ChannelSpec& c = sc.channel;
    if (!(c.tx_power_w > 0.0))
        throw ValidationError("tx_power_w", -1, "transmit power must be > 0");
    if (!(c.distance_m > 0.0))
        throw ValidationError("distance_m", -1, "distance must be > 0");
    if (!(c.pathloss_exp > 2.0))
        throw ValidationError("pathloss_exp", -1, "path loss exponent must be > 2");
    if (!(c.noise_density_w_per_hz > 0.0))
        throw ValidationError("noise_density_w_per_hz", -1, "noise density must be > 0");
    if (!(c.bandwidth_hz > 0.0))
        throw ValidationError("bandwidth_hz", -1, "bandwidth must be > 0");
    if (!(c.gain_floor >= 0.0))
        throw ValidationError("gain_floor", -1, "gain floor must be >= 0");

    return sc;
}

/// Per-class loads rho_j = lambda_j * E[Z_j^P] and the processor busy
/// probability (their sum). Diagnostic only: loads >= 1 are not rejected here.
inline LoadSummary load_summary(const Scenario& sc) {
    LoadSummary out;
    out.per_source_rho.reserve(sc.sources.size());
    out.per_source_proc_time.reserve(sc.sources.size());
    for (const SourceSpec& s : sc.sources) {
        const double zp = processing_time(s);
        out.per_source_proc_time.push_back(zp);
        out.per_source_rho.push_back(s.arrival_rate * zp);
        out.total_rho += s.arrival_rate * zp;
    }
    out.busy_probability = out.total_rho;
    return out;
}

}  // namespace aoit
