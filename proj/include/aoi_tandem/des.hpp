#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "aoi_tandem/errors.hpp"
#include "aoi_tandem/rng.hpp"
#include "aoi_tandem/scenario.hpp"

namespace aoit {

/// Lifecycle timestamps of one delivered packet, in seconds. seq is the
/// per-source arrival index starting at 1; per-source order is preserved
/// through both stages.
struct PacketRecord {
    int source = 0;  // priority index j
    std::uint64_t seq = 0;
    double t_arrival = 0.0;
    double t_proc_start = 0.0;
    double t_proc_end = 0.0;
    double t_tx_start = 0.0;
    double t_depart = 0.0;
};

struct SimConfig {
    std::uint64_t seed = 1;
    std::uint64_t n_packets = 1000000;  // delivered-packet budget
    double warmup_fraction = 0.05;      // leading fraction of departures excluded from statistics
    bool retain_trace = false;
};

struct SourceSimStats {
    int priority = 0;
    std::uint64_t delivered = 0;        // post-warmup departures
    double paoi_mean = std::numeric_limits<double>::quiet_NaN();
    double paoi_ci95 = std::numeric_limits<double>::quiet_NaN();  // half-width, batch means
    double wait_proc_mean = std::numeric_limits<double>::quiet_NaN();
    double wait_tx_mean = std::numeric_limits<double>::quiet_NaN();
    double tx_time_mean = std::numeric_limits<double>::quiet_NaN();
};

struct SimReport {
    std::vector<SourceSimStats> sources;
    double horizon = 0.0;               // time of the final departure
    double proc_busy_fraction = 0.0;
    double tx_utilization = 0.0;
    double tx_count_time_avg = 0.0;     // time-average number in the transmission subsystem
    double tx_sojourn_mean = 0.0;       // mean time from processing end to departure, all packets
    bool stability_warning = false;
};

struct SimOutput {
    SimReport report;
    std::vector<PacketRecord> trace;    // departure order; empty unless retain_trace
};

/// Draws one interarrival gap: -ln(1-U)/lambda.
inline double sample_interarrival(Rng& rng, double lambda) {
    return rng.exponential(lambda);
}

/// Draws one packet transmission time: a fresh unit-mean exponential gain,
/// clamped to the channel floor, pushed through the Shannon-rate service map.
inline double sample_tx_time(Rng& rng, double processed_bits, const ChannelSpec& ch) {
    if (!(ch.gain_floor > 0.0)) throw FloorRequired();
    if (processed_bits == 0.0) {
        rng.exponential(1.0);  // keep the stream aligned
        return 0.0;
    }
    const double h = std::max(rng.exponential(1.0), ch.gain_floor);
    return tx_time_scale(processed_bits, ch.bandwidth_hz) / std::log1p(mean_snr(ch) * h);
}

/// Per-source peak-age samples from a delivered-packet trace: for every packet
/// with a present predecessor (seq - 1), the sample is the interarrival gap
/// plus the system time. The first packet of each source contributes nothing.
/// Throws MalformedTrace on timestamp-order or per-source FIFO violations.
inline std::vector<std::vector<double>> paoi_from_trace(std::span<const PacketRecord> trace) {
    int max_source = 0;
    for (const PacketRecord& r : trace) max_source = std::max(max_source, r.source);

    std::vector<std::vector<double>> samples(static_cast<std::size_t>(max_source));
    struct Prev {
        std::uint64_t seq = 0;
        double t_arrival = 0.0;
    };
    std::vector<Prev> prev(static_cast<std::size_t>(max_source));

    for (const PacketRecord& r : trace) {
        if (r.source < 1) throw MalformedTrace("source index must be >= 1");
        if (r.seq < 1) throw MalformedTrace("sequence numbers start at 1");
        if (!(r.t_arrival <= r.t_proc_start && r.t_proc_start <= r.t_proc_end &&
              r.t_proc_end <= r.t_tx_start && r.t_tx_start <= r.t_depart))
            throw MalformedTrace("timestamps out of order within a record");
        Prev& p = prev[static_cast<std::size_t>(r.source - 1)];
        if (p.seq != 0) {
            if (r.seq <= p.seq) throw MalformedTrace("per-source sequence numbers must increase");
            if (r.t_arrival < p.t_arrival) throw MalformedTrace("per-source arrivals out of order");
            if (r.seq == p.seq + 1)
                samples[static_cast<std::size_t>(r.source - 1)].push_back(
                    (r.t_arrival - p.t_arrival) + (r.t_depart - r.t_arrival));
        }
        p = Prev{r.seq, r.t_arrival};
    }
    return samples;
}

namespace detail {

// 95% half-width from 20 batch means (t quantile, 19 dof). PAoI samples are
// serially correlated, so i.i.d. intervals would be too tight; below 40
// samples fall back to the naive normal interval.
inline double ci95_batch_means(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    if (n < 40) {
        double mean = 0.0;
        for (double v : samples) mean += v;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double v : samples) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n - 1);
        return 1.96 * std::sqrt(var / static_cast<double>(n));
    }
    constexpr int kBatches = 20;
    constexpr double kT975Dof19 = 2.093024;
    const std::size_t batch = n / kBatches;
    double bm[kBatches];
    double grand = 0.0;
    for (int b = 0; b < kBatches; ++b) {
        double s = 0.0;
        for (std::size_t i = static_cast<std::size_t>(b) * batch; i < static_cast<std::size_t>(b + 1) * batch; ++i)
            s += samples[i];
        bm[b] = s / static_cast<double>(batch);
        grand += bm[b];
    }
    grand /= kBatches;
    double var = 0.0;
    for (int b = 0; b < kBatches; ++b) var += (bm[b] - grand) * (bm[b] - grand);
    var /= (kBatches - 1);
    return kT975Dof19 * std::sqrt(var / kBatches);
}

enum class EventKind : int { TxDone = 0, ProcDone = 1, Arrival = 2 };

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::Arrival;
    int source = 0;  // 0-based class index, for deterministic tie-breaking
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
        return a.source > b.source;
    }
};

struct InFlight {
    int source = 0;  // 0-based
    std::uint64_t seq = 0;
    double interarrival = 0.0;  // gap to the previous arrival of this source; 0 for seq 1
    double t_arrival = 0.0;
    double t_proc_start = 0.0;
    double t_proc_end = 0.0;
    double t_tx_start = 0.0;
};

}  // namespace detail

/// Event-driven run of the tandem system until n_packets depart: Poisson
/// arrivals per source, non-preemptive priority service with deterministic
/// per-class time at the processor, FCFS service with a fresh fading draw per
/// packet at the transmitter. Identical (scenario, config) inputs replay
/// bit-identically. Ties are broken by (time, TxDone < ProcDone < Arrival,
/// source priority).
inline SimOutput run_simulation(const Scenario& sc, const SimConfig& cfg) {
    validate_scenario(sc);
    if (cfg.n_packets < 1)
        throw ValidationError("n_packets", -1, "n_packets must be >= 1");
    if (!(cfg.warmup_fraction >= 0.0 && cfg.warmup_fraction < 1.0))
        throw ValidationError("warmup_fraction", -1, "warmup_fraction must be in [0, 1)");
    if (!(sc.channel.gain_floor > 0.0)) throw FloorRequired();

    const int klass_count = static_cast<int>(sc.sources.size());
    const double gbar = mean_snr(sc.channel);
    const double h_min = sc.channel.gain_floor;

    std::vector<double> lambda(klass_count), proc_t(klass_count), xi(klass_count);
    for (int j = 0; j < klass_count; ++j) {
        lambda[j] = sc.sources[j].arrival_rate;
        proc_t[j] = processing_time(sc.sources[j]);
        xi[j] = tx_time_scale(sc.sources[j].processed_size_bits, sc.channel.bandwidth_hz);
    }

    Rng fading = Rng::substream(cfg.seed, 0);
    std::vector<Rng> arrival_rng;
    arrival_rng.reserve(static_cast<std::size_t>(klass_count));
    for (int j = 0; j < klass_count; ++j)
        arrival_rng.push_back(Rng::substream(cfg.seed, static_cast<std::uint64_t>(j) + 1));

    using detail::Event;
    using detail::EventKind;
    using detail::InFlight;
    std::priority_queue<Event, std::vector<Event>, detail::EventAfter> events;

    std::vector<std::deque<InFlight>> proc_queue(static_cast<std::size_t>(klass_count));
    std::deque<InFlight> tx_queue;
    bool proc_busy = false, tx_busy = false;
    InFlight in_proc{}, in_tx{};

    std::vector<std::uint64_t> arrival_seq(static_cast<std::size_t>(klass_count), 0);
    std::vector<double> last_arrival(static_cast<std::size_t>(klass_count), 0.0);

    const std::uint64_t warmup_cut =
        static_cast<std::uint64_t>(cfg.warmup_fraction * static_cast<double>(cfg.n_packets));
    const std::uint64_t midpoint_at = cfg.n_packets / 2;

    // accumulators
    std::uint64_t delivered = 0;
    std::uint64_t in_system = 0;
    double now = 0.0, last_time = 0.0;
    double proc_busy_time = 0.0, tx_busy_time = 0.0, tx_system_area = 0.0;
    double sojourn_tx_sum = 0.0;
    double midpoint_len = 0.0;
    std::vector<std::uint64_t> delivered_post(static_cast<std::size_t>(klass_count), 0);
    std::vector<double> wait_proc_sum(static_cast<std::size_t>(klass_count), 0.0);
    std::vector<double> wait_tx_sum(static_cast<std::size_t>(klass_count), 0.0);
    std::vector<double> tx_time_sum(static_cast<std::size_t>(klass_count), 0.0);
    std::vector<std::vector<double>> paoi_samples(static_cast<std::size_t>(klass_count));
    std::vector<PacketRecord> trace;
    if (cfg.retain_trace) trace.reserve(cfg.n_packets);

    auto start_proc = [&](InFlight p, double t) {
        p.t_proc_start = t;
        p.t_proc_end = t + proc_t[p.source];
        events.push(Event{p.t_proc_end, EventKind::ProcDone, p.source});
        in_proc = p;
        proc_busy = true;
    };
    auto start_tx = [&](InFlight p, double t) {
        p.t_tx_start = t;
        const double h = std::max(fading.exponential(1.0), h_min);
        events.push(Event{t + xi[p.source] / std::log1p(gbar * h), EventKind::TxDone, p.source});
        in_tx = p;
        tx_busy = true;
    };

    for (int j = 0; j < klass_count; ++j)
        events.push(Event{arrival_rng[static_cast<std::size_t>(j)].exponential(lambda[j]),
                          EventKind::Arrival, j});

    while (delivered < cfg.n_packets) {
        const Event ev = events.top();
        events.pop();
        now = ev.time;
        const double dt = now - last_time;
        if (proc_busy) proc_busy_time += dt;
        if (tx_busy) tx_busy_time += dt;
        tx_system_area += dt * (static_cast<double>(tx_queue.size()) + (tx_busy ? 1.0 : 0.0));
        last_time = now;

        switch (ev.kind) {
            case EventKind::Arrival: {
                const int j = ev.source;
                InFlight p;
                p.source = j;
                p.seq = ++arrival_seq[static_cast<std::size_t>(j)];
                p.t_arrival = now;
                p.interarrival = p.seq > 1 ? now - last_arrival[static_cast<std::size_t>(j)] : 0.0;
                last_arrival[static_cast<std::size_t>(j)] = now;
                ++in_system;
                if (!proc_busy)
                    start_proc(p, now);
                else
                    proc_queue[static_cast<std::size_t>(j)].push_back(p);
                events.push(Event{now + arrival_rng[static_cast<std::size_t>(j)].exponential(lambda[j]),
                                  EventKind::Arrival, j});
                break;
            }
            case EventKind::ProcDone: {
                InFlight p = in_proc;
                proc_busy = false;
                if (!tx_busy)
                    start_tx(p, now);
                else
                    tx_queue.push_back(p);
                for (int j = 0; j < klass_count; ++j) {
                    if (!proc_queue[static_cast<std::size_t>(j)].empty()) {
                        InFlight next = proc_queue[static_cast<std::size_t>(j)].front();
                        proc_queue[static_cast<std::size_t>(j)].pop_front();
                        start_proc(next, now);
                        break;
                    }
                }
                break;
            }
            case EventKind::TxDone: {
                InFlight p = in_tx;
                tx_busy = false;
                ++delivered;
                --in_system;
                sojourn_tx_sum += now - p.t_proc_end;

                if (delivered > warmup_cut) {
                    const std::size_t j = static_cast<std::size_t>(p.source);
                    ++delivered_post[j];
                    wait_proc_sum[j] += p.t_proc_start - p.t_arrival;
                    wait_tx_sum[j] += p.t_tx_start - p.t_proc_end;
                    tx_time_sum[j] += now - p.t_tx_start;
                    if (p.seq > 1)
                        paoi_samples[j].push_back(p.interarrival + (now - p.t_arrival));
                }
                if (cfg.retain_trace)
                    trace.push_back(PacketRecord{p.source + 1, p.seq, p.t_arrival, p.t_proc_start,
                                                 p.t_proc_end, p.t_tx_start, now});
                if (delivered == midpoint_at) midpoint_len = static_cast<double>(in_system);
                if (!tx_queue.empty()) {
                    InFlight next = tx_queue.front();
                    tx_queue.pop_front();
                    start_tx(next, now);
                }
                break;
            }
        }
    }

    SimOutput out;
    out.report.horizon = now;
    out.report.proc_busy_fraction = proc_busy_time / now;
    out.report.tx_utilization = tx_busy_time / now;
    out.report.tx_count_time_avg = tx_system_area / now;
    out.report.tx_sojourn_mean = sojourn_tx_sum / static_cast<double>(delivered);

    const double end_len = static_cast<double>(in_system);
    out.report.stability_warning = out.report.proc_busy_fraction > 0.999 ||
                                   out.report.tx_utilization > 0.999 ||
                                   end_len > 10.0 * std::max(midpoint_len, 1.0);

    for (int j = 0; j < klass_count; ++j) {
        const std::size_t js = static_cast<std::size_t>(j);
        SourceSimStats st;
        st.priority = j + 1;
        st.delivered = delivered_post[js];
        if (delivered_post[js] > 0) {
            st.wait_proc_mean = wait_proc_sum[js] / static_cast<double>(delivered_post[js]);
            st.wait_tx_mean = wait_tx_sum[js] / static_cast<double>(delivered_post[js]);
            st.tx_time_mean = tx_time_sum[js] / static_cast<double>(delivered_post[js]);
        }
        if (!paoi_samples[js].empty()) {
            double mean = 0.0;
            for (double v : paoi_samples[js]) mean += v;
            st.paoi_mean = mean / static_cast<double>(paoi_samples[js].size());
            st.paoi_ci95 = detail::ci95_batch_means(paoi_samples[js]);
        }
        out.report.sources.push_back(st);
    }
    out.trace = std::move(trace);
    return out;
}

}  // namespace aoit
