#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "aoi_tandem/analysis.hpp"
#include "aoi_tandem/des.hpp"

using namespace aoit;

namespace {

ChannelSpec test_channel() { return ChannelSpec{0.125, 200.0, 2.2, 4.0e-21, 2.0e6, 1e-6}; }

Scenario three_source(double l1, double l2, double l3) {
    Scenario sc;
    sc.channel = test_channel();
    sc.sources = {
        SourceSpec{1, l1, 120e6, 20e6, 50e6},
        SourceSpec{2, l2, 35e6, 20e6, 50e6},
        SourceSpec{3, l3, 30e6, 20e6, 50e6},
    };
    return sc;
}

Scenario single_source(double lambda) {
    Scenario sc;
    sc.channel = test_channel();
    sc.sources = {SourceSpec{1, lambda, 120e6, 20e6, 50e6}};
    return sc;
}

}  // namespace

TEST_CASE("interarrival sampling is reproducible and has the right mean") {
    Rng a(99), b(99);
    for (int i = 0; i < 1000; ++i)
        REQUIRE(sample_interarrival(a, 0.4) == sample_interarrival(b, 0.4));

    Rng rng(7);
    const double lambda = 2.0;
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_interarrival(rng, lambda);
    const double mean = sum / n;
    // 3 sigma / sqrt(n) with sigma = 1/lambda
    CHECK(std::abs(mean - 1.0 / lambda) <= 3.0 / (lambda * std::sqrt(static_cast<double>(n))));
}

TEST_CASE("transmission sampling clamps to the gain floor and handles zero payload") {
    ChannelSpec ch = test_channel();
    Rng rng(5);
    CHECK(sample_tx_time(rng, 0.0, ch) == 0.0);

    ch.gain_floor = 1e9;  // every draw lands below the floor
    const double clamped = tx_time_scale(20e6, ch.bandwidth_hz) / std::log1p(mean_snr(ch) * ch.gain_floor);
    Rng rng2(6);
    for (int i = 0; i < 100; ++i) REQUIRE(sample_tx_time(rng2, 20e6, ch) == clamped);

    ch.gain_floor = 0.0;
    Rng rng3(7);
    CHECK_THROWS_AS(sample_tx_time(rng3, 20e6, ch), FloorRequired);
}

TEST_CASE("sampled transmission times agree with the quadrature mean") {
    const ChannelSpec ch = test_channel();
    Rng rng(31337);
    const int n = 200000;
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = sample_tx_time(rng, 20e6, ch);
        const double d = v - mean;
        mean += d / (i + 1);
        m2 += d * (v - mean);
    }
    const double se = std::sqrt(m2 / (n - 1.0) / n);
    const double quad = expected_transmission_time({"", ch, {SourceSpec{1, 0.1, 120e6, 20e6, 50e6}}}, 1);
    CHECK(std::abs(mean - quad) <= 3.0 * se);
}

TEST_CASE("peak-age samples from a hand-built trace") {
    std::vector<PacketRecord> trace = {
        {1, 1, 1.0, 1.1, 1.5, 1.6, 2.0},
        {1, 2, 3.0, 3.2, 3.6, 3.8, 5.0},
    };
    const auto samples = paoi_from_trace(trace);
    REQUIRE(samples.size() == 1);
    REQUIRE(samples[0].size() == 1);
    // (3 - 1) + (5 - 3) = 4
    CHECK(samples[0][0] == Catch::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("a single delivered packet yields no peak-age sample") {
    std::vector<PacketRecord> trace = {{1, 1, 1.0, 1.0, 2.0, 2.0, 3.0}};
    const auto samples = paoi_from_trace(trace);
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].empty());
}

TEST_CASE("malformed traces are rejected") {
    // timestamps out of order within a record
    std::vector<PacketRecord> bad_stamp = {{1, 1, 1.0, 0.9, 2.0, 2.0, 3.0}};
    CHECK_THROWS_AS(paoi_from_trace(bad_stamp), MalformedTrace);

    // per-source reordering (seq goes backwards in departure order)
    std::vector<PacketRecord> reordered = {
        {1, 2, 3.0, 3.0, 3.5, 3.5, 4.0},
        {1, 1, 1.0, 1.1, 1.5, 1.6, 5.0},
    };
    CHECK_THROWS_AS(paoi_from_trace(reordered), MalformedTrace);
}

TEST_CASE("simulation config invariants are enforced") {
    const Scenario sc = single_source(0.1);
    SimConfig cfg;
    cfg.n_packets = 0;
    CHECK_THROWS_AS(run_simulation(sc, cfg), ValidationError);
    cfg.n_packets = 10;
    cfg.warmup_fraction = 1.0;
    CHECK_THROWS_AS(run_simulation(sc, cfg), ValidationError);

    Scenario no_floor = sc;
    no_floor.channel.gain_floor = 0.0;
    CHECK_THROWS_AS(run_simulation(no_floor, SimConfig{}), FloorRequired);
}

TEST_CASE("first packet is excluded: one delivered packet gives no sample") {
    SimConfig cfg;
    cfg.seed = 3;
    cfg.n_packets = 1;
    cfg.warmup_fraction = 0.0;
    const SimOutput out = run_simulation(single_source(0.1), cfg);
    REQUIRE(out.report.sources.size() == 1);
    CHECK(out.report.sources[0].delivered == 1);
    CHECK(std::isnan(out.report.sources[0].paoi_mean));
}

TEST_CASE("identical scenario and config replay bit-identically") {
    const Scenario sc = three_source(0.05, 0.10, 0.15);
    SimConfig cfg;
    cfg.seed = 11;
    cfg.n_packets = 20000;
    const SimOutput a = run_simulation(sc, cfg);
    const SimOutput b = run_simulation(sc, cfg);
    CHECK(a.report.horizon == b.report.horizon);
    CHECK(a.report.proc_busy_fraction == b.report.proc_busy_fraction);
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(a.report.sources[j].paoi_mean == b.report.sources[j].paoi_mean);
        CHECK(a.report.sources[j].wait_proc_mean == b.report.sources[j].wait_proc_mean);
        CHECK(a.report.sources[j].delivered == b.report.sources[j].delivered);
    }
}

TEST_CASE("zero-load limit: peak age approaches 1/lambda + Z^P + Z^T") {
    Scenario sc = single_source(0.001);
    sc.channel.gain_floor = 1e6;  // effectively deterministic transmission
    SimConfig cfg;
    cfg.seed = 17;
    cfg.n_packets = 20000;
    const SimOutput out = run_simulation(sc, cfg);

    const double z_tx = tx_time_scale(20e6, sc.channel.bandwidth_hz) /
                        std::log1p(mean_snr(sc.channel) * sc.channel.gain_floor);
    const double expected = 1.0 / 0.001 + 2.0 + z_tx;
    const SourceSimStats& st = out.report.sources[0];
    REQUIRE(st.paoi_ci95 > 0.0);
    CHECK(std::abs(st.paoi_mean - expected) <= 3.0 * st.paoi_ci95);
    CHECK(st.wait_proc_mean <= 0.05);  // queues are almost surely empty
    CHECK_FALSE(out.report.stability_warning);
}

TEST_CASE("per-class waiting times track the priority-queue formula") {
    const Scenario sc = three_source(0.05, 0.10, 0.15);
    SimConfig cfg;
    cfg.seed = 42;
    cfg.n_packets = 200000;
    const SimOutput out = run_simulation(sc, cfg);
    const LoadSummary loads = load_summary(sc);
    for (int j = 1; j <= 3; ++j) {
        const double theory = waiting_time_processing(j, loads);
        const double sim = out.report.sources[static_cast<std::size_t>(j - 1)].wait_proc_mean;
        INFO("class " << j << " theory " << theory << " sim " << sim);
        CHECK(std::abs(sim - theory) / theory < 0.05);
    }
    // busy fraction tracks the total load
    CHECK(std::abs(out.report.proc_busy_fraction - loads.busy_probability) / loads.busy_probability < 0.02);
}

TEST_CASE("Little's law holds for the transmission subsystem") {
    const Scenario sc = three_source(0.05, 0.10, 0.15);
    SimConfig cfg;
    cfg.seed = 9;
    cfg.n_packets = 200000;
    const SimOutput out = run_simulation(sc, cfg);
    const double lambda_eff = static_cast<double>(cfg.n_packets) / out.report.horizon;
    const double little = lambda_eff * out.report.tx_sojourn_mean;
    CHECK(std::abs(out.report.tx_count_time_avg - little) / little < 0.02);
}

TEST_CASE("trace is consistent with inline statistics and the scenario") {
    const Scenario sc = three_source(0.05, 0.10, 0.15);
    SimConfig cfg;
    cfg.seed = 23;
    cfg.n_packets = 5000;
    cfg.warmup_fraction = 0.0;
    cfg.retain_trace = true;
    const SimOutput out = run_simulation(sc, cfg);
    REQUIRE(out.trace.size() == cfg.n_packets);

    // departure order, exact per-class processing times
    double last_depart = 0.0;
    for (const PacketRecord& r : out.trace) {
        REQUIRE(r.t_depart >= last_depart);
        last_depart = r.t_depart;
        const double zp = processing_time(sc.sources[static_cast<std::size_t>(r.source - 1)]);
        REQUIRE(std::abs((r.t_proc_end - r.t_proc_start) - zp) <= 1e-7);
        REQUIRE(r.t_arrival <= r.t_proc_start);
        REQUIRE(r.t_tx_start >= r.t_proc_end);
    }

    // recomputed peak-age samples reproduce the report means (no warmup)
    const auto samples = paoi_from_trace(out.trace);
    for (std::size_t j = 0; j < 3; ++j) {
        REQUIRE(samples[j].size() == out.report.sources[j].delivered - 1);
        double mean = 0.0;
        for (double v : samples[j]) mean += v;
        mean /= static_cast<double>(samples[j].size());
        CHECK(mean == Catch::Approx(out.report.sources[j].paoi_mean).epsilon(1e-12));
    }
}

TEST_CASE("delivered counts cover the post-warmup budget") {
    const Scenario sc = three_source(0.05, 0.10, 0.15);
    SimConfig cfg;
    cfg.seed = 4;
    cfg.n_packets = 10000;
    cfg.warmup_fraction = 0.05;
    const SimOutput out = run_simulation(sc, cfg);
    std::uint64_t total = 0;
    for (const SourceSimStats& s : out.report.sources) total += s.delivered;
    CHECK(total >= static_cast<std::uint64_t>((1.0 - cfg.warmup_fraction) * cfg.n_packets));
}

TEST_CASE("saturated runs raise the stability warning") {
    // rho = 2.4: the processor cannot keep up
    const Scenario sc = single_source(1.2);
    SimConfig cfg;
    cfg.seed = 12;
    cfg.n_packets = 30000;
    const SimOutput out = run_simulation(sc, cfg);
    CHECK(out.report.stability_warning);
    CHECK(out.report.proc_busy_fraction > 0.99);
}
