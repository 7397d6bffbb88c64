#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kBin = AOI_CLI_BIN;
const std::string kScenarioDir = AOI_SCENARIO_DIR;

int run_cli(const std::string& args) {
    const std::string cmd = kBin + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "aoi_tandem_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::size_t line_count(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("analyze writes a CSV with J+1 data rows and exits 0") {
    const fs::path out = work_dir() / "analyze.csv";
    fs::remove(out);
    const int rc = run_cli("analyze --scenario " + kScenarioDir + "/three_source.json --out " + out.string());
    CHECK(rc == 0);
    const std::string csv = slurp(out);
    CHECK(line_count(csv) == 5);  // header + 3 sources + globals
    CHECK(csv.rfind("priority,", 0) == 0);
}

TEST_CASE("analyze on an unstable scenario writes markers and exits 2") {
    const fs::path out = work_dir() / "analyze_unstable.csv";
    fs::remove(out);
    const int rc =
        run_cli("analyze --scenario " + kScenarioDir + "/unstable_processing.json --out " + out.string());
    CHECK(rc == 2);
    const std::string csv = slurp(out);
    CHECK(csv.find("UNSTABLE") != std::string::npos);
}

TEST_CASE("analyze with a missing scenario exits 1 and writes nothing") {
    const fs::path out = work_dir() / "never_written.csv";
    fs::remove(out);
    const int rc = run_cli("analyze --scenario /no/such/file.json --out " + out.string());
    CHECK(rc == 1);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("simulate is byte-deterministic for a fixed seed") {
    const fs::path out1 = work_dir() / "sim1.csv";
    const fs::path out2 = work_dir() / "sim2.csv";
    const fs::path tr1 = work_dir() / "trace1.csv";
    const fs::path tr2 = work_dir() / "trace2.csv";
    const std::string common = "simulate --scenario " + kScenarioDir +
                               "/three_source.json --seed 42 --packets 20000 --warmup 0.05";
    CHECK(run_cli(common + " --out " + out1.string() + " --trace " + tr1.string()) == 0);
    CHECK(run_cli(common + " --out " + out2.string() + " --trace " + tr2.string()) == 0);
    CHECK(slurp(out1) == slurp(out2));
    CHECK(slurp(tr1) == slurp(tr2));
    CHECK(line_count(slurp(tr1)) == 20001);  // header + one row per delivered packet

    const fs::path out3 = work_dir() / "sim3.csv";
    CHECK(run_cli("simulate --scenario " + kScenarioDir +
                  "/three_source.json --seed 43 --packets 20000 --out " + out3.string()) == 0);
    CHECK(slurp(out1) != slurp(out3));
}

TEST_CASE("simulate reports instability via the CSV, not the exit code") {
    const fs::path out = work_dir() / "sim_unstable.csv";
    const int rc = run_cli("simulate --scenario " + kScenarioDir +
                           "/unstable_processing.json --seed 1 --packets 20000 --out " + out.string());
    CHECK(rc == 0);
    CHECK(slurp(out).find("stability_warning=true") != std::string::npos);
}

TEST_CASE("compare exits 0 on a stable scenario and 2 on an unstable one") {
    const fs::path out = work_dir() / "cmp.csv";
    CHECK(run_cli("compare --scenario " + kScenarioDir +
                  "/three_source.json --seed 9 --packets 20000 --out " + out.string()) == 0);
    CHECK(line_count(slurp(out)) == 4);

    const fs::path out2 = work_dir() / "cmp_unstable.csv";
    fs::remove(out2);
    CHECK(run_cli("compare --scenario " + kScenarioDir +
                  "/unstable_transmission.json --seed 9 --packets 1000 --out " + out2.string()) == 2);
}

TEST_CASE("sweep writes ascending rows plus argmin rows") {
    const fs::path out = work_dir() / "sweep.csv";
    const int rc = run_cli("sweep --scenario " + kScenarioDir +
                           "/proc150.json --from 0.05 --to 0.25 --steps 5 --analytic-only --out " +
                           out.string());
    CHECK(rc == 0);
    const std::string csv = slurp(out);
    CHECK(line_count(csv) == 8);  // header + 5 rows + 2 argmin rows
    CHECK(csv.find("argmin_analytic") != std::string::npos);
    CHECK(csv.find("argmin_simulated") != std::string::npos);

    // multipliers are accepted as a comma list
    const int rc2 = run_cli("sweep --scenario " + kScenarioDir +
                            "/proc150.json --from 0.05 --to 0.25 --steps 3 --multipliers 1,1,1 "
                            "--analytic-only --out " +
                            out.string());
    CHECK(rc2 == 0);
}

TEST_CASE("sweep rejects a bad range with exit 1") {
    const fs::path out = work_dir() / "sweep_bad.csv";
    fs::remove(out);
    const int rc = run_cli("sweep --scenario " + kScenarioDir +
                           "/proc150.json --from 0.25 --to 0.05 --steps 5 --analytic-only --out " +
                           out.string());
    CHECK(rc == 1);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("usage errors exit 1") {
    CHECK(run_cli("analyze --out /tmp/x.csv") == 1);      // missing --scenario
    CHECK(run_cli("unknown-subcommand") == 1);
}
