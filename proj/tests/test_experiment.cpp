#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pams/experiment.hpp"

using namespace pams;
using namespace pams::experiment;

namespace {

ExperimentConfig small_exhaustive_config() {
    ExperimentConfig cfg;
    cfg.topology.antennas = 5;
    cfg.topology.devices = 2;
    cfg.optimizer = "exhaustive";
    cfg.schemes = {"discrete_pa", "full_pa", "full_local"};
    cfg.replications = 2;
    return cfg;
}

std::string rows_as_csv(const RunOutput& out) {
    std::ostringstream os;
    write_results_csv(os, out);
    return os.str();
}

std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("config defaults follow the simulation table", "[experiment]") {
    const ExperimentConfig cfg = config_from_json(json::object());
    CHECK(cfg.topology.antennas == 40);
    CHECK(cfg.topology.devices == 3);
    CHECK(cfg.params.frame_s == 1.0);
    CHECK_THAT(cfg.params.pb_watts,
               Catch::Matchers::WithinRel(19.952623149688796, 1e-12));
    CHECK(cfg.params.noise_watts == 1e-15);
    CHECK(cfg.params.intensity_cycles_per_bit == 200.0);
    CHECK(cfg.params.carrier_hz == 28e9);
    CHECK(cfg.params.bandwidth_hz == 50e6);
    CHECK(cfg.params.height_m == 4.0);
    CHECK(cfg.params.refractive_index == 1.4);
    CHECK(cfg.params.kappa == 1e-28);
    CHECK(cfg.params.gamma == 0.8);
    CHECK(cfg.ce.samples == 500);
    CHECK(cfg.ce.elites == 50);
    CHECK(cfg.ce.smoothing == 0.9);
}

TEST_CASE("config validation rejects bad input", "[experiment]") {
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"schemes": ["warp_drive"]})")), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"optimizer": "sorcery"})")), ConfigError);
    CHECK_THROWS_AS(
        config_from_json(json::parse(R"({"sweep": {"variable": "noise", "values": [1]}})")),
        ConfigError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"replications": 0})")), ConfigError);
    CHECK_THROWS_AS(
        config_from_json(json::parse(
            R"({"topology": {"mode": "explicit", "pa_x_m": [], "devices": [[1, 1]]}})")),
        ConfigError);
}

TEST_CASE("config parse errors carry line and column", "[experiment]") {
    const auto path = std::filesystem::temp_directory_path() / "pams_bad_config.json";
    {
        std::ofstream os(path);
        os << "{\n  \"seed\": 1,\n  oops\n}\n";
    }
    try {
        load_config(path.string());
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("runs are deterministic and independent of the worker count", "[experiment]") {
    const ExperimentConfig cfg = small_exhaustive_config();
    setenv("PAMS_OPT_THREADS", "1", 1);
    const std::string csv_serial = rows_as_csv(run(cfg));
    setenv("PAMS_OPT_THREADS", "4", 1);
    const std::string csv_threaded = rows_as_csv(run(cfg));
    unsetenv("PAMS_OPT_THREADS");
    CHECK(csv_serial == csv_threaded);
    CHECK(rows_as_csv(run(cfg)) == csv_serial);
}

TEST_CASE("adding replications extends earlier rows unchanged", "[experiment]") {
    ExperimentConfig cfg = small_exhaustive_config();
    cfg.schemes = {"discrete_pa"};
    cfg.replications = 2;
    const RunOutput two = run(cfg);
    cfg.replications = 3;
    const RunOutput three = run(cfg);
    REQUIRE(three.rows.size() == 3);
    for (std::size_t i = 0; i < two.rows.size(); ++i) {
        CHECK(three.rows[i].seed == two.rows[i].seed);
        CHECK(three.rows[i].objective_bits == two.rows[i].objective_bits);
    }
}

TEST_CASE("result rows satisfy their invariants", "[experiment]") {
    ExperimentConfig cfg = small_exhaustive_config();
    cfg.schemes = {"discrete_pa", "full_pa", "conventional_array", "fixed_tdma", "full_offload",
                   "full_local", "tdma_static", "noma_partial"};
    cfg.replications = 1;
    const RunOutput out = run(cfg);
    REQUIRE(out.rows.size() == cfg.schemes.size());
    for (const ResultRow& r : out.rows) {
        CHECK(r.offload_ratio >= 0.0);
        CHECK(r.offload_ratio <= 1.0);
        CHECK_THAT(r.avg_bits_per_device,
                   Catch::Matchers::WithinRel(r.objective_bits / 2.0, 1e-12));
        CHECK(r.t0_s >= 0.0);
        CHECK(r.t0_s <= cfg.params.frame_s * (1 + 1e-12));
    }
}

TEST_CASE("sweeping the transmit power raises the exact optimum", "[experiment]") {
    ExperimentConfig cfg = small_exhaustive_config();
    cfg.schemes = {"discrete_pa"};
    cfg.replications = 2;
    cfg.sweep = SweepSpec{"pb_dbm", {35.0, 39.0, 43.0}};
    const RunOutput out = run(cfg);
    REQUIRE(out.rows.size() == 6);
    // rows are ordered sweep-major, replication-minor
    for (std::size_t rep = 0; rep < 2; ++rep) {
        const double low = out.rows[0 + rep].objective_bits;
        const double mid = out.rows[2 + rep].objective_bits;
        const double high = out.rows[4 + rep].objective_bits;
        CHECK(low <= mid);
        CHECK(mid <= high);
    }
}

TEST_CASE("report writes the figure files for the sweep variable", "[experiment]") {
    ExperimentConfig cfg = small_exhaustive_config();
    cfg.schemes = {"discrete_pa", "full_pa"};
    cfg.replications = 1;
    cfg.sweep = SweepSpec{"pb_dbm", {35.0, 43.0}};
    const RunOutput out = run(cfg);
    const auto dir = temp_dir("pams_report_test");
    report(out, dir.string());
    CHECK(std::filesystem::exists(dir / "results.csv"));
    CHECK(std::filesystem::exists(dir / "fig3_convergence.csv"));
    CHECK(std::filesystem::exists(dir / "fig4_bits_vs_pb.csv"));
    CHECK(std::filesystem::exists(dir / "fig9_harvest_vs_pb.csv"));

    // header-only trace file: the exhaustive optimizer records no iterations
    std::ifstream trace(dir / "fig3_convergence.csv");
    std::string all((std::istreambuf_iterator<char>(trace)), std::istreambuf_iterator<char>());
    CHECK(all == "seed,sweep_value,scheme,iteration,best_bits,mean_elite_bits,field_entropy\r\n");
    std::filesystem::remove_all(dir);
}

TEST_CASE("sweeping the antenna count rebuilds the grid per value", "[experiment]") {
    ExperimentConfig cfg = small_exhaustive_config();
    cfg.schemes = {"discrete_pa"};
    cfg.replications = 1;
    cfg.sweep = SweepSpec{"N", {4.0, 6.0}};
    const RunOutput out = run(cfg);
    REQUIRE(out.rows.size() == 2);
    CHECK(out.rows[0].objective_bits != out.rows[1].objective_bits);

    const auto dir = temp_dir("pams_fig5_test");
    report(out, dir.string());
    CHECK(std::filesystem::exists(dir / "fig5_bits_vs_N.csv"));
    std::filesystem::remove_all(dir);

    cfg.sweep = SweepSpec{"N", {4.5}};
    CHECK_THROWS_AS(run(cfg), ConfigError);
}

TEST_CASE("empty result tables produce header-only CSV files", "[experiment]") {
    RunOutput empty;
    empty.has_sweep = true;
    empty.sweep_variable = "gamma";
    const auto dir = temp_dir("pams_empty_report");
    report(empty, dir.string());
    std::ifstream is(dir / "fig7_t0_vs_gamma.csv");
    std::string all((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    CHECK(all == "gamma,scheme,t0_s_mean,n_seeds\r\n");
    std::filesystem::remove_all(dir);
}

TEST_CASE("the CSV schema is pinned", "[experiment]") {
    CHECK(std::string(results_header) ==
          "seed,sweep_value,scheme,objective_bits,avg_bits_per_device,t0_s,t1_s,offload_ratio,"
          "harvested_power_avg_w,ce_iterations");
}

TEST_CASE("golden output for a pinned configuration", "[experiment]") {
    ExperimentConfig cfg;
    cfg.topology.antennas = 4;
    cfg.topology.devices = 2;
    cfg.optimizer = "exhaustive";
    cfg.schemes = {"discrete_pa", "full_local"};
    cfg.seed = 5;
    cfg.replications = 1;
    const std::string expected =
        "seed,sweep_value,scheme,objective_bits,avg_bits_per_device,t0_s,t1_s,offload_ratio,"
        "harvested_power_avg_w,ce_iterations\r\n"
        "5,,discrete_pa,57315863.696385391,28657931.848192696,0.50054391536799547,"
        "0.49945608463200475,0.9999366060459528,1.6142660448660468e-07,0\r\n"
        "5,,full_local,118205.79897789707,59102.899488948533,1,0,0,1.6518582141815766e-07,"
        "0\r\n";
    CHECK(rows_as_csv(run(cfg)) == expected);
}

TEST_CASE("compare runs the six configurations and checks the chain", "[experiment]") {
    ExperimentConfig cfg;
    cfg.topology.antennas = 4;
    cfg.topology.devices = 2;
    cfg.optimizer = "exhaustive";
    cfg.replications = 2;
    const CompareOutput out = run_compare(cfg);
    REQUIRE(out.rows.size() == 12);
    for (const auto& chain : out.chains) {
        INFO((chain.violations.empty() ? "" : chain.violations.front()));
        CHECK(chain.ok());
    }

    const auto dir = temp_dir("pams_compare_test");
    report_compare(out, dir.string(), cfg.topology.devices);
    CHECK(std::filesystem::exists(dir / "compare.csv"));
    CHECK(std::filesystem::exists(dir / "fig6_bits_vs_config.csv"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("cross-entropy traces land in the trace file", "[experiment]") {
    ExperimentConfig cfg;
    cfg.topology.antennas = 5;
    cfg.topology.devices = 2;
    cfg.optimizer = "ce";
    cfg.ce.samples = 30;
    cfg.ce.elites = 6;
    cfg.schemes = {"discrete_pa"};
    const RunOutput out = run(cfg);
    REQUIRE(out.traces.size() == 1);
    CHECK(out.traces.front().trace.rows.size() == out.rows.front().ce_iterations);
    const auto dir = temp_dir("pams_trace_test");
    report(out, dir.string());
    std::ifstream trace(dir / "fig3_convergence.csv");
    std::string line;
    std::getline(trace, line);
    std::getline(trace, line);
    CHECK(!line.empty());
    std::filesystem::remove_all(dir);
}
