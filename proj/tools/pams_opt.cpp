#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pams/baselines.hpp"
#include "pams/experiment.hpp"
#include "pams/json_io.hpp"
#include "pams/oracle.hpp"

namespace {

using namespace pams;
using experiment::ExperimentConfig;

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON experiment configuration");
    cmd->add_option("--seed", args.seed, "override the base seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--out", args.out_dir, "override the output directory");
}

ExperimentConfig load(const CommonArgs& args) {
    ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = experiment::load_config(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    cfg.validate();
    return cfg;
}

int cmd_solve(const CommonArgs& args) {
    const ExperimentConfig cfg = load(args);
    const experiment::SchemeSpec spec = experiment::parse_scheme(cfg.schemes.front());
    const std::uint64_t rep_seed = cfg.seed;
    const Topology topo = experiment::make_topology(cfg, rep_seed);

    json doc;
    doc["params"] = cfg.params;
    doc["topology"] = topo;
    doc["scheme"] = spec.name;
    if (spec.is_baseline) {
        baselines::BaselineOuterSettings settings;
        settings.exhaustive = cfg.optimizer == "exhaustive";
        settings.max_evals = cfg.exhaustive_budget;
        settings.ce = cfg.ce;
        Rng rng = Rng::substream(rep_seed, 1);
        const baselines::BaselineRun run =
            baselines::optimize_baseline(spec.kind, topo, cfg.params, settings, rng);
        doc["activations"] = run.activations;
        doc["objective_bits"] = run.solution.objective_bits;
        doc["offload_bits"] = run.solution.offload_bits;
        doc["local_bits"] = run.solution.local_bits;
        doc["t0_s"] = run.solution.t0_s;
        doc["t1_s"] = run.solution.t1_s;
        doc["ce_iterations"] = run.iterations;
    } else {
        const SchemeEvaluator evaluator(topo, cfg.params);
        OuterRun run;
        if (cfg.optimizer == "exhaustive") {
            run = oracle::exhaustive_outer(topo, cfg.params, spec.config, cfg.exhaustive_budget);
        } else {
            Rng rng = Rng::substream(rep_seed, 1);
            run = ce::optimize_scheme(evaluator, spec.config, cfg.ce, rng);
        }
        doc["solution"] = evaluator.evaluate(spec.config, run.activations);
        doc["objective_bits"] = run.objective_bits;
        doc["ce_iterations"] = run.iterations;
    }

    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream os(std::filesystem::path(cfg.output_dir) / "solution.json");
    os << doc.dump(2) << "\n";
    std::cout << doc.dump(2) << std::endl;
    return 0;
}

int cmd_sweep(const CommonArgs& args) {
    const ExperimentConfig cfg = load(args);
    const experiment::RunOutput out = experiment::run(cfg);
    std::cout << experiment::report(out, cfg.output_dir);
    std::cout << "wrote " << cfg.output_dir << "/results.csv" << std::endl;
    return 0;
}

int cmd_compare(const CommonArgs& args) {
    const ExperimentConfig cfg = load(args);
    const experiment::CompareOutput out = experiment::run_compare(cfg);
    const std::size_t n_dev = cfg.topology.sampled
                                  ? cfg.topology.devices
                                  : cfg.topology.explicit_topology.device_count();
    std::cout << experiment::report_compare(out, cfg.output_dir, n_dev);
    bool ok = true;
    for (const auto& chain : out.chains) ok = ok && chain.ok();
    std::cout << (ok ? "theorem chain: ok" : "theorem chain: VIOLATIONS") << std::endl;
    return ok ? 0 : 1;
}

struct ValidateState {
    int failures = 0;

    void check(bool ok, const std::string& name, const std::string& detail) {
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
        if (!detail.empty()) std::cout << " (" << detail << ")";
        std::cout << std::endl;
        if (!ok) ++failures;
    }
};

ActivationSet random_activation_set(std::size_t n_bits, Rng& rng) {
    auto random_pattern = [&]() {
        std::vector<std::uint8_t> bits(n_bits, 0);
        bool any = false;
        for (auto& b : bits) {
            b = rng.bernoulli(0.5) ? 1 : 0;
            any |= b != 0;
        }
        if (!any) bits[rng.uniform_below(n_bits)] = 1;
        return ActivationPattern(std::move(bits));
    };
    return ActivationSet{random_pattern(), {random_pattern()}};
}

int cmd_validate(const CommonArgs& args) {
    ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = experiment::load_config(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    const SystemParams params = cfg.params;
    ValidateState state;

    // Inner solver against the brute-force grid oracle.
    {
        double worst = 0.0;
        bool ok = true;
        for (std::uint64_t i = 0; i < 4; ++i) {
            Rng rng = Rng::substream(cfg.seed, 100 + i);
            const std::size_t n_dev = 1 + i % 2;
            const Topology topo = sample_topology(params, 8, n_dev, rng);
            const ActivationSet set = random_activation_set(8, rng);
            InnerProblem problem = InnerProblem::of(topo, params, set.downlink, set.uplink);
            const InnerSolution sol = solve(problem);
            const double lower = oracle::brute_force_inner(problem, {});
            const double rel = (sol.objective_bits - lower) / std::max(lower, 1e-300);
            worst = std::max(worst, std::abs(rel));
            ok = ok && rel >= -1e-9 && rel <= 0.005;
        }
        state.check(ok, "inner solver vs grid oracle", "worst rel diff " + csv::number(worst));
    }

    // KKT residual and feasibility identities on random instances.
    {
        bool ok = true;
        for (std::uint64_t i = 0; i < 20; ++i) {
            Rng rng = Rng::substream(cfg.seed, 200 + i);
            const Topology topo = sample_topology(params, 10, 1 + i % 3, rng);
            const ActivationSet set = random_activation_set(10, rng);
            InnerProblem problem = InnerProblem::of(topo, params, set.downlink, set.uplink);
            const InnerSolution sol = solve(problem);
            double t_total = sol.t0_s + sol.uplink_time_s();
            ok = ok && std::abs(t_total - params.frame_s) <= 1e-9 * params.frame_s;
            if (sol.z_star > 0.0)
                ok = ok && std::abs(residual(sol.z_star, problem, sol.active)) <= 1e-10;
        }
        state.check(ok, "KKT residual and frame-time identities", "");
    }

    // Theorem chain, exact, at desk scale.
    {
        bool ok = true;
        for (std::uint64_t i = 0; i < 2; ++i) {
            Rng rng = Rng::substream(cfg.seed, 300 + i);
            const Topology topo = sample_topology(params, 6, 2, rng);
            auto optimize = [&](const SchemeConfig& config) {
                return oracle::exhaustive_outer(topo, params, config, 1'000'000);
            };
            ok = ok && theorem_chain(optimize, 0.0).ok();
        }
        state.check(ok, "theorem chain (exhaustive, N=6, L=2)", "");
    }

    // Cross-entropy quality against exhaustive search.
    {
        Rng topo_rng = Rng::substream(cfg.seed, 400);
        const Topology topo = sample_topology(params, 8, 2, topo_rng);
        const SchemeConfig config{Access::tdma, ActivationLevel::partial_dynamic};
        const OuterRun exact = oracle::exhaustive_outer(topo, params, config, 100'000);
        const SchemeEvaluator evaluator(topo, params);
        std::size_t hits = 0;
        const std::size_t runs = 3;
        for (std::uint64_t i = 0; i < runs; ++i) {
            Rng rng = Rng::substream(cfg.seed, 500 + i);
            const OuterRun run = ce::optimize_scheme(evaluator, config, cfg.ce, rng);
            if (run.objective_bits >= (1.0 - 0.005) * exact.objective_bits) ++hits;
        }
        state.check(hits == runs, "cross-entropy reaches exhaustive optimum",
                    csv::number(hits) + "/" + csv::number(runs) + " runs within 0.5%");
    }

    std::cout << (state.failures == 0 ? "validate: all checks passed"
                                      : "validate: FAILURES") << std::endl;
    return state.failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Total-computational-bits maximization for wireless-powered MEC with discrete "
                 "pinching antennas"};
    app.require_subcommand(1);

    CommonArgs solve_args, sweep_args, compare_args, validate_args;
    CLI::App* solve_cmd =
        app.add_subcommand("solve", "solve one instance and dump the full solution");
    add_common(solve_cmd, solve_args);
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "run a parameter sweep and write figure CSV files");
    add_common(sweep_cmd, sweep_args);
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "optimize all six configurations and check their ordering");
    add_common(compare_cmd, compare_args);
    CLI::App* validate_cmd =
        app.add_subcommand("validate", "run the brute-force oracle suites");
    add_common(validate_cmd, validate_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed()) return cmd_solve(solve_args);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_args);
        if (compare_cmd->parsed()) return cmd_compare(compare_args);
        if (validate_cmd->parsed()) return cmd_validate(validate_args);
    } catch (const pams::ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
