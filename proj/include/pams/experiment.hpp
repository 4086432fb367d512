#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pams/baselines.hpp"
#include "pams/cross_entropy.hpp"
#include "pams/csv.hpp"
#include "pams/json_io.hpp"
#include "pams/oracle.hpp"
#include "pams/parallel.hpp"
#include "pams/schemes.hpp"

namespace pams::experiment {

/// Scheme identifiers accepted in configs: the six access/activation
/// configurations, the five baselines, and "discrete_pa" as an alias for
/// partially dynamic TDMA, the default scheme.
struct SchemeSpec {
    std::string name;
    bool is_baseline = false;
    SchemeConfig config{};
    baselines::BaselineKind kind{};
};

inline SchemeSpec parse_scheme(const std::string& name) {
    SchemeSpec spec;
    spec.name = name;
    const std::string canonical = name == "discrete_pa" ? "tdma_partial" : name;
    for (const SchemeConfig& c : all_scheme_configs) {
        if (scheme_config_name(c) == canonical) {
            spec.config = c;
            return spec;
        }
    }
    spec.is_baseline = true;
    if (canonical == "full_pa")
        spec.kind = baselines::BaselineKind::full_pa;
    else if (canonical == "conventional_array")
        spec.kind = baselines::BaselineKind::conventional_array;
    else if (canonical == "fixed_tdma")
        spec.kind = baselines::BaselineKind::fixed_tdma;
    else if (canonical == "full_offload")
        spec.kind = baselines::BaselineKind::full_offload;
    else if (canonical == "full_local")
        spec.kind = baselines::BaselineKind::full_local;
    else
        throw ConfigError("unknown scheme: " + name);
    return spec;
}

struct TopologySource {
    bool sampled = true;
    std::size_t antennas = 40;
    std::size_t devices = 3;
    Topology explicit_topology; ///< used when !sampled
};

struct SweepSpec {
    std::string variable;
    std::vector<double> values;
};

inline const std::vector<std::string>& sweep_whitelist() {
    static const std::vector<std::string> vars = {"pb_dbm",    "N",        "gamma", "bandwidth_hz",
                                                  "intensity", "height_m", "L"};
    return vars;
}

struct ExperimentConfig {
    SystemParams params = SystemParams::defaults();
    TopologySource topology;
    std::vector<std::string> schemes = {"discrete_pa"};
    std::string optimizer = "ce"; ///< "ce" or "exhaustive"
    std::uint64_t exhaustive_budget = 20'000'000;
    ce::CEParams ce;
    std::uint64_t seed = 1;
    std::size_t replications = 1;
    std::optional<SweepSpec> sweep;
    std::string output_dir = "out";

    void validate() const {
        params.validate();
        ce.validate();
        if (replications < 1) throw ConfigError("replications must be >= 1");
        if (schemes.empty()) throw ConfigError("schemes must not be empty");
        for (const auto& s : schemes) parse_scheme(s);
        if (optimizer != "ce" && optimizer != "exhaustive")
            throw ConfigError("optimizer must be \"ce\" or \"exhaustive\"");
        if (topology.sampled) {
            if (topology.antennas < 1 || topology.devices < 1)
                throw ConfigError("topology: antennas and devices must be >= 1");
        } else {
            topology.explicit_topology.validate();
        }
        if (sweep) {
            const auto& wl = sweep_whitelist();
            if (std::find(wl.begin(), wl.end(), sweep->variable) == wl.end())
                throw ConfigError("sweep variable not supported: " + sweep->variable);
            if (sweep->values.empty()) throw ConfigError("sweep: values must not be empty");
            if (!topology.sampled &&
                (sweep->variable == "N" || sweep->variable == "L" ||
                 sweep->variable == "height_m"))
                throw ConfigError("sweep over " + sweep->variable +
                                  " needs a sampled topology");
        }
    }
};

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    if (j.contains("params")) cfg.params = j.at("params").get<SystemParams>();
    if (j.contains("topology")) {
        const auto& t = j.at("topology");
        const std::string mode = t.value("mode", std::string("sampled"));
        if (mode == "sampled") {
            cfg.topology.sampled = true;
            cfg.topology.antennas = t.value("antennas", std::size_t{40});
            cfg.topology.devices = t.value("devices", std::size_t{3});
        } else if (mode == "explicit") {
            cfg.topology.sampled = false;
            Topology topo;
            topo.pa_x_m = t.at("pa_x_m").get<std::vector<double>>();
            topo.devices = t.at("devices").get<std::vector<DevicePos>>();
            topo.height_m = t.value("height_m", cfg.params.height_m);
            cfg.topology.explicit_topology = std::move(topo);
        } else {
            throw ConfigError("topology.mode must be \"sampled\" or \"explicit\"");
        }
    }
    if (j.contains("schemes")) cfg.schemes = j.at("schemes").get<std::vector<std::string>>();
    if (j.contains("optimizer")) cfg.optimizer = j.at("optimizer").get<std::string>();
    if (j.contains("exhaustive_budget"))
        cfg.exhaustive_budget = j.at("exhaustive_budget").get<std::uint64_t>();
    if (j.contains("ce")) {
        const auto& c = j.at("ce");
        cfg.ce.samples = c.value("samples", cfg.ce.samples);
        cfg.ce.elites = c.value("elites", cfg.ce.elites);
        cfg.ce.smoothing = c.value("smoothing", cfg.ce.smoothing);
        cfg.ce.max_iters = c.value("max_iters", cfg.ce.max_iters);
        cfg.ce.stall_iters = c.value("stall_iters", cfg.ce.stall_iters);
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("replications")) cfg.replications = j.at("replications").get<std::size_t>();
    if (j.contains("sweep")) {
        SweepSpec sweep;
        sweep.variable = j.at("sweep").at("variable").get<std::string>();
        sweep.values = j.at("sweep").at("values").get<std::vector<double>>();
        cfg.sweep = std::move(sweep);
    }
    if (j.contains("output")) cfg.output_dir = j.at("output").get<std::string>();
    cfg.validate();
    return cfg;
}

/// Parses a config file, converting parse failures into line:column
/// diagnostics and validation failures into field-level messages.
inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

/// One experiment measurement, one CSV row.
struct ResultRow {
    std::uint64_t seed = 0;
    double sweep_value = 0.0;
    std::string scheme;
    double objective_bits = 0.0;
    double avg_bits_per_device = 0.0;
    double t0_s = 0.0;
    double t1_s = 0.0;
    double offload_ratio = 0.0;
    double harvested_power_avg_w = 0.0;
    std::size_t ce_iterations = 0;
};

struct TraceRecord {
    std::uint64_t seed = 0;
    double sweep_value = 0.0;
    std::string scheme;
    ce::CETrace trace;
};

struct RunOutput {
    bool has_sweep = false;
    std::string sweep_variable;
    std::vector<ResultRow> rows;
    std::vector<TraceRecord> traces;
};

namespace detail {

struct SweptInstance {
    SystemParams params;
    std::size_t antennas;
    std::size_t devices;
};

inline SweptInstance apply_sweep(const ExperimentConfig& cfg, double value) {
    SweptInstance inst{cfg.params, cfg.topology.antennas, cfg.topology.devices};
    if (!cfg.sweep) return inst;
    const std::string& var = cfg.sweep->variable;
    if (var == "pb_dbm") {
        inst.params.pb_watts = dbm_to_watts(value);
    } else if (var == "N") {
        if (value < 1.0 || value != std::floor(value))
            throw ConfigError("sweep N: values must be positive integers");
        inst.antennas = static_cast<std::size_t>(value);
    } else if (var == "gamma") {
        inst.params.gamma = value;
    } else if (var == "bandwidth_hz") {
        inst.params.bandwidth_hz = value;
    } else if (var == "intensity") {
        inst.params.intensity_cycles_per_bit = value;
    } else if (var == "height_m") {
        inst.params.height_m = value;
    } else if (var == "L") {
        if (value < 1.0 || value != std::floor(value))
            throw ConfigError("sweep L: values must be positive integers");
        inst.devices = static_cast<std::size_t>(value);
    }
    inst.params.validate();
    return inst;
}

inline Topology build_topology(const ExperimentConfig& cfg, const SweptInstance& inst,
                               std::uint64_t rep_seed) {
    if (!cfg.topology.sampled) {
        Topology topo = cfg.topology.explicit_topology;
        return topo;
    }
    Rng rng = Rng::substream(rep_seed, 0);
    return sample_topology(inst.params, inst.antennas, inst.devices, rng);
}

inline double mean_upsilon(const Topology& topo, const SystemParams& params,
                           const ActivationPattern& beta_dl) {
    const DerivedWavelengths w = derive_wavelengths(params);
    const double split = params.pb_watts / static_cast<double>(beta_dl.popcount());
    double total = 0.0;
    for (std::size_t l = 0; l < topo.device_count(); ++l)
        total += params.gamma * split * gain(topo, w, beta_dl, l);
    return total / static_cast<double>(topo.device_count());
}

struct SchemeOutcome {
    ResultRow row;
    std::optional<ce::CETrace> trace;
};

inline SchemeOutcome run_scheme(const SchemeSpec& spec, const Topology& topo,
                                const SystemParams& params, const ExperimentConfig& cfg,
                                std::uint64_t rep_seed) {
    SchemeOutcome out;
    out.row.scheme = spec.name;
    const std::size_t n_dev = topo.device_count();

    if (spec.is_baseline) {
        baselines::BaselineOuterSettings settings;
        settings.exhaustive = cfg.optimizer == "exhaustive";
        settings.max_evals = cfg.exhaustive_budget;
        settings.ce = cfg.ce;
        Rng rng = Rng::substream(rep_seed, 1);
        const baselines::BaselineRun run =
            baselines::optimize_baseline(spec.kind, topo, params, settings, rng);
        out.row.objective_bits = run.solution.objective_bits;
        out.row.t0_s = run.solution.t0_s;
        out.row.t1_s = run.solution.t1_s;
        out.row.offload_ratio = run.solution.objective_bits > 0.0
                                    ? run.solution.offload_bits / run.solution.objective_bits
                                    : 0.0;
        out.row.ce_iterations = run.iterations;
        const Topology& gain_topo = spec.kind == baselines::BaselineKind::conventional_array
                                        ? conventional_array_topology(topo, params)
                                        : topo;
        out.row.harvested_power_avg_w =
            mean_upsilon(gain_topo, params, run.activations.downlink);
    } else {
        const SchemeEvaluator evaluator(topo, params);
        OuterRun run;
        std::optional<ce::CETrace> trace;
        if (cfg.optimizer == "exhaustive") {
            run = oracle::exhaustive_outer(topo, params, spec.config, cfg.exhaustive_budget);
        } else {
            Rng rng = Rng::substream(rep_seed, 1);
            ce::CETrace t;
            run = ce::optimize_scheme(evaluator, spec.config, cfg.ce, rng, &t);
            trace = std::move(t);
        }
        const SchemeSolution solution = evaluator.evaluate(spec.config, run.activations);
        out.row.objective_bits = solution.inner.objective_bits;
        out.row.t0_s = solution.inner.t0_s;
        out.row.t1_s = solution.inner.uplink_time_s();
        out.row.offload_ratio = solution.inner.objective_bits > 0.0
                                    ? solution.inner.offload_bits / solution.inner.objective_bits
                                    : 0.0;
        out.row.ce_iterations = run.iterations;
        out.row.harvested_power_avg_w = mean_upsilon(topo, params, run.activations.downlink);
        out.trace = std::move(trace);
    }
    out.row.avg_bits_per_device = out.row.objective_bits / static_cast<double>(n_dev);
    return out;
}

} // namespace detail

/// Topology of one replication at the unswept parameters.
inline Topology make_topology(const ExperimentConfig& cfg, std::uint64_t rep_seed) {
    const detail::SweptInstance inst{cfg.params, cfg.topology.antennas, cfg.topology.devices};
    return detail::build_topology(cfg, inst, rep_seed);
}

/// Runs (sweep value x replication x scheme) jobs and collects rows in a
/// deterministic order; jobs are independent and run in parallel.
inline RunOutput run(const ExperimentConfig& cfg) {
    cfg.validate();
    RunOutput out;
    out.has_sweep = cfg.sweep.has_value();
    out.sweep_variable = cfg.sweep ? cfg.sweep->variable : "";
    const std::vector<double> values = cfg.sweep ? cfg.sweep->values : std::vector<double>{0.0};
    const std::size_t n_schemes = cfg.schemes.size();
    const std::size_t n_jobs = values.size() * cfg.replications;

    std::vector<detail::SchemeOutcome> outcomes(n_jobs * n_schemes);
    parallel_for(n_jobs, [&](std::size_t job) {
        const std::size_t vi = job / cfg.replications;
        const std::size_t ri = job % cfg.replications;
        const detail::SweptInstance inst = detail::apply_sweep(cfg, values[vi]);
        const std::uint64_t rep_seed = cfg.seed + ri;
        const Topology topo = detail::build_topology(cfg, inst, rep_seed);
        for (std::size_t si = 0; si < n_schemes; ++si) {
            const SchemeSpec spec = parse_scheme(cfg.schemes[si]);
            detail::SchemeOutcome outcome =
                detail::run_scheme(spec, topo, inst.params, cfg, rep_seed);
            outcome.row.seed = rep_seed;
            outcome.row.sweep_value = values[vi];
            outcomes[job * n_schemes + si] = std::move(outcome);
        }
    });

    out.rows.reserve(outcomes.size());
    for (auto& outcome : outcomes) {
        if (outcome.trace) {
            out.traces.push_back({outcome.row.seed, outcome.row.sweep_value, outcome.row.scheme,
                                  std::move(*outcome.trace)});
        }
        out.rows.push_back(std::move(outcome.row));
    }
    return out;
}

inline const char* results_header =
    "seed,sweep_value,scheme,objective_bits,avg_bits_per_device,t0_s,t1_s,offload_ratio,"
    "harvested_power_avg_w,ce_iterations";

inline void write_results_csv(std::ostream& os, const RunOutput& out) {
    os << results_header << "\r\n";
    for (const ResultRow& r : out.rows) {
        csv::write_row(os, {csv::number(r.seed), out.has_sweep ? csv::number(r.sweep_value) : "",
                            r.scheme, csv::number(r.objective_bits),
                            csv::number(r.avg_bits_per_device), csv::number(r.t0_s),
                            csv::number(r.t1_s), csv::number(r.offload_ratio),
                            csv::number(r.harvested_power_avg_w), csv::number(r.ce_iterations)});
    }
}

namespace detail {

/// Mean of one row field per (sweep value, scheme), in first-seen order.
template <class Get>
void write_figure_csv(const std::filesystem::path& path, const std::string& value_col,
                      const std::string& mean_col, const RunOutput& out, Get&& get) {
    std::ofstream os(path, std::ios::binary);
    os << value_col << ",scheme," << mean_col << ",n_seeds\r\n";
    std::vector<std::pair<double, std::string>> keys;
    std::map<std::pair<double, std::string>, std::pair<double, std::size_t>> agg;
    for (const ResultRow& r : out.rows) {
        const auto key = std::make_pair(r.sweep_value, r.scheme);
        auto it = agg.find(key);
        if (it == agg.end()) {
            keys.push_back(key);
            agg.emplace(key, std::make_pair(get(r), std::size_t{1}));
        } else {
            it->second.first += get(r);
            ++it->second.second;
        }
    }
    for (const auto& key : keys) {
        const auto& [sum, count] = agg.at(key);
        csv::write_row(os, {csv::number(key.first), key.second,
                            csv::number(sum / static_cast<double>(count)), csv::number(count)});
    }
}

} // namespace detail

/// Writes results.csv, the figure CSV matching the sweep variable, and the
/// convergence trace file; returns a short text summary.
inline std::string report(const RunOutput& out, const std::string& out_dir) {
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    fs::create_directories(dir);

    {
        std::ofstream os(dir / "results.csv", std::ios::binary);
        write_results_csv(os, out);
    }
    {
        std::ofstream os(dir / "fig3_convergence.csv", std::ios::binary);
        os << "seed,sweep_value,scheme,iteration,best_bits,mean_elite_bits,field_entropy\r\n";
        for (const TraceRecord& t : out.traces) {
            for (const auto& row : t.trace.rows) {
                csv::write_row(os, {csv::number(t.seed),
                                    out.has_sweep ? csv::number(t.sweep_value) : "", t.scheme,
                                    csv::number(row.iteration), csv::number(row.best_bits),
                                    csv::number(row.mean_elite_bits), csv::number(row.entropy)});
            }
        }
    }

    if (out.has_sweep) {
        const std::string& var = out.sweep_variable;
        if (var == "pb_dbm") {
            detail::write_figure_csv(dir / "fig4_bits_vs_pb.csv", "pb_dbm",
                                     "avg_bits_per_device_mean", out,
                                     [](const ResultRow& r) { return r.avg_bits_per_device; });
            detail::write_figure_csv(dir / "fig9_harvest_vs_pb.csv", "pb_dbm",
                                     "harvested_power_avg_w_mean", out,
                                     [](const ResultRow& r) { return r.harvested_power_avg_w; });
        } else if (var == "N") {
            detail::write_figure_csv(dir / "fig5_bits_vs_N.csv", "n_antennas",
                                     "avg_bits_per_device_mean", out,
                                     [](const ResultRow& r) { return r.avg_bits_per_device; });
        } else if (var == "gamma") {
            detail::write_figure_csv(dir / "fig7_t0_vs_gamma.csv", "gamma", "t0_s_mean", out,
                                     [](const ResultRow& r) { return r.t0_s; });
        } else if (var == "bandwidth_hz") {
            detail::write_figure_csv(dir / "fig8_offload_ratio_vs_B.csv", "bandwidth_hz",
                                     "offload_ratio_mean", out,
                                     [](const ResultRow& r) { return r.offload_ratio; });
        }
    }

    std::ostringstream summary;
    summary << "rows: " << out.rows.size() << "\n";
    std::vector<std::string> seen;
    std::map<std::string, std::pair<double, std::size_t>> per_scheme;
    for (const ResultRow& r : out.rows) {
        auto it = per_scheme.find(r.scheme);
        if (it == per_scheme.end()) {
            seen.push_back(r.scheme);
            per_scheme.emplace(r.scheme, std::make_pair(r.avg_bits_per_device, std::size_t{1}));
        } else {
            it->second.first += r.avg_bits_per_device;
            ++it->second.second;
        }
    }
    for (const auto& name : seen) {
        const auto& [sum, count] = per_scheme.at(name);
        summary << name << ": mean avg bits/device = " << sum / static_cast<double>(count)
                << " over " << count << " rows\n";
    }
    return summary.str();
}

/// Six-configuration comparison rows: (config, seed, objective, t0, t1).
struct CompareRow {
    std::string config;
    std::uint64_t seed = 0;
    double objective_bits = 0.0;
    double t0_s = 0.0;
    double t1_s = 0.0;
};

struct CompareOutput {
    std::vector<CompareRow> rows;
    std::vector<TheoremChainResult> chains; ///< one per replication
};

/// Runs the theorem chain per replication with the configured optimizer.
/// Cross-entropy runs share the replication's substream so every
/// configuration sees identical sampling randomness.
inline CompareOutput run_compare(const ExperimentConfig& cfg) {
    cfg.validate();
    CompareOutput out;
    out.chains.resize(cfg.replications);
    std::vector<std::array<CompareRow, 6>> rows(cfg.replications);

    parallel_for(cfg.replications, [&](std::size_t ri) {
        const std::uint64_t rep_seed = cfg.seed + ri;
        // the comparison ignores any sweep block
        const detail::SweptInstance inst{cfg.params, cfg.topology.antennas,
                                         cfg.topology.devices};
        const Topology topo = detail::build_topology(cfg, inst, rep_seed);
        const SchemeEvaluator evaluator(topo, inst.params);
        std::size_t idx = 0;
        auto optimize = [&](const SchemeConfig& config) {
            OuterRun run;
            if (cfg.optimizer == "exhaustive") {
                run = oracle::exhaustive_outer(topo, inst.params, config, cfg.exhaustive_budget);
            } else {
                Rng rng = Rng::substream(rep_seed, 1);
                run = ce::optimize_scheme(evaluator, config, cfg.ce, rng);
            }
            const SchemeSolution solution = evaluator.evaluate(config, run.activations);
            rows[ri][idx] = {scheme_config_name(config), rep_seed, run.objective_bits,
                             solution.inner.t0_s, solution.inner.uplink_time_s()};
            ++idx;
            return run;
        };
        const double slack = cfg.optimizer == "exhaustive" ? 0.0 : 0.005;
        out.chains[ri] = theorem_chain(optimize, slack);
    });

    for (const auto& per_rep : rows)
        for (const CompareRow& r : per_rep) out.rows.push_back(r);
    return out;
}

/// Writes compare.csv and the per-configuration figure file.
inline std::string report_compare(const CompareOutput& out, const std::string& out_dir,
                                  std::size_t n_devices) {
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "compare.csv", std::ios::binary);
        os << "config,seed,objective_bits,t0_s,t1_s\r\n";
        for (const CompareRow& r : out.rows)
            csv::write_row(os, {r.config, csv::number(r.seed), csv::number(r.objective_bits),
                                csv::number(r.t0_s), csv::number(r.t1_s)});
    }
    {
        std::ofstream os(dir / "fig6_bits_vs_config.csv", std::ios::binary);
        os << "config,avg_bits_per_device_mean,n_seeds\r\n";
        std::vector<std::string> seen;
        std::map<std::string, std::pair<double, std::size_t>> agg;
        for (const CompareRow& r : out.rows) {
            auto it = agg.find(r.config);
            const double avg = r.objective_bits / static_cast<double>(n_devices);
            if (it == agg.end()) {
                seen.push_back(r.config);
                agg.emplace(r.config, std::make_pair(avg, std::size_t{1}));
            } else {
                it->second.first += avg;
                ++it->second.second;
            }
        }
        for (const auto& name : seen) {
            const auto& [sum, count] = agg.at(name);
            csv::write_row(os,
                           {name, csv::number(sum / static_cast<double>(count)),
                            csv::number(count)});
        }
    }
    std::ostringstream summary;
    std::size_t violations = 0;
    for (const auto& chain : out.chains) violations += chain.violations.size();
    summary << "replications: " << out.chains.size() << "\n";
    summary << "ordering violations: " << violations << "\n";
    for (const auto& chain : out.chains)
        for (const auto& v : chain.violations) summary << "  " << v << "\n";
    return summary.str();
}

} // namespace pams::experiment
