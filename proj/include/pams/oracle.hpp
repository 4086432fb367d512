#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "pams/errors.hpp"
#include "pams/inner_solver.hpp"
#include "pams/parallel.hpp"
#include "pams/schemes.hpp"

namespace pams::oracle {

/// Resolution of the brute-force grids. t0 runs over interior multiples of
/// frame_s / t0_points, energy splits over split_points values covering
/// [0, 1], and z_points grids the raw sub-slot check; doubling t0_points (or
/// going from m to 2m-1 split points) refines a grid to a superset.
struct GridSpec {
    std::size_t t0_points = 400;
    std::size_t split_points = 400;
    std::size_t z_points = 200;

    void validate() const {
        if (t0_points < 2 || split_points < 2 || z_points < 2)
            throw ConfigError("GridSpec: all grid counts must be >= 2");
    }
};

/// Offloading bits of the equal-SNR sub-slot rule: tau_l proportional to
/// e_l Gamma_l, which collapses the sum rate to B t1 log2(1 + sum / t1).
inline double equal_snr_offload_bits(double sum_e_gamma, double t1_s, double bandwidth_hz) {
    if (sum_e_gamma <= 0.0 || t1_s <= 0.0) return 0.0;
    return bandwidth_hz * t1_s * std::log2(1.0 + sum_e_gamma / t1_s);
}

/// Best sum rate over a raw two-device (tau_1, tau_2) grid with
/// tau_1 + tau_2 <= t1; validates the equal-SNR rule without assuming it.
inline double tau_grid_offload_bits(double e1_j, double gamma1, double e2_j, double gamma2,
                                    double t1_s, double bandwidth_hz, std::size_t points) {
    if (points < 2) throw ConfigError("tau_grid_offload_bits: points must be >= 2");
    auto rate = [&](double e, double g, double tau) {
        if (tau <= 0.0 || e * g <= 0.0) return 0.0;
        return bandwidth_hz * tau * std::log2(1.0 + e * g / tau);
    };
    double best = 0.0;
    for (std::size_t i = 0; i <= points; ++i) {
        const double tau1 = t1_s * static_cast<double>(i) / static_cast<double>(points);
        for (std::size_t j = 0; i + j <= points; ++j) {
            const double tau2 = t1_s * static_cast<double>(j) / static_cast<double>(points);
            best = std::max(best, rate(e1_j, gamma1, tau1) + rate(e2_j, gamma2, tau2));
        }
    }
    return best;
}

/// Brute-force lower bound on the inner optimum: grids the charging time and
/// each device's offload/local energy split, allocating sub-slots by the
/// equal-SNR rule. Exact-tolerance use is intended for L <= 2.
inline double brute_force_inner(const InnerProblem& problem, const GridSpec& grid) {
    grid.validate();
    const SystemParams& p = problem.params;
    const std::size_t n_dev = problem.device_count();
    const std::size_t n_s = grid.split_points;
    const double T = p.frame_s;

    std::vector<double> best_per_t0(grid.t0_points - 1, 0.0);
    parallel_for(grid.t0_points - 1, [&](std::size_t k) {
        const double t0 = T * static_cast<double>(k + 1) / static_cast<double>(grid.t0_points);
        const double t1 = T - t0;

        // Per-device split tables: offload energy * Gamma and local bits.
        std::vector<double> e_gamma(n_dev * n_s);
        std::vector<double> local_bits(n_dev * n_s);
        for (std::size_t l = 0; l < n_dev; ++l) {
            const double energy = problem.upsilon_w[l] * t0;
            for (std::size_t j = 0; j < n_s; ++j) {
                const double offload_frac = static_cast<double>(j) / static_cast<double>(n_s - 1);
                const double f = std::cbrt((1.0 - offload_frac) * energy / (T * p.kappa));
                e_gamma[l * n_s + j] = offload_frac * energy * problem.gamma_per_w[l];
                local_bits[l * n_s + j] = T * f / p.intensity_cycles_per_bit;
            }
        }

        double best = 0.0;
        auto leaf = [&](double sum_eg, double sum_lb) {
            best = std::max(best, sum_lb + equal_snr_offload_bits(sum_eg, t1, p.bandwidth_hz));
        };
        if (n_dev == 1) {
            for (std::size_t j = 0; j < n_s; ++j) leaf(e_gamma[j], local_bits[j]);
        } else if (n_dev == 2) {
            for (std::size_t j1 = 0; j1 < n_s; ++j1)
                for (std::size_t j2 = 0; j2 < n_s; ++j2)
                    leaf(e_gamma[j1] + e_gamma[n_s + j2], local_bits[j1] + local_bits[n_s + j2]);
        } else {
            std::vector<std::size_t> choice(n_dev, 0);
            auto rec = [&](auto&& self, std::size_t depth, double sum_eg, double sum_lb) -> void {
                if (depth == n_dev) {
                    leaf(sum_eg, sum_lb);
                    return;
                }
                for (std::size_t j = 0; j < n_s; ++j)
                    self(self, depth + 1, sum_eg + e_gamma[depth * n_s + j],
                         sum_lb + local_bits[depth * n_s + j]);
            };
            rec(rec, 0, 0.0, 0.0);
        }
        best_per_t0[k] = best;
    });
    double best = 0.0;
    for (double v : best_per_t0) best = std::max(best, v);
    return best;
}

/// Best value and pattern-index tuple of an exhaustive enumeration over
/// `n_vectors` nonzero activation patterns of n_antennas bits each.
struct ExhaustiveResult {
    std::vector<std::uint64_t> pattern_indices; ///< each in [1, 2^N)
    double objective_bits = std::numeric_limits<double>::lowest();
    std::uint64_t evaluations = 0;
};

/// Enumerates every tuple of nonzero patterns. `factory()` must return a
/// callable digits -> objective; one instance is created per work chunk so
/// evaluators may keep mutable scratch. Ties resolve to the lexicographically
/// smallest tuple (first digit most significant), independent of the worker
/// count.
template <class EvalFactory>
ExhaustiveResult exhaustive_patterns(std::size_t n_vectors, std::size_t n_antennas,
                                     std::uint64_t max_evals, EvalFactory&& factory) {
    if (n_antennas >= 30) throw BudgetExceeded("exhaustive_patterns: too many antennas");
    const std::uint64_t n_patterns = (std::uint64_t{1} << n_antennas) - 1;
    std::uint64_t total = 1;
    for (std::size_t v = 0; v < n_vectors; ++v) {
        if (total > max_evals / n_patterns)
            throw BudgetExceeded("exhaustive_patterns: evaluation budget exceeded");
        total *= n_patterns;
    }
    if (total > max_evals)
        throw BudgetExceeded("exhaustive_patterns: evaluation budget exceeded");

    struct Best {
        double objective = std::numeric_limits<double>::lowest();
        std::uint64_t linear = 0;
    };
    const std::uint64_t inner = total / n_patterns;
    std::vector<Best> per_outer(n_patterns);
    parallel_for(static_cast<std::size_t>(n_patterns), [&](std::size_t o) {
        auto eval = factory();
        std::vector<std::uint64_t> digits(n_vectors);
        Best local;
        for (std::uint64_t e = 0; e < inner; ++e) {
            const std::uint64_t linear = static_cast<std::uint64_t>(o) * inner + e;
            std::uint64_t rest = linear;
            for (std::size_t v = n_vectors; v-- > 0;) {
                digits[v] = rest % n_patterns + 1;
                rest /= n_patterns;
            }
            const double obj = eval(std::span<const std::uint64_t>(digits));
            if (obj > local.objective) {
                local.objective = obj;
                local.linear = linear;
            }
        }
        per_outer[o] = local;
    });

    Best best;
    for (const Best& b : per_outer)
        if (b.objective > best.objective) best = b;

    ExhaustiveResult result;
    result.evaluations = total;
    result.objective_bits = best.objective;
    result.pattern_indices.resize(n_vectors);
    std::uint64_t rest = best.linear;
    for (std::size_t v = n_vectors; v-- > 0;) {
        result.pattern_indices[v] = rest % n_patterns + 1;
        rest /= n_patterns;
    }
    return result;
}

/// Per-pattern gain and popcount tables for one geometry; index 0 (the
/// all-off pattern) is unused.
struct PatternTables {
    std::size_t n_antennas = 0;
    std::size_t n_devices = 0;
    std::vector<double> gains;           ///< gains[l * 2^N + idx]
    std::vector<std::uint32_t> popcount; ///< set bits of each pattern index

    PatternTables(const Topology& topology, const SystemParams& params)
        : n_antennas(topology.antenna_count()), n_devices(topology.device_count()) {
        if (n_antennas > 20) throw BudgetExceeded("PatternTables: too many antennas");
        const ChannelMatrix matrix(topology, params);
        const std::uint64_t count = std::uint64_t{1} << n_antennas;
        gains.assign(n_devices * count, 0.0);
        popcount.assign(count, 0);
        for (std::uint64_t idx = 1; idx < count; ++idx) {
            popcount[idx] = static_cast<std::uint32_t>(std::popcount(idx));
            const ActivationPattern pattern = ActivationPattern::from_index(n_antennas, idx);
            for (std::size_t l = 0; l < n_devices; ++l)
                gains[l * count + idx] = matrix.gain(pattern, l);
        }
    }

    double gain_of(std::size_t device, std::uint64_t idx) const {
        return gains[device * (std::uint64_t{1} << n_antennas) + idx];
    }
};

/// Exact optimum of one scheme configuration by full enumeration. Fully
/// dynamic NOMA is enumerated as partially dynamic (their optima coincide),
/// with the winning pattern replicated across the returned uplink list.
inline OuterRun exhaustive_outer(const Topology& topology, const SystemParams& params,
                                 const SchemeConfig& config,
                                 std::uint64_t max_evals = 20'000'000) {
    const std::size_t n_dev = topology.device_count();
    const ActivationLevel enumerated =
        config.access == Access::noma && config.level == ActivationLevel::full_dynamic
            ? ActivationLevel::partial_dynamic
            : config.level;
    std::size_t n_vectors = 1;
    if (enumerated == ActivationLevel::partial_dynamic) n_vectors = 2;
    if (enumerated == ActivationLevel::full_dynamic) n_vectors = n_dev + 1;

    const PatternTables tables(topology, params);
    auto factory = [&]() {
        struct Eval {
            const PatternTables* tables;
            const SystemParams* params;
            std::vector<double> upsilon, gamma;
            InnerSolution solution;

            double operator()(std::span<const std::uint64_t> digits) {
                const std::size_t n = upsilon.size();
                const std::uint64_t dl = digits.front();
                const double dl_split =
                    params->pb_watts / static_cast<double>(tables->popcount[dl]);
                for (std::size_t l = 0; l < n; ++l) {
                    const std::uint64_t ul = digits.size() == 1   ? dl
                                             : digits.size() == 2 ? digits[1]
                                                                  : digits[1 + l];
                    upsilon[l] = params->gamma * dl_split * tables->gain_of(l, dl);
                    gamma[l] = tables->gain_of(l, ul) /
                               (static_cast<double>(tables->popcount[ul]) * params->noise_watts);
                }
                solve_into(upsilon, gamma, *params, solution);
                return solution.objective_bits;
            }
        };
        Eval e{&tables, &params, std::vector<double>(n_dev), std::vector<double>(n_dev), {}};
        return e;
    };

    const ExhaustiveResult res =
        exhaustive_patterns(n_vectors, topology.antenna_count(), max_evals, factory);

    OuterRun run;
    run.objective_bits = res.objective_bits;
    run.iterations = 0;
    const std::size_t n_bits = topology.antenna_count();
    run.activations.downlink = ActivationPattern::from_index(n_bits, res.pattern_indices.front());
    if (config.level == ActivationLevel::static_activation) {
        run.activations.uplink = {run.activations.downlink};
    } else if (config.level == ActivationLevel::partial_dynamic) {
        run.activations.uplink = {ActivationPattern::from_index(n_bits, res.pattern_indices[1])};
    } else if (config.access == Access::noma) {
        run.activations.uplink.assign(
            n_dev, ActivationPattern::from_index(n_bits, res.pattern_indices[1]));
    } else {
        for (std::size_t l = 0; l < n_dev; ++l)
            run.activations.uplink.push_back(
                ActivationPattern::from_index(n_bits, res.pattern_indices[1 + l]));
    }
    return run;
}

} // namespace pams::oracle
