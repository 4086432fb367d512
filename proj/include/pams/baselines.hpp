#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "pams/cross_entropy.hpp"
#include "pams/errors.hpp"
#include "pams/oracle.hpp"
#include "pams/schemes.hpp"

namespace pams::baselines {

enum class BaselineKind { full_pa, conventional_array, fixed_tdma, full_offload, full_local };

inline std::string baseline_name(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::full_pa: return "full_pa";
        case BaselineKind::conventional_array: return "conventional_array";
        case BaselineKind::fixed_tdma: return "fixed_tdma";
        case BaselineKind::full_offload: return "full_offload";
        case BaselineKind::full_local: return "full_local";
    }
    return "?";
}

struct BaselineSolution {
    double objective_bits = 0.0;
    double offload_bits = 0.0;
    double local_bits = 0.0;
    double t0_s = 0.0;
    double t1_s = 0.0;
};

namespace detail {

/// Root of ln(1+z) - z/(1+z) = s/(1+z), i.e. (1+z) ln(1+z) - z = s, by the
/// same doubling-plus-bisection scheme the inner solver uses.
inline double full_offload_snr(double s) {
    auto g = [&](double z) { return std::log1p(z) - z / (1.0 + z) - s / (1.0 + z); };
    double z_lo = 1e-12;
    if (g(z_lo) >= 0.0) return 0.0;
    double z_hi = 1.0;
    while (g(z_hi) < 0.0) {
        z_lo = z_hi;
        z_hi *= 2.0;
        if (z_hi > 1e30) throw NoConvergence("full_offload: failed to bracket z");
    }
    double z = 0.5 * (z_lo + z_hi);
    for (int it = 0; it < 200 && (z_hi - z_lo) > 1e-12 * z; ++it) {
        if (g(z) < 0.0)
            z_lo = z;
        else
            z_hi = z;
        z = 0.5 * (z_lo + z_hi);
    }
    return z;
}

} // namespace detail

/// Fixed slots t0 = tau_l = T/(L+1); each device splits its harvest between
/// offloading and local computing by bisecting the concave per-device
/// marginal-bit balance over the CPU frequency.
inline BaselineSolution fixed_tdma_value(const LinkCoefficients& coeff,
                                         const SystemParams& params) {
    const std::size_t n_dev = coeff.upsilon_w.size();
    const double T = params.frame_s;
    const double slot = T / static_cast<double>(n_dev + 1);
    BaselineSolution out;
    out.t0_s = slot;
    out.t1_s = T - slot;
    for (std::size_t l = 0; l < n_dev; ++l) {
        const double energy = coeff.upsilon_w[l] * slot;
        const double g = coeff.gamma_per_w[l];
        if (energy <= 0.0) continue;
        const double f_max = std::cbrt(energy / (T * params.kappa));
        double f = f_max;
        // marginal bits of raising f: local gain minus offload-rate loss
        auto balance = [&](double freq) {
            const double e_o = energy - T * params.kappa * freq * freq * freq;
            const double snr = 1.0 + e_o * g / slot;
            return T / params.intensity_cycles_per_bit -
                   (3.0 * params.bandwidth_hz * T * params.kappa * g / std::numbers::ln2) *
                       freq * freq / snr;
        };
        if (g > 0.0 && balance(f_max) < 0.0) {
            double lo = 0.0, hi = f_max;
            for (int it = 0; it < 200 && (hi - lo) > 1e-13 * f_max; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (balance(mid) > 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            f = 0.5 * (lo + hi);
        }
        const double e_o = std::max(energy - T * params.kappa * f * f * f, 0.0);
        if (e_o > 0.0)
            out.offload_bits +=
                params.bandwidth_hz * slot * std::log2(1.0 + e_o * g / slot);
        out.local_bits += T * f / params.intensity_cycles_per_bit;
    }
    out.objective_bits = out.offload_bits + out.local_bits;
    return out;
}

/// All harvested energy goes to offloading (f = 0): the stationarity
/// equation loses its local-computing terms and t0 has a closed form.
inline BaselineSolution full_offload_value(const LinkCoefficients& coeff,
                                           const SystemParams& params) {
    const double T = params.frame_s;
    double s = 0.0;
    for (std::size_t l = 0; l < coeff.upsilon_w.size(); ++l)
        s += coeff.upsilon_w[l] * coeff.gamma_per_w[l];
    BaselineSolution out;
    if (s <= 0.0) {
        out.t0_s = T;
        return out;
    }
    const double z = detail::full_offload_snr(s);
    if (z <= 0.0) {
        out.t0_s = T;
        return out;
    }
    out.t0_s = z * T / (z + s);
    out.t1_s = T - out.t0_s;
    out.offload_bits = params.bandwidth_hz * out.t1_s * std::log2(1.0 + z);
    out.objective_bits = out.offload_bits;
    return out;
}

/// All harvested energy goes to local computing: t0 = T and f = (Upsilon/kappa)^(1/3).
inline BaselineSolution full_local_value(std::span<const double> upsilon_w,
                                         const SystemParams& params) {
    BaselineSolution out;
    out.t0_s = params.frame_s;
    out.t1_s = 0.0;
    for (double u : upsilon_w) {
        const double f = std::cbrt(u / params.kappa);
        out.local_bits += params.frame_s * f / params.intensity_cycles_per_bit;
    }
    out.objective_bits = out.local_bits;
    return out;
}

inline BaselineSolution from_scheme_solution(const SchemeSolution& s) {
    BaselineSolution out;
    out.objective_bits = s.inner.objective_bits;
    out.offload_bits = s.inner.offload_bits;
    out.local_bits = s.inner.local_bits;
    out.t0_s = s.inner.t0_s;
    out.t1_s = s.inner.uplink_time_s();
    return out;
}

/// Every antenna active in both phases; the inner optimization is unchanged.
inline BaselineSolution full_pa(const Topology& topology, const SystemParams& params) {
    const ActivationPattern ones = ActivationPattern::all_ones(topology.antenna_count());
    const ActivationSet set{ones, {ones}};
    return from_scheme_solution(
        evaluate(topology, params, {Access::tdma, ActivationLevel::partial_dynamic}, set));
}

/// Half-wavelength uniform array at the feed point, all elements active,
/// evaluated through the same spherical-wave machinery.
inline BaselineSolution conventional_array(const Topology& topology, const SystemParams& params) {
    const Topology ca = conventional_array_topology(topology, params);
    const ActivationPattern ones = ActivationPattern::all_ones(ca.antenna_count());
    const ActivationSet set{ones, {ones}};
    return from_scheme_solution(
        evaluate(ca, params, {Access::tdma, ActivationLevel::partial_dynamic}, set));
}

inline BaselineSolution fixed_tdma(const Topology& topology, const SystemParams& params,
                                   const ActivationSet& set) {
    return fixed_tdma_value(coefficients(topology, params, set.downlink, set.uplink), params);
}

inline BaselineSolution full_offload(const Topology& topology, const SystemParams& params,
                                     const ActivationSet& set) {
    return full_offload_value(coefficients(topology, params, set.downlink, set.uplink), params);
}

inline BaselineSolution full_local(const Topology& topology, const SystemParams& params,
                                   const ActivationPattern& beta_dl) {
    const LinkCoefficients coeff = coefficients(topology, params, beta_dl, {beta_dl});
    return full_local_value(coeff.upsilon_w, params);
}

/// How a baseline's activation patterns are chosen.
struct BaselineOuterSettings {
    bool exhaustive = false;
    std::uint64_t max_evals = 20'000'000;
    ce::CEParams ce;
};

struct BaselineRun {
    BaselineSolution solution;
    ActivationSet activations;
    std::size_t iterations = 0;
};

/// Optimizes a baseline's activation patterns (where it has any) with the
/// same outer machinery as the primary scheme, then reports its solution.
inline BaselineRun optimize_baseline(BaselineKind kind, const Topology& topology,
                                     const SystemParams& params,
                                     const BaselineOuterSettings& settings, Rng& rng) {
    const std::size_t n_bits = topology.antenna_count();
    BaselineRun run;

    if (kind == BaselineKind::full_pa || kind == BaselineKind::conventional_array) {
        const ActivationPattern ones = ActivationPattern::all_ones(n_bits);
        run.activations = {ones, {ones}};
        run.solution = kind == BaselineKind::full_pa ? full_pa(topology, params)
                                                     : conventional_array(topology, params);
        return run;
    }

    const ChannelMatrix matrix(topology, params);
    const std::size_t n_dev = topology.device_count();
    auto build_coeff = [&](const ActivationSet& set) {
        LinkCoefficients c;
        c.upsilon_w.resize(n_dev);
        c.gamma_per_w.resize(n_dev);
        const double dl_split = params.pb_watts / static_cast<double>(set.downlink.popcount());
        const ActivationPattern& ul = set.uplink.front();
        for (std::size_t l = 0; l < n_dev; ++l) {
            c.upsilon_w[l] = params.gamma * dl_split * matrix.gain(set.downlink, l);
            c.gamma_per_w[l] =
                matrix.gain(ul, l) / (static_cast<double>(ul.popcount()) * params.noise_watts);
        }
        return c;
    };
    auto value = [&](const ActivationSet& set) {
        switch (kind) {
            case BaselineKind::fixed_tdma: return fixed_tdma_value(build_coeff(set), params);
            case BaselineKind::full_offload: return full_offload_value(build_coeff(set), params);
            default: return full_local_value(build_coeff(set).upsilon_w, params);
        }
    };

    const std::size_t n_vectors = kind == BaselineKind::full_local ? 1 : 2;
    if (settings.exhaustive) {
        auto factory = [&]() {
            return [&](std::span<const std::uint64_t> digits) {
                ActivationSet set;
                set.downlink = ActivationPattern::from_index(n_bits, digits.front());
                set.uplink = {ActivationPattern::from_index(n_bits, digits.back())};
                return value(set).objective_bits;
            };
        };
        const oracle::ExhaustiveResult res =
            oracle::exhaustive_patterns(n_vectors, n_bits, settings.max_evals, factory);
        run.activations.downlink =
            ActivationPattern::from_index(n_bits, res.pattern_indices.front());
        run.activations.uplink = {
            ActivationPattern::from_index(n_bits, res.pattern_indices.back())};
    } else {
        ce::CEResult res = ce::optimize(
            [&](const ActivationSet& set) { return value(set).objective_bits; }, n_vectors,
            n_bits, settings.ce, rng);
        run.activations = std::move(res.best);
        run.iterations = res.iterations;
    }
    run.solution = value(run.activations);
    return run;
}

} // namespace pams::baselines
