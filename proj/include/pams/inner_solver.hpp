#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "pams/channel.hpp"
#include "pams/errors.hpp"
#include "pams/params.hpp"

namespace pams {

/// Inner resource-allocation problem for fixed activation patterns, reduced
/// to the per-device coefficients Upsilon (harvest power, W) and Gamma
/// (uplink SNR per watt).
struct InnerProblem {
    std::vector<double> upsilon_w;
    std::vector<double> gamma_per_w;
    SystemParams params;

    std::size_t device_count() const { return upsilon_w.size(); }

    static InnerProblem of(const Topology& topology, const SystemParams& params,
                           const ActivationPattern& beta_dl,
                           const std::vector<ActivationPattern>& beta_ul_per_slot) {
        LinkCoefficients c = coefficients(topology, params, beta_dl, beta_ul_per_slot);
        return InnerProblem{std::move(c.upsilon_w), std::move(c.gamma_per_w), params};
    }
};

/// Optimal timeslots, offload energies/powers, and CPU frequencies, together
/// with the KKT multipliers and the common SNR of the active devices.
struct InnerSolution {
    double t0_s = 0.0;
    std::vector<double> tau_s;
    std::vector<double> power_w;
    std::vector<double> freq_hz;
    std::vector<double> offload_energy_j;
    std::vector<std::uint8_t> active; ///< 1 for devices that offload a positive energy
    double z_star = 0.0;              ///< common received SNR of the active devices
    double lambda = 0.0;              ///< multiplier of the frame-time constraint
    std::vector<double> alpha;        ///< per-device energy-constraint multipliers
    double offload_bits = 0.0;
    double local_bits = 0.0;
    double objective_bits = 0.0;

    double uplink_time_s() const {
        double t1 = 0.0;
        for (double t : tau_s) t1 += t;
        return t1;
    }
};

namespace detail {

/// Per-active-set constants of the stationarity equation. With them the
/// residual is O(1) per evaluation:
///   sum_active Gamma_l f_l(z)^3 = fcube_coeff * (1+z)^(3/2)
struct StationarityCtx {
    double s_active = 0.0;     ///< sum over active of Upsilon_l Gamma_l
    double fcube_coeff = 0.0;  ///< (ln2 / (3 kappa I_c B))^(3/2) * sum over active of Gamma_l^(-1/2)
    double inactive_coeff = 0.0; ///< sum over inactive of ln2 Upsilon_l^(1/3) / (3 B kappa I_c)
    double frame_s = 0.0;
    double kappa = 0.0;

    static StationarityCtx build(const SystemParams& p, std::span<const double> upsilon,
                                 std::span<const double> gamma,
                                 std::span<const std::uint8_t> active) {
        StationarityCtx ctx;
        ctx.frame_s = p.frame_s;
        ctx.kappa = p.kappa;
        const double k_active =
            std::pow(std::numbers::ln2 / (3.0 * p.kappa * p.intensity_cycles_per_bit * p.bandwidth_hz),
                     1.5);
        const double k_inactive =
            std::numbers::ln2 / (3.0 * p.bandwidth_hz * p.kappa * p.intensity_cycles_per_bit);
        for (std::size_t l = 0; l < upsilon.size(); ++l) {
            if (active[l]) {
                ctx.s_active += upsilon[l] * gamma[l];
                ctx.fcube_coeff += k_active / std::sqrt(gamma[l]);
            } else {
                ctx.inactive_coeff += k_inactive * std::cbrt(upsilon[l]);
            }
        }
        return ctx;
    }

    double t0_of_z(double z) const {
        const double denom = z + s_active;
        if (denom == 0.0) throw DomainError("t0_of_z: zero denominator");
        const double zp1 = 1.0 + z;
        const double fcube_term = kappa * fcube_coeff * zp1 * std::sqrt(zp1);
        return frame_s * (z + fcube_term) / denom;
    }

    double residual(double z) const {
        if (z <= 0.0) throw DomainError("residual: z must be > 0");
        const double zp1 = 1.0 + z;
        double value = std::log1p(z) - z / zp1 - s_active / zp1;
        if (inactive_coeff != 0.0) {
            const double q = frame_s * kappa / t0_of_z(z);
            value -= inactive_coeff * std::cbrt(q * q);
        }
        return value;
    }
};

} // namespace detail

/// Stationarity residual whose positive root is the common SNR z*.
inline double residual(double z, const InnerProblem& problem,
                       std::span<const std::uint8_t> active_set) {
    return detail::StationarityCtx::build(problem.params, problem.upsilon_w, problem.gamma_per_w,
                                          active_set)
        .residual(z);
}

/// Charging duration induced by a candidate SNR z over the given active set.
inline double t0_of_z(double z, const InnerProblem& problem,
                      std::span<const std::uint8_t> active_set) {
    if (z <= 0.0) throw DomainError("t0_of_z: z must be > 0");
    return detail::StationarityCtx::build(problem.params, problem.upsilon_w, problem.gamma_per_w,
                                          active_set)
        .t0_of_z(z);
}

/// CPU frequency of an active device, from the stationarity of the offload
/// energy: alpha = (B/ln2) Gamma / (1+z), f = sqrt(1 / (3 kappa I_c alpha)).
inline double freq_active(double z, double gamma_l, const SystemParams& params) {
    if (gamma_l <= 0.0) throw DomainError("freq_active: Gamma must be > 0 on the active branch");
    const double alpha = (params.bandwidth_hz / std::numbers::ln2) * gamma_l / (1.0 + z);
    return std::sqrt(1.0 / (3.0 * params.kappa * params.intensity_cycles_per_bit * alpha));
}

/// CPU frequency of an inactive device: spends its whole harvest locally.
inline double freq_inactive(double t0_s, double upsilon_l, const SystemParams& params) {
    if (t0_s < 0.0 || upsilon_l < 0.0) throw DomainError("freq_inactive: negative input");
    return std::cbrt(t0_s * upsilon_l / (params.kappa * params.frame_s));
}

namespace detail {

inline void fill_all_local(std::span<const double> upsilon, const SystemParams& p,
                           InnerSolution& out) {
    const std::size_t n = upsilon.size();
    out.t0_s = p.frame_s;
    out.z_star = 0.0;
    out.tau_s.assign(n, 0.0);
    out.power_w.assign(n, 0.0);
    out.offload_energy_j.assign(n, 0.0);
    out.active.assign(n, 0);
    out.freq_hz.resize(n);
    out.alpha.resize(n);
    out.offload_bits = 0.0;
    out.local_bits = 0.0;
    double lambda = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        out.freq_hz[l] = freq_inactive(p.frame_s, upsilon[l], p);
        const double q = upsilon[l] > 0.0 ? p.kappa / upsilon[l] : 0.0;
        out.alpha[l] = upsilon[l] > 0.0
                           ? std::cbrt(q * q) / (3.0 * p.kappa * p.intensity_cycles_per_bit)
                           : 0.0;
        lambda += out.alpha[l] * upsilon[l];
        out.local_bits += p.frame_s * out.freq_hz[l] / p.intensity_cycles_per_bit;
    }
    out.lambda = lambda;
    out.objective_bits = out.local_bits;
}

} // namespace detail

/// Closed-form KKT solve of the inner problem with an active-set loop.
///
/// Starting from all offload-capable devices, finds the root z* of the
/// stationarity residual by doubling-bracketed bisection, recovers
/// (t0, f, e_o, tau, p) in closed form, drops devices whose optimal offload
/// energy clamps to zero, and repeats until the active set is stable.
/// Devices are only ever removed. The all-inactive case returns the analytic
/// all-local solution.
inline void solve_into(std::span<const double> upsilon, std::span<const double> gamma,
                       const SystemParams& params, InnerSolution& out) {
    const std::size_t n = upsilon.size();
    if (n == 0 || gamma.size() != n) throw DomainError("solve: empty or mismatched problem");

    out.active.assign(n, 0);
    std::size_t n_active = 0;
    for (std::size_t l = 0; l < n; ++l) {
        // a device must both harvest and have an uplink channel to offload
        if (gamma[l] > 0.0 && upsilon[l] > 0.0) {
            out.active[l] = 1;
            ++n_active;
        }
    }
    if (n_active == 0) {
        detail::fill_all_local(upsilon, params, out);
        return;
    }

    out.freq_hz.assign(n, 0.0);
    out.offload_energy_j.assign(n, 0.0);

    const double T = params.frame_s;
    const std::size_t max_rounds = 2 * n + 2;
    for (std::size_t round = 0; round < max_rounds; ++round) {
        const auto ctx = detail::StationarityCtx::build(params, upsilon, gamma, out.active);

        // Bracket the root by doubling from [1e-12, 1], then bisect.
        double z_lo = 1e-12;
        if (ctx.residual(z_lo) >= 0.0) {
            // root at or below 1e-12: offloading is worthless at this scale
            detail::fill_all_local(upsilon, params, out);
            return;
        }
        double z_hi = 1.0;
        while (ctx.residual(z_hi) < 0.0) {
            z_lo = z_hi;
            z_hi *= 2.0;
            if (z_hi > 1e30) throw NoConvergence("solve: failed to bracket z*");
        }
        double z = 0.5 * (z_lo + z_hi);
        for (int it = 0; it < 200 && (z_hi - z_lo) > 1e-12 * z; ++it) {
            if (ctx.residual(z) < 0.0)
                z_lo = z;
            else
                z_hi = z;
            z = 0.5 * (z_lo + z_hi);
        }

        // Recover t0 from the same f values used for the energies so the
        // frame-time identity holds to rounding error.
        double gamma_fcube = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            if (!out.active[l]) continue;
            const double f = freq_active(z, gamma[l], params);
            out.freq_hz[l] = f;
            gamma_fcube += gamma[l] * f * f * f;
        }
        const double t0 = T * (z + params.kappa * gamma_fcube) / (z + ctx.s_active);

        std::size_t n_survivors = 0;
        for (std::size_t l = 0; l < n; ++l) {
            if (!out.active[l]) continue;
            const double f = out.freq_hz[l];
            const double e_o = t0 * upsilon[l] - T * params.kappa * f * f * f;
            out.offload_energy_j[l] = std::max(e_o, 0.0);
            if (out.offload_energy_j[l] > 0.0) ++n_survivors;
        }

        if (n_survivors == n_active) {
            // Active set stable: finalize the solution.
            out.t0_s = t0;
            out.z_star = z;
            out.tau_s.assign(n, 0.0);
            out.power_w.assign(n, 0.0);
            out.alpha.resize(n);
            const double zp1 = 1.0 + z;
            out.lambda = params.bandwidth_hz * (std::log2(zp1) - z / (zp1 * std::numbers::ln2));
            double tau_total = 0.0;
            out.local_bits = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                if (out.active[l]) {
                    out.alpha[l] = (params.bandwidth_hz / std::numbers::ln2) * gamma[l] / zp1;
                    out.tau_s[l] = out.offload_energy_j[l] * gamma[l] / z;
                    out.power_w[l] = out.offload_energy_j[l] / out.tau_s[l];
                    tau_total += out.tau_s[l];
                } else {
                    out.freq_hz[l] = freq_inactive(t0, upsilon[l], params);
                    out.offload_energy_j[l] = 0.0;
                    const double q =
                        upsilon[l] > 0.0 ? params.frame_s * params.kappa / (t0 * upsilon[l]) : 0.0;
                    out.alpha[l] =
                        upsilon[l] > 0.0
                            ? std::cbrt(q * q) /
                                  (3.0 * params.kappa * params.intensity_cycles_per_bit)
                            : 0.0;
                }
                out.local_bits += T * out.freq_hz[l] / params.intensity_cycles_per_bit;
            }
            out.offload_bits = params.bandwidth_hz * tau_total * std::log2(zp1);
            out.objective_bits = out.offload_bits + out.local_bits;
            return;
        }

        n_active = 0;
        for (std::size_t l = 0; l < n; ++l) {
            if (out.active[l] && out.offload_energy_j[l] <= 0.0) out.active[l] = 0;
            if (out.active[l]) ++n_active;
        }
        if (n_active == 0) {
            detail::fill_all_local(upsilon, params, out);
            return;
        }
    }
    throw NoConvergence("solve: active-set loop did not stabilize");
}

inline InnerSolution solve(const InnerProblem& problem) {
    InnerSolution out;
    solve_into(problem.upsilon_w, problem.gamma_per_w, problem.params, out);
    return out;
}

/// Total computed bits of a solution, evaluated per device from the rate and
/// local-computation formulas. Independent of the equal-SNR shortcut used
/// inside solve(), so the two routes can be checked against each other.
inline double objective(const InnerSolution& solution, const InnerProblem& problem) {
    const SystemParams& p = problem.params;
    double bits = 0.0;
    for (std::size_t l = 0; l < problem.device_count(); ++l) {
        const double tau = solution.tau_s[l];
        if (tau > 0.0) {
            const double snr = solution.offload_energy_j[l] * problem.gamma_per_w[l] / tau;
            bits += p.bandwidth_hz * tau * std::log2(1.0 + snr);
        }
        bits += p.frame_s * solution.freq_hz[l] / p.intensity_cycles_per_bit;
    }
    return bits;
}

} // namespace pams
