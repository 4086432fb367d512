#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pams/channel.hpp"
#include "pams/errors.hpp"
#include "pams/inner_solver.hpp"

namespace pams {

enum class Access { tdma, noma };
enum class ActivationLevel { static_activation, partial_dynamic, full_dynamic };

struct SchemeConfig {
    Access access;
    ActivationLevel level;
};

inline constexpr std::array<SchemeConfig, 6> all_scheme_configs = {{
    {Access::tdma, ActivationLevel::static_activation},
    {Access::tdma, ActivationLevel::partial_dynamic},
    {Access::tdma, ActivationLevel::full_dynamic},
    {Access::noma, ActivationLevel::static_activation},
    {Access::noma, ActivationLevel::partial_dynamic},
    {Access::noma, ActivationLevel::full_dynamic},
}};

inline std::string scheme_config_name(const SchemeConfig& c) {
    std::string name = c.access == Access::tdma ? "tdma_" : "noma_";
    switch (c.level) {
        case ActivationLevel::static_activation: return name + "static";
        case ActivationLevel::partial_dynamic: return name + "partial";
        case ActivationLevel::full_dynamic: return name + "full";
    }
    return name + "?";
}

/// Downlink pattern plus the uplink pattern list: one shared entry for
/// static/partially dynamic activation, one entry per device when fully
/// dynamic.
struct ActivationSet {
    ActivationPattern downlink;
    std::vector<ActivationPattern> uplink;
};

inline void validate_activation_set(const SchemeConfig& config, const ActivationSet& set,
                                    std::size_t n_devices) {
    const auto need = [&](bool ok, const char* msg) {
        if (!ok) throw ConfigMismatch(std::string("activation set: ") + msg);
    };
    need(set.downlink.popcount() >= 1, "downlink pattern is all-zero");
    for (const auto& p : set.uplink) need(p.popcount() >= 1, "uplink pattern is all-zero");
    switch (config.level) {
        case ActivationLevel::static_activation:
            need(set.uplink.size() == 1, "static activation needs one uplink pattern");
            need(set.uplink.front() == set.downlink,
                 "static activation requires uplink == downlink");
            break;
        case ActivationLevel::partial_dynamic:
            need(set.uplink.size() == 1, "partially dynamic activation needs one uplink pattern");
            break;
        case ActivationLevel::full_dynamic:
            need(set.uplink.size() == n_devices,
                 "fully dynamic activation needs one uplink pattern per device");
            break;
    }
}

/// NOMA reconstruction of a TDMA solution: all devices transmit over the
/// whole uplink window, each spending the same energy as before.
struct NomaView {
    double t1_s;
    std::vector<double> power_w;
};

inline NomaView reconstruct_noma(const InnerSolution& tdma_solution) {
    const double t1 = tdma_solution.uplink_time_s();
    if (t1 <= 0.0) throw DegenerateUplink("reconstruct_noma: no uplink time");
    NomaView view;
    view.t1_s = t1;
    view.power_w.resize(tdma_solution.offload_energy_j.size());
    for (std::size_t l = 0; l < view.power_w.size(); ++l)
        view.power_w[l] = tdma_solution.offload_energy_j[l] / t1;
    return view;
}

/// NOMA sum offloading bits with SIC at the BS over a shared uplink pattern.
inline double noma_rate(double t1_s, std::span<const double> power_w,
                        std::span<const double> gamma_per_w, double bandwidth_hz) {
    if (t1_s <= 0.0) throw DomainError("noma_rate: t1 must be > 0");
    double snr = 0.0;
    for (std::size_t l = 0; l < power_w.size(); ++l) snr += power_w[l] * gamma_per_w[l];
    return bandwidth_hz * t1_s * std::log2(1.0 + snr);
}

struct SchemeSolution {
    InnerSolution inner;
    SchemeConfig config;
    ActivationSet activations;
    std::optional<NomaView> noma_view;
};

/// Evaluates activation sets for one (topology, params) pair. Precomputes the
/// channel matrix once; evaluations are pure and safe to run concurrently.
class SchemeEvaluator {
  public:
    SchemeEvaluator(const Topology& topology, const SystemParams& params)
        : params_(params), matrix_(topology, params) {}

    const SystemParams& params() const { return params_; }
    const ChannelMatrix& matrix() const { return matrix_; }
    std::size_t device_count() const { return matrix_.device_count(); }
    std::size_t antenna_count() const { return matrix_.antenna_count(); }

    /// Harvest and SNR coefficients for one activation set. For TDMA with
    /// fully dynamic activation each device's Gamma uses its own slot
    /// pattern; otherwise the shared pattern governs every slot.
    LinkCoefficients link_coefficients(const ActivationSet& set) const {
        const std::size_t n_dev = device_count();
        LinkCoefficients c;
        c.upsilon_w.resize(n_dev);
        c.gamma_per_w.resize(n_dev);
        const double dl_split =
            params_.pb_watts / static_cast<double>(set.downlink.popcount());
        for (std::size_t l = 0; l < n_dev; ++l) {
            const ActivationPattern& ul =
                set.uplink.size() == 1 ? set.uplink.front() : set.uplink[l];
            c.upsilon_w[l] = params_.gamma * dl_split * matrix_.gain(set.downlink, l);
            c.gamma_per_w[l] = matrix_.gain(ul, l) /
                               (static_cast<double>(ul.popcount()) * params_.noise_watts);
        }
        return c;
    }

    /// Objective of one configuration at the given activation set. Under
    /// NOMA the TDMA inner optimum is reused (the two have identical value);
    /// fully dynamic NOMA keeps the best single uplink pattern of the list.
    double objective(const SchemeConfig& config, const ActivationSet& set,
                     InnerSolution& scratch) const {
        validate_activation_set(config, set, device_count());
        if (config.access == Access::noma && config.level == ActivationLevel::full_dynamic) {
            double best = -1.0;
            ActivationSet pd{set.downlink, {ActivationPattern{}}};
            for (const auto& candidate : set.uplink) {
                pd.uplink.front() = candidate;
                const LinkCoefficients c = link_coefficients(pd);
                solve_into(c.upsilon_w, c.gamma_per_w, params_, scratch);
                best = std::max(best, scratch.objective_bits);
            }
            return best;
        }
        const LinkCoefficients c = link_coefficients(set);
        solve_into(c.upsilon_w, c.gamma_per_w, params_, scratch);
        return scratch.objective_bits;
    }

    SchemeSolution evaluate(const SchemeConfig& config, const ActivationSet& set) const {
        validate_activation_set(config, set, device_count());
        SchemeSolution out;
        out.config = config;
        out.activations = set;
        if (config.access == Access::noma && config.level == ActivationLevel::full_dynamic) {
            // keep the best single-pattern solution; it attains the optimum
            std::size_t best = 0;
            double best_obj = -1.0;
            InnerSolution scratch;
            ActivationSet pd{set.downlink, {ActivationPattern{}}};
            for (std::size_t k = 0; k < set.uplink.size(); ++k) {
                pd.uplink.front() = set.uplink[k];
                const LinkCoefficients c = link_coefficients(pd);
                solve_into(c.upsilon_w, c.gamma_per_w, params_, scratch);
                if (scratch.objective_bits > best_obj) {
                    best_obj = scratch.objective_bits;
                    best = k;
                }
            }
            pd.uplink.front() = set.uplink[best];
            const LinkCoefficients c = link_coefficients(pd);
            solve_into(c.upsilon_w, c.gamma_per_w, params_, out.inner);
        } else {
            const LinkCoefficients c = link_coefficients(set);
            solve_into(c.upsilon_w, c.gamma_per_w, params_, out.inner);
        }
        if (config.access == Access::noma && out.inner.uplink_time_s() > 0.0)
            out.noma_view = reconstruct_noma(out.inner);
        return out;
    }

  private:
    SystemParams params_;
    ChannelMatrix matrix_;
};

/// One-shot evaluation of a configuration on an activation set.
inline SchemeSolution evaluate(const Topology& topology, const SystemParams& params,
                               const SchemeConfig& config, const ActivationSet& set) {
    return SchemeEvaluator(topology, params).evaluate(config, set);
}

/// Result of one outer optimization (cross-entropy or exhaustive search).
struct OuterRun {
    ActivationSet activations;
    double objective_bits = 0.0;
    std::size_t iterations = 0;
};

using OuterOptimizer = std::function<OuterRun(const SchemeConfig&)>;

/// Objectives of the six configurations plus any ordering violations.
struct TheoremChainResult {
    std::array<double, 6> objectives{}; ///< indexed like all_scheme_configs
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }

    double of(Access access, ActivationLevel level) const {
        for (std::size_t i = 0; i < all_scheme_configs.size(); ++i)
            if (all_scheme_configs[i].access == access && all_scheme_configs[i].level == level)
                return objectives[i];
        return 0.0;
    }
};

/// Optimizes all six configurations and checks the ordering chain
///   O_S(TDMA) = O_S(NOMA) <= O_PD(TDMA) = O_PD(NOMA) = O_FD(NOMA) <= O_FD(TDMA).
/// Equalities are checked to 1e-9 relative; inequalities get `slack_rel`
/// headroom (0 for an exact optimizer, a small budget for a stochastic one).
inline TheoremChainResult theorem_chain(const OuterOptimizer& optimize, double slack_rel = 0.0) {
    TheoremChainResult result;
    for (std::size_t i = 0; i < all_scheme_configs.size(); ++i)
        result.objectives[i] = optimize(all_scheme_configs[i]).objective_bits;

    const double ts = result.of(Access::tdma, ActivationLevel::static_activation);
    const double tp = result.of(Access::tdma, ActivationLevel::partial_dynamic);
    const double tf = result.of(Access::tdma, ActivationLevel::full_dynamic);
    const double ns = result.of(Access::noma, ActivationLevel::static_activation);
    const double np = result.of(Access::noma, ActivationLevel::partial_dynamic);
    const double nf = result.of(Access::noma, ActivationLevel::full_dynamic);

    auto check_eq = [&](double a, double b, const char* what) {
        const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
        if (std::abs(a - b) > 1e-9 * scale)
            result.violations.push_back(std::string(what) + " violated: " + std::to_string(a) +
                                        " vs " + std::to_string(b));
    };
    auto check_le = [&](double a, double b, const char* what) {
        if (a > b * (1.0 + slack_rel) + 1e-300)
            result.violations.push_back(std::string(what) + " violated: " + std::to_string(a) +
                                        " > " + std::to_string(b));
    };
    check_eq(ts, ns, "O_S(TDMA) = O_S(NOMA)");
    check_eq(tp, np, "O_PD(TDMA) = O_PD(NOMA)");
    check_eq(np, nf, "O_PD(NOMA) = O_FD(NOMA)");
    check_le(ts, tp, "O_S(TDMA) <= O_PD(TDMA)");
    check_le(tp, tf, "O_PD(TDMA) <= O_FD(TDMA)");
    check_le(ns, np, "O_S(NOMA) <= O_PD(NOMA)");
    check_le(nf, tf, "O_FD(NOMA) <= O_FD(TDMA)");
    return result;
}

} // namespace pams
