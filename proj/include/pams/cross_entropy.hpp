#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "pams/activation.hpp"
#include "pams/errors.hpp"
#include "pams/parallel.hpp"
#include "pams/rng.hpp"
#include "pams/schemes.hpp"

namespace pams::ce {

struct CEParams {
    std::size_t samples = 500;     ///< S
    std::size_t elites = 50;       ///< S_E
    double smoothing = 0.9;        ///< zeta in (0, 1]
    std::size_t max_iters = 50;
    std::size_t stall_iters = 5;   ///< stop after this many non-improving iterations
    std::uint64_t seed = 1;

    void validate() const {
        if (elites < 1 || elites > samples)
            throw ConfigError("CEParams: need 1 <= elites <= samples");
        if (!(smoothing > 0.0 && smoothing <= 1.0))
            throw ConfigError("CEParams: smoothing must be in (0, 1]");
        if (max_iters < 1) throw ConfigError("CEParams: max_iters must be >= 1");
        if (stall_iters < 1) throw ConfigError("CEParams: stall_iters must be >= 1");
    }
};

/// Per-bit Bernoulli parameters, one probability vector per activation
/// pattern being learned. One vector learns a shared static pattern; the
/// first vector is the downlink pattern whenever there are two or more.
struct BernoulliField {
    std::vector<std::vector<double>> probs;

    std::size_t vector_count() const { return probs.size(); }

    static BernoulliField uniform(std::size_t n_vectors, std::size_t n_bits) {
        BernoulliField f;
        f.probs.assign(n_vectors, std::vector<double>(n_bits, 0.5));
        return f;
    }

    /// Sum of per-bit binary entropies (bits); 0 once fully converged.
    double entropy() const {
        auto h = [](double p) {
            if (p <= 0.0 || p >= 1.0) return 0.0;
            return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
        };
        double total = 0.0;
        for (const auto& v : probs)
            for (double p : v) total += h(p);
        return total;
    }
};

/// Number of learned vectors for each activation level.
inline std::size_t field_vector_count(ActivationLevel level, std::size_t n_devices) {
    switch (level) {
        case ActivationLevel::static_activation: return 1;
        case ActivationLevel::partial_dynamic: return 2;
        case ActivationLevel::full_dynamic: return n_devices + 1;
    }
    return 1;
}

/// Maps drawn pattern vectors onto an activation set: a single vector is the
/// shared static pattern, otherwise vector 0 is the downlink and the rest
/// are the uplink list.
inline ActivationSet to_activation_set(std::vector<ActivationPattern> patterns) {
    ActivationSet set;
    if (patterns.size() == 1) {
        set.downlink = patterns.front();
        set.uplink = {std::move(patterns.front())};
        return set;
    }
    set.downlink = std::move(patterns.front());
    set.uplink.assign(std::make_move_iterator(patterns.begin() + 1),
                      std::make_move_iterator(patterns.end()));
    return set;
}

/// Draws each bit independently. All-zero vectors are redrawn (at most 32
/// times), after which one uniformly chosen bit is forced to 1 so every
/// sample stays feasible.
inline std::vector<ActivationPattern> sample_patterns(const BernoulliField& field, Rng& rng) {
    std::vector<ActivationPattern> out;
    out.reserve(field.vector_count());
    for (const auto& probs : field.probs) {
        const std::size_t n = probs.size();
        std::vector<std::uint8_t> bits(n, 0);
        bool any = false;
        for (int attempt = 0; attempt < 32 && !any; ++attempt) {
            for (std::size_t i = 0; i < n; ++i) {
                bits[i] = rng.bernoulli(probs[i]) ? 1 : 0;
                any |= bits[i] != 0;
            }
        }
        if (!any) bits[rng.uniform_below(n)] = 1;
        out.emplace_back(std::move(bits));
    }
    return out;
}

inline ActivationSet sample(const BernoulliField& field, Rng& rng) {
    return to_activation_set(sample_patterns(field, rng));
}

/// Indices of the S_E largest objectives, earlier sample winning ties.
inline std::vector<std::size_t> select_elite(const std::vector<double>& objectives,
                                             std::size_t n_elite) {
    if (n_elite > objectives.size())
        throw ConfigError("select_elite: more elites than samples");
    std::vector<std::size_t> order(objectives.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_elite),
                      order.end(), [&](std::size_t a, std::size_t b) {
                          if (objectives[a] != objectives[b]) return objectives[a] > objectives[b];
                          return a < b;
                      });
    order.resize(n_elite);
    return order;
}

/// KL-minimizing refit: each probability becomes the elite mean of its bit.
inline BernoulliField update(const BernoulliField& field,
                             const std::vector<std::vector<ActivationPattern>>& samples,
                             const std::vector<std::size_t>& elite_indices) {
    if (elite_indices.empty()) throw ConfigError("update: empty elite set");
    BernoulliField updated = field;
    const double inv = 1.0 / static_cast<double>(elite_indices.size());
    for (std::size_t v = 0; v < field.vector_count(); ++v) {
        auto& probs = updated.probs[v];
        std::fill(probs.begin(), probs.end(), 0.0);
        for (std::size_t e : elite_indices) {
            const auto& bits = samples[e][v].bits();
            for (std::size_t i = 0; i < probs.size(); ++i) probs[i] += bits[i] ? inv : 0.0;
        }
    }
    return updated;
}

/// Convex combination of old and refit parameters with smoothing factor zeta.
inline BernoulliField smooth(const BernoulliField& old_field, const BernoulliField& updated,
                             double zeta) {
    if (!(zeta > 0.0 && zeta <= 1.0)) throw ConfigError("smooth: zeta must be in (0, 1]");
    BernoulliField out = old_field;
    for (std::size_t v = 0; v < out.vector_count(); ++v)
        for (std::size_t i = 0; i < out.probs[v].size(); ++i)
            out.probs[v][i] = (1.0 - zeta) * old_field.probs[v][i] + zeta * updated.probs[v][i];
    return out;
}

struct CETraceRow {
    std::size_t iteration;
    double best_bits;       ///< incumbent after this iteration
    double mean_elite_bits;
    double entropy;
    BernoulliField field;   ///< state entering the next iteration
};

struct CETrace {
    std::vector<CETraceRow> rows;
    /// Iteration of the last incumbent improvement (1-based; 0 if none).
    std::size_t last_improvement = 0;
};

struct CEResult {
    ActivationSet best;
    double objective_bits = std::numeric_limits<double>::lowest();
    std::size_t iterations = 0;
    CETrace trace;
};

/// Cross-entropy search over activation vectors: sample, evaluate, select
/// elites, refit, smooth, until the incumbent stalls or max_iters is hit.
/// All randomness is drawn serially from `rng`; objective evaluations may run
/// in parallel without changing the result.
inline CEResult optimize(const std::function<double(const ActivationSet&)>& objective_fn,
                         std::size_t n_vectors, std::size_t n_bits, const CEParams& params,
                         Rng& rng) {
    params.validate();
    BernoulliField field = BernoulliField::uniform(n_vectors, n_bits);

    CEResult result;
    std::vector<std::vector<ActivationPattern>> samples(params.samples);
    std::vector<ActivationSet> sets(params.samples);
    std::vector<double> objectives(params.samples);
    std::size_t stall = 0;

    for (std::size_t iter = 1; iter <= params.max_iters; ++iter) {
        result.iterations = iter;
        for (std::size_t s = 0; s < params.samples; ++s) {
            samples[s] = sample_patterns(field, rng);
            sets[s] = to_activation_set(samples[s]);
        }
        parallel_for(params.samples, [&](std::size_t s) { objectives[s] = objective_fn(sets[s]); });

        const double prev_best = result.objective_bits;
        for (std::size_t s = 0; s < params.samples; ++s) {
            if (objectives[s] > result.objective_bits) {
                result.objective_bits = objectives[s];
                result.best = sets[s];
            }
        }
        const double scale = std::max(std::abs(prev_best), 1e-300);
        const bool improved = prev_best == std::numeric_limits<double>::lowest() ||
                              (result.objective_bits - prev_best) > 1e-9 * scale;
        if (improved) {
            stall = 0;
            result.trace.last_improvement = iter;
        } else {
            ++stall;
        }

        const std::vector<std::size_t> elite = select_elite(objectives, params.elites);
        double mean_elite = 0.0;
        for (std::size_t e : elite) mean_elite += objectives[e];
        mean_elite /= static_cast<double>(elite.size());

        field = smooth(field, update(field, samples, elite), params.smoothing);
        result.trace.rows.push_back(
            {iter, result.objective_bits, mean_elite, field.entropy(), field});

        if (stall >= params.stall_iters) break;
    }
    return result;
}

/// Standalone entry point seeded from the parameter block itself.
inline CEResult optimize(const std::function<double(const ActivationSet&)>& objective_fn,
                         std::size_t n_vectors, std::size_t n_bits, const CEParams& params) {
    Rng rng(params.seed);
    return optimize(objective_fn, n_vectors, n_bits, params, rng);
}

/// Cross-entropy run for one scheme configuration.
inline OuterRun optimize_scheme(const SchemeEvaluator& evaluator, const SchemeConfig& config,
                                const CEParams& params, Rng& rng, CETrace* trace_out = nullptr) {
    // Fully dynamic NOMA gains nothing over partially dynamic (the best
    // single pattern is optimal), so it is learned with two vectors.
    const ActivationLevel learned =
        config.access == Access::noma && config.level == ActivationLevel::full_dynamic
            ? ActivationLevel::partial_dynamic
            : config.level;
    const std::size_t n_vectors = field_vector_count(learned, evaluator.device_count());
    const SchemeConfig eval_config{config.access, learned};

    CEResult r = optimize(
        [&](const ActivationSet& set) {
            thread_local InnerSolution scratch;
            return evaluator.objective(eval_config, set, scratch);
        },
        n_vectors, evaluator.antenna_count(), params, rng);
    if (trace_out) *trace_out = std::move(r.trace);
    return OuterRun{std::move(r.best), r.objective_bits, r.iterations};
}

} // namespace pams::ce
