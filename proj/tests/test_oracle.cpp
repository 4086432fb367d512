#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <vector>

#include "pams/oracle.hpp"
#include "pams/rng.hpp"
#include "pams/topology.hpp"

using namespace pams;
using Catch::Matchers::WithinRel;

namespace {

ActivationPattern random_pattern(std::size_t n, Rng& rng) {
    std::vector<std::uint8_t> bits(n, 0);
    bool any = false;
    for (auto& b : bits) {
        b = rng.bernoulli(0.5);
        any |= b != 0;
    }
    if (!any) bits[rng.uniform_below(n)] = 1;
    return ActivationPattern(std::move(bits));
}

InnerProblem random_instance(std::uint64_t seed, std::size_t n_devices) {
    const SystemParams params = SystemParams::defaults();
    Rng rng(seed);
    const Topology topo = sample_topology(params, 8, n_devices, rng);
    const ActivationPattern dl = random_pattern(8, rng);
    const ActivationPattern ul = random_pattern(8, rng);
    return InnerProblem::of(topo, params, dl, {ul});
}

} // namespace

TEST_CASE("grid refinement never decreases the oracle value", "[oracle]") {
    const InnerProblem problem = random_instance(3, 2);
    const double coarse = oracle::brute_force_inner(problem, {50, 51, 10});
    const double fine = oracle::brute_force_inner(problem, {100, 101, 10});
    CHECK(fine >= coarse);
}

TEST_CASE("oracle of a zero-harvest instance is zero", "[oracle]") {
    InnerProblem problem = random_instance(4, 1);
    problem.upsilon_w[0] = 0.0;
    CHECK(oracle::brute_force_inner(problem, {50, 51, 10}) == 0.0);
}

TEST_CASE("solver within half a percent of the grid oracle", "[oracle]") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const InnerProblem problem = random_instance(seed, 1 + seed % 2);
        const double solver = solve(problem).objective_bits;
        const double lower = oracle::brute_force_inner(problem, {400, 400, 10});
        const double rel = (solver - lower) / lower;
        CHECK(rel >= -1e-9); // never below a feasible point
        CHECK(rel <= 0.005);
    }
}

TEST_CASE("equal-SNR rule matches the raw sub-slot grid", "[oracle]") {
    const SystemParams p = SystemParams::defaults();
    Rng rng(9);
    for (int i = 0; i < 5; ++i) {
        const double e1 = 1e-7 * (1.0 + rng.uniform01());
        const double e2 = 1e-7 * (1.0 + rng.uniform01());
        const double g1 = 2e7 * (1.0 + rng.uniform01());
        const double g2 = 2e7 * (1.0 + rng.uniform01());
        const double t1 = 0.3 + 0.4 * rng.uniform01();
        const double rule =
            oracle::equal_snr_offload_bits(e1 * g1 + e2 * g2, t1, p.bandwidth_hz);
        const double raw =
            oracle::tau_grid_offload_bits(e1, g1, e2, g2, t1, p.bandwidth_hz, 400);
        CHECK(raw <= rule * (1.0 + 1e-12)); // the rule is optimal
        CHECK(raw >= rule * (1.0 - 1e-3));  // and the grid gets close to it
    }
}

TEST_CASE("exhaustive enumeration basics", "[oracle]") {
    // N=1: a single nonzero pattern exists
    auto factory_count = [] {
        return [](std::span<const std::uint64_t> digits) {
            return static_cast<double>(digits.front());
        };
    };
    const oracle::ExhaustiveResult one = oracle::exhaustive_patterns(1, 1, 100, factory_count);
    CHECK(one.evaluations == 1);
    CHECK(one.pattern_indices == std::vector<std::uint64_t>{1});

    // argmax of the digit sum is the all-max tuple
    auto factory_sum = [] {
        return [](std::span<const std::uint64_t> digits) {
            double s = 0.0;
            for (auto d : digits) s += static_cast<double>(d);
            return s;
        };
    };
    const oracle::ExhaustiveResult best = oracle::exhaustive_patterns(2, 3, 100, factory_sum);
    CHECK(best.pattern_indices == std::vector<std::uint64_t>{7, 7});
    CHECK(best.evaluations == 49);

    // constant objective: ties resolve to the lexicographically smallest tuple
    auto factory_const = [] {
        return [](std::span<const std::uint64_t>) { return 1.0; };
    };
    const oracle::ExhaustiveResult tie = oracle::exhaustive_patterns(2, 3, 100, factory_const);
    CHECK(tie.pattern_indices == std::vector<std::uint64_t>{1, 1});

    CHECK_THROWS_AS(oracle::exhaustive_patterns(3, 8, 1000, factory_const), BudgetExceeded);
}

TEST_CASE("exhaustive outer obeys the activation-level orderings", "[oracle]") {
    const SystemParams params = SystemParams::defaults();
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        Rng rng(seed);
        const Topology topo = sample_topology(params, 5, 2, rng);
        const double o_static =
            oracle::exhaustive_outer(topo, params,
                                     {Access::tdma, ActivationLevel::static_activation})
                .objective_bits;
        const double o_partial =
            oracle::exhaustive_outer(topo, params,
                                     {Access::tdma, ActivationLevel::partial_dynamic})
                .objective_bits;
        const double o_full =
            oracle::exhaustive_outer(topo, params, {Access::tdma, ActivationLevel::full_dynamic})
                .objective_bits;
        CHECK(o_static <= o_partial);
        CHECK(o_partial <= o_full);

        const double n_partial =
            oracle::exhaustive_outer(topo, params,
                                     {Access::noma, ActivationLevel::partial_dynamic})
                .objective_bits;
        const double n_full =
            oracle::exhaustive_outer(topo, params, {Access::noma, ActivationLevel::full_dynamic})
                .objective_bits;
        CHECK(n_partial == n_full);
        CHECK(o_partial == n_partial);
    }
}

TEST_CASE("exhaustive outer result is independent of the worker count", "[oracle]") {
    const SystemParams params = SystemParams::defaults();
    Rng rng(12);
    const Topology topo = sample_topology(params, 6, 2, rng);
    const SchemeConfig config{Access::tdma, ActivationLevel::partial_dynamic};

    setenv("PAMS_OPT_THREADS", "1", 1);
    const OuterRun serial = oracle::exhaustive_outer(topo, params, config);
    setenv("PAMS_OPT_THREADS", "3", 1);
    const OuterRun threaded = oracle::exhaustive_outer(topo, params, config);
    unsetenv("PAMS_OPT_THREADS");

    CHECK(serial.objective_bits == threaded.objective_bits);
    CHECK(serial.activations.downlink == threaded.activations.downlink);
    CHECK(serial.activations.uplink.front() == threaded.activations.uplink.front());
}
