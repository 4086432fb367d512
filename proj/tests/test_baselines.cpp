#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "pams/baselines.hpp"
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

Topology random_topology(std::uint64_t seed, std::size_t n_antennas, std::size_t n_devices) {
    Rng rng(seed);
    return sample_topology(SystemParams::defaults(), n_antennas, n_devices, rng);
}

} // namespace

TEST_CASE("full PA activation with one antenna is the discrete optimum", "[baselines]") {
    const SystemParams params = SystemParams::defaults();
    const Topology topo = random_topology(1, 1, 2);
    const double exact =
        oracle::exhaustive_outer(topo, params, {Access::tdma, ActivationLevel::partial_dynamic})
            .objective_bits;
    const baselines::BaselineSolution full = baselines::full_pa(topo, params);
    CHECK(full.objective_bits == exact);

    // deterministic: two calls agree bit for bit
    CHECK(baselines::full_pa(topo, params).objective_bits == full.objective_bits);
}

TEST_CASE("subset baselines never beat the exhaustive discrete optimum", "[baselines]") {
    const SystemParams params = SystemParams::defaults();
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const Topology topo = random_topology(seed + 10, 5, 2);
        const double exact = oracle::exhaustive_outer(
                                 topo, params, {Access::tdma, ActivationLevel::partial_dynamic})
                                 .objective_bits;

        CHECK(baselines::full_pa(topo, params).objective_bits <= exact);

        baselines::BaselineOuterSettings settings;
        settings.exhaustive = true;
        Rng rng(seed);
        for (const auto kind :
             {baselines::BaselineKind::fixed_tdma, baselines::BaselineKind::full_offload,
              baselines::BaselineKind::full_local}) {
            const baselines::BaselineRun run =
                baselines::optimize_baseline(kind, topo, params, settings, rng);
            CHECK(run.solution.objective_bits <= exact);
        }
    }
}

TEST_CASE("conventional array with one element sits at the feed", "[baselines]") {
    const SystemParams params = SystemParams::defaults();
    const Topology topo = random_topology(31, 1, 2);
    const baselines::BaselineSolution ca = baselines::conventional_array(topo, params);

    Topology at_feed = topo;
    at_feed.pa_x_m = {0.0};
    const ActivationPattern one = ActivationPattern::all_ones(1);
    const SchemeSolution direct = evaluate(
        at_feed, params, {Access::tdma, ActivationLevel::partial_dynamic}, {one, {one}});
    CHECK(ca.objective_bits == direct.inner.objective_bits);
}

TEST_CASE("conventional array gain equals the explicit coefficient sum", "[baselines]") {
    const SystemParams params = SystemParams::defaults();
    Topology topo = random_topology(32, 8, 1);
    topo.devices = {{20.0, 5.0}}; // device far from the feed-anchored array
    const Topology ca = conventional_array_topology(topo, params);
    const DerivedWavelengths w = derive_wavelengths(params);
    const ActivationPattern ones = ActivationPattern::all_ones(8);
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t n = 0; n < 8; ++n) sum += channel_coefficient(ca, w, ones, n, 0);
    CHECK_THAT(gain(ca, w, ones, 0), WithinRel(std::norm(sum), 1e-12));
}

TEST_CASE("fixed TDMA slots and split bisection", "[baselines]") {
    const SystemParams params = SystemParams::defaults();
    const Topology topo = random_topology(41, 6, 1);
    Rng rng(42);
    const ActivationSet set{random_pattern(6, rng), {random_pattern(6, rng)}};

    const baselines::BaselineSolution fixed = baselines::fixed_tdma(topo, params, set);
    CHECK_THAT(fixed.t0_s, WithinRel(params.frame_s / 2.0, 1e-12)); // L = 1
    CHECK_THAT(fixed.t1_s, WithinRel(params.frame_s / 2.0, 1e-12));

    // restricted slots never beat the flexible-slot inner optimum
    const SchemeSolution flexible =
        evaluate(topo, params, {Access::tdma, ActivationLevel::partial_dynamic}, set);
    CHECK(fixed.objective_bits <= flexible.inner.objective_bits * (1.0 + 1e-12));

    // the split bisection matches a dense grid over the energy split
    const LinkCoefficients c = coefficients(topo, params, set.downlink, set.uplink);
    const double slot = params.frame_s / 2.0;
    const double energy = c.upsilon_w[0] * slot;
    double best = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const double e_o = energy * i / 10000.0;
        const double f = std::cbrt((energy - e_o) / (params.frame_s * params.kappa));
        const double bits =
            params.bandwidth_hz * slot * std::log2(1.0 + e_o * c.gamma_per_w[0] / slot) +
            params.frame_s * f / params.intensity_cycles_per_bit;
        best = std::max(best, bits);
    }
    CHECK_THAT(fixed.objective_bits, WithinRel(best, 1e-3));
}

TEST_CASE("full offloading specialization", "[baselines]") {
    const SystemParams params = SystemParams::defaults();
    const Topology topo = random_topology(51, 6, 2);
    Rng rng(52);
    const ActivationSet set{random_pattern(6, rng), {random_pattern(6, rng)}};

    // no uplink channel: nothing can be offloaded
    const baselines::BaselineSolution offload = baselines::full_offload(topo, params, set);
    LinkCoefficients zero_gamma = coefficients(topo, params, set.downlink, set.uplink);
    for (double& g : zero_gamma.gamma_per_w) g = 0.0;
    CHECK(baselines::full_offload_value(zero_gamma, params).objective_bits == 0.0);

    // pricing local computing out of the general solver recovers the same value
    SystemParams pricey = params;
    pricey.kappa = 1e-4;
    const SchemeSolution general =
        evaluate(topo, pricey, {Access::tdma, ActivationLevel::partial_dynamic}, set);
    const baselines::BaselineSolution offload_pricey =
        baselines::full_offload(topo, pricey, set);
    CHECK_THAT(offload_pricey.objective_bits,
               WithinRel(general.inner.objective_bits, 1e-3));

    // restricted strategy never beats partial offloading
    const SchemeSolution flexible =
        evaluate(topo, params, {Access::tdma, ActivationLevel::partial_dynamic}, set);
    CHECK(offload.objective_bits <= flexible.inner.objective_bits * (1.0 + 1e-12));
}

TEST_CASE("full local computing specialization", "[baselines]") {
    const SystemParams params = SystemParams::defaults();
    const Topology topo = random_topology(61, 6, 2);
    Rng rng(62);
    const ActivationPattern dl = random_pattern(6, rng);

    const baselines::BaselineSolution local = baselines::full_local(topo, params, dl);
    CHECK(local.t0_s == params.frame_s);
    CHECK(local.t1_s == 0.0);

    // zero harvest: zero bits
    LinkCoefficients coeff = coefficients(topo, params, dl, {dl});
    std::vector<double> zeros(coeff.upsilon_w.size(), 0.0);
    CHECK(baselines::full_local_value(zeros, params).objective_bits == 0.0);

    // matches the general solver with every Gamma zeroed
    InnerProblem no_uplink{coeff.upsilon_w, std::vector<double>(2, 0.0), params};
    CHECK_THAT(local.objective_bits, WithinRel(solve(no_uplink).objective_bits, 1e-9));

    // restricted strategy never beats partial offloading
    const SchemeSolution flexible = evaluate(
        topo, params, {Access::tdma, ActivationLevel::partial_dynamic}, {dl, {dl}});
    CHECK(local.objective_bits <= flexible.inner.objective_bits * (1.0 + 1e-12));
}
