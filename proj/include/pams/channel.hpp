#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "pams/activation.hpp"
#include "pams/errors.hpp"
#include "pams/params.hpp"
#include "pams/topology.hpp"

namespace pams {

enum class Direction { downlink, uplink };

/// 3-D distance between device l (ground plane) and antenna n (waveguide plane).
inline double antenna_device_distance(const Topology& topology, std::size_t n, std::size_t l) {
    const double dx = topology.devices[l].x_m - topology.pa_x_m[n];
    const double dy = topology.devices[l].y_m;
    const double dz = topology.height_m;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Spherical-wave channel through one antenna: amplitude eta / r, free-space
/// phase over r, and in-waveguide phase over the feed-to-antenna run at the
/// guided wavelength. Deactivated antennas contribute zero. The model is
/// reciprocal, so both directions evaluate to the same coefficient.
inline std::complex<double> channel_coefficient(const Topology& topology,
                                                const DerivedWavelengths& wavelengths,
                                                const ActivationPattern& pattern, std::size_t n,
                                                std::size_t l,
                                                Direction direction = Direction::downlink) {
    (void)direction;
    if (!pattern.on(n)) return {0.0, 0.0};
    const double r = antenna_device_distance(topology, n, l);
    const double waveguide_run = topology.pa_x_m[n]; // feed is at x = 0
    const double phase = -2.0 * std::numbers::pi *
                         (r / wavelengths.lambda_m + waveguide_run / wavelengths.lambda_g_m);
    return std::polar(wavelengths.eta_m / r, phase);
}

/// PA gain for device l: squared magnitude of the coherent coefficient sum.
/// The downlink and uplink formulas coincide, so one function serves both.
inline double gain(const Topology& topology, const DerivedWavelengths& wavelengths,
                   const ActivationPattern& pattern, std::size_t l) {
    if (pattern.popcount() == 0) throw ZeroActivation("gain: all-zero activation pattern");
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t n = 0; n < topology.antenna_count(); ++n)
        sum += channel_coefficient(topology, wavelengths, pattern, n, l);
    return std::norm(sum);
}

/// Per-device, per-antenna complex coefficients precomputed once per geometry;
/// every activation-dependent gain is a masked coherent sum over this table.
class ChannelMatrix {
  public:
    ChannelMatrix() = default;

    ChannelMatrix(const Topology& topology, const SystemParams& params)
        : n_antennas_(topology.antenna_count()), n_devices_(topology.device_count()) {
        const DerivedWavelengths w = derive_wavelengths(params);
        coeff_.resize(n_devices_ * n_antennas_);
        for (std::size_t l = 0; l < n_devices_; ++l) {
            for (std::size_t n = 0; n < n_antennas_; ++n) {
                const double r = antenna_device_distance(topology, n, l);
                const double phase = -2.0 * std::numbers::pi *
                                     (r / w.lambda_m + topology.pa_x_m[n] / w.lambda_g_m);
                coeff_[l * n_antennas_ + n] = std::polar(w.eta_m / r, phase);
            }
        }
    }

    std::size_t antenna_count() const { return n_antennas_; }
    std::size_t device_count() const { return n_devices_; }

    std::complex<double> coefficient(std::size_t n, std::size_t l) const {
        return coeff_[l * n_antennas_ + n];
    }

    double gain(const ActivationPattern& pattern, std::size_t l) const {
        if (pattern.popcount() == 0) throw ZeroActivation("gain: all-zero activation pattern");
        std::complex<double> sum{0.0, 0.0};
        const auto& bits = pattern.bits();
        for (std::size_t n = 0; n < n_antennas_; ++n)
            if (bits[n]) sum += coeff_[l * n_antennas_ + n];
        return std::norm(sum);
    }

  private:
    std::size_t n_antennas_ = 0;
    std::size_t n_devices_ = 0;
    std::vector<std::complex<double>> coeff_;
};

/// Energy harvested by a device over the charging window t0 under the
/// equal-power split of P_b across the active downlink antennas.
inline double harvested_energy(double gain_dl, const ActivationPattern& pattern_dl, double t0_s,
                               const SystemParams& params) {
    if (pattern_dl.popcount() == 0)
        throw ZeroActivation("harvested_energy: all-zero downlink pattern");
    return params.gamma * t0_s * (params.pb_watts / static_cast<double>(pattern_dl.popcount())) *
           gain_dl;
}

struct LocalCompute {
    double bits;
    double energy_j;
};

/// Bits computed locally at CPU frequency f over the frame, and the cubic
/// energy cost of running at that frequency.
inline LocalCompute local_computation(double f_hz, const SystemParams& params) {
    LocalCompute out{};
    out.bits = params.frame_s * f_hz / params.intensity_cycles_per_bit;
    out.energy_j = params.frame_s * params.kappa * f_hz * f_hz * f_hz;
    return out;
}

/// Per-device summary coefficients the inner solver consumes:
/// upsilon_w[l] is the harvest power (W) under the downlink pattern,
/// gamma_per_w[l] the uplink SNR per watt under the pattern that governs
/// device l's slot.
struct LinkCoefficients {
    std::vector<double> upsilon_w;
    std::vector<double> gamma_per_w;
};

/// Builds {Upsilon_l} and {Gamma_l}. `beta_ul_per_slot` holds either one
/// shared uplink pattern or one pattern per device.
inline LinkCoefficients coefficients(const Topology& topology, const SystemParams& params,
                                     const ActivationPattern& beta_dl,
                                     const std::vector<ActivationPattern>& beta_ul_per_slot) {
    const std::size_t n_devices = topology.device_count();
    if (beta_ul_per_slot.size() != 1 && beta_ul_per_slot.size() != n_devices)
        throw ConfigMismatch("coefficients: uplink pattern list must have 1 or L entries");
    if (beta_dl.popcount() == 0) throw ZeroActivation("coefficients: all-zero downlink pattern");
    for (const auto& p : beta_ul_per_slot)
        if (p.popcount() == 0) throw ZeroActivation("coefficients: all-zero uplink pattern");

    const DerivedWavelengths w = derive_wavelengths(params);
    LinkCoefficients out;
    out.upsilon_w.resize(n_devices);
    out.gamma_per_w.resize(n_devices);
    const double dl_split = params.pb_watts / static_cast<double>(beta_dl.popcount());
    for (std::size_t l = 0; l < n_devices; ++l) {
        const ActivationPattern& ul =
            beta_ul_per_slot.size() == 1 ? beta_ul_per_slot.front() : beta_ul_per_slot[l];
        out.upsilon_w[l] = params.gamma * dl_split * gain(topology, w, beta_dl, l);
        out.gamma_per_w[l] =
            gain(topology, w, ul, l) / (static_cast<double>(ul.popcount()) * params.noise_watts);
    }
    return out;
}

} // namespace pams
