#pragma once

#include <numbers>
#include <string>

#include "pams/errors.hpp"
#include "pams/units.hpp"

namespace pams {

/// Scalar physical and algorithmic constants of the system.
struct SystemParams {
    double pb_watts;                 ///< BS transmit power P_b (W)
    double noise_watts;              ///< noise power at the BS (W)
    double bandwidth_hz;             ///< signal bandwidth B (Hz)
    double frame_s;                  ///< transmission frame length T (s)
    double gamma;                    ///< energy conversion efficiency, in (0, 1]
    double kappa;                    ///< hardware power coefficient of devices
    double intensity_cycles_per_bit; ///< computation intensity I_c (cycles/bit)
    double carrier_hz;               ///< carrier frequency f_c (Hz)
    double refractive_index;         ///< effective refractive index n_e >= 1
    double height_m;                 ///< waveguide height d (m)
    double region_x_m;               ///< device region extent D_x (m)
    double region_y_m;               ///< device region extent D_y (m)

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0)) throw ConfigError(std::string("SystemParams: ") + name + " must be > 0");
        };
        positive(pb_watts, "pb_watts");
        positive(noise_watts, "noise_watts");
        positive(bandwidth_hz, "bandwidth_hz");
        positive(frame_s, "frame_s");
        positive(gamma, "gamma");
        positive(kappa, "kappa");
        positive(intensity_cycles_per_bit, "intensity_cycles_per_bit");
        positive(carrier_hz, "carrier_hz");
        positive(height_m, "height_m");
        positive(region_x_m, "region_m[0]");
        positive(region_y_m, "region_m[1]");
        if (gamma > 1.0) throw ConfigError("SystemParams: gamma must be <= 1");
        if (refractive_index < 1.0) throw ConfigError("SystemParams: refractive_index must be >= 1");
    }

    /// Simulation defaults: 43 dBm transmit power, -120 dBm noise, 50 MHz
    /// bandwidth, 28 GHz carrier, 1 s frame, 30 m x 10 m device region.
    static SystemParams defaults() {
        SystemParams p{};
        p.pb_watts = dbm_to_watts(43.0);
        p.noise_watts = dbm_to_watts(-120.0);
        p.bandwidth_hz = 50e6;
        p.frame_s = 1.0;
        p.gamma = 0.8;
        p.kappa = 1e-28;
        p.intensity_cycles_per_bit = 200.0;
        p.carrier_hz = 28e9;
        p.refractive_index = 1.4;
        p.height_m = 4.0;
        p.region_x_m = 30.0;
        p.region_y_m = 10.0;
        return p;
    }
};

/// Wavelength quantities derived from the carrier and the waveguide medium.
struct DerivedWavelengths {
    double eta_m;      ///< eta = c / (4 pi f_c)
    double lambda_m;   ///< free-space wavelength
    double lambda_g_m; ///< guided wavelength lambda / n_e
};

inline DerivedWavelengths derive_wavelengths(const SystemParams& params) {
    DerivedWavelengths w{};
    w.eta_m = speed_of_light / (4.0 * std::numbers::pi * params.carrier_hz);
    w.lambda_m = speed_of_light / params.carrier_hz;
    w.lambda_g_m = w.lambda_m / params.refractive_index;
    return w;
}

} // namespace pams
