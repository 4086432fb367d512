#pragma once

#include <cstddef>
#include <vector>

#include "pams/errors.hpp"
#include "pams/params.hpp"
#include "pams/rng.hpp"

namespace pams {

/// Device position on the ground plane (z = 0).
struct DevicePos {
    double x_m;
    double y_m;
};

/// Antenna sites along the waveguide plus the served devices.
///
/// Antenna n sits at (pa_x_m[n], 0, height_m); the feed point is
/// (0, 0, height_m); device l sits at (devices[l].x_m, devices[l].y_m, 0).
struct Topology {
    std::vector<double> pa_x_m;
    std::vector<DevicePos> devices;
    double height_m = 0.0;

    std::size_t antenna_count() const { return pa_x_m.size(); }
    std::size_t device_count() const { return devices.size(); }

    void validate() const {
        if (pa_x_m.empty()) throw ConfigError("Topology: need at least one antenna");
        if (devices.empty()) throw ConfigError("Topology: need at least one device");
        if (!(height_m > 0.0)) throw ConfigError("Topology: height_m must be > 0");
        for (std::size_t n = 1; n < pa_x_m.size(); ++n)
            if (!(pa_x_m[n] > pa_x_m[n - 1]))
                throw ConfigError("Topology: pa_x_m must be strictly increasing");
    }
};

/// Evenly spaced antenna sites covering [0, D_x] with both endpoints used.
/// A single antenna is placed at the region midpoint.
inline std::vector<double> uniform_pa_positions(std::size_t n_antennas, double region_x_m) {
    std::vector<double> xs(n_antennas);
    if (n_antennas == 1) {
        xs[0] = region_x_m / 2.0;
        return xs;
    }
    const double spacing = region_x_m / static_cast<double>(n_antennas - 1);
    for (std::size_t n = 0; n < n_antennas; ++n) xs[n] = spacing * static_cast<double>(n);
    return xs;
}

/// Uniform antenna grid plus devices drawn i.i.d. uniform on the region.
/// Device draws consume the rng as (x1, y1, x2, y2, ...), so a longer device
/// list extends a shorter one drawn from the same stream.
inline Topology sample_topology(const SystemParams& params, std::size_t n_antennas,
                                std::size_t n_devices, Rng& rng) {
    Topology topo;
    topo.height_m = params.height_m;
    topo.pa_x_m = uniform_pa_positions(n_antennas, params.region_x_m);
    topo.devices.reserve(n_devices);
    for (std::size_t l = 0; l < n_devices; ++l) {
        const double x = params.region_x_m * rng.uniform01();
        const double y = params.region_y_m * rng.uniform01();
        topo.devices.push_back({x, y});
    }
    return topo;
}

/// Same devices served by a conventional half-wavelength array anchored at
/// the feed point instead of the distributed antenna sites.
inline Topology conventional_array_topology(const Topology& base, const SystemParams& params) {
    const DerivedWavelengths w = derive_wavelengths(params);
    Topology topo = base;
    topo.pa_x_m.resize(base.antenna_count());
    for (std::size_t n = 0; n < topo.pa_x_m.size(); ++n)
        topo.pa_x_m[n] = static_cast<double>(n) * w.lambda_m / 2.0;
    return topo;
}

} // namespace pams
