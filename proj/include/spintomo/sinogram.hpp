#pragma once

#include "spintomo/core.hpp"
#include "spintomo/sphere_grid.hpp"

namespace spintomo {

/// Transform data sampled on a radius-parameter grid times a sphere grid.
/// values are stored s-major, then latitude, then longitude.  `ds` is the
/// s-cell measure entering the data-space inner product.
struct Sinogram {
    std::vector<double> s_values;
    double ds = 1.0;
    SphereGrid grid;
    std::vector<double> values;

    std::size_t n_s() const { return s_values.size(); }
    std::size_t size() const { return n_s() * grid.size(); }

    std::size_t index(std::size_t is, int ilat, int ilon) const {
        return (is * grid.n_lat + ilat) * grid.n_lon + ilon;
    }

    double& at(std::size_t is, int ilat, int ilon) { return values[index(is, ilat, ilon)]; }
    double at(std::size_t is, int ilat, int ilon) const { return values[index(is, ilat, ilon)]; }

    /// Quadrature weight of one data cell in the ds x dOmega pairing.
    double cell_weight(int ilat) const { return ds * grid.cell_weight(ilat); }

    bool same_layout(const Sinogram& o) const {
        return s_values == o.s_values && ds == o.ds && grid == o.grid;
    }
};

/// Zero-filled sinogram with n_s uniform s-samples on
/// [s_min, outer^2 - s_min], s_min = frac * outer^2, where `outer` is the
/// spindle-domain outer radius (< 1, so every s stays inside (0, 1)).
inline Sinogram make_sinogram_template(std::size_t n_s, int n_lat, int n_lon,
                                       const HollowBall& spindle_domain,
                                       double s_min_fraction = 1e-2) {
    if (spindle_domain.flavor != HollowBall::Flavor::spindle_domain)
        throw std::invalid_argument("make_sinogram_template: expects the spindle-domain shell");
    if (n_s < 1) throw std::invalid_argument("make_sinogram_template: n_s must be >= 1");
    double out2 = spindle_domain.outer * spindle_domain.outer;
    double s_lo = s_min_fraction * out2;
    double s_hi = out2 - s_lo;
    Sinogram g;
    g.grid = SphereGrid::gauss(n_lat, n_lon);
    g.s_values.resize(n_s);
    double step = (n_s > 1) ? (s_hi - s_lo) / (n_s - 1) : (s_hi - s_lo);
    for (std::size_t i = 0; i < n_s; ++i)
        g.s_values[i] = (n_s > 1) ? s_lo + i * step : 0.5 * (s_lo + s_hi);
    // ds derived from the stored samples so a file round trip reproduces it
    g.ds = (n_s > 1) ? g.s_values[1] - g.s_values[0] : step;
    g.values.assign(g.size(), 0.0);
    return g;
}

}  // namespace spintomo
