#pragma once

#include "spintomo/core.hpp"
#include "spintomo/legendre.hpp"

namespace spintomo {

/// Quadrature grid on S^2: Gauss-Legendre nodes in cos(colatitude) crossed
/// with uniform longitudes.  Cell weights sum to 4*pi; the rule integrates
/// products of spherical harmonics exactly up to the resolved band.
struct SphereGrid {
    int n_lat = 0;
    int n_lon = 0;
    std::vector<double> colat;       // ascending, size n_lat
    std::vector<double> lon;         // uniform, size n_lon
    std::vector<double> lat_weight;  // Gauss-Legendre weights (sum 2)
    std::vector<Vec3> units;         // cached unit vectors, antipodal pairs exact

    static SphereGrid gauss(int n_lat, int n_lon) {
        if (n_lat < 1 || n_lon < 1) throw std::invalid_argument("SphereGrid: n_lat, n_lon >= 1");
        SphereGrid g;
        g.n_lat = n_lat;
        g.n_lon = n_lon;
        std::vector<double> x, w;
        gauss_legendre(n_lat, x, w);
        g.colat.resize(n_lat);
        g.lat_weight.resize(n_lat);
        for (int i = 0; i < n_lat; ++i) {
            g.colat[i] = std::acos(x[n_lat - 1 - i]);  // ascending colatitude
            g.lat_weight[i] = w[n_lat - 1 - i];
        }
        g.lon.resize(n_lon);
        for (int j = 0; j < n_lon; ++j) g.lon[j] = 2.0 * pi * j / n_lon;
        g.rebuild_units();
        return g;
    }

    /// Recomputes the cached unit vectors.  When the grid contains antipodal
    /// cell pairs (even n_lon, colatitudes mirrored about pi/2) the pairs are
    /// stored as exact negations, so axis-canonicalizing consumers treat the
    /// two directions identically down to the last bit.
    void rebuild_units() {
        units.resize(size());
        for (int i = 0; i < n_lat; ++i)
            for (int j = 0; j < n_lon; ++j) {
                double sc = std::sin(colat[i]), cc = std::cos(colat[i]);
                units[static_cast<std::size_t>(i) * n_lon + j] = {sc * std::cos(lon[j]),
                                                                  sc * std::sin(lon[j]), cc};
            }
        if (n_lon % 2 != 0) return;
        for (int i = 0; i < n_lat; ++i)
            for (int j = 0; j < n_lon; ++j) {
                std::size_t a = static_cast<std::size_t>(i) * n_lon + j;
                std::size_t b =
                    static_cast<std::size_t>(n_lat - 1 - i) * n_lon + (j + n_lon / 2) % n_lon;
                if (b > a) units[b] = -units[a];
            }
    }

    std::size_t size() const { return static_cast<std::size_t>(n_lat) * n_lon; }

    /// Quadrature weight of cell (i, j); independent of j.
    double cell_weight(int i) const { return lat_weight[i] * (2.0 * pi / n_lon); }

    Vec3 unit(int i, int j) const { return units[static_cast<std::size_t>(i) * n_lon + j]; }

    bool operator==(const SphereGrid& o) const {
        return n_lat == o.n_lat && n_lon == o.n_lon && colat == o.colat && lon == o.lon &&
               lat_weight == o.lat_weight;
    }
};

}  // namespace spintomo
