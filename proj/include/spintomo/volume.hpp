#pragma once

#include <array>

#include "spintomo/core.hpp"

namespace spintomo {

/// Scalar density on a regular isotropic grid, x-fastest storage.
/// `origin` is the centre of voxel (0, 0, 0).
struct Volume {
    int nx = 0, ny = 0, nz = 0;
    Vec3 origin{};
    double spacing = 1.0;
    std::vector<double> values;

    Volume() = default;
    Volume(int nx_, int ny_, int nz_, Vec3 origin_, double spacing_)
        : nx(nx_), ny(ny_), nz(nz_), origin(origin_), spacing(spacing_),
          values(static_cast<std::size_t>(nx_) * ny_ * nz_, 0.0) {
        if (nx_ < 1 || ny_ < 1 || nz_ < 1 || !(spacing_ > 0.0))
            throw std::invalid_argument("Volume: bad dimensions or spacing");
    }

    /// Cube of n^3 voxels covering [-half_extent, half_extent]^3, voxel
    /// centres symmetric about the origin.
    static Volume centered(int n, double half_extent) {
        double h = 2.0 * half_extent / n;
        double o = -half_extent + 0.5 * h;
        return Volume(n, n, n, {o, o, o}, h);
    }

    std::size_t size() const { return values.size(); }

    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * (j + static_cast<std::size_t>(ny) * k);
    }

    double& at(int i, int j, int k) { return values[index(i, j, k)]; }
    double at(int i, int j, int k) const { return values[index(i, j, k)]; }

    Vec3 center(int i, int j, int k) const {
        return {origin.x + spacing * i, origin.y + spacing * j, origin.z + spacing * k};
    }

    double voxel_volume() const { return spacing * spacing * spacing; }

    bool same_grid(const Volume& o) const {
        return nx == o.nx && ny == o.ny && nz == o.nz && spacing == o.spacing &&
               origin.x == o.origin.x && origin.y == o.origin.y && origin.z == o.origin.z;
    }

    /// True when the voxel-centre set is symmetric under x -> -x.
    bool symmetric_about_origin(double tol = 1e-12) const {
        auto ok = [&](double o, int n) { return std::abs(o + 0.5 * spacing * (n - 1)) <= tol; };
        return ok(origin.x, nx) && ok(origin.y, ny) && ok(origin.z, nz);
    }
};

/// The eight (index, weight) pairs of trilinear interpolation at p.
/// `inside` is false when p falls outside the voxel-centre hull; such points
/// contribute nothing (and read zero).
struct TrilinearStencil {
    std::array<std::size_t, 8> idx{};
    std::array<double, 8> w{};
    bool inside = false;
};

inline TrilinearStencil trilinear_stencil(const Volume& v, const Vec3& p) {
    TrilinearStencil st;
    double ux = (p.x - v.origin.x) / v.spacing;
    double uy = (p.y - v.origin.y) / v.spacing;
    double uz = (p.z - v.origin.z) / v.spacing;
    double fx = std::floor(ux), fy = std::floor(uy), fz = std::floor(uz);
    int ix = static_cast<int>(fx), iy = static_cast<int>(fy), iz = static_cast<int>(fz);
    if (ix < 0 || iy < 0 || iz < 0 || ix > v.nx - 2 || iy > v.ny - 2 || iz > v.nz - 2) return st;
    double tx = ux - fx, ty = uy - fy, tz = uz - fz;
    double mx = 1.0 - tx, my = 1.0 - ty, mz = 1.0 - tz;
    st.inside = true;
    std::size_t base = v.index(ix, iy, iz);
    std::size_t sx = 1, sy = v.nx, sz = static_cast<std::size_t>(v.nx) * v.ny;
    st.idx = {base,           base + sx,           base + sy,           base + sx + sy,
              base + sz,      base + sx + sz,      base + sy + sz,      base + sx + sy + sz};
    st.w = {mx * my * mz, tx * my * mz, mx * ty * mz, tx * ty * mz,
            mx * my * tz, tx * my * tz, mx * ty * tz, tx * ty * tz};
    return st;
}

/// Trilinear sample; zero outside the grid.
inline double sample_trilinear(const Volume& v, const Vec3& p) {
    TrilinearStencil st = trilinear_stencil(v, p);
    if (!st.inside) return 0.0;
    double acc = 0.0;
    for (int k = 0; k < 8; ++k) acc += st.w[k] * v.values[st.idx[k]];
    return acc;
}

inline void scatter_trilinear(Volume& v, const Vec3& p, double value) {
    TrilinearStencil st = trilinear_stencil(v, p);
    if (!st.inside) return;
    for (int k = 0; k < 8; ++k) v.values[st.idx[k]] += st.w[k] * value;
}

}  // namespace spintomo
