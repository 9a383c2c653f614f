#pragma once

#include "spintomo/geometry.hpp"
#include "spintomo/linear_map.hpp"
#include "spintomo/sinogram.hpp"
#include "spintomo/volume.hpp"

namespace spintomo {

struct OperatorConfig {
    int n_phi = 64;          // azimuthal quadrature nodes per surface
    int n_z = 128;           // axial / arc quadrature nodes per band
    double weight_pow = 0.5; // exponent on |grad_v h| in the transform weight
    int threads = 0;         // 0 = hardware concurrency
};

/// LinearMap between a Volume and a Sinogram, with the ds x dOmega pairing on
/// the data side and voxel volume on the image side.
class TomographicOperator : public LinearMap {
public:
    TomographicOperator(Volume vol_template, Sinogram sino_template)
        : vol_(std::move(vol_template)), sino_(std::move(sino_template)) {
        vol_.values.assign(vol_.size(), 0.0);
        sino_.values.assign(sino_.size(), 0.0);
        domain_w_.assign(vol_.size(), vol_.voxel_volume());
        range_w_.resize(sino_.size());
        for (std::size_t is = 0; is < sino_.n_s(); ++is)
            for (int i = 0; i < sino_.grid.n_lat; ++i)
                for (int j = 0; j < sino_.grid.n_lon; ++j)
                    range_w_[sino_.index(is, i, j)] = sino_.cell_weight(i);
    }

    const Volume& volume_template() const { return vol_; }
    const Sinogram& sinogram_template() const { return sino_; }

    std::size_t domain_size() const override { return vol_.size(); }
    std::size_t range_size() const override { return sino_.size(); }
    const std::vector<double>& domain_weights() const override { return domain_w_; }
    const std::vector<double>& range_weights() const override { return range_w_; }

    Sinogram apply(const Volume& f) const {
        if (!f.same_grid(vol_)) throw std::invalid_argument("apply: volume grid mismatch");
        Sinogram g = sino_;
        apply(f.values, g.values);
        return g;
    }
    Volume apply_adjoint(const Sinogram& g) const {
        if (!g.same_layout(sino_)) throw std::invalid_argument("apply_adjoint: sinogram mismatch");
        Volume f = vol_;
        apply_adjoint(g.values, f.values);
        return f;
    }
    using LinearMap::apply;
    using LinearMap::apply_adjoint;

protected:
    Volume vol_;
    Sinogram sino_;
    std::vector<double> domain_w_, range_w_;
};

/// Weighted cylinder transform: integrals over cylinders of radius sqrt(s)
/// with axis through the origin, weight 1/(2 sqrt(s) |grad_v h|^p).  The
/// 1/(2 sqrt(s)) factor converts the delta of |x|^2 - (x.theta)^2 - s into
/// surface measure; the adjoint is the exact algebraic transpose of the
/// discrete forward.
class CylinderOperator final : public TomographicOperator {
public:
    CylinderOperator(Volume vol_template, Sinogram sino_template, HollowBall cylinder_domain,
                     OperatorConfig cfg = {})
        : TomographicOperator(std::move(vol_template), std::move(sino_template)),
          domain_(cylinder_domain), cfg_(cfg) {
        if (domain_.flavor != HollowBall::Flavor::cylinder_domain)
            throw std::invalid_argument("CylinderOperator: expects a cylinder-domain shell");
        double out2 = domain_.outer * domain_.outer;
        for (double s : sino_.s_values)
            if (!(s >= 1e-4 && s < out2))
                throw std::invalid_argument("CylinderOperator: template s outside (s_min, outer^2)");
    }

    const HollowBall& domain() const { return domain_; }
    const OperatorConfig& config() const { return cfg_; }

    using TomographicOperator::apply;
    using TomographicOperator::apply_adjoint;

    void apply(std::span<const double> x, std::span<double> y) const override {
        const Volume f = make_volume(x);
        std::size_t ncells = sino_.size();
        parallel_for(ncells, cfg_.threads, [&](std::size_t cell) {
            auto [is, ilat, ilon] = split(cell);
            double s = sino_.s_values[is];
            Vec3 axis = sino_.grid.unit(ilat, ilon);
            double acc = 0.0;
            double inv2rs = 1.0 / (2.0 * std::sqrt(s));
            for_each_cylinder_node(s, axis, domain_, cfg_.n_phi, cfg_.n_z,
                                   [&](const Vec3& node, double w) {
                                       acc += w * node_factor(node, axis) *
                                              sample_trilinear(f, node);
                                   });
            y[cell] = acc * inv2rs;
        });
    }

    void apply_adjoint(std::span<const double> y, std::span<double> x) const override {
        std::fill(x.begin(), x.end(), 0.0);
        scatter_slices(y, [&](std::span<const double> g, std::size_t is, Volume& scratch) {
            scatter_slice(g, is, scratch);
        }, x);
    }

private:
    friend class SpindleOperator;

    Volume make_volume(std::span<const double> x) const {
        Volume f = vol_;
        std::copy(x.begin(), x.end(), f.values.begin());
        return f;
    }

    std::tuple<std::size_t, int, int> split(std::size_t cell) const {
        int ilon = static_cast<int>(cell % sino_.grid.n_lon);
        std::size_t rest = cell / sino_.grid.n_lon;
        int ilat = static_cast<int>(rest % sino_.grid.n_lat);
        return {rest / sino_.grid.n_lat, ilat, ilon};
    }

    double node_factor(const Vec3& node, const Vec3& axis) const {
        double g = norm(grad_h(vmap(node), axis));
        if (cfg_.weight_pow == 0.5) return 1.0 / std::sqrt(g);
        if (cfg_.weight_pow == 1.0) return 1.0 / g;
        return std::pow(g, -cfg_.weight_pow);
    }

    void scatter_slice(std::span<const double> g, std::size_t is, Volume& scratch) const {
        double s = sino_.s_values[is];
        double inv2rs = 1.0 / (2.0 * std::sqrt(s));
        double inv_vx = 1.0 / vol_.voxel_volume();
        for (int ilat = 0; ilat < sino_.grid.n_lat; ++ilat) {
            double mu = sino_.cell_weight(ilat);
            for (int ilon = 0; ilon < sino_.grid.n_lon; ++ilon) {
                double gv = g[sino_.index(is, ilat, ilon)];
                if (gv == 0.0) continue;
                Vec3 axis = sino_.grid.unit(ilat, ilon);
                double c = gv * mu * inv2rs * inv_vx;
                for_each_cylinder_node(s, axis, domain_, cfg_.n_phi, cfg_.n_z,
                                       [&](const Vec3& node, double w) {
                                           scatter_trilinear(scratch, node,
                                                             c * w * node_factor(node, axis));
                                       });
            }
        }
    }

    // Scatters slice contributions into x, merging in slice order with a
    // fixed batch width so the result is bitwise independent of thread count.
    template <typename SliceFn>
    void scatter_slices(std::span<const double> y, SliceFn&& fn, std::span<double> x) const {
        constexpr std::size_t batch = 4;
        std::size_t ns = sino_.n_s();
        std::vector<Volume> scratch;
        for (std::size_t b = 0; b < ns; b += batch) {
            std::size_t cnt = std::min(batch, ns - b);
            scratch.assign(cnt, vol_);
            parallel_for(cnt, cfg_.threads,
                         [&](std::size_t k) { fn(y, b + k, scratch[k]); });
            for (std::size_t k = 0; k < cnt; ++k)
                for (std::size_t i = 0; i < x.size(); ++i) x[i] += scratch[k].values[i];
        }
    }

    HollowBall domain_;
    OperatorConfig cfg_;
};

/// Spindle transform realized through the cylinder transform: pull the
/// density onto the cylinder-domain grid with the radial diffeomorphism and
/// its Jacobian, then apply the cylinder operator.  The adjoint is the exact
/// transpose of the composition.
class SpindleOperator final : public TomographicOperator {
public:
    SpindleOperator(Volume spindle_vol_template, Sinogram sino_template, HollowBall spindle_domain,
                    Volume cylinder_vol_template, OperatorConfig cfg = {})
        : TomographicOperator(std::move(spindle_vol_template), std::move(sino_template)),
          domain_(spindle_domain),
          inner_(std::move(cylinder_vol_template), sino_, spindle_domain.linked_cylinder(), cfg) {
        if (domain_.flavor != HollowBall::Flavor::spindle_domain)
            throw std::invalid_argument("SpindleOperator: expects a spindle-domain shell");
    }

    SpindleOperator(Volume spindle_vol_template, Sinogram sino_template, HollowBall spindle_domain,
                    OperatorConfig cfg = {})
        : SpindleOperator(spindle_vol_template, std::move(sino_template), spindle_domain,
                          default_cylinder_grid(spindle_vol_template, spindle_domain), cfg) {}

    /// Cylinder grid covering the linked shell.  The radial map compresses
    /// mid-shell features by a factor ~2.5 relative to the bounding boxes, so
    /// the default uses 2.5x the spindle-grid resolution per axis.
    static Volume default_cylinder_grid(const Volume& spindle_vol, const HollowBall& dom) {
        int n = std::max({spindle_vol.nx, spindle_vol.ny, spindle_vol.nz});
        int cn = static_cast<int>(2.5 * n + 0.5);
        cn += cn % 2;  // keep voxel centres symmetric pairs
        return Volume::centered(cn, HollowBall::link_radius(dom.outer));
    }

    const HollowBall& domain() const { return domain_; }
    const CylinderOperator& cylinder() const { return inner_; }

    using TomographicOperator::apply;
    using TomographicOperator::apply_adjoint;

    void apply(std::span<const double> x, std::span<double> y) const override {
        std::vector<double> ft(inner_.domain_size(), 0.0);
        resample(x, ft);
        inner_.apply(ft, y);
    }

    void apply_adjoint(std::span<const double> y, std::span<double> x) const override {
        std::vector<double> ut(inner_.domain_size(), 0.0);
        inner_.apply_adjoint(y, ut);
        resample_adjoint(ut, x);
    }

private:
    // ft(c) = |det J_v(x_c)| f(v(x_c)) on cylinder voxels whose radius lies in
    // the linked shell; everything else is zero.
    void resample(std::span<const double> f, std::span<double> ft) const {
        const Volume& cyl = inner_.volume_template();
        Volume fv = vol_;
        std::copy(f.begin(), f.end(), fv.values.begin());
        const HollowBall cshell = domain_.linked_cylinder();
        parallel_for(static_cast<std::size_t>(cyl.nz), inner_.config().threads, [&](std::size_t k) {
            for (int j = 0; j < cyl.ny; ++j)
                for (int i = 0; i < cyl.nx; ++i) {
                    Vec3 p = cyl.center(static_cast<int>(i), j, static_cast<int>(k));
                    double r = norm(p);
                    if (!cshell.contains(r)) continue;
                    ft[cyl.index(i, j, static_cast<int>(k))] =
                        vmap_jacobian_det(p) * sample_trilinear(fv, vmap(p));
                }
        });
    }

    void resample_adjoint(std::span<const double> ut, std::span<double> f) const {
        const Volume& cyl = inner_.volume_template();
        std::fill(f.begin(), f.end(), 0.0);
        Volume acc = vol_;
        const HollowBall cshell = domain_.linked_cylinder();
        double scale = cyl.voxel_volume() / vol_.voxel_volume();
        for (int k = 0; k < cyl.nz; ++k)
            for (int j = 0; j < cyl.ny; ++j)
                for (int i = 0; i < cyl.nx; ++i) {
                    double u = ut[cyl.index(i, j, k)];
                    if (u == 0.0) continue;
                    Vec3 p = cyl.center(i, j, k);
                    double r = norm(p);
                    if (!cshell.contains(r)) continue;
                    scatter_trilinear(acc, vmap(p), scale * vmap_jacobian_det(p) * u);
                }
        std::copy(acc.values.begin(), acc.values.end(), f.begin());
    }

    HollowBall domain_;
    CylinderOperator inner_;
};

/// Direct evaluation of the cylinder backprojection formula: for each voxel,
/// the data value at s = |x|^2 - (x.theta)^2 (linearly interpolated in s,
/// zero outside the sampled range) integrated over the sphere with the
/// |grad_v h|^{-p} weight.  This is a consistency cross-check for the exact
/// discrete transpose used by the solvers, not a solver-grade adjoint.
inline Volume analytic_cylinder_backprojection(const Sinogram& g, const Volume& vol_template,
                                               const HollowBall& cylinder_domain,
                                               double weight_pow = 0.5, int threads = 0) {
    if (cylinder_domain.flavor != HollowBall::Flavor::cylinder_domain)
        throw std::invalid_argument("analytic_cylinder_backprojection: cylinder shell expected");
    std::size_t ns = g.n_s();
    if (ns < 2)
        throw std::invalid_argument("analytic_cylinder_backprojection: needs >= 2 s-samples");
    Volume out = vol_template;
    out.values.assign(out.size(), 0.0);
    parallel_for(static_cast<std::size_t>(out.nz), threads, [&](std::size_t kz) {
        int k = static_cast<int>(kz);
        for (int j = 0; j < out.ny; ++j)
            for (int i = 0; i < out.nx; ++i) {
                Vec3 x = out.center(i, j, k);
                double r = norm(x);
                if (!cylinder_domain.contains(r)) continue;
                Vec3 v = vmap(x);
                double acc = 0.0;
                for (int ilat = 0; ilat < g.grid.n_lat; ++ilat) {
                    double w = g.grid.cell_weight(ilat);
                    for (int ilon = 0; ilon < g.grid.n_lon; ++ilon) {
                        Vec3 th = g.grid.unit(ilat, ilon);
                        double s = norm2(x) - dot(x, th) * dot(x, th);
                        if (s < g.s_values.front() || s > g.s_values.back()) continue;
                        // linear interpolation along the uniform s grid
                        double u = (s - g.s_values.front()) / g.ds;
                        std::size_t i0 = std::min(static_cast<std::size_t>(u), ns - 2);
                        double t = u - static_cast<double>(i0);
                        double gv = (1.0 - t) * g.at(i0, ilat, ilon) + t * g.at(i0 + 1, ilat, ilon);
                        double gh = norm(grad_h(v, th));
                        double wt = weight_pow == 0.5  ? 1.0 / std::sqrt(gh)
                                    : weight_pow == 1.0 ? 1.0 / gh
                                                         : std::pow(gh, -weight_pow);
                        acc += w * gv * wt;
                    }
                }
                out.at(i, j, k) = acc;
            }
    });
    return out;
}

}  // namespace spintomo
