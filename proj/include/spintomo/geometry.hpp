#pragma once

#include <algorithm>
#include <utility>

#include "spintomo/core.hpp"

namespace spintomo {

/// Compton energy of a photon scattered by angle omega (radians), incident
/// energy e_lambda (keV), electron rest energy e0 (keV).
inline double scattered_energy(double e_lambda, double omega, double e0 = 511.0) {
    if (!(e_lambda > 0.0)) throw std::domain_error("scattered_energy: E_lambda must be > 0");
    return e_lambda / (1.0 + (e_lambda / e0) * (1.0 - std::cos(omega)));
}

/// Radial diffeomorphism v mapping the cylinder-side shell onto the
/// spindle-side shell: same direction as x, norm (sqrt(|x|^2+1)-1)/|x| < 1.
inline Vec3 vmap(const Vec3& x) {
    double r2 = norm2(x);
    if (r2 == 0.0) throw std::domain_error("vmap: |x| must be > 0");
    // (sqrt(r^2+1)-1)/r = r/(1+sqrt(1+r^2)); the right-hand form has no cancellation.
    return x * (1.0 / (1.0 + std::sqrt(1.0 + r2)));
}

/// Inverse of vmap: x = 2 y / (1 - |y|^2), defined for 0 < |y| < 1.
inline Vec3 vmap_inverse(const Vec3& y) {
    double r2 = norm2(y);
    if (r2 == 0.0 || r2 >= 1.0) throw std::domain_error("vmap_inverse: need 0 < |y| < 1");
    return y * (2.0 / (1.0 - r2));
}

/// Jacobian determinant of vmap at x; radial map, so det = g'(r) (g(r)/r)^2
/// with g the radial profile.  Strictly positive.
inline double vmap_jacobian_det(const Vec3& x) {
    double r2 = norm2(x);
    if (r2 == 0.0) throw std::domain_error("vmap_jacobian_det: |x| must be > 0");
    double q = std::sqrt(1.0 + r2);
    double t = 1.0 + q;
    return 1.0 / (q * t * t * t);
}

/// Defining function of the spindle surface family: 4|x x theta|^2/(1-|x|^2)^2 - s.
inline double h_eval(double s, const Vec3& x, const Vec3& theta_unit) {
    double r2 = norm2(x);
    if (r2 >= 1.0) throw std::domain_error("h_eval: |x| must be < 1");
    double c2 = norm2(cross(x, theta_unit));
    double d = 1.0 - r2;
    return 4.0 * c2 / (d * d) - s;
}

inline double h_eval(double s, const Vec3& x, const Direction& theta) {
    return h_eval(s, x, theta.unit);
}

/// Gradient of h in x; nonvanishing wherever the surface parameter stays
/// inside the data range.
inline Vec3 grad_h(const Vec3& x, const Vec3& theta_unit) {
    double r2 = norm2(x);
    if (r2 >= 1.0) throw std::domain_error("grad_h: |x| must be < 1");
    double xt = dot(x, theta_unit);
    double c2 = norm2(cross(x, theta_unit));
    double d = 1.0 - r2;
    double d2 = d * d;
    return (x - xt * theta_unit) * (8.0 / d2) + x * (16.0 * c2 / (d2 * d));
}

inline Vec3 grad_h(const Vec3& x, const Direction& theta) { return grad_h(x, theta.unit); }

/// Deterministic orthonormal frame {e1, e2} completing theta:
/// e1 = normalize(a x theta) with a = ez unless theta is near ez, e2 = theta x e1.
inline std::pair<Vec3, Vec3> orthonormal_frame(const Vec3& theta) {
    Vec3 a = (std::abs(theta.z) > 0.9) ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 0.0, 1.0};
    Vec3 e1 = normalized(cross(a, theta));
    Vec3 e2 = cross(theta, e1);
    return {e1, e2};
}

/// Canonical representative of the axis {u, -u}; the cylinder and spindle
/// surfaces depend on theta only through the axis, so transforms evaluate on
/// the representative to make the antipodal symmetry bitwise exact.
inline Vec3 canonical_axis(const Vec3& u) {
    if (u.z != 0.0) return u.z < 0.0 ? -u : u;
    if (u.y != 0.0) return u.y < 0.0 ? -u : u;
    return u.x < 0.0 ? -u : u;
}

struct SurfaceQuadrature {
    std::vector<Vec3> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    bool empty() const { return nodes.empty(); }
};

namespace detail {

// Trapezoid samples of [a, b] with n points, fn(t, weight).
template <typename F>
void trapezoid(double a, double b, int n, F&& fn) {
    double dt = (b - a) / (n - 1);
    for (int j = 0; j < n; ++j) {
        double w = (j == 0 || j == n - 1) ? 0.5 * dt : dt;
        fn(a + j * dt, w);
    }
}

}  // namespace detail

/// Visits the quadrature nodes of the cylinder {|x|^2 - (x.theta)^2 = s}
/// clipped to the hollow ball.  fn(node, weight); weights carry the surface
/// measure sqrt(s) dphi dz.  Midpoint rule in phi, trapezoid in z per band;
/// two symmetric z-bands appear when s < inner^2.
template <typename F>
void for_each_cylinder_node(double s, const Vec3& axis, const HollowBall& domain, int n_phi,
                            int n_z, F&& fn) {
    if (domain.flavor != HollowBall::Flavor::cylinder_domain)
        throw std::invalid_argument("cylinder quadrature: expects a cylinder-domain shell");
    if (!(s > 0.0)) throw std::domain_error("cylinder quadrature: s must be > 0");
    if (n_phi < 2 || n_z < 2) throw std::invalid_argument("cylinder quadrature: n_phi, n_z >= 2");

    double out2 = domain.outer * domain.outer;
    if (s >= out2) return;  // no intersection
    double in2 = domain.inner * domain.inner;
    double z_hi = std::sqrt(out2 - s);
    double z_lo = (s < in2) ? std::sqrt(in2 - s) : 0.0;
    if (z_hi <= z_lo) return;

    Vec3 th = canonical_axis(normalized(axis));
    auto [e1, e2] = orthonormal_frame(th);
    double rs = std::sqrt(s);
    double dphi = 2.0 * pi / n_phi;

    auto band = [&](double a, double b) {
        detail::trapezoid(a, b, n_z, [&](double z, double wz) {
            Vec3 zth = z * th;
            for (int i = 0; i < n_phi; ++i) {
                double phi = (i + 0.5) * dphi;
                Vec3 node = rs * (std::cos(phi) * e1 + std::sin(phi) * e2) + zth;
                fn(node, rs * dphi * wz);
            }
        });
    };

    if (z_lo > 0.0) {
        band(z_lo, z_hi);
        band(-z_hi, -z_lo);
    } else {
        band(-z_hi, z_hi);
    }
}

inline SurfaceQuadrature cylinder_quadrature(double s, const Direction& theta,
                                             const HollowBall& domain, int n_phi, int n_z) {
    SurfaceQuadrature q;
    for_each_cylinder_node(s, theta.unit, domain, n_phi, n_z, [&](const Vec3& x, double w) {
        q.nodes.push_back(x);
        q.weights.push_back(w);
    });
    return q;
}

/// Profile of the spindle torus with tube centre offset r in the (u, w)
/// half-plane (u = distance from the axis, w = coordinate along it):
/// u = sqrt(1+r^2) cos(tau) - r, w = sqrt(1+r^2) sin(tau), |tau| <= acos(r/R).
/// The endpoints are the self-intersection points at distance 1 from the origin.
inline std::pair<double, double> spindle_arc_point(double r, double tau) {
    double R = std::sqrt(1.0 + r * r);
    return {R * std::cos(tau) - r, R * std::sin(tau)};
}

inline double spindle_arc_tau_max(double r) {
    double R = std::sqrt(1.0 + r * r);
    return std::acos(std::clamp(r / R, -1.0, 1.0));
}

/// Visits quadrature nodes of the spindle surface of revolution about `axis`
/// with tube centre offset r, clipped to the spindle-domain hollow ball.
/// On the surface |x|^2 = 1 - 2 r u, so the clip is a band in |tau|.
/// Surface measure u R dtau dpsi; midpoint in psi, trapezoid in tau.
template <typename F>
void for_each_spindle_node(double r, const Vec3& axis, const HollowBall& domain, int n_psi,
                           int n_arc, F&& fn) {
    if (domain.flavor != HollowBall::Flavor::spindle_domain)
        throw std::invalid_argument("spindle quadrature: expects a spindle-domain shell");
    if (r < 0.0) throw std::domain_error("spindle quadrature: r must be >= 0");
    if (n_psi < 2 || n_arc < 2) throw std::invalid_argument("spindle quadrature: n_psi, n_arc >= 2");
    if (r == 0.0) return;  // degenerate: unit sphere, outside the shell

    double R = std::sqrt(1.0 + r * r);
    double u_min = (1.0 - domain.outer * domain.outer) / (2.0 * r);
    double u_cap = (1.0 - domain.inner * domain.inner) / (2.0 * r);
    double u_top = R - r;  // equator, where |x| is smallest
    if (u_min >= u_top) return;

    auto tau_of_u = [&](double u) { return std::acos(std::clamp((u + r) / R, -1.0, 1.0)); };
    double tau_hi = tau_of_u(u_min);
    double tau_lo = (u_cap < u_top) ? tau_of_u(u_cap) : 0.0;
    if (tau_hi <= tau_lo) return;

    Vec3 th = canonical_axis(normalized(axis));
    auto [e1, e2] = orthonormal_frame(th);
    double dpsi = 2.0 * pi / n_psi;

    auto band = [&](double a, double b) {
        detail::trapezoid(a, b, n_arc, [&](double tau, double wt) {
            auto [u, w] = spindle_arc_point(r, tau);
            Vec3 wth = w * th;
            for (int i = 0; i < n_psi; ++i) {
                double psi = (i + 0.5) * dpsi;
                Vec3 node = u * (std::cos(psi) * e1 + std::sin(psi) * e2) + wth;
                fn(node, u * R * dpsi * wt);
            }
        });
    };

    if (tau_lo > 0.0) {
        band(tau_lo, tau_hi);
        band(-tau_hi, -tau_lo);
    } else {
        band(-tau_hi, tau_hi);
    }
}

inline SurfaceQuadrature spindle_quadrature(double r, const Direction& theta,
                                            const HollowBall& domain, int n_psi, int n_arc) {
    SurfaceQuadrature q;
    for_each_spindle_node(r, theta.unit, domain, n_psi, n_arc, [&](const Vec3& x, double w) {
        q.nodes.push_back(x);
        q.weights.push_back(w);
    });
    return q;
}

}  // namespace spintomo
