#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>

#include "spintomo/phantoms.hpp"

namespace spintomo {

/// Point (x, alpha, beta, sigma) on the canonical relation of the cylinder
/// transform, using the latitude chart theta = (cos a cos b, sin a cos b, sin b).
struct CanonicalPoint {
    Vec3 x{};
    double alpha = 0.0;
    double beta = 0.0;
    double sigma = 1.0;

    Direction theta() const { return Direction::from_angles(alpha, beta); }
};

struct CotangentPoint {
    Vec3 x{};
    Vec3 xi{};
};

using Vec6 = std::array<double, 6>;

namespace detail {

inline void check_chart(const CanonicalPoint& p) {
    if (std::abs(std::cos(p.beta)) < 1e-12)
        throw std::domain_error("canonical point: chart invalid (cos beta = 0)");
    if (p.sigma == 0.0) throw std::domain_error("canonical point: sigma must be nonzero");
}

}  // namespace detail

/// Left projection (s, alpha, beta, sigma, eta_alpha, eta_beta) of the
/// canonical relation; even in x, which is why it fails to be injective.
inline Vec6 pi_left(const CanonicalPoint& p) {
    detail::check_chart(p);
    Direction th = p.theta();
    double xt = dot(p.x, th.unit);
    double xa = dot(p.x, theta_alpha(th));
    double xb = dot(p.x, theta_beta(th));
    return {norm2(p.x) - xt * xt, p.alpha,          p.beta,
            p.sigma,              2.0 * p.sigma * xa * xt, 2.0 * p.sigma * xb * xt};
}

/// Right projection (x, xi) with xi = 2 sigma (x - (x.theta) theta).
inline Vec6 pi_right(const CanonicalPoint& p) {
    detail::check_chart(p);
    Direction th = p.theta();
    double xt = dot(p.x, th.unit);
    Vec3 xi = 2.0 * p.sigma * (p.x - xt * th.unit);
    return {p.x.x, p.x.y, p.x.z, xi.x, xi.y, xi.z};
}

/// Closed form (8 sigma^2 / cos beta)(x.theta)((x.theta_a)^2 + (x.theta_b)^2 cos^2 beta).
/// Vanishes exactly on Sigma = {x.theta = 0}; odd in the (x.theta) factor.
inline double det_dpi_left(const CanonicalPoint& p) {
    detail::check_chart(p);
    Direction th = p.theta();
    double xt = dot(p.x, th.unit);
    double xa = dot(p.x, theta_alpha(th));
    double xb = dot(p.x, theta_beta(th));
    double cb = std::cos(p.beta);
    return (8.0 * p.sigma * p.sigma / cb) * xt * (xa * xa + xb * xb * cb * cb);
}

/// Identically -det_dpi_left; the sign the right projection's differential
/// carries in the natural (x, alpha, beta, sigma) ordering.
inline double det_dpi_right(const CanonicalPoint& p) { return -det_dpi_left(p); }

/// Kernel direction of D pi_L on Sigma, embedded in (x, alpha, beta, sigma)
/// coordinates: ((x.theta_b) theta_a - (x.theta_a) theta_b) acting in x.
inline Vec6 blowdown_kernel_left(const CanonicalPoint& p) {
    detail::check_chart(p);
    Direction th = p.theta();
    if (std::abs(dot(p.x, th.unit)) > 1e-12)
        throw std::domain_error("blowdown_kernel_left: point not on Sigma");
    double xa = dot(p.x, theta_alpha(th));
    double xb = dot(p.x, theta_beta(th));
    Vec3 k = xb * theta_alpha(th) - xa * theta_beta(th);
    return {k.x, k.y, k.z, 0.0, 0.0, 0.0};
}

/// Kernel direction of D pi_R on Sigma: (x.theta_b) d/d_alpha - (x.theta_a) d/d_beta.
inline Vec6 blowdown_kernel_right(const CanonicalPoint& p) {
    detail::check_chart(p);
    Direction th = p.theta();
    if (std::abs(dot(p.x, th.unit)) > 1e-12)
        throw std::domain_error("blowdown_kernel_right: point not on Sigma");
    double xa = dot(p.x, theta_alpha(th));
    double xb = dot(p.x, theta_beta(th));
    return {0.0, 0.0, 0.0, xb, -xa, 0.0};
}

namespace detail {

// p_1 = x1 xi2 - x2 xi1, p_2 = x1 xi3 - x3 xi1, p_3 = x2 xi3 - x3 xi2.
inline void p_gradients(int i, const CotangentPoint& q, Vec3& dx, Vec3& dxi) {
    const Vec3& x = q.x;
    const Vec3& xi = q.xi;
    switch (i) {
        case 1: dx = {xi.y, -xi.x, 0.0}; dxi = {-x.y, x.x, 0.0}; return;
        case 2: dx = {xi.z, 0.0, -xi.x}; dxi = {-x.z, 0.0, x.x}; return;
        case 3: dx = {0.0, xi.z, -xi.y}; dxi = {0.0, -x.z, x.y}; return;
    }
    throw std::domain_error("poisson_bracket: index must be 1..3");
}

}  // namespace detail

/// Poisson bracket {p_i, p_j} = H_{p_i} p_j at q, from the Hamiltonian field
/// of p_i: sum_k dp_i/dxi_k dp_j/dx_k - dp_i/dx_k dp_j/dxi_k.
inline double poisson_bracket(int i, int j, const CotangentPoint& q) {
    Vec3 dxi_, dxii, dxj_, dxij;
    detail::p_gradients(i, q, dxi_, dxii);
    detail::p_gradients(j, q, dxj_, dxij);
    return dot(dxii, dxj_) - dot(dxi_, dxij);
}

/// Rotation exp(t G) with G = b a^T - a b^T, a = e1, b = (0, cos w, sin w):
/// I + G sin t + G^2 (1 - cos t).  Maps e1 to (cos t, sin t cos w, sin t sin w).
inline Eigen::Matrix3d flowout_rotation(double t, double omega) {
    Eigen::Vector3d a(1.0, 0.0, 0.0);
    Eigen::Vector3d b(0.0, std::cos(omega), std::sin(omega));
    Eigen::Matrix3d g = b * a.transpose() - a * b.transpose();
    return Eigen::Matrix3d::Identity() + g * std::sin(t) + g * g * (1.0 - std::cos(t));
}

// --- finite-difference machinery -------------------------------------------

using ProjectionFn = Vec6 (*)(const CanonicalPoint&);

inline std::array<double, 6> pack(const CanonicalPoint& p) {
    return {p.x.x, p.x.y, p.x.z, p.alpha, p.beta, p.sigma};
}

inline CanonicalPoint unpack(const std::array<double, 6>& c) {
    return {{c[0], c[1], c[2]}, c[3], c[4], c[5]};
}

/// Central-difference Jacobian of a projection in the (x, alpha, beta, sigma)
/// coordinates; relative step per coordinate.
inline Eigen::Matrix<double, 6, 6> fd_jacobian(ProjectionFn f, const CanonicalPoint& p,
                                               double rel_step = 1e-6) {
    auto c = pack(p);
    Eigen::Matrix<double, 6, 6> j;
    for (int col = 0; col < 6; ++col) {
        double h = rel_step * std::max(1.0, std::abs(c[col]));
        auto cp = c, cm = c;
        cp[col] += h;
        cm[col] -= h;
        Vec6 fp = f(unpack(cp)), fm = f(unpack(cm));
        for (int row = 0; row < 6; ++row) j(row, col) = (fp[row] - fm[row]) / (2.0 * h);
    }
    return j;
}

/// Directional derivative of a projection along a tangent direction.
inline Vec6 fd_directional(ProjectionFn f, const CanonicalPoint& p, const Vec6& dir,
                           double step = 1e-6) {
    auto c = pack(p);
    auto cp = c, cm = c;
    for (int k = 0; k < 6; ++k) {
        cp[k] += step * dir[k];
        cm[k] -= step * dir[k];
    }
    Vec6 fp = f(unpack(cp)), fm = f(unpack(cm));
    Vec6 out;
    for (int k = 0; k < 6; ++k) out[k] = (fp[k] - fm[k]) / (2.0 * step);
    return out;
}

/// Number of singular values above threshold * sigma_max.
inline int numerical_rank(const Eigen::Matrix<double, 6, 6>& j, double threshold = 1e-6) {
    Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(j);
    auto sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > threshold * sv[0]) ++rank;
    return rank;
}

// --- artefact metrics -------------------------------------------------------

/// Quantifies the reflection and rotation artefacts in a bead reconstruction.
/// Neighbourhoods are balls of twice the bead radius; the annulus is the
/// radial band | |x| - |center| | <= 2 radius.  Energies are sums of squares.
struct ArtefactReport {
    double mirror_ratio = 0.0;  // energy near -center over energy near center
    double smear_ratio = 0.0;   // annulus energy outside both balls, over bead energy
    double bead_energy = 0.0;
    double mirror_energy = 0.0;
    double smear_energy = 0.0;
};

inline ArtefactReport artefact_metrics(const Volume& recon, const PhantomSpec& spec) {
    if (spec.kind != PhantomSpec::Kind::bead)
        throw std::invalid_argument("artefact_metrics: requires a bead phantom spec");
    double nb = 2.0 * spec.radius;
    double nb2 = nb * nb;
    double rc = norm(spec.center);
    ArtefactReport rep;
    for (int k = 0; k < recon.nz; ++k)
        for (int j = 0; j < recon.ny; ++j)
            for (int i = 0; i < recon.nx; ++i) {
                Vec3 p = recon.center(i, j, k);
                double e = recon.at(i, j, k);
                e *= e;
                bool in_bead = norm2(p - spec.center) <= nb2;
                bool in_mirror = norm2(p + spec.center) <= nb2;
                if (in_bead) rep.bead_energy += e;
                if (in_mirror) rep.mirror_energy += e;
                if (!in_bead && !in_mirror && std::abs(norm(p) - rc) <= nb)
                    rep.smear_energy += e;
            }
    double denom = rep.bead_energy;
    if (denom > 0.0) {
        rep.mirror_ratio = rep.mirror_energy / denom;
        rep.smear_ratio = rep.smear_energy / denom;
    } else {
        rep.mirror_ratio = rep.mirror_energy > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        rep.smear_ratio = rep.smear_energy > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return rep;
}

// --- verification suite -----------------------------------------------------

struct MicrolocalConfig {
    int samples = 20;
    unsigned long long seed = 0;
    double tol_scale = 1.0;  // multiplies every tolerance; < 1 tightens
};

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerificationReport {
    std::vector<CheckResult> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline CanonicalPoint random_canonical_point(Rng& rng, bool on_sigma) {
    for (;;) {
        CanonicalPoint p;
        p.alpha = rng.uniform(-pi, pi);
        p.beta = rng.uniform(-pi / 4.0, pi / 4.0);
        p.sigma = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 2.0);
        Vec3 x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        double r = norm(x);
        if (r < 0.2) continue;
        x = x * (rng.uniform(0.35, 0.85) / r);
        Direction th = p.theta();
        if (on_sigma) {
            double rho = norm(x);
            x = x - dot(x, th.unit) * th.unit;
            double rp = norm(x);
            if (rp < 0.1) continue;
            x = x * (rho / rp);
        } else if (std::abs(dot(x, th.unit)) < 0.1 * norm(x)) {
            continue;
        }
        double s = norm2(x) - dot(x, th.unit) * dot(x, th.unit);
        if (!(s > 1e-3 && s < 1.0)) continue;
        p.x = x;
        return p;
    }
}

inline void add_check(VerificationReport& rep, const std::string& name, double measured,
                      double tol) {
    rep.checks.push_back({name, measured, tol, measured <= tol});
}

}  // namespace detail

/// Numerically exercises the canonical-relation computations: determinant
/// closed forms against finite differences, rank drop and blowdown kernels on
/// Sigma, involutivity of the right projection image, and the flowout
/// rotation family.
inline VerificationReport run_microlocal_verification(const MicrolocalConfig& cfg = {}) {
    detail::Rng rng(cfg.seed);
    VerificationReport rep;
    auto tol = [&](double t) { return t * cfg.tol_scale; };

    int n = std::max(1, cfg.samples);

    // closed-form determinants against finite-difference Jacobians (compared
    // in magnitude: the overall sign is a row-ordering convention)
    double err_l = 0.0, err_r = 0.0, err_sign = 0.0;
    for (int k = 0; k < n; ++k) {
        CanonicalPoint p = detail::random_canonical_point(rng, false);
        double cl = det_dpi_left(p);
        double cr = det_dpi_right(p);
        double fl = fd_jacobian(&pi_left, p).determinant();
        double fr = fd_jacobian(&pi_right, p).determinant();
        err_l = std::max(err_l, std::abs(std::abs(fl) - std::abs(cl)) / std::abs(cl));
        err_r = std::max(err_r, std::abs(fr - cr) / std::abs(cr));
        err_sign = std::max(err_sign, std::abs(cl + cr) / std::abs(cl));
    }
    detail::add_check(rep, "det DpiL closed form vs |FD|", err_l, tol(1e-5));
    detail::add_check(rep, "det DpiR closed form vs FD", err_r, tol(1e-5));
    detail::add_check(rep, "det DpiR == -det DpiL", err_sign, tol(1e-12));

    // vanishing and rank drop on Sigma
    double van = 0.0, rank_on = 0.0, rank_off = 0.0, ker_l = 0.0, ker_r = 0.0, ker_orth = 0.0;
    for (int k = 0; k < std::max(1, n / 2); ++k) {
        CanonicalPoint p = detail::random_canonical_point(rng, true);
        CanonicalPoint q = p;
        q.x += 0.1 * q.theta().unit;  // companion point off Sigma
        double scale = std::abs(det_dpi_left(q));
        van = std::max(van, std::abs(det_dpi_left(p)) / scale);

        auto jl = fd_jacobian(&pi_left, p);
        auto jr = fd_jacobian(&pi_right, p);
        rank_on = std::max(rank_on, std::abs(numerical_rank(jl) - 5.0));
        rank_on = std::max(rank_on, std::abs(numerical_rank(jr) - 5.0));
        rank_off = std::max(rank_off, std::abs(numerical_rank(fd_jacobian(&pi_left, q)) - 6.0));

        Vec6 kl = blowdown_kernel_left(p);
        Vec6 kr = blowdown_kernel_right(p);
        auto dir_norm = [](const Vec6& v) {
            double s = 0.0;
            for (double c : v) s += c * c;
            return std::sqrt(s);
        };
        Vec6 dl = fd_directional(&pi_left, p, kl);
        Vec6 dr = fd_directional(&pi_right, p, kr);
        ker_l = std::max(ker_l, dir_norm(dl) / (dir_norm(kl) * jl.norm()));
        ker_r = std::max(ker_r, dir_norm(dr) / (dir_norm(kr) * jr.norm()));

        Vec3 kvec{kl[0], kl[1], kl[2]};
        ker_orth = std::max(ker_orth,
                            std::abs(dot(kvec, p.theta().unit)) / norm(kvec));
    }
    detail::add_check(rep, "determinants vanish on Sigma", van, tol(1e-10));
    detail::add_check(rep, "FD rank 5 on Sigma", rank_on, tol(0.5));
    detail::add_check(rep, "FD rank 6 off Sigma", rank_off, tol(0.5));
    detail::add_check(rep, "left blowdown kernel annihilated", ker_l, tol(1e-6));
    detail::add_check(rep, "right blowdown kernel annihilated", ker_r, tol(1e-6));
    detail::add_check(rep, "kernel direction orthogonal to theta", ker_orth, tol(1e-12));

    // pi_left is even in x
    double even_err = 0.0;
    for (int k = 0; k < n; ++k) {
        CanonicalPoint p = detail::random_canonical_point(rng, false);
        CanonicalPoint m = p;
        m.x = -m.x;
        Vec6 a = pi_left(p), b = pi_left(m);
        for (int c = 0; c < 6; ++c) even_err = std::max(even_err, std::abs(a[c] - b[c]));
    }
    detail::add_check(rep, "pi_left even in x", even_err, tol(1e-14));

    // Poisson brackets vanish on {x parallel to xi}
    double pb = 0.0;
    for (int k = 0; k < std::max(1, 5 * n); ++k) {
        Vec3 x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        if (norm(x) < 0.1) continue;
        double t = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.2, 3.0);
        CotangentPoint q{x, t * x};
        double scale = norm(x) * norm(q.xi);
        pb = std::max(pb, std::abs(poisson_bracket(1, 2, q)) / scale);
        pb = std::max(pb, std::abs(poisson_bracket(1, 3, q)) / scale);
        pb = std::max(pb, std::abs(poisson_bracket(2, 3, q)) / scale);
    }
    detail::add_check(rep, "Poisson brackets vanish on x || xi", pb, tol(1e-12));

    // flowout rotations: explicit formula vs truncated series, action on e1,
    // orthogonality, preservation of the x || xi locus
    double fl_series = 0.0, fl_e1 = 0.0, fl_orth = 0.0, fl_locus = 0.0;
    for (int it = 0; it < 20; ++it) {
        double t = pi * it / 19.0;
        for (int iw = 0; iw < 20; ++iw) {
            double w = 2.0 * pi * iw / 19.0;
            Eigen::Matrix3d e = flowout_rotation(t, w);

            Eigen::Vector3d a(1.0, 0.0, 0.0), b(0.0, std::cos(w), std::sin(w));
            Eigen::Matrix3d g = (b * a.transpose() - a * b.transpose()) * t;
            Eigen::Matrix3d series = Eigen::Matrix3d::Identity(), term = Eigen::Matrix3d::Identity();
            for (int k = 1; k <= 30; ++k) {
                term = term * g / static_cast<double>(k);
                series += term;
            }
            fl_series = std::max(fl_series, (e - series).cwiseAbs().maxCoeff());

            Eigen::Vector3d img = e * a;
            Eigen::Vector3d expect(std::cos(t), std::sin(t) * std::cos(w),
                                   std::sin(t) * std::sin(w));
            fl_e1 = std::max(fl_e1, (img - expect).cwiseAbs().maxCoeff());

            fl_orth = std::max(fl_orth,
                               (e * e.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
            fl_orth = std::max(fl_orth, std::abs(e.determinant() - 1.0));

            Eigen::Vector3d x(0.3, -0.5, 0.7), xi = 1.7 * x;
            Eigen::Vector3d cx = (e * x).cross(e * xi);
            fl_locus = std::max(fl_locus, cx.cwiseAbs().maxCoeff() / (x.norm() * xi.norm()));
        }
    }
    detail::add_check(rep, "flowout matches series exponential", fl_series, tol(1e-10));
    detail::add_check(rep, "flowout action on e1", fl_e1, tol(1e-12));
    detail::add_check(rep, "flowout orthogonality and det", fl_orth, tol(1e-12));
    detail::add_check(rep, "flowout preserves x || xi", fl_locus, tol(1e-12));

    return rep;
}

}  // namespace spintomo
