#pragma once

#include <random>
#include <string>

#include "spintomo/harmonic_filter.hpp"
#include "spintomo/operators.hpp"

namespace spintomo {

struct SolverConfig {
    enum class Method { bp, fbp, cgls, landweber };

    Method method = Method::cgls;
    int max_iters = 50;
    double tol = 1e-8;            // on ||A^T r|| relative to its initial value
    double tikhonov_mu = 0.0;
    double landweber_step = 0.0;  // 0 = estimate 1/sigma_max^2 by power iteration
    bool precondition = false;
    int harmonic_L = 25;
    unsigned long long seed = 0;
};

inline SolverConfig::Method parse_method(const std::string& name) {
    if (name == "bp") return SolverConfig::Method::bp;
    if (name == "fbp") return SolverConfig::Method::fbp;
    if (name == "cgls") return SolverConfig::Method::cgls;
    if (name == "landweber") return SolverConfig::Method::landweber;
    throw std::invalid_argument("unknown method: " + name);
}

struct ReconReport {
    int iterations = 0;
    std::vector<double> residuals;  // ||A x_k - b||, k = 0..iterations
    bool converged = false;
    bool diverged = false;
    double sigma_max_estimate = 0.0;
    double step = 0.0;
    double tikhonov_mu = 0.0;
    std::vector<double> solution;
};

namespace detail {

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline bool all_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace detail

/// Largest singular value of op (w.r.t. the weighted inner products),
/// estimated by `iters` power iterations on A*A from a seeded start.
inline double estimate_sigma_max(const LinearMap& op, int iters = 20,
                                 unsigned long long seed = 0) {
    detail::Rng rng(seed + 0x9e3779b97f4a7c15ull);
    std::vector<double> v(op.domain_size());
    for (auto& x : v) x = rng.normal();
    std::vector<double> av(op.range_size()), atav(op.domain_size());
    double lambda = 0.0;
    for (int k = 0; k < iters; ++k) {
        double nv = op.norm_domain(v);
        if (nv == 0.0) return 0.0;
        for (auto& x : v) x /= nv;
        op.apply(v, av);
        op.apply_adjoint(av, atav);
        lambda = op.dot_domain(v, atav);  // Rayleigh quotient for A*A
        v.swap(atav);
    }
    return std::sqrt(std::max(lambda, 0.0));
}

/// CGLS on the normal equations (never forming A^T A), with optional
/// Tikhonov damping mu: minimizes ||A x - b||^2 + mu^2 ||x||^2 in the
/// weighted norms.  Stops when ||A^T r - mu^2 x|| drops below tol times its
/// initial value.  x_0 = 0.
inline ReconReport cgls(const LinearMap& op, std::span<const double> b, const SolverConfig& cfg) {
    if (cfg.max_iters < 1) throw std::invalid_argument("cgls: max_iters must be >= 1");
    std::size_t n = op.domain_size(), m = op.range_size();
    if (b.size() != m) throw std::invalid_argument("cgls: data size mismatch");
    double mu2 = cfg.tikhonov_mu * cfg.tikhonov_mu;

    ReconReport rep;
    rep.tikhonov_mu = cfg.tikhonov_mu;
    std::vector<double> x(n, 0.0), r(b.begin(), b.end());
    std::vector<double> s = op.apply_adjoint(r);  // s = A^T r - mu^2 x, x = 0
    std::vector<double> p = s, q(m, 0.0);
    double gamma = op.dot_domain(s, s);
    double gamma0 = gamma;
    rep.residuals.push_back(op.norm_range(r));

    for (int k = 0; k < cfg.max_iters; ++k) {
        if (gamma == 0.0) {
            rep.converged = true;
            break;
        }
        op.apply(p, q);
        double denom = op.dot_range(q, q) + mu2 * op.dot_domain(p, p);
        if (denom == 0.0) break;
        double alpha = gamma / denom;
        detail::axpy(alpha, p, x);
        detail::axpy(-alpha, q, r);
        op.apply_adjoint(r, s);
        if (mu2 > 0.0) detail::axpy(-mu2, x, s);
        if (!detail::all_finite(s) || !detail::all_finite(x))
            throw std::runtime_error("cgls: non-finite iterate at iteration " +
                                     std::to_string(k + 1));
        double gamma_new = op.dot_domain(s, s);
        double beta = gamma_new / gamma;
        gamma = gamma_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = s[i] + beta * p[i];
        rep.iterations = k + 1;
        rep.residuals.push_back(op.norm_range(r));
        if (std::sqrt(gamma) <= cfg.tol * std::sqrt(gamma0)) {
            rep.converged = true;
            break;
        }
    }
    rep.solution = std::move(x);
    return rep;
}

/// Landweber iteration x_{k+1} = x_k + tau A^T (b - A x_k), x_0 = 0.
/// tau = cfg.landweber_step, or 1/sigma_max^2 from a 20-step power iteration
/// when the step is 0.  Aborts (flagging `diverged`) when the residual grows
/// tenfold above its initial value.
inline ReconReport landweber(const LinearMap& op, std::span<const double> b,
                             const SolverConfig& cfg) {
    if (cfg.max_iters < 1) throw std::invalid_argument("landweber: max_iters must be >= 1");
    std::size_t n = op.domain_size(), m = op.range_size();
    if (b.size() != m) throw std::invalid_argument("landweber: data size mismatch");

    ReconReport rep;
    double tau = cfg.landweber_step;
    if (tau <= 0.0) {
        rep.sigma_max_estimate = estimate_sigma_max(op, 20, cfg.seed);
        if (rep.sigma_max_estimate == 0.0)
            throw std::runtime_error("landweber: zero operator norm estimate");
        tau = 1.0 / (rep.sigma_max_estimate * rep.sigma_max_estimate);
    }
    rep.step = tau;

    std::vector<double> x(n, 0.0), r(b.begin(), b.end()), ax(m, 0.0), g(n, 0.0);
    double r0 = op.norm_range(r);
    rep.residuals.push_back(r0);
    for (int k = 0; k < cfg.max_iters; ++k) {
        op.apply_adjoint(r, g);
        detail::axpy(tau, g, x);
        op.apply(x, ax);
        for (std::size_t i = 0; i < m; ++i) r[i] = b[i] - ax[i];
        double rn = op.norm_range(r);
        if (!std::isfinite(rn) || rn > 10.0 * r0) {
            rep.diverged = true;
            rep.iterations = k + 1;
            rep.residuals.push_back(rn);
            break;
        }
        rep.iterations = k + 1;
        rep.residuals.push_back(rn);
        if (rn <= cfg.tol * r0) {
            rep.converged = true;
            break;
        }
    }
    rep.solution = std::move(x);
    return rep;
}

/// Plain backprojection of the data.
inline Volume backproject(const TomographicOperator& op, const Sinogram& b) {
    return op.apply_adjoint(b);
}

/// Filtered backprojection: band-limit the data to degree L, scale each
/// harmonic component by the Q multiplier, resynthesize, backproject.
inline Volume filtered_backproject(const TomographicOperator& op, const Sinogram& b, int L) {
    return op.apply_adjoint(filter_sinogram(b, L, HarmonicFilterMode::q));
}

/// Composition Q^{1/2} A with the matching exact adjoint; used to solve
/// Q^{1/2} A x = Q^{1/2} b.  The slice-wise multiplier is self-adjoint in the
/// data-space inner product, so the adjoint is A^T Q^{1/2}.  Holds a
/// reference to the base operator, which must outlive it.
class PreconditionedOperator final : public TomographicOperator {
public:
    PreconditionedOperator(const TomographicOperator& base, int L)
        : TomographicOperator(base.volume_template(), base.sinogram_template()), base_(base),
          plan_(sino_.grid, L) {}

    Sinogram filter(const Sinogram& b) const {
        Sinogram out = b;
        apply_filter(out.values);
        return out;
    }

    void apply(std::span<const double> x, std::span<double> y) const override {
        base_.apply(x, y);
        apply_filter(y);
    }
    void apply_adjoint(std::span<const double> y, std::span<double> x) const override {
        std::vector<double> fy(y.begin(), y.end());
        apply_filter(fy);
        base_.apply_adjoint(fy, x);
    }
    using TomographicOperator::apply;
    using TomographicOperator::apply_adjoint;

private:
    void apply_filter(std::span<double> data) const {
        std::size_t npts = sino_.grid.size();
        for (std::size_t is = 0; is < sino_.n_s(); ++is) {
            std::span<double> slice(data.data() + is * npts, npts);
            HarmonicCoeffs c = plan_.forward(std::span<const double>(slice.data(), npts));
            for (int l = 0; l <= c.L; ++l) {
                double f = q_sqrt_factor(l);
                for (int m = -l; m <= l; ++m) c.at(l, m) *= f;
            }
            auto filtered = plan_.inverse_real(c);
            std::copy(filtered.begin(), filtered.end(), slice.begin());
        }
    }

    const TomographicOperator& base_;
    ShtPlan plan_;
};

inline PreconditionedOperator precondition(const TomographicOperator& op, int L) {
    return PreconditionedOperator(op, L);
}

/// Adds centered Gaussian noise with standard deviation level * RMS(b);
/// bitwise deterministic under the seed.
inline Sinogram add_noise(const Sinogram& b, double level, unsigned long long seed) {
    if (level < 0.0) throw std::invalid_argument("add_noise: level must be >= 0");
    Sinogram out = b;
    if (level == 0.0 || b.values.empty()) return out;
    double ms = 0.0;
    for (double v : b.values) ms += v * v;
    double sigma = level * std::sqrt(ms / b.values.size());
    detail::Rng rng(seed);
    for (auto& v : out.values) v += sigma * rng.normal();
    return out;
}

/// Full reconstruction driver used by the command-line tool.
inline ReconReport reconstruct(const TomographicOperator& op, const Sinogram& b,
                               const SolverConfig& cfg) {
    auto run_iterative = [&](const TomographicOperator& a, const Sinogram& data) {
        if (cfg.method == SolverConfig::Method::cgls) return cgls(a, data.values, cfg);
        return landweber(a, data.values, cfg);
    };

    auto one_shot = [&](std::vector<double> x) {
        ReconReport rep;
        auto ax = op.apply(x);
        std::vector<double> r(b.values);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ax[i];
        rep.residuals.push_back(op.norm_range(r));
        rep.solution = std::move(x);
        return rep;
    };

    switch (cfg.method) {
        case SolverConfig::Method::bp:
            return one_shot(op.apply_adjoint(b.values));
        case SolverConfig::Method::fbp:
            return one_shot(filtered_backproject(op, b, cfg.harmonic_L).values);
        case SolverConfig::Method::cgls:
        case SolverConfig::Method::landweber: {
            if (cfg.precondition) {
                PreconditionedOperator pre(op, cfg.harmonic_L);
                Sinogram fb = pre.filter(b);
                return run_iterative(pre, fb);
            }
            return run_iterative(op, b);
        }
    }
    throw std::logic_error("reconstruct: unreachable");
}

}  // namespace spintomo
