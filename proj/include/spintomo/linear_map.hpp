#pragma once

#include <span>

#include <Eigen/Dense>

#include "spintomo/core.hpp"

namespace spintomo {

/// Forward/adjoint pair between weighted l2 spaces.  The adjoint contract is
/// <apply(f), g>_range = <f, apply_adjoint(g)>_domain with diagonal inner
/// products given by the weight vectors; every solver relies on it.
class LinearMap {
public:
    virtual ~LinearMap() = default;

    virtual std::size_t domain_size() const = 0;
    virtual std::size_t range_size() const = 0;
    virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
    virtual void apply_adjoint(std::span<const double> y, std::span<double> x) const = 0;
    virtual const std::vector<double>& domain_weights() const = 0;
    virtual const std::vector<double>& range_weights() const = 0;

    std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> y(range_size(), 0.0);
        apply(x, y);
        return y;
    }
    std::vector<double> apply_adjoint(std::span<const double> y) const {
        std::vector<double> x(domain_size(), 0.0);
        apply_adjoint(y, x);
        return x;
    }

    double dot_domain(std::span<const double> a, std::span<const double> b) const {
        return weighted_dot(domain_weights(), a, b);
    }
    double dot_range(std::span<const double> a, std::span<const double> b) const {
        return weighted_dot(range_weights(), a, b);
    }
    double norm_domain(std::span<const double> a) const { return std::sqrt(dot_domain(a, a)); }
    double norm_range(std::span<const double> a) const { return std::sqrt(dot_range(a, a)); }

private:
    static double weighted_dot(const std::vector<double>& w, std::span<const double> a,
                               std::span<const double> b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * a[i] * b[i];
        return acc;
    }
};

/// Explicit-matrix map with unit weights; the dense oracle counterpart used
/// by solver tests and by as_matrix round trips.
class DenseOperator final : public LinearMap {
public:
    explicit DenseOperator(Eigen::MatrixXd m)
        : m_(std::move(m)), dw_(static_cast<std::size_t>(m_.cols()), 1.0),
          rw_(static_cast<std::size_t>(m_.rows()), 1.0) {}

    const Eigen::MatrixXd& matrix() const { return m_; }

    std::size_t domain_size() const override { return static_cast<std::size_t>(m_.cols()); }
    std::size_t range_size() const override { return static_cast<std::size_t>(m_.rows()); }

    void apply(std::span<const double> x, std::span<double> y) const override {
        Eigen::Map<const Eigen::VectorXd> xv(x.data(), m_.cols());
        Eigen::Map<Eigen::VectorXd> yv(y.data(), m_.rows());
        yv = m_ * xv;
    }
    void apply_adjoint(std::span<const double> y, std::span<double> x) const override {
        Eigen::Map<const Eigen::VectorXd> yv(y.data(), m_.rows());
        Eigen::Map<Eigen::VectorXd> xv(x.data(), m_.cols());
        xv = m_.transpose() * yv;
    }
    const std::vector<double>& domain_weights() const override { return dw_; }
    const std::vector<double>& range_weights() const override { return rw_; }

private:
    Eigen::MatrixXd m_;
    std::vector<double> dw_, rw_;
};

/// Dense matrix of `op` in the coordinates that orthonormalize both weighted
/// inner products (columns are op applied to unit impulses, scaled by the
/// square roots of the weights).  In these coordinates the plain transpose is
/// the adjoint.  Guarded to small problems; this is a test oracle.
inline Eigen::MatrixXd as_matrix(const LinearMap& op, std::size_t max_unknowns = 20000) {
    std::size_t n = op.domain_size(), m = op.range_size();
    if (n > max_unknowns)
        throw std::invalid_argument("as_matrix: domain too large for dense assembly");
    const auto& dw = op.domain_weights();
    const auto& rw = op.range_weights();
    Eigen::MatrixXd mat(m, n);
    std::vector<double> e(n, 0.0), y(m, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        op.apply(e, y);
        e[j] = 0.0;
        double dj = std::sqrt(dw[j]);
        for (std::size_t i = 0; i < m; ++i) mat(i, j) = std::sqrt(rw[i]) * y[i] / dj;
    }
    return mat;
}

/// Maps a physical vector to the orthonormalized coordinates used by as_matrix.
inline Eigen::VectorXd to_orthonormal(std::span<const double> v, const std::vector<double>& w) {
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::sqrt(w[i]) * v[i];
    return out;
}

inline std::vector<double> from_orthonormal(const Eigen::VectorXd& v,
                                            const std::vector<double>& w) {
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = v[i] / std::sqrt(w[i]);
    return out;
}

}  // namespace spintomo
