#pragma once

#include "spintomo/core.hpp"

namespace spintomo {

/// Legendre polynomial P_l(x) by the standard three-term recurrence.
inline double legendre_p(int l, double x) {
    if (l < 0) throw std::domain_error("legendre_p: l must be >= 0");
    if (!(x >= -1.0 && x <= 1.0)) throw std::domain_error("legendre_p: x must be in [-1, 1]");
    if (l == 0) return 1.0;
    double pm1 = 1.0, p = x;
    for (int k = 2; k <= l; ++k) {
        double pn = ((2 * k - 1) * x * p - (k - 1) * pm1) / k;
        pm1 = p;
        p = pn;
    }
    return p;
}

/// d/dx P_l(x) away from the endpoints (used by the Gauss-Legendre solver).
inline double legendre_p_derivative(int l, double x) {
    if (l == 0) return 0.0;
    double denom = x * x - 1.0;
    if (denom == 0.0) throw std::domain_error("legendre_p_derivative: |x| = 1");
    return l * (x * legendre_p(l, x) - legendre_p(l - 1, x)) / denom;
}

/// Associated Legendre function P_l^m(x) = (-1)^m (1-x^2)^{m/2} d^m/dx^m P_l(x),
/// Condon-Shortley factor included.
inline double assoc_legendre(int l, int m, double x) {
    if (l < 0 || m < 0 || m > l) throw std::domain_error("assoc_legendre: need 0 <= m <= l");
    if (!(x >= -1.0 && x <= 1.0)) throw std::domain_error("assoc_legendre: x must be in [-1, 1]");
    double pmm = 1.0;
    if (m > 0) {
        double sx = std::sqrt((1.0 - x) * (1.0 + x));
        double f = 1.0;
        for (int k = 0; k < m; ++k) {
            pmm *= -f * sx;
            f += 2.0;
        }
    }
    if (l == m) return pmm;
    double pmmp1 = x * (2 * m + 1) * pmm;
    if (l == m + 1) return pmmp1;
    double pll = 0.0;
    for (int ll = m + 2; ll <= l; ++ll) {
        pll = (x * (2 * ll - 1) * pmmp1 - (ll + m - 1) * pmm) / (ll - m);
        pmm = pmmp1;
        pmmp1 = pll;
    }
    return pll;
}

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.  Newton
/// iteration on P_n; the node set is mirrored exactly about 0.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi-style initial guess for the i-th root (descending order).
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double dx = legendre_p(n, x) / legendre_p_derivative(n, x);
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double dp = legendre_p_derivative(n, x);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
}

}  // namespace spintomo
