#pragma once

#include <complex>
#include <span>

#include "spintomo/legendre.hpp"
#include "spintomo/sphere_grid.hpp"

namespace spintomo {

using Complex = std::complex<double>;

/// Spherical-harmonic coefficients c[l][m] for 0 <= l <= L, |m| <= l,
/// packed as index l*(l+1) + m.
struct HarmonicCoeffs {
    int L = 0;
    std::vector<Complex> c;

    explicit HarmonicCoeffs(int band = 0) : L(band), c((band + 1) * (band + 1)) {}

    static std::size_t index(int l, int m) { return static_cast<std::size_t>(l) * (l + 1) + m; }

    Complex& at(int l, int m) { return c[index(l, m)]; }
    const Complex& at(int l, int m) const { return c[index(l, m)]; }
};

namespace detail {

inline std::size_t tri_index(int l, int m) { return static_cast<std::size_t>(l) * (l + 1) / 2 + m; }

// Fills out[tri_index(l, m)] with P_l^m(x) (Condon-Shortley included) for all
// 0 <= m <= l <= L in one sweep of the standard recurrences.
inline void assoc_legendre_all(int L, double x, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(L + 1) * (L + 2) / 2);
    double sx = std::sqrt((1.0 - x) * (1.0 + x));
    double pmm = 1.0;
    for (int m = 0; m <= L; ++m) {
        if (m > 0) pmm *= -(2 * m - 1) * sx;
        out[tri_index(m, m)] = pmm;
        if (m == L) break;
        double p1 = x * (2 * m + 1) * pmm;
        out[tri_index(m + 1, m)] = p1;
        double p0 = pmm;
        for (int l = m + 2; l <= L; ++l) {
            double p2 = (x * (2 * l - 1) * p1 - (l + m - 1) * p0) / (l - m);
            out[tri_index(l, m)] = p2;
            p0 = p1;
            p1 = p2;
        }
    }
}

// Normalization sqrt((2l+1)(l-m)!/(4 pi (l+m)!)) for all 0 <= m <= l <= L.
inline void ylm_normalization_all(int L, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(L + 1) * (L + 2) / 2);
    for (int l = 0; l <= L; ++l) {
        double ratio = 1.0;  // (l-m)!/(l+m)!
        out[tri_index(l, 0)] = std::sqrt((2 * l + 1) / (4.0 * pi));
        for (int m = 1; m <= l; ++m) {
            ratio /= static_cast<double>(l - m + 1) * (l + m);
            out[tri_index(l, m)] = std::sqrt((2 * l + 1) / (4.0 * pi) * ratio);
        }
    }
}

}  // namespace detail

/// Spherical harmonic Y_l^m(colat, lon) = (-1)^m N_lm P_l^m(cos colat) e^{i m lon}
/// for m >= 0, and Y_l^{-m} = (-1)^m conj(Y_l^m).  Note P_l^m carries the
/// Condon-Shortley factor itself, so the two sign factors cancel.
inline Complex ylm(int l, int m, double colat, double lon) {
    int am = std::abs(m);
    if (am > l) throw std::domain_error("ylm: need |m| <= l");
    double ratio = 1.0;
    for (int k = l - am + 1; k <= l + am; ++k) ratio /= k;
    double n = std::sqrt((2 * l + 1) / (4.0 * pi) * ratio);
    double phase = (am % 2 == 0) ? 1.0 : -1.0;
    Complex v = phase * n * assoc_legendre(l, am, std::cos(colat)) *
                std::exp(Complex(0.0, am * lon));
    if (m >= 0) return v;
    return phase * std::conj(v);
}

/// Evaluates sum over (l, m) of c[l][m] Y_l^m at one point in O(L^2).
inline Complex evaluate_expansion(const HarmonicCoeffs& coeffs, double colat, double lon) {
    int L = coeffs.L;
    std::vector<double> p, n;
    detail::assoc_legendre_all(L, std::cos(colat), p);
    detail::ylm_normalization_all(L, n);
    Complex sum = 0.0;
    for (int m = 0; m <= L; ++m) {
        Complex e = std::exp(Complex(0.0, m * lon));
        double phase = (m % 2 == 0) ? 1.0 : -1.0;
        for (int l = m; l <= L; ++l) {
            double y = phase * n[detail::tri_index(l, m)] * p[detail::tri_index(l, m)];
            if (m == 0) {
                sum += coeffs.at(l, 0) * y;
            } else {
                sum += coeffs.at(l, m) * (y * e);
                sum += coeffs.at(l, -m) * (phase * std::conj(y * e));
            }
        }
    }
    return sum;
}

/// Dense synthesis/analysis tables for one (grid, band limit) pair.
/// Analysis: c[l][m] = sum_j w_j f_j conj(Y_l^m(theta_j)); synthesis is the
/// plain partial sum.  Requires n_lat >= L+1 and n_lon >= 2L+1 so that the
/// quadrature is exact on products of resolved harmonics.
class ShtPlan {
public:
    ShtPlan(const SphereGrid& grid, int L) : grid_(grid), L_(L) {
        if (L < 0) throw std::invalid_argument("ShtPlan: L must be >= 0");
        if (grid.n_lat < L + 1 || grid.n_lon < 2 * L + 1)
            throw std::invalid_argument("ShtPlan: grid under-resolves the band limit");
        std::size_t npts = grid.size();
        std::size_t ncoef = static_cast<std::size_t>(L + 1) * (L + 1);
        y_.resize(ncoef * npts);
        w_.resize(npts);
        std::vector<double> p, n;
        detail::ylm_normalization_all(L, n);
        for (int i = 0; i < grid.n_lat; ++i) {
            detail::assoc_legendre_all(L, std::cos(grid.colat[i]), p);
            for (int j = 0; j < grid.n_lon; ++j) {
                std::size_t pt = static_cast<std::size_t>(i) * grid.n_lon + j;
                w_[pt] = grid.cell_weight(i);
                for (int m = 0; m <= L; ++m) {
                    double phase = (m % 2 == 0) ? 1.0 : -1.0;
                    Complex e = std::exp(Complex(0.0, m * grid.lon[j]));
                    for (int l = m; l <= L; ++l) {
                        double yr = phase * n[detail::tri_index(l, m)] * p[detail::tri_index(l, m)];
                        Complex v = yr * e;
                        y_[HarmonicCoeffs::index(l, m) * npts + pt] = v;
                        if (m > 0)
                            y_[HarmonicCoeffs::index(l, -m) * npts + pt] = phase * std::conj(v);
                    }
                }
            }
        }
    }

    const SphereGrid& grid() const { return grid_; }
    int band_limit() const { return L_; }

    HarmonicCoeffs forward(std::span<const Complex> samples) const {
        check_size(samples.size());
        HarmonicCoeffs out(L_);
        std::size_t npts = grid_.size();
        for (std::size_t k = 0; k < out.c.size(); ++k) {
            const Complex* row = &y_[k * npts];
            Complex acc = 0.0;
            for (std::size_t p = 0; p < npts; ++p) acc += w_[p] * samples[p] * std::conj(row[p]);
            out.c[k] = acc;
        }
        return out;
    }

    HarmonicCoeffs forward(std::span<const double> samples) const {
        check_size(samples.size());
        HarmonicCoeffs out(L_);
        std::size_t npts = grid_.size();
        for (std::size_t k = 0; k < out.c.size(); ++k) {
            const Complex* row = &y_[k * npts];
            Complex acc = 0.0;
            for (std::size_t p = 0; p < npts; ++p) acc += (w_[p] * samples[p]) * std::conj(row[p]);
            out.c[k] = acc;
        }
        return out;
    }

    std::vector<Complex> inverse(const HarmonicCoeffs& coeffs) const {
        if (coeffs.L != L_) throw std::invalid_argument("ShtPlan::inverse: band limit mismatch");
        std::size_t npts = grid_.size();
        std::vector<Complex> out(npts, Complex(0.0, 0.0));
        for (std::size_t k = 0; k < coeffs.c.size(); ++k) {
            Complex ck = coeffs.c[k];
            if (ck == Complex(0.0, 0.0)) continue;
            const Complex* row = &y_[k * npts];
            for (std::size_t p = 0; p < npts; ++p) out[p] += ck * row[p];
        }
        return out;
    }

    /// Synthesis of a real-symmetric coefficient set; discards the O(eps)
    /// imaginary residue.
    std::vector<double> inverse_real(const HarmonicCoeffs& coeffs) const {
        auto z = inverse(coeffs);
        std::vector<double> out(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i].real();
        return out;
    }

private:
    void check_size(std::size_t n) const {
        if (n != grid_.size()) throw std::invalid_argument("ShtPlan: sample count mismatch");
    }

    SphereGrid grid_;
    int L_;
    std::vector<Complex> y_;
    std::vector<double> w_;
};

inline HarmonicCoeffs sht_forward(std::span<const double> samples, const SphereGrid& grid, int L) {
    return ShtPlan(grid, L).forward(samples);
}

inline std::vector<double> sht_inverse(const HarmonicCoeffs& coeffs, const SphereGrid& grid) {
    return ShtPlan(grid, coeffs.L).inverse_real(coeffs);
}

/// Degree multiplier of the artefact-reduction filter Q = -Lap (I - Lap)^{-1}
/// on S^2: eigenvalue l(l+1)/(l(l+1)+1) on degree-l harmonics.
inline double q_factor(int l) {
    if (l < 0) throw std::domain_error("q_factor: l must be >= 0");
    double ll = static_cast<double>(l) * (l + 1);
    return ll / (ll + 1.0);
}

inline double q_sqrt_factor(int l) { return std::sqrt(q_factor(l)); }

/// Convolution kernel realizing Q: coefficient h_l = l(l+1) a_l / (l(l+1)+1)
/// at every (l, m), with a_l = (1/2pi) sqrt((2l+1)/4pi).
inline HarmonicCoeffs kernel_h(int L) {
    if (L < 0) throw std::invalid_argument("kernel_h: L must be >= 0");
    HarmonicCoeffs h(L);
    for (int l = 0; l <= L; ++l) {
        double al = std::sqrt((2 * l + 1) / (4.0 * pi)) / (2.0 * pi);
        double hl = q_factor(l) * al;
        for (int m = -l; m <= l; ++m) h.at(l, m) = hl;
    }
    return h;
}

/// Stack of per-radius harmonic slices (uniform band limit).
struct HarmonicStack {
    int L = 0;
    std::vector<HarmonicCoeffs> slices;
};

namespace detail {

template <typename F>
HarmonicStack scale_stack_by_degree(const HarmonicStack& in, F&& factor) {
    HarmonicStack out = in;
    for (auto& slice : out.slices)
        for (int l = 0; l <= slice.L; ++l) {
            double f = factor(l);
            for (int m = -l; m <= l; ++m) slice.at(l, m) *= f;
        }
    return out;
}

}  // namespace detail

/// Applies Q slice-wise: each c[l][m] scaled by q_factor(l).
inline HarmonicStack apply_q(const HarmonicStack& stack) {
    return detail::scale_stack_by_degree(stack, [](int l) { return q_factor(l); });
}

/// Applies Q^{1/2} slice-wise; composing it twice equals apply_q.
inline HarmonicStack apply_q_sqrt(const HarmonicStack& stack) {
    return detail::scale_stack_by_degree(stack, [](int l) { return q_sqrt_factor(l); });
}

/// Brute-force spherical convolution (f * h)(theta) = integral over SO(3) of
/// f(g w) h(g^{-1} theta) dg, with w the north pole and dg the unnormalized
/// Haar measure (total mass 8 pi^2).  ZYZ Euler product quadrature: uniform
/// outer angles, Gauss-Legendre in cos of the middle angle, n_so3 nodes per
/// axis.  Exact for band-limited inputs once n_so3 > 2 * band.
inline std::vector<Complex> spherical_convolve_bruteforce(std::span<const double> f_samples,
                                                          const HarmonicCoeffs& h,
                                                          const SphereGrid& grid, int n_so3) {
    int L = h.L;
    if (n_so3 < 2 * L + 1) throw std::invalid_argument("spherical_convolve_bruteforce: n_so3 too small");
    ShtPlan plan(grid, L);
    HarmonicCoeffs f = plan.forward(f_samples);

    std::vector<double> gx, gw;
    gauss_legendre(n_so3, gx, gw);
    std::vector<double> ang(n_so3), wout(n_so3);
    for (int i = 0; i < n_so3; ++i) {
        ang[i] = 2.0 * pi * i / n_so3;
        wout[i] = 2.0 * pi / n_so3;
    }

    // f(g w) depends only on the two outer Euler angles: g w has colatitude
    // beta and longitude alpha.
    std::vector<Complex> f_rot(static_cast<std::size_t>(n_so3) * n_so3);
    for (int ia = 0; ia < n_so3; ++ia)
        for (int ib = 0; ib < n_so3; ++ib) {
            double beta = std::acos(std::clamp(gx[ib], -1.0, 1.0));
            f_rot[static_cast<std::size_t>(ia) * n_so3 + ib] = evaluate_expansion(f, beta, ang[ia]);
        }

    std::size_t npts = grid.size();
    std::vector<Complex> out(npts, Complex(0.0, 0.0));
    for (int ilat = 0; ilat < grid.n_lat; ++ilat) {
        for (int ilon = 0; ilon < grid.n_lon; ++ilon) {
            Vec3 th = grid.unit(ilat, ilon);
            Complex acc = 0.0;
            for (int ia = 0; ia < n_so3; ++ia) {
                double ca = std::cos(ang[ia]), sa = std::sin(ang[ia]);
                // Rz(-alpha) theta
                Vec3 t1{ca * th.x + sa * th.y, -sa * th.x + ca * th.y, th.z};
                for (int ib = 0; ib < n_so3; ++ib) {
                    double cb = gx[ib], sb = std::sqrt(std::max(0.0, 1.0 - cb * cb));
                    // Ry(-beta) t1
                    Vec3 t2{cb * t1.x - sb * t1.z, t1.y, sb * t1.x + cb * t1.z};
                    double colat = std::acos(std::clamp(t2.z, -1.0, 1.0));
                    double lon = std::atan2(t2.y, t2.x);
                    Complex fg = f_rot[static_cast<std::size_t>(ia) * n_so3 + ib];
                    Complex inner = 0.0;
                    for (int ig = 0; ig < n_so3; ++ig) {
                        // g^{-1} theta = Rz(-gamma) t2: shift longitude by -gamma.
                        inner += wout[ig] * evaluate_expansion(h, colat, lon - ang[ig]);
                    }
                    acc += wout[ia] * gw[ib] * fg * inner;
                }
            }
            out[static_cast<std::size_t>(ilat) * grid.n_lon + ilon] = acc;
        }
    }
    return out;
}

}  // namespace spintomo
