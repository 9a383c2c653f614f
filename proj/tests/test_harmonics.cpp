#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace spintomo;
using test_support::rel_err;

namespace {

// Binomial-sum form of P_l used as the independent oracle:
// P_l(x) = 2^-l sum_k C(l,k)^2 (x-1)^(l-k) (x+1)^k.
double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

double legendre_sum_formula(int l, double x) {
    double acc = 0.0;
    for (int k = 0; k <= l; ++k) {
        double c = binom(l, k);
        acc += c * c * std::pow(x - 1.0, l - k) * std::pow(x + 1.0, k);
    }
    return std::ldexp(acc, -l);
}

// Monomial coefficients of P_l from the sum formula, differentiated m times;
// an exact oracle for the associated functions at small l.
std::vector<double> legendre_coeffs(int l) {
    std::vector<double> c(l + 1, 0.0);
    for (int k = 0; k <= l; ++k) {
        double b = binom(l, k);
        // expand (x-1)^(l-k) (x+1)^k
        std::vector<double> poly{1.0};
        for (int i = 0; i < l - k; ++i) {
            std::vector<double> nxt(poly.size() + 1, 0.0);
            for (std::size_t d = 0; d < poly.size(); ++d) {
                nxt[d + 1] += poly[d];
                nxt[d] -= poly[d];
            }
            poly = std::move(nxt);
        }
        for (int i = 0; i < k; ++i) {
            std::vector<double> nxt(poly.size() + 1, 0.0);
            for (std::size_t d = 0; d < poly.size(); ++d) {
                nxt[d + 1] += poly[d];
                nxt[d] += poly[d];
            }
            poly = std::move(nxt);
        }
        for (std::size_t d = 0; d < poly.size(); ++d) c[d] += b * b * poly[d];
    }
    for (auto& v : c) v = std::ldexp(v, -l);
    return c;
}

double assoc_from_coeffs(int l, int m, double x) {
    auto c = legendre_coeffs(l);
    for (int d = 0; d < m; ++d) {  // differentiate m times
        for (std::size_t i = 0; i + 1 < c.size(); ++i) c[i] = (i + 1) * c[i + 1];
        c.back() = 0.0;
    }
    double horner = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) horner = horner * x + c[i];
    double sign = (m % 2 == 0) ? 1.0 : -1.0;
    return sign * std::pow(1.0 - x * x, 0.5 * m) * horner;
}

}  // namespace

TEST_CASE("legendre_p base cases and sum-formula oracle") {
    detail::Rng rng(1);
    for (int i = 0; i < 10; ++i) {
        double x = rng.uniform(-1.0, 1.0);
        CHECK(legendre_p(0, x) == 1.0);
        CHECK(legendre_p(1, x) == x);
    }
    CHECK(rel_err(legendre_p(2, 0.5), -0.125) < 1e-15);

    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        double x = rng.uniform(-1.0, 1.0);
        for (int l = 0; l <= 10; ++l)
            worst = std::max(worst, std::abs(legendre_p(l, x) - legendre_sum_formula(l, x)));
    }
    CHECK(worst <= 1e-10);

    CHECK_THROWS_AS(legendre_p(3, 1.5), std::domain_error);
    CHECK_THROWS_AS(legendre_p(-1, 0.0), std::domain_error);
}

TEST_CASE("assoc_legendre convention and derivative oracle") {
    CHECK(assoc_legendre(1, 1, 0.0) == -1.0);

    detail::Rng rng(2);
    for (int l = 0; l <= 10; ++l) {
        double x = rng.uniform(-1.0, 1.0);
        CHECK(rel_err(assoc_legendre(l, 0, x), legendre_p(l, x)) < 1e-14);
    }

    double worst = 0.0;
    for (int i = 0; i < 30; ++i) {
        double x = rng.uniform(-0.95, 0.95);
        for (int l = 0; l <= 6; ++l)
            for (int m = 0; m <= l; ++m) {
                double want = assoc_from_coeffs(l, m, x);
                double got = assoc_legendre(l, m, x);
                double scale = std::max(std::abs(want), 1.0);
                worst = std::max(worst, std::abs(got - want) / scale);
            }
    }
    CHECK(worst <= 1e-6);

    CHECK_THROWS_AS(assoc_legendre(2, 3, 0.5), std::domain_error);
}

TEST_CASE("ylm normalization and orthogonality") {
    CHECK(rel_err(ylm(0, 0, 0.3, 1.2).real(), 1.0 / std::sqrt(4.0 * pi)) < 1e-14);
    CHECK(std::abs(ylm(0, 0, 0.3, 1.2).imag()) < 1e-16);

    SphereGrid grid = SphereGrid::gauss(9, 17);
    for (int l = 0; l <= 8; ++l)
        for (int m = -l; m <= l; ++m) {
            double nrm = 0.0;
            for (int i = 0; i < grid.n_lat; ++i)
                for (int j = 0; j < grid.n_lon; ++j)
                    nrm += grid.cell_weight(i) * std::norm(ylm(l, m, grid.colat[i], grid.lon[j]));
            CHECK(std::abs(nrm - 1.0) <= 1e-10);
        }

    Complex ortho = 0.0;
    for (int i = 0; i < grid.n_lat; ++i)
        for (int j = 0; j < grid.n_lon; ++j)
            ortho += grid.cell_weight(i) * ylm(2, 1, grid.colat[i], grid.lon[j]) *
                     std::conj(ylm(3, 1, grid.colat[i], grid.lon[j]));
    CHECK(std::abs(ortho) <= 1e-10);

    CHECK_THROWS_AS(ylm(2, 3, 0.3, 0.1), std::domain_error);
}

TEST_CASE("sht forward picks out harmonic coefficients") {
    SphereGrid grid = SphereGrid::gauss(9, 17);
    ShtPlan plan(grid, 8);

    std::vector<double> ones(grid.size(), 1.0);
    HarmonicCoeffs c = plan.forward(std::span<const double>(ones));
    CHECK(rel_err(c.at(0, 0).real(), std::sqrt(4.0 * pi)) < 1e-13);
    for (int l = 1; l <= 8; ++l)
        for (int m = -l; m <= l; ++m) CHECK(std::abs(c.at(l, m)) <= 1e-10);

    std::vector<Complex> y32(grid.size());
    for (int i = 0; i < grid.n_lat; ++i)
        for (int j = 0; j < grid.n_lon; ++j)
            y32[i * grid.n_lon + j] = ylm(3, 2, grid.colat[i], grid.lon[j]);
    HarmonicCoeffs c2 = plan.forward(std::span<const Complex>(y32));
    for (int l = 0; l <= 8; ++l)
        for (int m = -l; m <= l; ++m) {
            if (l == 3 && m == 2)
                CHECK(std::abs(c2.at(l, m) - Complex(1.0, 0.0)) <= 1e-10);
            else
                CHECK(std::abs(c2.at(l, m)) <= 1e-10);
        }

    CHECK_THROWS_AS(ShtPlan(SphereGrid::gauss(8, 17), 8), std::invalid_argument);
    CHECK_THROWS_AS(ShtPlan(SphereGrid::gauss(9, 16), 8), std::invalid_argument);
}

TEST_CASE("sht round trip, linearity, Gram matrix and Parseval") {
    int L = 16;
    SphereGrid grid = SphereGrid::gauss(L + 1, 2 * L + 1);
    ShtPlan plan(grid, L);

    detail::Rng rng(4);
    HarmonicCoeffs c(L);
    for (int l = 0; l <= L; ++l) {
        c.at(l, 0) = Complex(rng.normal(), 0.0);
        for (int m = 1; m <= l; ++m) {
            Complex a(rng.normal(), rng.normal());
            c.at(l, m) = a;
            c.at(l, -m) = ((m % 2 == 0) ? 1.0 : -1.0) * std::conj(a);
        }
    }
    auto samples = plan.inverse_real(c);
    HarmonicCoeffs back = plan.forward(std::span<const double>(samples));
    double worst = 0.0;
    for (std::size_t k = 0; k < c.c.size(); ++k) worst = std::max(worst, std::abs(c.c[k] - back.c[k]));
    CHECK(worst <= 1e-9);

    // Parseval for the band-limited synthesis
    double lhs = 0.0;
    for (int i = 0; i < grid.n_lat; ++i)
        for (int j = 0; j < grid.n_lon; ++j)
            lhs += grid.cell_weight(i) * samples[i * grid.n_lon + j] * samples[i * grid.n_lon + j];
    double rhs = 0.0;
    for (const auto& z : c.c) rhs += std::norm(z);
    CHECK(rel_err(lhs, rhs) <= 1e-9);

    // synthesis of the unit constant coefficient
    HarmonicCoeffs unit(L);
    unit.at(0, 0) = std::sqrt(4.0 * pi);
    auto const_samples = plan.inverse_real(unit);
    for (double v : const_samples) CHECK(rel_err(v, 1.0) < 1e-12);

    // linearity of synthesis
    HarmonicCoeffs c2(L);
    for (std::size_t k = 0; k < c2.c.size(); ++k) c2.c[k] = Complex(rng.normal(), rng.normal());
    HarmonicCoeffs combo(L);
    for (std::size_t k = 0; k < combo.c.size(); ++k) combo.c[k] = 2.0 * c.c[k] - 0.5 * c2.c[k];
    auto sa = plan.inverse(c), sb = plan.inverse(c2), sc = plan.inverse(combo);
    double lin = 0.0;
    for (std::size_t p = 0; p < sc.size(); ++p)
        lin = std::max(lin, std::abs(sc[p] - (2.0 * sa[p] - 0.5 * sb[p])));
    CHECK(lin <= 1e-12);

    // Gram matrix of degree <= 8 harmonics under the grid quadrature
    SphereGrid g8 = SphereGrid::gauss(9, 17);
    ShtPlan p8(g8, 8);
    std::size_t nc = 81;
    double gram_err = 0.0;
    for (std::size_t a = 0; a < nc; ++a) {
        // analysis of a pure harmonic equals a delta at its own index
        std::vector<Complex> f(g8.size());
        int la = static_cast<int>(std::sqrt(static_cast<double>(a)));
        int ma = static_cast<int>(a) - la * (la + 1);
        for (int i = 0; i < g8.n_lat; ++i)
            for (int j = 0; j < g8.n_lon; ++j)
                f[i * g8.n_lon + j] = ylm(la, ma, g8.colat[i], g8.lon[j]);
        HarmonicCoeffs row = p8.forward(std::span<const Complex>(f));
        for (std::size_t b = 0; b < nc; ++b) {
            double want = (a == b) ? 1.0 : 0.0;
            gram_err = std::max(gram_err, std::abs(row.c[b] - want));
        }
    }
    CHECK(gram_err <= 1e-10);
}

TEST_CASE("q_factor values and monotonicity") {
    CHECK(q_factor(0) == 0.0);
    CHECK(rel_err(q_factor(1), 2.0 / 3.0) < 1e-15);
    CHECK(rel_err(q_factor(5), 30.0 / 31.0) < 1e-15);
    for (int l = 0; l < 64; ++l) CHECK(q_factor(l) < q_factor(l + 1));
    CHECK(q_factor(64) < 1.0);
    CHECK(q_factor(10000) > 1.0 - 1e-7);
}

namespace {

HarmonicStack random_real_stack(int L, int n_s, unsigned long long seed) {
    detail::Rng rng(seed);
    HarmonicStack st;
    st.L = L;
    for (int s = 0; s < n_s; ++s) {
        HarmonicCoeffs c(L);
        for (int l = 0; l <= L; ++l) {
            c.at(l, 0) = Complex(rng.normal(), 0.0);
            for (int m = 1; m <= l; ++m) {
                Complex a(rng.normal(), rng.normal());
                c.at(l, m) = a;
                c.at(l, -m) = ((m % 2 == 0) ? 1.0 : -1.0) * std::conj(a);
            }
        }
        st.slices.push_back(std::move(c));
    }
    return st;
}

double stack_norm(const HarmonicStack& st) {
    double s = 0.0;
    for (const auto& sl : st.slices)
        for (const auto& z : sl.c) s += std::norm(z);
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("apply_q and apply_q_sqrt") {
    HarmonicStack st = random_real_stack(6, 3, 9);

    // constant-in-theta data: only l = 0 nonzero, annihilated by Q
    HarmonicStack flat;
    flat.L = 6;
    for (int s = 0; s < 3; ++s) {
        HarmonicCoeffs c(6);
        c.at(0, 0) = Complex(1.7, 0.0);
        flat.slices.push_back(c);
    }
    CHECK(stack_norm(apply_q(flat)) == 0.0);

    // pure Y_1^0 scaled by 2/3
    HarmonicStack y10;
    y10.L = 2;
    HarmonicCoeffs c(2);
    c.at(1, 0) = Complex(3.0, 0.0);
    y10.slices.push_back(c);
    CHECK(rel_err(apply_q(y10).slices[0].at(1, 0).real(), 2.0) < 1e-15);
    CHECK(rel_err(apply_q_sqrt(y10).slices[0].at(1, 0).real(), 3.0 * std::sqrt(2.0 / 3.0)) < 1e-15);

    // contraction: multipliers < 1
    CHECK(stack_norm(apply_q(st)) < stack_norm(st));

    // square root composes to Q
    HarmonicStack twice = apply_q_sqrt(apply_q_sqrt(st));
    HarmonicStack once = apply_q(st);
    double worst = 0.0;
    for (std::size_t s = 0; s < st.slices.size(); ++s)
        for (std::size_t k = 0; k < st.slices[s].c.size(); ++k)
            worst = std::max(worst, std::abs(twice.slices[s].c[k] - once.slices[s].c[k]));
    CHECK(worst <= 1e-12);

    // real-data symmetry preserved exactly
    HarmonicStack q = apply_q(st);
    for (const auto& sl : q.slices)
        for (int l = 0; l <= q.L; ++l)
            for (int m = 1; m <= l; ++m) {
                Complex want = ((m % 2 == 0) ? 1.0 : -1.0) * std::conj(sl.at(l, m));
                CHECK(sl.at(l, -m) == want);
            }
}

TEST_CASE("kernel coefficients of the convolution form of Q") {
    HarmonicCoeffs h = kernel_h(12);
    CHECK(std::abs(h.at(0, 0)) == 0.0);
    double a1 = std::sqrt(3.0 / (4.0 * pi)) / (2.0 * pi);
    CHECK(rel_err(h.at(1, 0).real(), (2.0 / 3.0) * a1) < 1e-15);
    for (int l = 0; l <= 12; ++l) {
        double factor = 2.0 * pi * std::sqrt(4.0 * pi / (2 * l + 1));
        CHECK(std::abs(factor * h.at(l, 0).real() - q_factor(l)) <= 1e-14);
    }
}

TEST_CASE("brute-force spherical convolution matches the multiplier path") {
    int L = 8;
    SphereGrid grid = SphereGrid::gauss(L + 1, 2 * L + 1);
    ShtPlan plan(grid, L);

    detail::Rng rng(13);
    HarmonicCoeffs fc(L);
    for (int l = 0; l <= L; ++l) {
        fc.at(l, 0) = Complex(rng.normal(), 0.0);
        for (int m = 1; m <= l; ++m) {
            Complex a(rng.normal(), rng.normal());
            fc.at(l, m) = a;
            fc.at(l, -m) = ((m % 2 == 0) ? 1.0 : -1.0) * std::conj(a);
        }
    }
    auto f = plan.inverse_real(fc);

    SECTION("identity-like kernel reproduces f") {
        HarmonicCoeffs id(L);
        for (int l = 0; l <= L; ++l) {
            double al = std::sqrt((2 * l + 1) / (4.0 * pi)) / (2.0 * pi);
            for (int m = -l; m <= l; ++m) id.at(l, m) = al;
        }
        auto out = spherical_convolve_bruteforce(f, id, grid, 2 * L + 2);
        double worst = 0.0;
        for (std::size_t p = 0; p < f.size(); ++p)
            worst = std::max(worst, std::abs(out[p] - Complex(f[p], 0.0)));
        CHECK(worst <= 1e-6);
    }

    SECTION("harmonic components multiply per the convolution theorem") {
        HarmonicCoeffs h = kernel_h(L);
        auto out = spherical_convolve_bruteforce(f, h, grid, 2 * L + 2);
        std::vector<double> out_re(out.size());
        double imag_max = 0.0;
        for (std::size_t p = 0; p < out.size(); ++p) {
            out_re[p] = out[p].real();
            imag_max = std::max(imag_max, std::abs(out[p].imag()));
        }
        CHECK(imag_max <= 1e-8);
        HarmonicCoeffs oc = plan.forward(std::span<const double>(out_re));
        double worst = 0.0;
        for (int l = 0; l <= L; ++l) {
            double factor = 2.0 * pi * std::sqrt(4.0 * pi / (2 * l + 1)) * h.at(l, 0).real();
            for (int m = -l; m <= l; ++m)
                worst = std::max(worst, std::abs(oc.at(l, m) - factor * fc.at(l, m)));
        }
        CHECK(worst <= 1e-6);

        // apply_q equals the convolution route
        HarmonicStack st;
        st.L = L;
        st.slices.push_back(fc);
        HarmonicStack qs = apply_q(st);
        double worst2 = 0.0;
        for (int l = 0; l <= L; ++l)
            for (int m = -l; m <= l; ++m)
                worst2 = std::max(worst2, std::abs(oc.at(l, m) - qs.slices[0].at(l, m)));
        CHECK(worst2 <= 1e-6);
    }

    SECTION("constant f is annihilated by the kernel (h_0 = 0)") {
        std::vector<double> ones(grid.size(), 1.0 / std::sqrt(4.0 * pi));
        auto out = spherical_convolve_bruteforce(ones, kernel_h(L), grid, 2 * L + 2);
        double worst = 0.0;
        for (const auto& z : out) worst = std::max(worst, std::abs(z));
        CHECK(worst <= 1e-10);
    }
}
