#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace spintomo;
using test_support::rel_err;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, unsigned long long seed) {
    detail::Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

const HollowBall kBall = HollowBall::spindle(0.1, 0.9);

}  // namespace

TEST_CASE("cgls matches the dense least-squares oracle") {
    Eigen::MatrixXd a = random_matrix(50, 30, 1);
    Eigen::VectorXd b = to_eigen(test_support::random_vector(50, 2));
    DenseOperator op(a);

    SolverConfig cfg;
    cfg.max_iters = 60;
    cfg.tol = 1e-14;

    SECTION("inconsistent data converges to the normal-equation solution") {
        Eigen::VectorXd x_star = a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
        ReconReport rep = cgls(op, to_std(b), cfg);
        CHECK((to_eigen(rep.solution) - x_star).norm() / x_star.norm() <= 1e-8);
    }

    SECTION("consistent data reaches a tiny residual within 30 iterations") {
        Eigen::VectorXd x_true = to_eigen(test_support::random_vector(30, 3));
        Eigen::VectorXd bc = a * x_true;
        SolverConfig c2 = cfg;
        c2.max_iters = 30;
        c2.tol = 1e-10;
        ReconReport rep = cgls(op, to_std(bc), c2);
        CHECK(rep.residuals.back() <= 1e-8 * rep.residuals.front());
        CHECK((to_eigen(rep.solution) - x_true).norm() / x_true.norm() <= 1e-8);
    }

    SECTION("damped cgls matches the augmented-system oracle") {
        double mu = 0.7;
        Eigen::MatrixXd n = a.transpose() * a + mu * mu * Eigen::MatrixXd::Identity(30, 30);
        Eigen::VectorXd x_star = n.ldlt().solve(a.transpose() * b);
        SolverConfig c2 = cfg;
        c2.tikhonov_mu = mu;
        c2.max_iters = 200;
        ReconReport rep = cgls(op, to_std(b), c2);
        CHECK((to_eigen(rep.solution) - x_star).norm() / x_star.norm() <= 1e-8);
    }

    SECTION("huge damping drives the solution to zero") {
        SolverConfig c2 = cfg;
        c2.tikhonov_mu = 1e8;
        ReconReport rep = cgls(op, to_std(b), c2);
        Eigen::VectorXd x_star = a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
        CHECK(to_eigen(rep.solution).norm() <= 1e-6 * x_star.norm());
    }

    SECTION("residual history is nonincreasing") {
        SolverConfig c2 = cfg;
        c2.max_iters = 50;
        c2.tol = 0.0;
        ReconReport rep = cgls(op, to_std(b), c2);
        REQUIRE(rep.residuals.size() == static_cast<std::size_t>(rep.iterations) + 1);
        double slack = 1e-12 * rep.residuals.front();
        for (std::size_t k = 1; k < rep.residuals.size(); ++k)
            CHECK(rep.residuals[k] <= rep.residuals[k - 1] + slack);
    }
}

TEST_CASE("left diagonal scaling of a consistent system leaves the solution") {
    Eigen::MatrixXd a = random_matrix(50, 30, 4);
    Eigen::VectorXd x_true = to_eigen(test_support::random_vector(30, 5));
    Eigen::VectorXd b = a * x_true;
    detail::Rng rng(6);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(50, 50);
    for (int i = 0; i < 50; ++i) d(i, i) = rng.uniform(0.5, 2.0);

    SolverConfig cfg;
    cfg.max_iters = 200;
    cfg.tol = 1e-14;
    DenseOperator plain(a), scaled(d * a);
    ReconReport r1 = cgls(plain, to_std(b), cfg);
    ReconReport r2 = cgls(scaled, to_std(d * b), cfg);
    CHECK((to_eigen(r1.solution) - x_true).norm() / x_true.norm() <= 1e-8);
    CHECK((to_eigen(r2.solution) - x_true).norm() / x_true.norm() <= 1e-8);
}

TEST_CASE("landweber iteration") {
    Eigen::MatrixXd a = random_matrix(50, 30, 7);
    Eigen::VectorXd b = to_eigen(test_support::random_vector(50, 8));
    DenseOperator op(a);
    Eigen::VectorXd x_star = a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
    double sigma_max = a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).singularValues()[0];

    SECTION("optimal fixed step converges to the least-squares solution") {
        SolverConfig cfg;
        cfg.landweber_step = 1.0 / (sigma_max * sigma_max);
        cfg.max_iters = 5000;
        cfg.tol = 0.0;
        ReconReport rep = landweber(op, to_std(b), cfg);
        CHECK(!rep.diverged);
        CHECK((to_eigen(rep.solution) - x_star).norm() / x_star.norm() <= 1e-4);

        // residuals monotone nonincreasing for a valid step
        double slack = 1e-12 * rep.residuals.front();
        for (std::size_t k = 1; k < rep.residuals.size(); ++k)
            CHECK(rep.residuals[k] <= rep.residuals[k - 1] + slack);
    }

    SECTION("auto step from power iteration also converges") {
        SolverConfig cfg;
        cfg.max_iters = 5000;
        cfg.tol = 0.0;
        ReconReport rep = landweber(op, to_std(b), cfg);
        CHECK(rel_err(rep.sigma_max_estimate, sigma_max) <= 0.05);
        CHECK((to_eigen(rep.solution) - x_star).norm() / x_star.norm() <= 1e-4);
    }

    SECTION("overlong step on a diagonal system diverges") {
        Eigen::MatrixXd d(2, 2);
        d << 2.0, 0.0, 0.0, 1.0;  // sigma_max = 2
        DenseOperator dop(d);
        SolverConfig cfg;
        cfg.landweber_step = 0.6;  // > 2 / sigma_max^2 = 0.5
        cfg.max_iters = 2000;
        ReconReport rep = landweber(dop, std::vector<double>{1.0, 1.0}, cfg);
        CHECK(rep.diverged);
    }
}

TEST_CASE("cgls iterates match between matrix-free and explicit-matrix paths") {
    Volume vol = Volume::centered(16, kBall.outer);
    Sinogram sino = make_sinogram_template(4, 4, 6, kBall);
    SpindleOperator op(vol, sino, kBall, Volume::centered(16, HollowBall::link_radius(kBall.outer)),
                       OperatorConfig{8, 12, 0.5, 1});

    Eigen::MatrixXd m = as_matrix(op);
    DenseOperator dense(m);

    auto b = test_support::random_vector(op.range_size(), 9);
    SolverConfig cfg;
    // the operator is singular (odd null space), so the two floating-point
    // paths separate exponentially in k; they agree to 1e-10 through k ~ 7
    cfg.max_iters = 6;
    cfg.tol = 0.0;

    ReconReport r_free = cgls(op, b, cfg);

    std::vector<double> b_hat = to_std(to_orthonormal(b, op.range_weights()));
    ReconReport r_mat = cgls(dense, b_hat, cfg);
    auto x_mat = from_orthonormal(to_eigen(r_mat.solution), op.domain_weights());

    double scale = test_support::norm2_vec(r_free.solution);
    double worst = 0.0;
    for (std::size_t i = 0; i < x_mat.size(); ++i)
        worst = std::max(worst, std::abs(x_mat[i] - r_free.solution[i]));
    CHECK(worst / scale <= 1e-10);
}

TEST_CASE("backprojection and filtered backprojection") {
    Volume vol = Volume::centered(16, kBall.outer);
    Sinogram sino = make_sinogram_template(4, 5, 9, kBall);
    SpindleOperator op(vol, sino, kBall, Volume::centered(24, HollowBall::link_radius(kBall.outer)),
                       OperatorConfig{12, 16, 0.5, 1});

    SECTION("zero data backprojects to zero") {
        Sinogram z = op.sinogram_template();
        Volume bp = backproject(op, z);
        CHECK(test_support::norm2_vec(bp.values) == 0.0);
    }

    SECTION("backprojection equals the transposed matrix product") {
        Eigen::MatrixXd m = as_matrix(op);
        auto g = test_support::random_vector(op.range_size(), 10);
        Sinogram gs = op.sinogram_template();
        gs.values = g;
        Volume bp = backproject(op, gs);
        Eigen::VectorXd want = m.transpose() * to_orthonormal(g, op.range_weights());
        Eigen::VectorXd got = to_orthonormal(bp.values, op.domain_weights());
        CHECK((want - got).cwiseAbs().maxCoeff() <= 1e-12);
    }

    SECTION("constant-in-theta data is annihilated by the filter") {
        Sinogram g = op.sinogram_template();
        for (std::size_t is = 0; is < g.n_s(); ++is)
            for (int i = 0; i < g.grid.n_lat; ++i)
                for (int j = 0; j < g.grid.n_lon; ++j) g.at(is, i, j) = 1.0 + 0.5 * is;
        Volume fbp = filtered_backproject(op, g, 4);
        Volume bp = backproject(op, g);
        CHECK(test_support::norm2_vec(fbp.values) <=
              1e-12 * test_support::norm2_vec(bp.values));
    }

    SECTION("fbp equals backprojection of the filtered, truncated data") {
        auto gv = test_support::random_vector(op.range_size(), 11);
        Sinogram g = op.sinogram_template();
        g.values = gv;
        Volume fbp = filtered_backproject(op, g, 4);
        Volume composed = backproject(op, stack_to_sinogram(apply_q(sinogram_to_stack(g, 4)), g));
        CHECK(test_support::max_abs_diff(fbp.values, composed.values) <=
              1e-14 * (1.0 + test_support::norm2_vec(fbp.values)));
    }
}

TEST_CASE("preconditioned operator") {
    Volume vol = Volume::centered(14, kBall.outer);
    Sinogram sino = make_sinogram_template(3, 5, 9, kBall);
    SpindleOperator op(vol, sino, kBall, Volume::centered(20, HollowBall::link_radius(kBall.outer)),
                       OperatorConfig{10, 14, 0.5, 1});
    PreconditionedOperator pre = precondition(op, 4);

    SECTION("adjoint identity for the composed map") {
        for (unsigned long long seed : {21ull, 22ull})
            CHECK(test_support::adjoint_defect(pre, seed) <= 1e-10);
    }

    SECTION("composed map annihilates the degree-zero data component") {
        auto f = test_support::random_vector(pre.domain_size(), 23);
        auto y = pre.apply(f);
        Sinogram g = pre.sinogram_template();
        g.values = y;
        HarmonicStack st = sinogram_to_stack(g, 4);
        double scale = 0.0, c00 = 0.0;
        for (const auto& slice : st.slices) {
            for (const auto& z : slice.c) scale = std::max(scale, std::abs(z));
            c00 = std::max(c00, std::abs(slice.at(0, 0)));
        }
        CHECK(c00 <= 1e-10 * scale);
    }

    SECTION("preconditioning smooths the radial energy profile") {
        // bead reconstruction with and without Q^(1/2): the filter damps the
        // low-degree data components that backproject into sharp radial shells
        PhantomSpec spec;
        spec.center = {0.45, 0.0, 0.0};
        spec.radius = 0.12;
        Volume bead_vol = make_phantom(spec, op.volume_template(), kBall);
        Sinogram b = op.apply(bead_vol);

        SolverConfig cfg;
        cfg.max_iters = 8;
        cfg.tol = 0.0;
        ReconReport plain = cgls(op, b.values, cfg);
        Sinogram fb = pre.filter(b);
        ReconReport precond = cgls(pre, fb.values, cfg);

        // roughness of the radial energy histogram (squared second differences)
        auto roughness = [&](const std::vector<double>& x) {
            const Volume& vt = op.volume_template();
            const int nbin = 24;
            std::vector<double> hist(nbin, 0.0);
            for (int k = 0; k < vt.nz; ++k)
                for (int j = 0; j < vt.ny; ++j)
                    for (int i = 0; i < vt.nx; ++i) {
                        double r = norm(vt.center(i, j, k));
                        int bin = static_cast<int>(nbin * r / kBall.outer);
                        if (bin >= 0 && bin < nbin)
                            hist[bin] += x[vt.index(i, j, k)] * x[vt.index(i, j, k)];
                    }
            double tot = 0.0;
            for (double v : hist) tot += v;
            double rough = 0.0;
            for (int i = 1; i + 1 < nbin; ++i) {
                double d2 = hist[i - 1] - 2.0 * hist[i] + hist[i + 1];
                rough += d2 * d2;
            }
            return rough / (tot * tot);
        };
        CHECK(roughness(precond.solution) < roughness(plain.solution));
    }
}

TEST_CASE("gaussian noise injection") {
    Sinogram big = make_sinogram_template(40, 16, 24, kBall);
    detail::Rng rng(33);
    for (auto& v : big.values) v = rng.uniform(0.5, 1.5);

    SECTION("zero level leaves the data bitwise unchanged") {
        Sinogram same = add_noise(big, 0.0, 99);
        CHECK(same.values == big.values);
    }

    SECTION("empirical noise level matches the request") {
        double level = 0.01;
        Sinogram noisy = add_noise(big, level, 7);
        REQUIRE(noisy.values.size() >= 10000);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < big.values.size(); ++i) {
            double d = noisy.values[i] - big.values[i];
            num += d * d;
            den += big.values[i] * big.values[i];
        }
        double ratio = std::sqrt(num / den);
        CHECK(ratio >= level * 0.85);
        CHECK(ratio <= level * 1.15);
    }

    SECTION("seeded runs are bitwise identical") {
        Sinogram n1 = add_noise(big, 0.05, 1234);
        Sinogram n2 = add_noise(big, 0.05, 1234);
        CHECK(n1.values == n2.values);
        Sinogram n3 = add_noise(big, 0.05, 1235);
        CHECK(n1.values != n3.values);
    }

    SECTION("negative level is rejected") {
        CHECK_THROWS_AS(add_noise(big, -0.1, 0), std::invalid_argument);
    }
}

TEST_CASE("reconstruct driver dispatches and reports") {
    Volume vol = Volume::centered(12, kBall.outer);
    Sinogram sino = make_sinogram_template(3, 5, 9, kBall);
    SpindleOperator op(vol, sino, kBall, Volume::centered(16, HollowBall::link_radius(kBall.outer)),
                       OperatorConfig{8, 12, 0.5, 1});
    PhantomSpec spec;
    spec.center = {0.45, 0.0, 0.0};
    spec.radius = 0.15;
    Volume bead_vol = make_phantom(spec, vol, kBall);
    Sinogram b = op.apply(bead_vol);

    for (auto method : {SolverConfig::Method::bp, SolverConfig::Method::fbp,
                        SolverConfig::Method::cgls, SolverConfig::Method::landweber}) {
        SolverConfig cfg;
        cfg.method = method;
        cfg.max_iters = 5;
        cfg.harmonic_L = 4;
        cfg.tol = 0.0;
        ReconReport rep = reconstruct(op, b, cfg);
        CHECK(rep.solution.size() == op.domain_size());
        CHECK(rep.residuals.size() == static_cast<std::size_t>(rep.iterations) + 1);
        for (double r : rep.residuals) CHECK(std::isfinite(r));
    }

    SolverConfig cfg;
    cfg.method = SolverConfig::Method::cgls;
    cfg.max_iters = 5;
    cfg.harmonic_L = 4;
    cfg.precondition = true;
    cfg.tol = 0.0;
    ReconReport rep = reconstruct(op, b, cfg);
    CHECK(rep.solution.size() == op.domain_size());
}
