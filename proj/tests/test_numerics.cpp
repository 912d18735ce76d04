#include <doctest.h>

#include <random>

#include "gplfm/errors.hpp"
#include "gplfm/kernels.hpp"
#include "gplfm/numerics.hpp"
#include "gplfm/structural.hpp"
#include "oracles.hpp"

using namespace gplfm;
namespace nm = gplfm::numerics;

namespace {

Matrix random_stable(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = d(rng);
    const double shift = Eigen::EigenSolver<Matrix>(a).eigenvalues().real().maxCoeff() + 0.5;
    a.diagonal().array() -= shift;
    return a;
}

double rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

StructuralSystem building() {
    std::vector<double> m(10, 200.0), k(10, 5e5);
    std::vector<Index> top{9};
    return with_point_loads(build_shear_building(m, k, {0.1, 0.0005}), top);
}

}  // namespace

TEST_SUITE("numerics") {
    TEST_CASE("exponential of zero and diagonal matrices") {
        CHECK((nm::matrix_exponential(Matrix::Zero(2, 2), 3.7) - Matrix::Identity(2, 2)).norm() == 0.0);
        Matrix d = Matrix::Zero(2, 2);
        d(0, 0) = -1.0;
        d(1, 1) = -2.0;
        const Matrix e = nm::matrix_exponential(d, 1.0);
        CHECK(e(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
        CHECK(e(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
        CHECK(e(0, 1) == 0.0);
    }

    TEST_CASE("exponential of a nilpotent matrix is exact") {
        Matrix n = Matrix::Zero(3, 3);
        n(0, 1) = 1.0;
        n(1, 2) = 1.0;
        const Matrix e = nm::matrix_exponential(n, 2.0);
        CHECK(e(0, 2) == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(e(0, 1) == doctest::Approx(2.0).epsilon(1e-15));
    }

    TEST_CASE("exponential of a Matern p=1 companion matrix matches the series") {
        const auto real = kernel_to_ssm({KernelFamily::matern, 1, 1.0, std::sqrt(3.0)});  // lambda = 1
        CHECK(real.lambda == doctest::Approx(1.0));
        const Matrix e = nm::matrix_exponential(real.f, 0.5);
        CHECK((e - oracle::series_exp(real.f, 0.5)).cwiseAbs().maxCoeff() <= 1e-12);
    }

    TEST_CASE("exponential semigroup property") {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const Matrix a = random_stable(6, seed);
            const Matrix lhs = nm::matrix_exponential(a, 0.7 + 0.4);
            const Matrix rhs = nm::matrix_exponential(a, 0.7) * nm::matrix_exponential(a, 0.4);
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
        }
    }

    TEST_CASE("exponential rejects non-square input") {
        CHECK_THROWS_AS(nm::matrix_exponential(Matrix::Zero(2, 3)), DimensionError);
    }

    TEST_CASE("scalar Lyapunov closed form") {
        Matrix f(1, 1), q(1, 1);
        f << -2.5;
        q << 3.0;
        CHECK(nm::solve_lyapunov(f, q)(0, 0) == doctest::Approx(3.0 / 5.0).epsilon(1e-14));
    }

    TEST_CASE("Matern p=0 steady state equals the signal variance") {
        const double l = 0.8, a2 = 2.3;
        Matrix f(1, 1), q(1, 1);
        f << -1.0 / l;
        q << 2.0 * a2 / l;
        CHECK(nm::solve_lyapunov(f, q)(0, 0) == doctest::Approx(a2).epsilon(1e-14));
    }

    TEST_CASE("Matern p=1 steady state matches the quadrature integral") {
        const auto real = kernel_to_ssm({KernelFamily::matern, 1, 1.0, 1.0});
        const Matrix q = real.noise_density();
        const Matrix p = nm::solve_lyapunov(real.f, q);
        const auto integrand = [&](double s) {
            const Matrix e = oracle::series_exp(real.f, s);
            return Matrix(e * q * e.transpose());
        };
        Matrix ref = Matrix::Zero(2, 2);
        // The integrand is below 1e-25 beyond s = 24.
        for (double a = 0.0; a < 24.0; a += 2.0) ref += oracle::GaussKronrod::integrate(integrand, a, a + 2.0);
        CHECK((p - ref).cwiseAbs().maxCoeff() <= 1e-8);
    }

    TEST_CASE("Lyapunov residual and symmetry on random stable systems") {
        for (std::uint64_t seed = 10; seed < 15; ++seed) {
            const Matrix f = random_stable(5, seed);
            Matrix g = random_stable(5, seed + 100);
            const Matrix q = g * g.transpose();
            const Matrix p = nm::solve_lyapunov(f, q);
            CHECK((p - p.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * p.cwiseAbs().maxCoeff());
            CHECK((f * p + p * f.transpose() + q).norm() <= 1e-10 * q.norm());
        }
    }

    TEST_CASE("Lyapunov rejects non-Hurwitz matrices") {
        Matrix f(2, 2);
        f << 0.1, 1.0, 0.0, -1.0;
        CHECK_THROWS_AS(nm::solve_lyapunov(f, Matrix::Identity(2, 2)), StabilityError);
        CHECK_FALSE(nm::is_hurwitz(f));
    }

    TEST_CASE("zero-order hold limits and scalar case") {
        Matrix a(1, 1), b(1, 1);
        a << -1.0;
        b << 1.0;
        const auto z = nm::discretize_zoh(a, b, 1.0);
        CHECK(z.a(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
        CHECK(z.b(0, 0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));

        const auto ssm = assemble_continuous_ssm(building(), SensorLayout{{}, {}, {9}});
        const auto tiny = nm::discretize_zoh(ssm.a, ssm.b, 1e-9);
        // First-order limit: (A_d - I) / dt -> A_c and B_d / dt -> B_c.
        const Matrix da = (tiny.a - Matrix::Identity(20, 20)) / 1e-9;
        CHECK((da - ssm.a).norm() <= 1e-5 * ssm.a.norm());
        CHECK((tiny.b / 1e-9 - ssm.b).norm() <= 1e-5 * ssm.b.norm());
    }

    TEST_CASE("zero-order hold of the building matches the block-series oracle") {
        const auto ssm = assemble_continuous_ssm(building(), SensorLayout{{}, {}, {9}});
        const double dt = 0.01;
        const auto z = nm::discretize_zoh(ssm.a, ssm.b, dt);
        Matrix blk = Matrix::Zero(21, 21);
        blk.topLeftCorner(20, 20) = ssm.a;
        blk.topRightCorner(20, 1) = ssm.b;
        const Matrix e = oracle::series_exp(blk, dt);
        CHECK((z.a - e.topLeftCorner(20, 20)).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((z.b - e.topRightCorner(20, 1)).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, e.topRightCorner(20, 1).cwiseAbs().maxCoeff()));
    }

    TEST_CASE("zero-order hold with a singular system matrix") {
        Matrix a(2, 2), b(2, 1);
        a << 0.0, 1.0, 0.0, 0.0;  // double integrator
        b << 0.0, 1.0;
        const auto z = nm::discretize_zoh(a, b, 0.5);
        CHECK(z.b(0, 0) == doctest::Approx(0.125).epsilon(1e-14));
        CHECK(z.b(1, 0) == doctest::Approx(0.5).epsilon(1e-14));
    }

    TEST_CASE("discrete process noise closed forms") {
        CHECK(nm::discrete_process_noise(random_stable(3, 3), Matrix::Zero(3, 3), 0.1).norm() == 0.0);
        const double lam = 1.7, sw = 0.9, dt = 0.3;
        Matrix f(1, 1), q(1, 1);
        f << -lam;
        q << sw;
        CHECK(nm::discrete_process_noise(f, q, dt)(0, 0) ==
              doctest::Approx(sw * (1.0 - std::exp(-2.0 * lam * dt)) / (2.0 * lam)).epsilon(1e-13));
        double prev = 0.0;
        for (double h : {0.01, 0.05, 0.2, 1.0, 4.0}) {
            const double v = nm::discrete_process_noise(f, q, h)(0, 0);
            CHECK(v >= prev);
            prev = v;
        }
    }

    TEST_CASE("discrete process noise of a Matern p=2 augmented block matches quadrature") {
        const auto real = kernel_to_ssm({KernelFamily::matern, 2, 1.5, 0.4});
        const auto ssm = assemble_continuous_ssm(building(), SensorLayout{{}, {}, {9}});
        const Index ns = 20, m = 3, n = ns + m;
        Matrix f = Matrix::Zero(n, n);
        f.topLeftCorner(ns, ns) = ssm.a;
        f.block(0, ns, ns, m) = ssm.b * real.h;
        f.bottomRightCorner(m, m) = real.f;
        Matrix qc = Matrix::Zero(n, n);
        qc.bottomRightCorner(m, m) = real.noise_density();
        const double dt = 0.01;
        const Matrix qd = nm::discrete_process_noise(f, qc, dt);
        const Matrix ref = oracle::GaussKronrod::integrate(
            [&](double s) {
                const Matrix e = oracle::series_exp(f, dt - s);
                return Matrix(e * qc * e.transpose());
            },
            0.0, dt);
        CHECK(rel(qd, ref) <= 1e-8);
        const Eigen::SelfAdjointEigenSolver<Matrix> es(nm::symmetrize(qd));
        CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    }

    TEST_CASE("PBH rank trivial cases") {
        Matrix f = Matrix::Zero(1, 1), h1(1, 1), h0 = Matrix::Zero(1, 1);
        h1 << 1.0;
        CHECK(nm::pbh_rank(f, h1, 0.0).rank == 1);
        const auto r = nm::pbh_rank(f, h0, 0.0);
        CHECK(r.rank == 0);
        CHECK(r.deficiency == 1);
    }

    TEST_CASE("PBH rank away from the spectrum is full") {
        const Matrix f = random_stable(6, 42);
        const Matrix h = Matrix::Zero(1, 6);
        CHECK(nm::pbh_rank(f, h, {0.3, 2.0}).deficiency == 0);
        CHECK(nm::pbh_rank(f, h, {5.0, 0.0}).rank == 6);
    }
}
