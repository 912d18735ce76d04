#include <doctest.h>

#include <cmath>
#include <random>

#include "gplfm/baselines.hpp"
#include "gplfm/diagnostics.hpp"
#include "gplfm/errors.hpp"
#include "gplfm/harness/simulate.hpp"

using namespace gplfm;

namespace {

StructuralSystem building_with_top_load() {
    std::vector<double> m(10, 200.0), k(10, 5e5);
    return with_point_loads(build_shear_building(m, k, {0.1, 0.0005}), std::vector<Index>{9});
}

SensorLayout all_accelerations() {
    SensorLayout s;
    for (Index i = 0; i < 10; ++i) s.acceleration_dofs.push_back(i);
    return s;
}

Matrix white_forces(Index n, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, sigma);
    Matrix f(n, 1);
    for (Index k = 0; k < n; ++k) f(k, 0) = d(rng);
    return f;
}

}  // namespace

TEST_SUITE("baselines") {
    TEST_CASE("AKF model blocks") {
        const auto ssm = assemble_continuous_ssm(building_with_top_load(), all_accelerations());
        const auto cfg = BaselineConfig::isotropic(1, 1e4);
        const auto model = akf_model(ssm, cfg, 1e-10 * Matrix::Identity(20, 20), 0.1 * Matrix::Identity(10, 10),
                                     StatePrior::isotropic(20, 1e-10), 0.01);
        CHECK(model.state_count() == 21);
        CHECK(model.f_ac.row(20).cwiseAbs().maxCoeff() == 0.0);
        CHECK((model.h_ac.rightCols(1) - ssm.j).norm() == 0.0);
        const auto& d = model.discretized();
        CHECK(d.process_noise(20, 20) == 1e4);
        CHECK(d.process_noise.topRightCorner(20, 1).norm() == 0.0);
        CHECK(d.initial_covariance(20, 20) == 1e4);
    }

    TEST_CASE("AKF PBH rank at the origin depends on displacement sensing") {
        const auto sys = building_with_top_load();
        const auto cfg = BaselineConfig::isotropic(1, 1e4);
        const auto make = [&](const SensorLayout& s) {
            const auto ssm = assemble_continuous_ssm(sys, s);
            return akf_model(ssm, cfg, 1e-10 * Matrix::Identity(20, 20),
                             0.1 * Matrix::Identity(ssm.output_count(), ssm.output_count()), StatePrior::isotropic(20, 1e-10),
                             0.01);
        };
        const auto acc = make(all_accelerations());
        CHECK(numerics::pbh_rank(acc.f_ac, acc.h_ac, 0.0).deficiency > 0);
        SensorLayout with_dis = all_accelerations();
        with_dis.displacement_dofs = {9};
        const auto dis = make(with_dis);
        CHECK(numerics::pbh_rank(dis.f_ac, dis.h_ac, 0.0).deficiency == 0);
    }

    TEST_CASE("AKFdm adds displacement rows and approaches AKF for huge R_dm") {
        const auto sys = building_with_top_load();
        const auto ssm = assemble_continuous_ssm(sys, all_accelerations());
        const double dt = 0.01;
        const Index n = 300;
        const auto sim = harness::simulate_response(ssm, white_forces(n, 1000.0, 3), dt);
        const Matrix y = harness::add_measurement_noise(sim.clean, 0.1, 4);
        auto cfg = BaselineConfig::isotropic(1, 1e4);
        cfg.dummy_dofs = {2, 7};
        cfg.r_dm = 1e12 * Matrix::Identity(2, 2);
        const Matrix qx = 1e-10 * Matrix::Identity(20, 20);
        const Matrix r = 0.1 * Matrix::Identity(10, 10);
        const auto prior = StatePrior::isotropic(20, 1e-10);
        const auto dm = akfdm_model(ssm, cfg, qx, r, prior, dt);
        CHECK(dm.output_count() == 12);
        CHECK(dm.h_ac(10, 2) == 1.0);
        CHECK(dm.h_ac(11, 7) == 1.0);
        CHECK(dm.h_ac.row(10).sum() == 1.0);
        CHECK(dm.channel_names.back() == "dummy_dis_8");
        const auto a = kalman_filter(akf_model(ssm, cfg, qx, r, prior, dt).discretized(), y);
        const auto b = kalman_filter(dm.discretized(), with_dummy_observations(y, 2));
        const double scale = a.filtered_means.cwiseAbs().maxCoeff();
        CHECK((a.filtered_means - b.filtered_means).cwiseAbs().maxCoeff() <= 1e-3 * scale);

        cfg.dummy_dofs = {10};
        cfg.r_dm = Matrix::Identity(1, 1);
        CHECK_THROWS_AS(akfdm_model(ssm, cfg, qx, r, prior, dt), ValidationError);
        cfg.dummy_dofs.clear();
        CHECK_THROWS_AS(akfdm_model(ssm, cfg, qx, r, prior, dt), ValidationError);
    }

    TEST_CASE("DKF refuses a system without feedthrough") {
        const auto sys = with_ground_motion(build_shear_building(std::vector<double>(10, 200.0),
                                                                 std::vector<double>(10, 5e5), {0.1, 0.0005}));
        const auto ssm = assemble_continuous_ssm(sys, all_accelerations());
        const Matrix y = Matrix::Zero(10, 10);
        CHECK_THROWS_AS(dkf_estimate(ssm, 0.01, y, BaselineConfig::isotropic(1, 1e4), 1e-10 * Matrix::Identity(20, 20),
                                     0.1 * Matrix::Identity(10, 10), StatePrior::isotropic(20, 1e-10)),
                        DegeneracyError);
    }

    TEST_CASE("DKF recovers a constant force on a stiff single-dof system") {
        // Static single-storey chain, collocated noiseless acceleration.
        const auto sys = with_point_loads(build_shear_building(std::vector<double>{1.0}, std::vector<double>{100.0}, {2.0, 0.0}),
                                          std::vector<Index>{0});
        SensorLayout s;
        s.acceleration_dofs = {0};
        const auto ssm = assemble_continuous_ssm(sys, s);
        const double dt = 0.01, force = 5.0;
        const Index n = 200;
        const auto sim = harness::simulate_response(ssm, Matrix::Constant(n, 1, force), dt);
        const auto res = dkf_estimate(ssm, dt, sim.clean, BaselineConfig::isotropic(1, 1.0), 1e-10 * Matrix::Identity(2, 2),
                                      1e-8 * Matrix::Identity(1, 1), StatePrior::isotropic(2, 1e-10));
        CHECK(res.filtered_means(99, 2) == doctest::Approx(force).epsilon(0.01));
        CHECK(res.filtered_means(n - 1, 2) == doctest::Approx(force).epsilon(0.01));
    }

    TEST_CASE("DKF with zero input noise keeps the prior input mean") {
        const auto ssm = assemble_continuous_ssm(building_with_top_load(), all_accelerations());
        auto cfg = BaselineConfig::isotropic(1, 0.0);
        cfg.p_f0 = Matrix::Zero(1, 1);
        cfg.m_f0 = Vector::Constant(1, 12.0);
        const auto sim = harness::simulate_response(ssm, white_forces(50, 100.0, 9), 0.01);
        const auto res = dkf_estimate(ssm, 0.01, sim.clean, cfg, 1e-10 * Matrix::Identity(20, 20),
                                      0.1 * Matrix::Identity(10, 10), StatePrior::isotropic(20, 1e-10));
        for (Index k = 0; k < 50; ++k) CHECK(res.filtered_means(k, 20) == 12.0);
    }

    TEST_CASE("DKF and AKF state estimates agree with full collocated sensing") {
        // Harmonic load at the top floor, accelerations everywhere, 10% noise.
        const auto ssm = assemble_continuous_ssm(building_with_top_load(), all_accelerations());
        const double dt = 0.01;
        const Index n = 2000;
        Matrix force(n, 1);
        for (Index k = 0; k < n; ++k) force(k, 0) = 100.0 * std::sin(2.0 * 3.141592653589793 * k * dt);
        const auto sim = harness::simulate_response(ssm, force, dt);
        const Matrix y = harness::add_measurement_noise(sim.clean, 0.1, 22);
        Matrix r = Matrix::Zero(10, 10);
        for (Index j = 0; j < 10; ++j) r(j, j) = (y.col(j) - sim.clean.col(j)).squaredNorm() / n;
        const auto cfg = BaselineConfig::isotropic(1, 1e4);
        const Matrix qx = 1e-10 * Matrix::Identity(20, 20);
        const auto prior = StatePrior::isotropic(20, 1e-10);
        const auto akf = run_baseline(BaselineMethod::akf, ssm, dt, y, cfg, qx, r, prior);
        const auto dkf = run_baseline(BaselineMethod::dkf, ssm, dt, y, cfg, qx, r, prior);
        for (Index j = 10; j < 20; ++j) {  // velocities
            std::vector<double> a(n), d(n), t(n);
            for (Index k = 0; k < n; ++k) {
                a[k] = akf.filtered_means(k, j);
                d[k] = dkf.filtered_means(k, j);
                t[k] = sim.states(k, j);
            }
            const double ra = rmse(a, t), rd = rmse(d, t), scale = rms(t);
            CHECK(std::abs(ra - rd) <= 0.05 * scale);
        }
    }

    TEST_CASE("L-curve corner of a synthetic curve and grid validation") {
        // Piecewise-linear L with a sharp corner at index 3.
        const std::vector<double> x{0, 1, 2, 3, 4, 5, 6};
        const std::vector<double> y{6, 4.5, 3, 1.5, 1.4, 1.3, 1.2};
        std::vector<double> kappa;
        CHECK(max_curvature_corner(x, y, &kappa) == 3);
        CHECK(std::isnan(kappa.front()));
        CHECK(std::isnan(kappa.back()));

        const auto ssm = assemble_continuous_ssm(building_with_top_load(), all_accelerations());
        const Matrix y0 = Matrix::Zero(20, 10);
        const auto prior = StatePrior::isotropic(20, 1e-10);
        const Matrix qx = 1e-10 * Matrix::Identity(20, 20), r = 0.1 * Matrix::Identity(10, 10);
        const auto base = BaselineConfig::isotropic(1, 1.0);
        const std::vector<double> two{1.0, 10.0};
        CHECK_THROWS_AS(l_curve(ssm, 0.01, y0, BaselineMethod::akf, two, base, qx, r, prior), ValidationError);
        const std::vector<double> uneven{1.0, 10.0, 100.0, 1e3, 1e5};
        CHECK_THROWS_AS(l_curve(ssm, 0.01, y0, BaselineMethod::akf, uneven, base, qx, r, prior), ValidationError);
    }

    TEST_CASE("L-curve records failures and still selects a corner") {
        const auto sys = with_ground_motion(build_shear_building(std::vector<double>(10, 200.0),
                                                                 std::vector<double>(10, 5e5), {0.1, 0.0005}));
        const auto ssm = assemble_continuous_ssm(sys, all_accelerations());
        const Matrix y = Matrix::Zero(20, 10);
        const std::vector<double> grid{1, 10, 100, 1000, 10000};
        // DKF degenerates at every grid point, so the sweep cannot produce a curve.
        CHECK_THROWS(l_curve(ssm, 0.01, y, BaselineMethod::dkf, grid, BaselineConfig::isotropic(1, 1.0),
                             1e-10 * Matrix::Identity(20, 20), 0.1 * Matrix::Identity(10, 10), StatePrior::isotropic(20, 1e-10)));
    }

    TEST_CASE("method names round-trip") {
        for (auto m : {BaselineMethod::akf, BaselineMethod::akfdm, BaselineMethod::dkf}) {
            CHECK(baseline_method_from_string(to_string(m)) == m);
        }
        CHECK_THROWS_AS(baseline_method_from_string("ukf"), ConfigError);
    }
}
