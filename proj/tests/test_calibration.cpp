#include <doctest.h>

#include <cmath>
#include <random>

#include "gplfm/calibration.hpp"
#include "gplfm/errors.hpp"
#include "gplfm/harness/simulate.hpp"
#include "gplfm/kalman.hpp"

using namespace gplfm;

namespace {

// Single-dof oscillator with a collocated acceleration sensor.
ContinuousStateSpace sdof() {
    const auto sys = with_point_loads(build_shear_building(std::vector<double>{1.0}, std::vector<double>{40.0}, {0.4, 0.0}),
                                      std::vector<Index>{0});
    SensorLayout s;
    s.acceleration_dofs = {0};
    return assemble_continuous_ssm(sys, s);
}

// Exact discrete-time draw of a Matérn p=0 (Ornstein-Uhlenbeck) force.
Matrix ou_force(Index n, double dt, double a2, double l, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    const double phi = std::exp(-dt / l);
    Matrix f(n, 1);
    double x = std::sqrt(a2) * d(rng);
    for (Index k = 0; k < n; ++k) {
        f(k, 0) = x;
        x = phi * x + std::sqrt(a2 * (1.0 - phi * phi)) * d(rng);
    }
    return f;
}

CalibrationProblem problem_from(const ContinuousStateSpace& ssm, const Matrix& y, double dt, double r) {
    return CalibrationProblem::make(ssm, dt, y, 1e-10 * Matrix::Identity(2, 2), r * Matrix::Identity(1, 1),
                                    StatePrior::isotropic(2, 1e-10), {KernelSpec{KernelFamily::matern, 0, 1.0, 1.0}});
}

HyperParams params(const CalibrationProblem& p, double a2, double l) {
    HyperParams h = p.initial_params();
    h.log_alpha2[0] = std::log(a2);
    h.log_lengthscale[0] = std::log(l);
    return h;
}

}  // namespace

TEST_SUITE("calibration") {
    TEST_CASE("likelihood is finite on a grid for white-noise data and pure") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> d;
        Matrix y(300, 1);
        for (Index k = 0; k < 300; ++k) y(k, 0) = d(rng);
        const auto p = problem_from(sdof(), y, 0.01, 0.1);
        for (double a2 : {0.01, 0.1, 1.0, 10.0, 100.0}) {
            for (double l : {0.01, 0.05, 0.2, 1.0, 3.0}) CHECK(std::isfinite(nll(params(p, a2, l), p)));
        }
        const auto h = params(p, 2.0, 0.3);
        CHECK(nll(h, p) == nll(h, p));
    }

    TEST_CASE("likelihood prefers the generating hyperparameters") {
        const auto ssm = sdof();
        const double dt = 0.01, a2 = 4.0, l = 0.5;
        const Index n = 2000;
        const auto sim = harness::simulate_response(ssm, ou_force(n, dt, a2, l, 17), dt);
        const Matrix y = harness::add_measurement_noise(sim.clean, 0.1, 18);
        double r = 0.0;
        for (Index k = 0; k < n; ++k) r += sim.clean(k, 0) * sim.clean(k, 0);
        r = 0.01 * r / n;
        const auto p = problem_from(ssm, y, dt, r);
        const double at_truth = nll(params(p, a2, l), p);
        CHECK(at_truth <= nll(params(p, 10 * a2, l), p));
        CHECK(at_truth <= nll(params(p, a2, 10 * l), p));
    }

    TEST_CASE("failing models give an infinite objective") {
        const auto p = problem_from(sdof(), Matrix::Zero(10, 1), 0.01, 0.1);
        HyperParams h = params(p, 1.0, 1.0);
        h.log_alpha2[0] = std::numeric_limits<double>::quiet_NaN();
        CHECK(std::isinf(nll(h, p)));
    }

    TEST_CASE("one-dimensional search matches a dense grid") {
        const auto ssm = sdof();
        const double dt = 0.01;
        const auto sim = harness::simulate_response(ssm, ou_force(800, dt, 2.0, 0.3, 23), dt);
        const Matrix y = harness::add_measurement_noise(sim.clean, 0.1, 24);
        const auto p = problem_from(ssm, y, dt, 0.05);
        HyperParams base = params(p, 1.0, 0.3);
        base.fix_lengthscale[0] = true;

        double best = std::numeric_limits<double>::infinity(), arg = 0.0;
        for (double la = std::log(1e-2); la <= std::log(1e3); la += 0.01) {
            HyperParams h = base;
            h.log_alpha2[0] = la;
            const double v = nll(h, p);
            if (v < best) {
                best = v;
                arg = la;
            }
        }
        OptimizerSettings s;
        s.n_starts = 3;
        s.seed = 1;
        s.base = base;
        s.log_alpha2_bounds = {{std::log(1e-2), std::log(1e3)}};
        s.log_lengthscale_bounds = {{std::log(dt), std::log(8.0)}};
        const auto rep = optimize(p, s);
        CHECK(std::abs(rep.best.log_alpha2[0] - arg) <= 0.2);
        CHECK(rep.best.log_lengthscale[0] == base.log_lengthscale[0]);
        for (const auto& st : rep.starts) CHECK(rep.best_nll <= st.initial_nll);
    }

    TEST_CASE("a start at the optimum stays there and runs are reproducible") {
        const auto ssm = sdof();
        const double dt = 0.01;
        const auto sim = harness::simulate_response(ssm, ou_force(600, dt, 3.0, 0.4, 31), dt);
        const Matrix y = harness::add_measurement_noise(sim.clean, 0.1, 32);
        const auto p = problem_from(ssm, y, dt, 0.05);
        OptimizerSettings s;
        s.n_starts = 2;
        s.seed = 99;
        const auto first = optimize(p, s);
        const auto again = optimize(p, s);
        CHECK(first.best_nll == again.best_nll);
        CHECK(first.best.log_alpha2 == again.best.log_alpha2);
        CHECK(first.best.log_lengthscale == again.best.log_lengthscale);
        CHECK(first.starts[1].trajectory == again.starts[1].trajectory);

        OptimizerSettings one;
        one.n_starts = 1;
        one.explicit_starts = {first.best};
        const auto stay = optimize(p, one);
        CHECK(std::abs(stay.best.log_alpha2[0] - first.best.log_alpha2[0]) <= 1e-3);
        CHECK(std::abs(stay.best.log_lengthscale[0] - first.best.log_lengthscale[0]) <= 1e-3);
        CHECK(stay.best_nll <= first.best_nll + 1e-9);
    }

    TEST_CASE("identical kernels share hyperparameters unless asked otherwise") {
        const auto sys = with_point_loads(build_shear_building(std::vector<double>{1.0, 1.0}, std::vector<double>{40.0, 40.0}, {0.4, 0.0}),
                                          std::vector<Index>{0, 1});
        SensorLayout s;
        s.acceleration_dofs = {0, 1};
        const auto ssm = assemble_continuous_ssm(sys, s);
        const KernelSpec k{KernelFamily::matern, 0, 1.0, 1.0};
        const auto shared = CalibrationProblem::make(ssm, 0.01, Matrix::Zero(5, 2), 1e-10 * Matrix::Identity(4, 4),
                                                     Matrix::Identity(2, 2), StatePrior::isotropic(4, 1e-10), {k, k}, true);
        CHECK(shared.group_count() == 1);
        const auto separate = CalibrationProblem::make(ssm, 0.01, Matrix::Zero(5, 2), 1e-10 * Matrix::Identity(4, 4),
                                                       Matrix::Identity(2, 2), StatePrior::isotropic(4, 1e-10), {k, k}, false);
        CHECK(separate.group_count() == 2);
        CHECK_THROWS_AS(CalibrationProblem::make(ssm, 0.01, Matrix::Zero(5, 2), 1e-10 * Matrix::Identity(4, 4),
                                                 Matrix::Identity(2, 2), StatePrior::isotropic(4, 1e-10), {k}, true),
                        ConfigError);
    }

    TEST_CASE("settings are validated") {
        const auto p = problem_from(sdof(), Matrix::Zero(10, 1), 0.01, 0.1);
        OptimizerSettings s;
        s.n_starts = 0;
        CHECK_THROWS_AS(optimize(p, s), ValidationError);
        s.n_starts = 1;
        s.log_alpha2_bounds = {{1.0, 0.0}};
        CHECK_THROWS_AS(optimize(p, s), ValidationError);
    }
}
