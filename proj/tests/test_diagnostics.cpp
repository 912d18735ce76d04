#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gplfm/baselines.hpp"
#include "gplfm/diagnostics.hpp"
#include "gplfm/errors.hpp"
#include "gplfm/signals.hpp"

using namespace gplfm;

namespace {

struct Models {
    AugmentedModel gplfm;
    AugmentedModel akf;
};

Models building_models(const SensorLayout& sensors) {
    std::vector<double> m(10, 200.0), k(10, 5e5);
    const auto sys = with_point_loads(build_shear_building(m, k, {0.1, 0.0005}), std::vector<Index>{9});
    const auto ssm = assemble_continuous_ssm(sys, sensors);
    const Index no = ssm.output_count();
    const Matrix qx = 1e-10 * Matrix::Identity(20, 20);
    const Matrix r = 0.1 * Matrix::Identity(no, no);
    const auto prior = StatePrior::isotropic(20, 1e-10);
    const std::vector<KernelRealization> kern{kernel_to_ssm({KernelFamily::matern, 0, 1e6, 0.1})};
    return {assemble_augmented(ssm, kern, qx, r, prior), akf_model(ssm, BaselineConfig::isotropic(1, 1e4), qx, r, prior, 0.01)};
}

SensorLayout accelerations() {
    SensorLayout s;
    for (Index i = 0; i < 10; ++i) s.acceleration_dofs.push_back(i);
    return s;
}

std::vector<double> noise(std::size_t n, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, sigma);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

}  // namespace

TEST_SUITE("diagnostics") {
    TEST_CASE("acceleration-only GPLFM is detectable, AKF is not") {
        const auto m = building_models(accelerations());
        const auto g = detectability_check(m.gplfm);
        CHECK(g.detectable);
        const auto a = detectability_check(m.akf);
        CHECK_FALSE(a.detectable);
        REQUIRE(a.undetectable_modes.size() >= 1);
        CHECK(std::abs(a.undetectable_modes.front()) <= 1e-8);
    }

    TEST_CASE("displacement sensing makes both models detectable") {
        SensorLayout s;
        for (Index i = 0; i < 10; ++i) s.displacement_dofs.push_back(i);
        const auto m = building_models(s);
        CHECK(detectability_check(m.gplfm).detectable);
        CHECK(detectability_check(m.akf).detectable);
    }

    TEST_CASE("transmission-zero rank at the origin") {
        const auto m = building_models(accelerations());
        const auto g = transmission_zero_rank(m.gplfm, 0.0);
        CHECK(g.rank == 21);
        CHECK(g.deficiency == 0);
        const auto a = transmission_zero_rank(m.akf, 0.0);
        CHECK(a.deficiency > 0);
        CHECK(transmission_zero_rank(m.akf, 1e3).deficiency == 0);
    }

    TEST_CASE("rmse and correlation basics") {
        const std::vector<double> t{1.0, -2.0, 0.5, 3.0, -1.0};
        std::vector<double> neg(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) neg[i] = -t[i];
        CHECK(rmse(t, t) == 0.0);
        CHECK(*correlation(t, t) == doctest::Approx(1.0));
        CHECK(*correlation(neg, t) == doctest::Approx(-1.0));
        const std::vector<double> flat(5, 2.0);
        CHECK_FALSE(correlation(t, flat).has_value());
        CHECK(peak_error(neg, t) == doctest::Approx(6.0));
        CHECK(normalized_rmse(t, t) == 0.0);
        CHECK_THROWS_AS(rmse(t, std::span<const double>(flat).subspan(0, 3)), DimensionError);
    }

    TEST_CASE("unit white noise gives unit rmse") {
        const std::size_t n = 10000;
        const auto t = noise(n, 3.0, 1);
        const auto e = noise(n, 1.0, 2);
        std::vector<double> est(n);
        for (std::size_t i = 0; i < n; ++i) est[i] = t[i] + e[i];
        CHECK(rmse(est, t) == doctest::Approx(1.0).epsilon(0.05));
    }

    TEST_CASE("rmse triangle inequality") {
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto a = noise(50, 1.0, 3 * s), b = noise(50, 2.0, 3 * s + 1), c = noise(50, 0.5, 3 * s + 2);
            CHECK(rmse(a, c) <= rmse(a, b) + rmse(b, c) + 1e-15);
        }
    }

    TEST_CASE("drift metric of a ramp grows linearly and ignores common signals") {
        const std::size_t n = 3000;
        const double fs = 100.0;
        std::vector<double> truth(n), common(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / fs;
            truth[i] = std::sin(2.0 * std::numbers::pi * 1.2 * t);
            common[i] = 3.0 * std::cos(0.7 * t);
        }
        CHECK(drift_metric(truth, truth, 0.1, fs) == 0.0);
        const auto with_ramp = [&](double slope) {
            std::vector<double> e(n);
            for (std::size_t i = 0; i < n; ++i) e[i] = truth[i] + slope * static_cast<double>(i) / fs;
            return drift_metric(e, truth, 0.1, fs);
        };
        const double d1 = with_ramp(0.01), d2 = with_ramp(0.02), d5 = with_ramp(0.05);
        CHECK(d1 > 0.0);
        CHECK(d2 == doctest::Approx(2.0 * d1).epsilon(1e-9));
        CHECK(d5 == doctest::Approx(5.0 * d1).epsilon(1e-9));
        // The error of a ramp is itself low-frequency, so the metric equals its RMS over truth RMS.
        std::vector<double> ramp(n);
        for (std::size_t i = 0; i < n; ++i) ramp[i] = 0.01 * static_cast<double>(i) / fs;
        CHECK(d1 == doctest::Approx(rms(ramp) / rms(truth)).epsilon(1e-3));

        std::vector<double> est(n), est_c(n), tru_c(n);
        const auto e = noise(n, 0.1, 8);
        for (std::size_t i = 0; i < n; ++i) {
            est[i] = truth[i] + e[i] + 0.002 * static_cast<double>(i) / fs;
            est_c[i] = est[i] + common[i];
            tru_c[i] = truth[i] + common[i];
        }
        const double plain = drift_metric(est, truth, 0.1, fs) * rms(truth);
        const double shifted = drift_metric(est_c, tru_c, 0.1, fs) * rms(tru_c);
        CHECK(plain == doctest::Approx(shifted).epsilon(1e-9));
        CHECK_THROWS_AS(drift_metric(est, truth, 50.0, fs), ValidationError);
    }

    TEST_CASE("Butterworth sections: unit DC gain and -3 dB at the cutoff") {
        const double fs = 100.0, fc = 2.0;
        const auto sos = signals::butterworth_lowpass(4, fc, fs);
        REQUIRE(sos.size() == 2);
        const auto gain = [&](double f) {
            const std::complex<double> z = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);
            std::complex<double> h = 1.0;
            for (const auto& s : sos) h *= (s.b[0] + s.b[1] * z + s.b[2] * z * z) / (1.0 + s.a[0] * z + s.a[1] * z * z);
            return std::abs(h);
        };
        CHECK(gain(0.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(gain(fc) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
        CHECK(gain(20.0) < 1e-3);
        // A constant passes the zero-phase filter unchanged.
        const std::vector<double> c(200, 4.0);
        for (double v : signals::sosfiltfilt(sos, c)) CHECK(v == doctest::Approx(4.0).epsilon(1e-10));
    }
}
