// Detectability and transmission-zero rank tests on assembled models, plus the
// error metrics used to score estimators against simulated truth.
#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gplfm/augmented.hpp"

namespace gplfm {

struct ModeCheck {
    std::complex<double> eigenvalue;
    numerics::RankReport pbh;
    bool observable = false;
    bool stable = false;
};

struct DetectabilityReport {
    std::vector<ModeCheck> modes;  ///< one entry per distinct eigenvalue of F_ac
    bool detectable = false;
    /// Eigenvalues whose PBH matrix loses rank while not being strictly stable.
    std::vector<std::complex<double>> undetectable_modes;
    /// Eigenvalues whose PBH matrix loses rank (stable or not).
    std::vector<std::complex<double>> unobservable_modes;
};

/// PBH test at every eigenvalue of F_ac. A mode counts as stable when its real part is below
/// -1e-8 * max(1, spectral radius).
DetectabilityReport detectability_check(const AugmentedModel& model);

/// Rank of U(s) = [A_c - sI, B*; 0, F* - sI; G_c, J*]; full rank is n_s + M.
numerics::RankReport transmission_zero_rank(const AugmentedModel& model, std::complex<double> s);

/// Root-mean-square of `x`.
double rms(std::span<const double> x);
double rmse(std::span<const double> estimate, std::span<const double> truth);
/// rmse / rms(truth); infinite when the truth is identically zero and the error is not.
double normalized_rmse(std::span<const double> estimate, std::span<const double> truth);
/// Pearson correlation; empty when either series has zero variance.
std::optional<double> correlation(std::span<const double> estimate, std::span<const double> truth);
double peak_error(std::span<const double> estimate, std::span<const double> truth);

/// RMS of the error after a 4th-order zero-phase Butterworth low-pass at `cutoff_hz`
/// (odd-extension padding of three cutoff periods), divided by the RMS of the truth. Throws ValidationError if the cutoff is not below Nyquist.
double drift_metric(std::span<const double> estimate, std::span<const double> truth, double cutoff_hz,
                    double sample_rate_hz);

struct SignalMetrics {
    std::string signal;
    double rmse = 0.0;
    double normalized_rmse = 0.0;
    double drift = 0.0;
    double peak_error = 0.0;
    std::optional<double> correlation;
};

struct MetricSet {
    std::vector<SignalMetrics> signals;
    const SignalMetrics* find(const std::string& name) const;
};

SignalMetrics score_signal(std::string name, std::span<const double> estimate, std::span<const double> truth,
                           double cutoff_hz, double sample_rate_hz);

}  // namespace gplfm
