// Kalman filter, Rauch-Tung-Striebel smoother and read-out of physical signals.
#pragma once

#include <vector>

#include "gplfm/augmented.hpp"

namespace gplfm {

struct FilterOptions {
    /// Keep per-step predicted and filtered covariances (needed by the smoother and extraction).
    bool store_covariances = true;
    /// Joseph-stabilized covariance update; the plain form P - K S K^T otherwise.
    bool joseph_form = true;
};

/// Per-step posteriors of one run. Row k of every N x n matrix belongs to measurement k.
struct EstimationResult {
    Matrix predicted_means;  ///< m_{k|k-1}
    Matrix filtered_means;   ///< m_{k|k}
    Matrix smoothed_means;   ///< m_{k|N}, empty until smoothed
    std::vector<Matrix> predicted_covariances;
    std::vector<Matrix> filtered_covariances;
    std::vector<Matrix> smoothed_covariances;
    Matrix filtered_variances;  ///< diagonal of P_{k|k}, always stored
    Matrix innovations;         ///< e_k, NaN for missing channels
    Matrix innovation_variances;  ///< diagonal of S_k, NaN for missing channels
    std::vector<Matrix> innovation_covariances;  ///< over the channels present at step k
    /// sum_k (log det S_k + e_k^T S_k^{-1} e_k), without the 2 pi constant
    double nll = 0.0;

    Index steps() const { return filtered_means.rows(); }
    bool smoothed() const { return smoothed_means.rows() == filtered_means.rows() && steps() > 0; }
};

/// Runs the predict/update recursion over the rows of `measurements` (N x n_o).
/// Non-finite entries are treated as missing; a fully missing row is a prediction-only step.
/// Throws ConditioningError naming the step (1-based) when S_k cannot be factorized.
EstimationResult kalman_filter(const DiscreteModel& model, const Matrix& measurements, FilterOptions options = {});

/// Fixed-interval RTS smoother; needs covariances stored by the filter.
EstimationResult rts_smoother(const DiscreteModel& model, EstimationResult filtered);

/// Innovation-based negative log-likelihood without storing the trajectory.
double innovations_nll(const DiscreteModel& model, const Matrix& measurements);

/// Mean and variance series for one signal group, N x channels.
struct SignalSeries {
    Matrix mean;
    Matrix variance;
};

struct SignalEstimates {
    SignalSeries displacement;
    SignalSeries velocity;
    SignalSeries acceleration;  ///< absolute accelerations of every physical dof
    SignalSeries force;
};

enum class EstimateStage { filtered, smoothed };

/// Maps augmented-state posteriors to physical displacements, velocities, accelerations and forces.
SignalEstimates extract_estimates(const EstimationResult& result, const AugmentedModel& model,
                                  EstimateStage stage = EstimateStage::smoothed);

/// Mean and variance of `readout * x` for every step.
SignalSeries project(const Matrix& readout, const Matrix& means, const std::vector<Matrix>& covariances);

}  // namespace gplfm
