// Comparison estimators: augmented Kalman filter (AKF), AKF with dummy displacement
// measurements (AKFdm) and the dual Kalman filter (DKF), plus L-curve tuning of Q_f.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "gplfm/augmented.hpp"
#include "gplfm/kalman.hpp"

namespace gplfm {

enum class BaselineMethod { akf, akfdm, dkf };

const char* to_string(BaselineMethod m);
BaselineMethod baseline_method_from_string(const std::string& name);

struct BaselineConfig {
    /// Per-step covariance of the random-walk input increment [N^2].
    Matrix q_f;
    /// Initial input covariance; empty means Q_f.
    Matrix p_f0;
    /// Initial input mean; empty means zero.
    Vector m_f0;
    /// Dummy displacement measurement covariance [m^2], AKFdm only.
    Matrix r_dm;
    /// Physical dofs (0-based) observed by zero-valued dummy displacement measurements.
    std::vector<Index> dummy_dofs;

    static BaselineConfig isotropic(Index n_f, double q);
};

/// State [x; f] with dx/dt = A_c x + B_c f, df/dt = noise, y = [G_c, J_c] [x; f].
/// The returned model is discretized at `dt` with Q_a = blkdiag(Q_x, Q_f).
AugmentedModel akf_model(const ContinuousStateSpace& ssm, const BaselineConfig& cfg, const Matrix& q_x,
                         const Matrix& r, const StatePrior& prior, double dt);

/// AKF whose measurement equation is extended by displacement rows for `cfg.dummy_dofs`
/// with covariance `cfg.r_dm`. Feed it `with_dummy_observations(y, ...)`.
AugmentedModel akfdm_model(const ContinuousStateSpace& ssm, const BaselineConfig& cfg, const Matrix& q_x,
                           const Matrix& r, const StatePrior& prior, double dt);

/// Appends `dummy_count` zero-valued columns to the measurement matrix.
Matrix with_dummy_observations(const Matrix& measurements, Index dummy_count);

/// Dual Kalman filter: per step, the state is predicted with the previous input, the input
/// gets a random-walk prediction and an update through the feedthrough J, then the state is
/// updated through G using the updated input. The result uses the AKF state layout
/// ([x; f], no cross-covariance) so `extract_estimates` with `akf_model(...)` applies.
/// Throws DegeneracyError when J is identically zero.
EstimationResult dkf_estimate(const ContinuousStateSpace& ssm, double dt, const Matrix& measurements,
                              const BaselineConfig& cfg, const Matrix& q_x, const Matrix& r, const StatePrior& prior);

/// Runs one baseline and returns its (filtered) estimation result.
EstimationResult run_baseline(BaselineMethod method, const ContinuousStateSpace& ssm, double dt,
                              const Matrix& measurements, const BaselineConfig& cfg, const Matrix& q_x,
                              const Matrix& r, const StatePrior& prior);

struct LCurvePoint {
    double q = 0.0;                ///< grid value, Q_f = q I
    double q_norm = 0.0;           ///< spectral norm of Q_f
    double innovation_sum = 0.0;   ///< sum_k ||e_k|| over the measured channels
    bool ok = false;
    std::string error;
};

struct LCurve {
    std::vector<LCurvePoint> points;
    std::vector<double> curvature;  ///< per grid point, NaN where undefined
    Index corner = -1;              ///< index into points
    double selected_q() const { return corner >= 0 ? points[static_cast<std::size_t>(corner)].q : 0.0; }
};

/// Index of maximum signed curvature of the polyline (x_i, y_i), using three-point
/// finite differences in the point index. `curvature` receives per-point values (NaN at ends).
Index max_curvature_corner(std::span<const double> x, std::span<const double> y, std::vector<double>* curvature = nullptr);

/// Sweeps Q_f = q I over a log-spaced grid (>= 5 points), recording sum ||e_k||, and picks the
/// corner of the log-log curve. Failed grid points are recorded and skipped.
LCurve l_curve(const ContinuousStateSpace& ssm, double dt, const Matrix& measurements, BaselineMethod method,
               std::span<const double> grid, const BaselineConfig& base, const Matrix& q_x, const Matrix& r,
               const StatePrior& prior);

}  // namespace gplfm
