// Half-integer Matérn covariance functions and their exact LTI realizations.
#pragma once

#include <span>

#include "gplfm/numerics.hpp"

namespace gplfm {

enum class KernelFamily { matern };

/// Matérn kernel with smoothness nu = p + 1/2.
struct KernelSpec {
    KernelFamily family = KernelFamily::matern;
    int order = 0;             ///< p, one of {0, 1, 2}
    double alpha2 = 1.0;       ///< signal variance
    double lengthscale = 1.0;  ///< seconds

    void validate() const;
};

/// dz/dt = F z + L w(t),  h(t) = H z(t),  E[w(t) w(s)] = sigma_w delta(t - s).
struct KernelRealization {
    Matrix f;
    Matrix l;         ///< m x 1
    RowVector h;      ///< 1 x m
    double sigma_w = 0.0;
    Matrix p_inf;     ///< steady-state covariance (or the initial covariance for a random walk)
    double lambda = 0.0;

    Index dimension() const { return f.rows(); }
    /// L sigma_w L^T
    Matrix noise_density() const { return l * sigma_w * l.transpose(); }
};

/// Closed-form half-integer Matérn covariance at lag tau.
double matern_eval(const KernelSpec& spec, double tau);

/// Companion-form realization from the spectral factorization (s + lambda)^{-(p+1)};
/// P_inf from the Lyapunov equation.
KernelRealization kernel_to_ssm(const KernelSpec& spec);

/// Covariance reconstructed from a realization: H P_inf Phi(tau)^T H^T for tau >= 0.
double kernel_from_ssm(const KernelRealization& real, double tau);

/// Scalar random walk (F = 0, L = 1, H = 1): the force model of the augmented Kalman filter.
/// `initial_variance` takes the place of P_inf, which does not exist for this model.
KernelRealization random_walk_realization(double sigma_w, double initial_variance);

struct GpPosterior {
    double mean = 0.0;
    double variance = 0.0;
};

/// Batch GP posterior at `t_star` given y_k = g(t_k) + noise, noise ~ N(0, noise_var).
GpPosterior gp_regress_batch(std::span<const double> times, std::span<const double> y,
                             const KernelSpec& spec, double noise_var, double t_star);

}  // namespace gplfm
