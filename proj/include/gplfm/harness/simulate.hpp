// Noise-free response of a structural state-space model under sampled inputs, and
// synthetic noisy measurements.
#pragma once

#include <cstdint>

#include "gplfm/harness/timeseries.hpp"
#include "gplfm/structural.hpp"

namespace gplfm::harness {

struct Simulation {
    Matrix states;        ///< N x n_s, x_k at t_k = k dt
    Matrix clean;         ///< N x n_o, G x_k + J f_k
    Matrix displacement;  ///< N x n_phys
    Matrix velocity;      ///< N x n_phys
    Matrix acceleration;  ///< N x n_phys, absolute
};

/// Exact zero-order-hold propagation x_{k+1} = A x_k + B f_k from `initial_state` (empty = 0).
/// `forces` is N x n_f. Throws StabilityError if A_c has an eigenvalue with positive real part.
Simulation simulate_response(const ContinuousStateSpace& ssm, const Matrix& forces, double dt,
                             const Vector& initial_state = {});

/// Adds zero-mean Gaussian noise with std = noise_fraction * RMS of each clean channel.
Matrix add_measurement_noise(const Matrix& clean, double noise_fraction, std::uint64_t seed);

}  // namespace gplfm::harness
