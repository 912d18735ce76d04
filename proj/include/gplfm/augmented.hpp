// Augmented latent-force state-space model: structural states followed by one
// block of GP states per input force.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gplfm/kernels.hpp"
#include "gplfm/numerics.hpp"
#include "gplfm/structural.hpp"

namespace gplfm {

/// x_k = F x_{k-1} + w_{k-1},  y_k = H x_k + v_k,  w ~ N(0, Q), v ~ N(0, R).
struct DiscreteModel {
    Matrix transition;
    Matrix observation;
    Matrix process_noise;
    Matrix measurement_noise;
    Vector initial_mean;
    Matrix initial_covariance;
    double dt = 0.0;

    Index state_count() const { return transition.rows(); }
    Index output_count() const { return observation.rows(); }
    void validate() const;
};

/// Where each block lives inside the augmented state.
struct StateLayout {
    struct ForceBlock {
        Index offset = 0;
        Index size = 0;
        RowVector output;  ///< H^{(j)}: f^{(j)} = H^{(j)} z^{(j)}
    };

    Index structural_states = 0;  ///< n_s = 2 x generalized coordinates
    std::vector<ForceBlock> forces;

    Index coordinates() const { return structural_states / 2; }
    Index latent_states() const;
    Index size() const { return structural_states + latent_states(); }
};

/// Initial structural-state belief; the latent blocks start at their steady state.
struct StatePrior {
    Vector mean;        ///< n_s, empty means zero
    Matrix covariance;  ///< n_s x n_s

    static StatePrior isotropic(Index n_s, double variance);
};

struct AugmentedModel {
    // Continuous-time system (F_ac = [A_c, B*; 0, F*], H_ac = [G_c, J*]).
    Matrix f_ac;
    Matrix h_ac;
    Matrix q_c;
    Matrix a_c;
    Matrix b_star;
    Matrix f_star;
    Matrix g_c;
    Matrix j_star;

    Matrix measurement_noise;  ///< R
    Matrix structural_noise;   ///< Q_x, enters the discrete model only
    Vector initial_mean;
    Matrix initial_covariance;
    StateLayout layout;
    std::vector<std::string> channel_names;

    // Physical read-outs of the augmented state.
    Matrix displacement_readout;  ///< n_phys x n_a
    Matrix velocity_readout;      ///< n_phys x n_a
    Matrix acceleration_readout;  ///< n_phys x n_a (absolute)
    Matrix force_readout;         ///< n_f x n_a

    std::optional<DiscreteModel> discrete;

    Index state_count() const { return f_ac.rows(); }
    Index output_count() const { return h_ac.rows(); }
    /// Throws if `discretize` has not been applied.
    const DiscreteModel& discretized() const;
};

/// Combines the structural model with one kernel realization per input column of B_c.
AugmentedModel assemble_augmented(const ContinuousStateSpace& ssm, std::span<const KernelRealization> kernels,
                                  const Matrix& q_x, const Matrix& r, const StatePrior& prior);

/// F_ad = e^{F_ac dt}, Q_a = Q_d + blkdiag(Q_x, 0), H_ad = H_ac.
AugmentedModel discretize(AugmentedModel model, double dt);

}  // namespace gplfm
