// Mass/damping/stiffness construction for shear-type chains, modal analysis,
// modal truncation and assembly of the continuous-time structural state-space model.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "gplfm/numerics.hpp"

namespace gplfm {

struct RayleighDamping {
    double mass_coefficient = 0.0;       ///< a0 [1/s]
    double stiffness_coefficient = 0.0;  ///< a1 [s]
};

/// M u'' + C u' + K u = S_p p(t) - M S_g u_g''(t)
struct StructuralSystem {
    Matrix mass;             ///< n x n [kg]
    Matrix damping;          ///< n x n [N s/m]
    Matrix stiffness;        ///< n x n [N/m]
    Matrix load_influence;   ///< S_p, n x n_p
    Matrix ground_influence; ///< S_g, n x n_g

    Index dofs() const { return mass.rows(); }
    Index load_count() const { return load_influence.cols(); }
    Index ground_count() const { return ground_influence.cols(); }
    Index input_count() const { return load_count() + ground_count(); }

    /// Checks symmetry / definiteness of M, C, K and influence shapes. Throws ValidationError.
    void validate() const;
};

/// Builds a system from explicit matrices (validated). Influence matrices start empty.
StructuralSystem make_structural_system(Matrix mass, Matrix damping, Matrix stiffness);

/// Shear-type chain: diagonal M, tridiagonal K, C = a0 M + a1 K.
/// `storey_stiffnesses[i]` connects floor i to the floor below (floor 0 to the ground).
StructuralSystem build_shear_building(std::span<const double> floor_masses,
                                      std::span<const double> storey_stiffnesses,
                                      RayleighDamping rayleigh);

/// Returns a copy with one point-load column per listed dof (0-based).
StructuralSystem with_point_loads(StructuralSystem sys, std::span<const Index> dofs);

/// Returns a copy with a single uniform ground-acceleration input (S_g = ones).
StructuralSystem with_ground_motion(StructuralSystem sys);

/// Rayleigh coefficients giving damping ratio `zeta` at the two angular frequencies.
RayleighDamping rayleigh_from_ratios(double omega_i, double omega_j, double zeta_i, double zeta_j);

struct ModalData {
    Vector frequencies_hz;   ///< ascending
    Vector damping_ratios;   ///< fractions
    Matrix mode_shapes;      ///< mass-normalized columns
};

/// Generalized eigenproblem K phi = w^2 M phi; damping ratios phi^T C phi / (2 w).
ModalData modal_analysis(const StructuralSystem& sys);

/// A system expressed in retained modal coordinates u = basis * q.
struct ReducedSystem {
    StructuralSystem modal;  ///< M = I, K = diag(w^2), C = basis^T C basis
    Matrix basis;            ///< n x n_keep mass-normalized mode shapes
};

/// Undamped modal truncation keeping the `n_keep` lowest modes.
ReducedSystem modal_truncation(const StructuralSystem& sys, Index n_keep);

/// Rows select measured dofs. Each block may be empty.
struct SensorLayout {
    std::vector<Index> displacement_dofs;
    std::vector<Index> velocity_dofs;
    std::vector<Index> acceleration_dofs;

    Index channel_count() const {
        return static_cast<Index>(displacement_dofs.size() + velocity_dofs.size() + acceleration_dofs.size());
    }
    Matrix displacement_selection(Index n) const;
    Matrix velocity_selection(Index n) const;
    Matrix acceleration_selection(Index n) const;
    /// "dis_3", "acc_10", ... with 1-based floor numbers, in channel order.
    std::vector<std::string> channel_names() const;
    void validate(Index n) const;
};

/// x' = A_c x + B_c f,  y = G_c x + J_c f  with x = [u; u'], f = [p; u_g''].
struct ContinuousStateSpace {
    Matrix a;  ///< A_c, n_s x n_s
    Matrix b;  ///< B_c, n_s x n_f
    Matrix g;  ///< G_c, n_o x n_s
    Matrix j;  ///< J_c, n_o x n_f
    Index load_count = 0;
    Index ground_count = 0;
    std::vector<std::string> channel_names;

    // Physical read-out of every dof (identity blocks for an unreduced model).
    Matrix displacement_map;             ///< n_phys x n_s
    Matrix velocity_map;                 ///< n_phys x n_s
    Matrix acceleration_map;             ///< n_phys x n_s, absolute accelerations
    Matrix acceleration_feedthrough;     ///< n_phys x n_f

    Index state_count() const { return a.rows(); }
    Index input_count() const { return b.cols(); }
    Index output_count() const { return g.rows(); }
    Index physical_dofs() const { return displacement_map.rows(); }
};

ContinuousStateSpace assemble_continuous_ssm(const StructuralSystem& sys, const SensorLayout& sensors);

/// Sensors refer to physical dofs and are mapped through the reduction basis.
/// The ground-motion feedthrough is zero by the absolute-acceleration convention.
ContinuousStateSpace assemble_continuous_ssm(const ReducedSystem& sys, const SensorLayout& sensors);

/// Uniform shear chain scaled to a target first natural frequency; used as the stand-in
/// for the tall-building benchmark (1% damping in modes 1 and 5 by default).
StructuralSystem build_tower_standin(Index floors = 76, double floor_mass = 2.0e6,
                                     double first_frequency_hz = 0.16, double damping_ratio = 0.01);

}  // namespace gplfm
