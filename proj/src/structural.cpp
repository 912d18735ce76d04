#include "gplfm/structural.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/Eigenvalues>

#include "gplfm/errors.hpp"

namespace gplfm {

namespace {

void check_symmetric(const Matrix& m, const char* name) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw ValidationError(std::string(name) + " must be symmetric");
    }
}

bool positive_semidefinite(const Matrix& m) {
    if (m.rows() == 0) return true;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    return es.eigenvalues().minCoeff() >= -1e-10 * scale;
}

std::vector<std::string> names_for(const char* prefix, const std::vector<Index>& dofs) {
    std::vector<std::string> out;
    for (Index d : dofs) out.push_back(std::string(prefix) + "_" + std::to_string(d + 1));
    return out;
}

Matrix selection(const std::vector<Index>& dofs, Index n) {
    Matrix s = Matrix::Zero(static_cast<Index>(dofs.size()), n);
    for (std::size_t r = 0; r < dofs.size(); ++r) s(static_cast<Index>(r), dofs[r]) = 1.0;
    return s;
}

// Shared assembly. `basis` maps generalized coordinates to physical dofs (identity when null).
ContinuousStateSpace assemble(const StructuralSystem& sys, const Matrix* basis, const SensorLayout& sensors) {
    sys.validate();
    const Index n = sys.dofs();
    const Index n_phys = basis ? basis->rows() : n;
    sensors.validate(n_phys);

    const Index np = sys.load_count();
    const Index ng = sys.ground_count();
    const Index nf = np + ng;

    Eigen::LLT<Matrix> mass_chol(sys.mass);
    if (mass_chol.info() != Eigen::Success) throw ValidationError("mass matrix is not positive definite");
    const Matrix minv_k = mass_chol.solve(sys.stiffness);
    const Matrix minv_c = mass_chol.solve(sys.damping);
    const Matrix minv_sp = mass_chol.solve(sys.load_influence);

    ContinuousStateSpace ssm;
    ssm.load_count = np;
    ssm.ground_count = ng;
    ssm.a = Matrix::Zero(2 * n, 2 * n);
    ssm.a.topRightCorner(n, n) = Matrix::Identity(n, n);
    ssm.a.bottomLeftCorner(n, n) = -minv_k;
    ssm.a.bottomRightCorner(n, n) = -minv_c;

    ssm.b = Matrix::Zero(2 * n, nf);
    ssm.b.bottomLeftCorner(n, np) = minv_sp;
    ssm.b.bottomRightCorner(n, ng) = -sys.ground_influence;

    const Matrix phys = basis ? *basis : Matrix::Identity(n, n);
    const Matrix s_dis = sensors.displacement_selection(n_phys);
    const Matrix s_vel = sensors.velocity_selection(n_phys);
    const Matrix s_acc = sensors.acceleration_selection(n_phys);

    // Absolute accelerations of every physical dof: the ground term cancels.
    ssm.acceleration_map.resize(n_phys, 2 * n);
    ssm.acceleration_feedthrough = Matrix::Zero(n_phys, nf);
    if (basis) {
        ssm.acceleration_map << -phys * minv_k, -phys * minv_c;
        ssm.acceleration_feedthrough.leftCols(np) = phys * minv_sp;
    } else {
        ssm.acceleration_map << -minv_k, -minv_c;
        ssm.acceleration_feedthrough.leftCols(np) = minv_sp;
    }
    ssm.displacement_map = Matrix::Zero(n_phys, 2 * n);
    ssm.displacement_map.leftCols(n) = phys;
    ssm.velocity_map = Matrix::Zero(n_phys, 2 * n);
    ssm.velocity_map.rightCols(n) = phys;

    const Index nd = s_dis.rows();
    const Index nv = s_vel.rows();
    const Index na = s_acc.rows();
    ssm.g = Matrix::Zero(nd + nv + na, 2 * n);
    ssm.j = Matrix::Zero(nd + nv + na, nf);
    if (basis) {
        ssm.g.block(0, 0, nd, n) = s_dis * phys;
        ssm.g.block(nd, n, nv, n) = s_vel * phys;
    } else {
        ssm.g.block(0, 0, nd, n) = s_dis;
        ssm.g.block(nd, n, nv, n) = s_vel;
    }
    ssm.g.bottomRows(na) = s_acc * ssm.acceleration_map;
    ssm.j.bottomLeftCorner(na, np) = s_acc * ssm.acceleration_feedthrough.leftCols(np);

    ssm.channel_names = sensors.channel_names();
    return ssm;
}

}  // namespace

void StructuralSystem::validate() const {
    const Index n = mass.rows();
    if (n == 0) throw ValidationError("structural system has no degrees of freedom");
    if (mass.cols() != n || damping.rows() != n || damping.cols() != n || stiffness.rows() != n ||
        stiffness.cols() != n) {
        throw DimensionError("M, C and K must all be n x n");
    }
    if (load_influence.rows() != n || ground_influence.rows() != n) {
        throw DimensionError("influence matrices must have n rows");
    }
    if (!mass.allFinite() || !damping.allFinite() || !stiffness.allFinite()) {
        throw ValidationError("M, C and K must have finite entries");
    }
    check_symmetric(mass, "mass matrix");
    check_symmetric(damping, "damping matrix");
    check_symmetric(stiffness, "stiffness matrix");
    Eigen::LLT<Matrix> llt(mass);
    if (llt.info() != Eigen::Success) throw ValidationError("mass matrix must be positive definite");
    if (!positive_semidefinite(stiffness)) throw ValidationError("stiffness matrix must be positive semidefinite");
    if (!positive_semidefinite(damping)) throw ValidationError("damping matrix must be positive semidefinite");
}

StructuralSystem make_structural_system(Matrix mass, Matrix damping, Matrix stiffness) {
    StructuralSystem sys;
    const Index n = mass.rows();
    sys.mass = std::move(mass);
    sys.damping = std::move(damping);
    sys.stiffness = std::move(stiffness);
    sys.load_influence = Matrix::Zero(n, 0);
    sys.ground_influence = Matrix::Zero(n, 0);
    sys.validate();
    return sys;
}

StructuralSystem build_shear_building(std::span<const double> floor_masses,
                                      std::span<const double> storey_stiffnesses,
                                      RayleighDamping rayleigh) {
    const auto n = static_cast<Index>(floor_masses.size());
    if (n == 0) throw ValidationError("shear building needs at least one floor");
    if (storey_stiffnesses.size() != floor_masses.size()) {
        throw ValidationError("masses and stiffnesses must have the same length");
    }
    for (Index i = 0; i < n; ++i) {
        if (!(floor_masses[i] > 0.0) || !std::isfinite(floor_masses[i]))
            throw ValidationError("floor masses must be positive");
        if (!(storey_stiffnesses[i] > 0.0) || !std::isfinite(storey_stiffnesses[i]))
            throw ValidationError("storey stiffnesses must be positive");
    }
    if (rayleigh.mass_coefficient < 0.0 || rayleigh.stiffness_coefficient < 0.0) {
        throw ValidationError("Rayleigh coefficients must be non-negative");
    }

    Matrix m = Matrix::Zero(n, n);
    Matrix k = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        m(i, i) = floor_masses[i];
        k(i, i) += storey_stiffnesses[i];
        if (i + 1 < n) {
            const double above = storey_stiffnesses[i + 1];
            k(i, i) += above;
            k(i, i + 1) = -above;
            k(i + 1, i) = -above;
        }
    }
    Matrix c = rayleigh.mass_coefficient * m + rayleigh.stiffness_coefficient * k;
    return make_structural_system(std::move(m), std::move(c), std::move(k));
}

StructuralSystem with_point_loads(StructuralSystem sys, std::span<const Index> dofs) {
    const Index n = sys.dofs();
    sys.load_influence = Matrix::Zero(n, static_cast<Index>(dofs.size()));
    for (std::size_t c = 0; c < dofs.size(); ++c) {
        if (dofs[c] < 0 || dofs[c] >= n) throw ValidationError("load dof out of range");
        sys.load_influence(dofs[c], static_cast<Index>(c)) = 1.0;
    }
    return sys;
}

StructuralSystem with_ground_motion(StructuralSystem sys) {
    sys.ground_influence = Matrix::Ones(sys.dofs(), 1);
    return sys;
}

RayleighDamping rayleigh_from_ratios(double omega_i, double omega_j, double zeta_i, double zeta_j) {
    if (!(omega_i > 0.0) || !(omega_j > 0.0) || omega_i == omega_j) {
        throw ValidationError("Rayleigh fit needs two distinct positive frequencies");
    }
    // zeta = (a0 / w + a1 w) / 2 at both frequencies
    Eigen::Matrix2d lhs;
    lhs << 1.0 / (2.0 * omega_i), omega_i / 2.0, 1.0 / (2.0 * omega_j), omega_j / 2.0;
    const Eigen::Vector2d coeffs = lhs.partialPivLu().solve(Eigen::Vector2d(zeta_i, zeta_j));
    return {coeffs(0), coeffs(1)};
}

ModalData modal_analysis(const StructuralSystem& sys) {
    sys.validate();
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(sys.stiffness, sys.mass);
    if (es.info() != Eigen::Success) throw ValidationError("generalized eigenproblem failed; M must be SPD");

    const Index n = sys.dofs();
    ModalData out;
    out.frequencies_hz.resize(n);
    out.damping_ratios.resize(n);
    // Eigen normalizes generalized eigenvectors to phi^T M phi = 1 and sorts ascending.
    out.mode_shapes = es.eigenvectors();
    for (Index i = 0; i < n; ++i) {
        const double w2 = std::max(es.eigenvalues()(i), 0.0);
        const double w = std::sqrt(w2);
        out.frequencies_hz(i) = w / (2.0 * std::numbers::pi);
        const auto phi = out.mode_shapes.col(i);
        out.damping_ratios(i) = w > 0.0 ? phi.dot(sys.damping * phi) / (2.0 * w) : 0.0;
    }
    return out;
}

ReducedSystem modal_truncation(const StructuralSystem& sys, Index n_keep) {
    const Index n = sys.dofs();
    if (n_keep < 1 || n_keep > n) {
        throw ValidationError("modal_truncation: n_keep must lie in [1, " + std::to_string(n) + "]");
    }
    ReducedSystem out;
    if (n_keep == n) {
        out.modal = sys;
        out.basis = Matrix::Identity(n, n);
        return out;
    }
    const ModalData modes = modal_analysis(sys);
    out.basis = modes.mode_shapes.leftCols(n_keep);
    const Matrix& phi = out.basis;
    StructuralSystem r;
    r.mass = numerics::symmetrize(phi.transpose() * sys.mass * phi);
    r.stiffness = numerics::symmetrize(phi.transpose() * sys.stiffness * phi);
    r.damping = numerics::symmetrize(phi.transpose() * sys.damping * phi);
    r.load_influence = phi.transpose() * sys.load_influence;
    // -M S_g u_g'' projects to -Phi^T M S_g u_g''; with M_r = I that is the new S_g.
    r.ground_influence = phi.transpose() * sys.mass * sys.ground_influence;
    out.modal = std::move(r);
    return out;
}

Matrix SensorLayout::displacement_selection(Index n) const { return selection(displacement_dofs, n); }
Matrix SensorLayout::velocity_selection(Index n) const { return selection(velocity_dofs, n); }
Matrix SensorLayout::acceleration_selection(Index n) const { return selection(acceleration_dofs, n); }

std::vector<std::string> SensorLayout::channel_names() const {
    std::vector<std::string> out = names_for("dis", displacement_dofs);
    const auto v = names_for("vel", velocity_dofs);
    const auto a = names_for("acc", acceleration_dofs);
    out.insert(out.end(), v.begin(), v.end());
    out.insert(out.end(), a.begin(), a.end());
    return out;
}

void SensorLayout::validate(Index n) const {
    for (const auto* block : {&displacement_dofs, &velocity_dofs, &acceleration_dofs}) {
        std::set<Index> seen;
        for (Index d : *block) {
            if (d < 0 || d >= n) throw DimensionError("sensor dof " + std::to_string(d) + " outside model");
            if (!seen.insert(d).second) throw ValidationError("duplicate sensor dof " + std::to_string(d));
        }
    }
}

ContinuousStateSpace assemble_continuous_ssm(const StructuralSystem& sys, const SensorLayout& sensors) {
    return assemble(sys, nullptr, sensors);
}

ContinuousStateSpace assemble_continuous_ssm(const ReducedSystem& sys, const SensorLayout& sensors) {
    if (sys.basis.cols() != sys.modal.dofs()) throw DimensionError("reduction basis does not match modal system");
    return assemble(sys.modal, &sys.basis, sensors);
}

StructuralSystem build_tower_standin(Index floors, double floor_mass, double first_frequency_hz,
                                     double damping_ratio) {
    if (floors < 5) throw ValidationError("tower stand-in needs at least five floors");
    if (!(floor_mass > 0.0) || !(first_frequency_hz > 0.0) || !(damping_ratio > 0.0)) {
        throw ValidationError("tower stand-in parameters must be positive");
    }
    // Uniform chain: w_1 = 2 sqrt(k/m) sin(pi / (2 (2n + 1))).
    const double s = std::sin(std::numbers::pi / (2.0 * (2.0 * static_cast<double>(floors) + 1.0)));
    const double w1 = 2.0 * std::numbers::pi * first_frequency_hz;
    const double k = floor_mass * std::pow(w1 / (2.0 * s), 2);
    std::vector<double> masses(static_cast<std::size_t>(floors), floor_mass);
    std::vector<double> stiff(static_cast<std::size_t>(floors), k);
    StructuralSystem undamped = build_shear_building(masses, stiff, {});
    const ModalData modes = modal_analysis(undamped);
    const double w5 = 2.0 * std::numbers::pi * modes.frequencies_hz(4);
    const RayleighDamping ray = rayleigh_from_ratios(w1, w5, damping_ratio, damping_ratio);
    return build_shear_building(masses, stiff, ray);
}

}  // namespace gplfm
