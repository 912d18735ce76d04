#include "gplfm/harness/simulate.hpp"

#include <cmath>
#include <random>

#include "gplfm/errors.hpp"

namespace gplfm::harness {

Simulation simulate_response(const ContinuousStateSpace& ssm, const Matrix& forces, double dt,
                             const Vector& initial_state) {
    const Index ns = ssm.state_count();
    const Index nf = ssm.input_count();
    if (forces.cols() != nf) throw DimensionError("force history must have one column per model input");
    if (initial_state.size() != 0 && initial_state.size() != ns) throw DimensionError("initial state must have n_s entries");
    const Eigen::VectorXcd eig = Eigen::EigenSolver<Matrix>(ssm.a, false).eigenvalues();
    for (Index i = 0; i < eig.size(); ++i) {
        if (eig(i).real() > 1e-9 * std::max(1.0, std::abs(eig(i)))) {
            throw StabilityError("structural model is unstable; cannot simulate");
        }
    }
    const auto zoh = numerics::discretize_zoh(ssm.a, ssm.b, dt);
    const Index steps = forces.rows();
    Simulation sim;
    sim.states.resize(steps, ns);
    Vector x = initial_state.size() == ns ? initial_state : Vector::Zero(ns);
    for (Index k = 0; k < steps; ++k) {
        sim.states.row(k) = x.transpose();
        x = zoh.a * x + zoh.b * forces.row(k).transpose();
    }
    sim.clean = sim.states * ssm.g.transpose() + forces * ssm.j.transpose();
    sim.displacement = sim.states * ssm.displacement_map.transpose();
    sim.velocity = sim.states * ssm.velocity_map.transpose();
    sim.acceleration = sim.states * ssm.acceleration_map.transpose() + forces * ssm.acceleration_feedthrough.transpose();
    return sim;
}

Matrix add_measurement_noise(const Matrix& clean, double noise_fraction, std::uint64_t seed) {
    if (noise_fraction < 0.0 || !std::isfinite(noise_fraction)) throw ValidationError("noise fraction must be non-negative");
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6e6f6973u};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> unit(0.0, 1.0);
    Matrix out = clean;
    if (clean.rows() == 0) return out;
    for (Index j = 0; j < clean.cols(); ++j) {
        const double std_j = noise_fraction * std::sqrt(clean.col(j).squaredNorm() / static_cast<double>(clean.rows()));
        for (Index k = 0; k < clean.rows(); ++k) out(k, j) += std_j * unit(rng);
    }
    return out;
}

}  // namespace gplfm::harness
