#include "gplfm/augmented.hpp"

#include <cmath>
#include <string>

#include "gplfm/errors.hpp"

namespace gplfm {

void DiscreteModel::validate() const {
    const Index n = transition.rows();
    if (transition.cols() != n) throw DimensionError("transition matrix must be square");
    if (observation.cols() != n) throw DimensionError("observation matrix column count must equal state count");
    if (process_noise.rows() != n || process_noise.cols() != n) throw DimensionError("process noise must be n x n");
    const Index m = observation.rows();
    if (measurement_noise.rows() != m || measurement_noise.cols() != m)
        throw DimensionError("measurement noise must be n_o x n_o");
    if (initial_mean.size() != n) throw DimensionError("initial mean must have n entries");
    if (initial_covariance.rows() != n || initial_covariance.cols() != n)
        throw DimensionError("initial covariance must be n x n");
}

Index StateLayout::latent_states() const {
    Index total = 0;
    for (const auto& b : forces) total += b.size;
    return total;
}

StatePrior StatePrior::isotropic(Index n_s, double variance) {
    return {Vector::Zero(n_s), variance * Matrix::Identity(n_s, n_s)};
}

const DiscreteModel& AugmentedModel::discretized() const {
    if (!discrete) throw Error("augmented model has not been discretized");
    return *discrete;
}

AugmentedModel assemble_augmented(const ContinuousStateSpace& ssm, std::span<const KernelRealization> kernels,
                                  const Matrix& q_x, const Matrix& r, const StatePrior& prior) {
    const Index ns = ssm.state_count();
    const Index nf = ssm.input_count();
    const Index no = ssm.output_count();
    if (static_cast<Index>(kernels.size()) != nf) {
        throw ConfigError("expected one kernel per input force (" + std::to_string(nf) + "), got " +
                          std::to_string(kernels.size()));
    }
    if (q_x.rows() != ns || q_x.cols() != ns) throw DimensionError("Q_x must be n_s x n_s");
    if (r.rows() != no || r.cols() != no) throw DimensionError("R must be n_o x n_o");
    if (prior.covariance.rows() != ns || prior.covariance.cols() != ns)
        throw DimensionError("prior state covariance must be n_s x n_s");
    if (prior.mean.size() != 0 && prior.mean.size() != ns) throw DimensionError("prior state mean must have n_s entries");
    Eigen::LLT<Matrix> r_chol(r);
    if (no > 0 && r_chol.info() != Eigen::Success) throw ValidationError("R must be symmetric positive definite");

    AugmentedModel model;
    model.layout.structural_states = ns;
    Index offset = ns;
    for (const auto& k : kernels) {
        model.layout.forces.push_back({offset, k.dimension(), k.h});
        offset += k.dimension();
    }
    const Index na = offset;
    const Index latent = na - ns;

    model.a_c = ssm.a;
    model.g_c = ssm.g;
    model.b_star = Matrix::Zero(ns, latent);
    model.j_star = Matrix::Zero(no, latent);
    model.f_star = Matrix::Zero(latent, latent);
    Matrix q_latent = Matrix::Zero(latent, latent);
    Matrix p_latent = Matrix::Zero(latent, latent);
    model.force_readout = Matrix::Zero(nf, na);
    Matrix feedthrough_star = Matrix::Zero(ssm.physical_dofs(), latent);
    for (Index j = 0; j < nf; ++j) {
        const auto& k = kernels[static_cast<std::size_t>(j)];
        const auto& blk = model.layout.forces[static_cast<std::size_t>(j)];
        const Index o = blk.offset - ns;
        model.b_star.middleCols(o, blk.size) = ssm.b.col(j) * k.h;
        model.j_star.middleCols(o, blk.size) = ssm.j.col(j) * k.h;
        model.f_star.block(o, o, blk.size, blk.size) = k.f;
        q_latent.block(o, o, blk.size, blk.size) = k.noise_density();
        p_latent.block(o, o, blk.size, blk.size) = k.p_inf;
        model.force_readout.block(j, blk.offset, 1, blk.size) = k.h;
        feedthrough_star.middleCols(o, blk.size) = ssm.acceleration_feedthrough.col(j) * k.h;
    }

    model.f_ac = Matrix::Zero(na, na);
    model.f_ac.topLeftCorner(ns, ns) = ssm.a;
    model.f_ac.topRightCorner(ns, latent) = model.b_star;
    model.f_ac.bottomRightCorner(latent, latent) = model.f_star;

    model.h_ac = Matrix::Zero(no, na);
    model.h_ac.leftCols(ns) = ssm.g;
    model.h_ac.rightCols(latent) = model.j_star;

    model.q_c = numerics::block_diagonal(Matrix::Zero(ns, ns), q_latent);
    model.measurement_noise = r;
    model.structural_noise = q_x;
    model.initial_mean = Vector::Zero(na);
    if (prior.mean.size() == ns) model.initial_mean.head(ns) = prior.mean;
    model.initial_covariance = numerics::block_diagonal(prior.covariance, p_latent);
    model.channel_names = ssm.channel_names;

    const Index nphys = ssm.physical_dofs();
    model.displacement_readout = Matrix::Zero(nphys, na);
    model.displacement_readout.leftCols(ns) = ssm.displacement_map;
    model.velocity_readout = Matrix::Zero(nphys, na);
    model.velocity_readout.leftCols(ns) = ssm.velocity_map;
    model.acceleration_readout = Matrix::Zero(nphys, na);
    model.acceleration_readout.leftCols(ns) = ssm.acceleration_map;
    model.acceleration_readout.rightCols(latent) = feedthrough_star;
    return model;
}

AugmentedModel discretize(AugmentedModel model, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("discretize: dt must be positive");
    const Index na = model.state_count();
    const Index ns = model.layout.structural_states;
    DiscreteModel d;
    d.dt = dt;
    d.transition = numerics::matrix_exponential(model.f_ac, dt);
    d.observation = model.h_ac;
    d.process_noise = numerics::discrete_process_noise(model.f_ac, model.q_c, dt);
    d.process_noise.topLeftCorner(ns, ns) += model.structural_noise;
    d.measurement_noise = model.measurement_noise;
    d.initial_mean = model.initial_mean;
    d.initial_covariance = model.initial_covariance;
    if (d.transition.rows() != na) throw DimensionError("discretize: inconsistent model");
    model.discrete = std::move(d);
    return model;
}

}  // namespace gplfm
