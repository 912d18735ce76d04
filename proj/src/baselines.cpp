#include "gplfm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gplfm/errors.hpp"

namespace gplfm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Matrix initial_input_covariance(const BaselineConfig& cfg) { return cfg.p_f0.size() > 0 ? cfg.p_f0 : cfg.q_f; }

void check_config(const BaselineConfig& cfg, Index nf) {
    if (cfg.q_f.rows() != nf || cfg.q_f.cols() != nf) throw DimensionError("Q_f must be n_f x n_f");
    if (cfg.p_f0.size() > 0 && (cfg.p_f0.rows() != nf || cfg.p_f0.cols() != nf))
        throw DimensionError("P_f0 must be n_f x n_f");
    if (cfg.m_f0.size() > 0 && cfg.m_f0.size() != nf) throw DimensionError("m_f0 must have n_f entries");
    if ((cfg.q_f - cfg.q_f.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, cfg.q_f.cwiseAbs().maxCoeff()))
        throw ValidationError("Q_f must be symmetric");
}

}  // namespace

const char* to_string(BaselineMethod m) {
    switch (m) {
        case BaselineMethod::akf: return "akf";
        case BaselineMethod::akfdm: return "akfdm";
        case BaselineMethod::dkf: return "dkf";
    }
    return "?";
}

BaselineMethod baseline_method_from_string(const std::string& name) {
    if (name == "akf") return BaselineMethod::akf;
    if (name == "akfdm") return BaselineMethod::akfdm;
    if (name == "dkf") return BaselineMethod::dkf;
    throw ConfigError("unknown baseline method '" + name + "'");
}

BaselineConfig BaselineConfig::isotropic(Index n_f, double q) {
    BaselineConfig cfg;
    cfg.q_f = q * Matrix::Identity(n_f, n_f);
    return cfg;
}

AugmentedModel akf_model(const ContinuousStateSpace& ssm, const BaselineConfig& cfg, const Matrix& q_x,
                         const Matrix& r, const StatePrior& prior, double dt) {
    const Index ns = ssm.state_count();
    const Index nf = ssm.input_count();
    const Index no = ssm.output_count();
    const Index na = ns + nf;
    check_config(cfg, nf);
    if (q_x.rows() != ns || q_x.cols() != ns) throw DimensionError("Q_x must be n_s x n_s");
    if (r.rows() != no || r.cols() != no) throw DimensionError("R must be n_o x n_o");
    if (prior.covariance.rows() != ns || prior.covariance.cols() != ns)
        throw DimensionError("prior state covariance must be n_s x n_s");
    if (!(dt > 0.0)) throw ValidationError("akf_model: dt must be positive");

    AugmentedModel model;
    model.layout.structural_states = ns;
    for (Index j = 0; j < nf; ++j) model.layout.forces.push_back({ns + j, 1, RowVector::Ones(1)});

    model.a_c = ssm.a;
    model.b_star = ssm.b;
    model.f_star = Matrix::Zero(nf, nf);
    model.g_c = ssm.g;
    model.j_star = ssm.j;
    model.f_ac = Matrix::Zero(na, na);
    model.f_ac.topLeftCorner(ns, ns) = ssm.a;
    model.f_ac.topRightCorner(ns, nf) = ssm.b;
    model.h_ac.resize(no, na);
    model.h_ac << ssm.g, ssm.j;
    model.q_c = Matrix::Zero(na, na);
    model.measurement_noise = r;
    model.structural_noise = q_x;
    model.initial_mean = Vector::Zero(na);
    if (prior.mean.size() == ns) model.initial_mean.head(ns) = prior.mean;
    if (cfg.m_f0.size() == nf) model.initial_mean.tail(nf) = cfg.m_f0;
    model.initial_covariance = numerics::block_diagonal(prior.covariance, initial_input_covariance(cfg));
    model.channel_names = ssm.channel_names;

    const Index nphys = ssm.physical_dofs();
    model.displacement_readout = Matrix::Zero(nphys, na);
    model.displacement_readout.leftCols(ns) = ssm.displacement_map;
    model.velocity_readout = Matrix::Zero(nphys, na);
    model.velocity_readout.leftCols(ns) = ssm.velocity_map;
    model.acceleration_readout.resize(nphys, na);
    model.acceleration_readout << ssm.acceleration_map, ssm.acceleration_feedthrough;
    model.force_readout = Matrix::Zero(nf, na);
    model.force_readout.rightCols(nf) = Matrix::Identity(nf, nf);

    DiscreteModel d;
    d.dt = dt;
    d.transition = numerics::matrix_exponential(model.f_ac, dt);
    d.observation = model.h_ac;
    d.process_noise = numerics::block_diagonal(q_x, cfg.q_f);
    d.measurement_noise = r;
    d.initial_mean = model.initial_mean;
    d.initial_covariance = model.initial_covariance;
    model.discrete = std::move(d);
    return model;
}

AugmentedModel akfdm_model(const ContinuousStateSpace& ssm, const BaselineConfig& cfg, const Matrix& q_x,
                           const Matrix& r, const StatePrior& prior, double dt) {
    const auto nd = static_cast<Index>(cfg.dummy_dofs.size());
    if (nd == 0) throw ValidationError("AKFdm needs at least one dummy displacement dof");
    if (cfg.r_dm.rows() != nd || cfg.r_dm.cols() != nd) throw DimensionError("R_dm must be n_dummy x n_dummy");
    Eigen::LLT<Matrix> chol(cfg.r_dm);
    if (chol.info() != Eigen::Success) throw ValidationError("R_dm must be symmetric positive definite");

    AugmentedModel model = akf_model(ssm, cfg, q_x, r, prior, dt);
    const Index na = model.state_count();
    const Index no = model.output_count();
    Matrix dummy_rows(nd, na);
    for (Index i = 0; i < nd; ++i) {
        const Index dof = cfg.dummy_dofs[static_cast<std::size_t>(i)];
        if (dof < 0 || dof >= ssm.physical_dofs()) throw ValidationError("dummy dof out of range");
        dummy_rows.row(i) = model.displacement_readout.row(dof);
        model.channel_names.push_back("dummy_dis_" + std::to_string(dof + 1));
    }
    Matrix h(no + nd, na);
    h << model.h_ac, dummy_rows;
    model.h_ac = h;
    model.measurement_noise = numerics::block_diagonal(r, cfg.r_dm);
    model.discrete->observation = model.h_ac;
    model.discrete->measurement_noise = model.measurement_noise;
    return model;
}

Matrix with_dummy_observations(const Matrix& measurements, Index dummy_count) {
    Matrix out = Matrix::Zero(measurements.rows(), measurements.cols() + dummy_count);
    out.leftCols(measurements.cols()) = measurements;
    return out;
}

EstimationResult dkf_estimate(const ContinuousStateSpace& ssm, double dt, const Matrix& measurements,
                              const BaselineConfig& cfg, const Matrix& q_x, const Matrix& r, const StatePrior& prior) {
    const Index ns = ssm.state_count();
    const Index nf = ssm.input_count();
    const Index no = ssm.output_count();
    check_config(cfg, nf);
    if (measurements.cols() != no) throw DimensionError("measurement columns do not match model outputs");
    if (q_x.rows() != ns || q_x.cols() != ns) throw DimensionError("Q_x must be n_s x n_s");
    if (r.rows() != no || r.cols() != no) throw DimensionError("R must be n_o x n_o");

    const Matrix& g = ssm.g;
    const Matrix& j = ssm.j;
    const double g_scale = std::max(1.0, g.size() > 0 ? g.cwiseAbs().maxCoeff() : 0.0);
    if (j.size() == 0 || j.cwiseAbs().maxCoeff() <= 1e-12 * g_scale) {
        throw DegeneracyError(
            "DKF input update degenerates: the feedthrough matrix J is zero, so the input gain vanishes");
    }
    const auto zoh = numerics::discretize_zoh(ssm.a, ssm.b, dt);
    const Matrix& a = zoh.a;
    const Matrix& b = zoh.b;

    const Index steps = measurements.rows();
    const Index na = ns + nf;
    EstimationResult out;
    out.predicted_means.resize(steps, na);
    out.filtered_means.resize(steps, na);
    out.filtered_variances.resize(steps, na);
    out.innovations = Matrix::Constant(steps, no, kNaN);
    out.innovation_variances = Matrix::Constant(steps, no, kNaN);

    Vector x = prior.mean.size() == ns ? prior.mean : Vector::Zero(ns);
    Matrix px = prior.covariance;
    Vector f = cfg.m_f0.size() == nf ? cfg.m_f0 : Vector::Zero(nf);
    Matrix pf = initial_input_covariance(cfg);

    for (Index k = 0; k < steps; ++k) {
        const Vector y = measurements.row(k).transpose();
        if (!y.allFinite()) throw ValidationError("DKF does not support missing measurements");

        // The state at t_k follows from the previous state and the input held over the last step.
        const Vector x_pred = a * x + b * f;
        const Matrix px_pred = numerics::symmetrize(a * px * a.transpose() + q_x);
        out.predicted_means.row(k) << x_pred.transpose(), f.transpose();

        // Input stage: random-walk prediction, update through J given the predicted state.
        const Matrix pf_pred = numerics::symmetrize(pf + cfg.q_f);
        const Matrix pfj = pf_pred * j.transpose();
        Eigen::LLT<Matrix> sf(numerics::symmetrize(j * pfj + g * px_pred * g.transpose() + r));
        if (sf.info() != Eigen::Success) throw ConditioningError("DKF input innovation covariance is singular", k + 1);
        const Matrix kf = sf.solve(pfj.transpose()).transpose();
        f = f + kf * (y - g * x_pred - j * f);
        pf = numerics::symmetrize(pf_pred - kf * j * pf_pred);

        // State stage: update through G with the updated input.
        const Matrix pg = px_pred * g.transpose();
        const Matrix s = numerics::symmetrize(g * pg + r);
        Eigen::LLT<Matrix> sx(s);
        if (sx.info() != Eigen::Success) throw ConditioningError("DKF state innovation covariance is singular", k + 1);
        const Matrix kx = sx.solve(pg.transpose()).transpose();
        const Vector e = y - g * x_pred - j * f;
        x = x_pred + kx * e;
        Matrix ikg = -kx * g;
        ikg.diagonal().array() += 1.0;
        px = numerics::symmetrize(ikg * px_pred * ikg.transpose() + kx * r * kx.transpose());

        const Matrix& l = sx.matrixL();
        out.nll += 2.0 * l.diagonal().array().log().sum() + e.dot(sx.solve(e));
        out.innovations.row(k) = e.transpose();
        out.innovation_variances.row(k) = s.diagonal().transpose();
        out.innovation_covariances.push_back(s);

        out.filtered_means.row(k) << x.transpose(), f.transpose();
        Matrix joint = numerics::block_diagonal(px, pf);
        out.filtered_variances.row(k) = joint.diagonal().transpose();
        out.filtered_covariances.push_back(std::move(joint));
        out.predicted_covariances.push_back(numerics::block_diagonal(px_pred, pf_pred));
    }
    return out;
}

EstimationResult run_baseline(BaselineMethod method, const ContinuousStateSpace& ssm, double dt,
                              const Matrix& measurements, const BaselineConfig& cfg, const Matrix& q_x,
                              const Matrix& r, const StatePrior& prior) {
    switch (method) {
        case BaselineMethod::akf: {
            const auto model = akf_model(ssm, cfg, q_x, r, prior, dt);
            return kalman_filter(model.discretized(), measurements);
        }
        case BaselineMethod::akfdm: {
            const auto model = akfdm_model(ssm, cfg, q_x, r, prior, dt);
            return kalman_filter(model.discretized(),
                                 with_dummy_observations(measurements, static_cast<Index>(cfg.dummy_dofs.size())));
        }
        case BaselineMethod::dkf:
            return dkf_estimate(ssm, dt, measurements, cfg, q_x, r, prior);
    }
    throw ConfigError("unknown baseline method");
}

Index max_curvature_corner(std::span<const double> x, std::span<const double> y, std::vector<double>* curvature) {
    if (x.size() != y.size()) throw DimensionError("curvature: x and y lengths differ");
    const std::size_t n = x.size();
    if (n < 3) throw ValidationError("curvature needs at least three points");
    std::vector<double> kappa(n, kNaN);
    Index best = -1;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dx = 0.5 * (x[i + 1] - x[i - 1]);
        const double dy = 0.5 * (y[i + 1] - y[i - 1]);
        const double ddx = x[i + 1] - 2.0 * x[i] + x[i - 1];
        const double ddy = y[i + 1] - 2.0 * y[i] + y[i - 1];
        const double denom = std::pow(dx * dx + dy * dy, 1.5);
        if (!(denom > 0.0)) continue;
        kappa[i] = (dx * ddy - dy * ddx) / denom;
        if (best < 0 || kappa[i] > kappa[static_cast<std::size_t>(best)]) best = static_cast<Index>(i);
    }
    if (curvature) *curvature = std::move(kappa);
    return best;
}

LCurve l_curve(const ContinuousStateSpace& ssm, double dt, const Matrix& measurements, BaselineMethod method,
               std::span<const double> grid, const BaselineConfig& base, const Matrix& q_x, const Matrix& r,
               const StatePrior& prior) {
    if (grid.size() < 5) throw ValidationError("L-curve grid needs at least five points");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw ValidationError("L-curve grid values must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw ValidationError("L-curve grid must be increasing");
    }
    const double step = std::log(grid[1] / grid[0]);
    for (std::size_t i = 2; i < grid.size(); ++i) {
        if (std::abs(std::log(grid[i] / grid[i - 1]) - step) > 1e-6 * std::abs(step)) {
            throw ValidationError("L-curve grid must be log-spaced");
        }
    }

    const Index nf = ssm.input_count();
    const Index no = ssm.output_count();
    LCurve curve;
    for (double q : grid) {
        LCurvePoint pt;
        pt.q = q;
        BaselineConfig cfg = base;
        cfg.q_f = q * Matrix::Identity(nf, nf);
        cfg.p_f0 = Matrix();
        pt.q_norm = q;
        try {
            const EstimationResult res = run_baseline(method, ssm, dt, measurements, cfg, q_x, r, prior);
            double total = 0.0;
            for (Index k = 0; k < res.innovations.rows(); ++k) {
                const auto e = res.innovations.row(k).head(no);
                if (e.allFinite()) total += e.norm();
            }
            pt.innovation_sum = total;
            pt.ok = std::isfinite(total) && total > 0.0;
            if (!pt.ok) pt.error = "non-finite innovation sum";
        } catch (const Error& e) {
            pt.error = e.what();
        }
        curve.points.push_back(pt);
    }

    std::vector<double> lx;
    std::vector<double> ly;
    std::vector<std::size_t> where;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        if (!curve.points[i].ok) continue;
        lx.push_back(std::log10(curve.points[i].q_norm));
        ly.push_back(std::log10(curve.points[i].innovation_sum));
        where.push_back(i);
    }
    curve.curvature.assign(curve.points.size(), kNaN);
    if (lx.size() < 3) throw Error("L-curve: fewer than three grid points succeeded");
    std::vector<double> kappa;
    const Index c = max_curvature_corner(lx, ly, &kappa);
    for (std::size_t i = 0; i < where.size(); ++i) curve.curvature[where[i]] = kappa[i];
    if (c < 0) throw Error("L-curve: curvature undefined at every point");
    curve.corner = static_cast<Index>(where[static_cast<std::size_t>(c)]);
    return curve;
}

}  // namespace gplfm
