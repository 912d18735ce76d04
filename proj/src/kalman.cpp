#include "gplfm/kalman.hpp"

#include <cmath>
#include <limits>

#include "gplfm/errors.hpp"

namespace gplfm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Indices of finite entries of `y`.
std::vector<Index> present_channels(const Eigen::Ref<const RowVector>& y) {
    std::vector<Index> idx;
    idx.reserve(static_cast<std::size_t>(y.size()));
    for (Index i = 0; i < y.size(); ++i) {
        if (std::isfinite(y(i))) idx.push_back(i);
    }
    return idx;
}

// One measurement update in place. Returns the NLL contribution.
double update(Vector& m, Matrix& p, const Matrix& h, const Matrix& r, const Vector& y, bool joseph, long step,
              Vector* innovation, Matrix* s_out) {
    const Vector e = y - h * m;
    const Matrix ph_t = p * h.transpose();
    Matrix s = h * ph_t + r;
    s = numerics::symmetrize(s);
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success) {
        throw ConditioningError("innovation covariance S_k is not positive definite", step);
    }
    const Matrix gain = llt.solve(ph_t.transpose()).transpose();
    m += gain * e;
    if (joseph) {
        Matrix ikh = -gain * h;
        ikh.diagonal().array() += 1.0;
        p = ikh * p * ikh.transpose() + gain * r * gain.transpose();
    } else {
        p -= gain * s * gain.transpose();
    }
    p = numerics::symmetrize(p);

    const Matrix& l = llt.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    const double quad = e.dot(llt.solve(e));
    if (innovation) *innovation = e;
    if (s_out) *s_out = std::move(s);
    return log_det + quad;
}

}  // namespace

EstimationResult kalman_filter(const DiscreteModel& model, const Matrix& measurements, FilterOptions options) {
    model.validate();
    const Index n = model.state_count();
    const Index no = model.output_count();
    if (measurements.cols() != no) {
        throw DimensionError("measurement columns (" + std::to_string(measurements.cols()) +
                             ") do not match model outputs (" + std::to_string(no) + ")");
    }
    const Index steps = measurements.rows();

    EstimationResult out;
    out.predicted_means.resize(steps, n);
    out.filtered_means.resize(steps, n);
    out.filtered_variances.resize(steps, n);
    out.innovations = Matrix::Constant(steps, no, kNaN);
    out.innovation_variances = Matrix::Constant(steps, no, kNaN);
    if (options.store_covariances) {
        out.predicted_covariances.reserve(static_cast<std::size_t>(steps));
        out.filtered_covariances.reserve(static_cast<std::size_t>(steps));
    }
    out.innovation_covariances.reserve(static_cast<std::size_t>(steps));

    const Matrix& f = model.transition;
    Vector m = model.initial_mean;
    Matrix p = model.initial_covariance;
    for (Index k = 0; k < steps; ++k) {
        m = f * m;
        p = numerics::symmetrize(f * p * f.transpose() + model.process_noise);
        out.predicted_means.row(k) = m.transpose();
        if (options.store_covariances) out.predicted_covariances.push_back(p);

        const auto idx = present_channels(measurements.row(k));
        if (!idx.empty()) {
            const auto ni = static_cast<Index>(idx.size());
            Matrix h(ni, n);
            Matrix r(ni, ni);
            Vector y(ni);
            for (Index a = 0; a < ni; ++a) {
                h.row(a) = model.observation.row(idx[a]);
                y(a) = measurements(k, idx[a]);
                for (Index b = 0; b < ni; ++b) r(a, b) = model.measurement_noise(idx[a], idx[b]);
            }
            Vector e;
            Matrix s;
            out.nll += update(m, p, h, r, y, options.joseph_form, static_cast<long>(k + 1), &e, &s);
            for (Index a = 0; a < ni; ++a) {
                out.innovations(k, idx[a]) = e(a);
                out.innovation_variances(k, idx[a]) = s(a, a);
            }
            out.innovation_covariances.push_back(std::move(s));
        } else {
            out.innovation_covariances.emplace_back(0, 0);
        }
        out.filtered_means.row(k) = m.transpose();
        out.filtered_variances.row(k) = p.diagonal().transpose();
        if (options.store_covariances) out.filtered_covariances.push_back(p);
    }
    return out;
}

EstimationResult rts_smoother(const DiscreteModel& model, EstimationResult filtered) {
    const Index steps = filtered.steps();
    if (static_cast<Index>(filtered.filtered_covariances.size()) != steps ||
        static_cast<Index>(filtered.predicted_covariances.size()) != steps) {
        throw Error("rts_smoother: the filter run did not store covariances");
    }
    if (steps == 0) return filtered;
    const Matrix& f = model.transition;
    filtered.smoothed_means.resize(steps, model.state_count());
    filtered.smoothed_covariances.assign(static_cast<std::size_t>(steps), Matrix());

    Vector ms = filtered.filtered_means.row(steps - 1).transpose();
    Matrix ps = filtered.filtered_covariances.back();
    filtered.smoothed_means.row(steps - 1) = ms.transpose();
    filtered.smoothed_covariances.back() = ps;
    for (Index k = steps - 2; k >= 0; --k) {
        const auto uk = static_cast<std::size_t>(k);
        const Matrix& pf = filtered.filtered_covariances[uk];
        const Matrix& pp = filtered.predicted_covariances[uk + 1];
        Eigen::LDLT<Matrix> ldlt(pp);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
            throw ConditioningError("predicted covariance P_{k+1|k} is singular", static_cast<long>(k + 1));
        }
        // N_k = P_{k|k} F^T P_{k+1|k}^{-1}
        const Matrix gain = ldlt.solve(f * pf).transpose();
        if (!gain.allFinite()) throw ConditioningError("smoother gain is not finite", static_cast<long>(k + 1));
        const Vector mf = filtered.filtered_means.row(k).transpose();
        const Vector mp = filtered.predicted_means.row(k + 1).transpose();
        ms = mf + gain * (ms - mp);
        ps = numerics::symmetrize(pf + gain * (ps - pp) * gain.transpose());
        filtered.smoothed_means.row(k) = ms.transpose();
        filtered.smoothed_covariances[uk] = ps;
    }
    return filtered;
}

double innovations_nll(const DiscreteModel& model, const Matrix& measurements) {
    model.validate();
    if (measurements.cols() != model.output_count()) throw DimensionError("measurement columns do not match model outputs");
    const Index n = model.state_count();
    const Matrix& f = model.transition;
    Vector m = model.initial_mean;
    Matrix p = model.initial_covariance;
    double nll = 0.0;
    const bool complete = measurements.allFinite();
    for (Index k = 0; k < measurements.rows(); ++k) {
        m = f * m;
        p = numerics::symmetrize(f * p * f.transpose() + model.process_noise);
        if (complete) {
            nll += update(m, p, model.observation, model.measurement_noise, measurements.row(k).transpose(), true,
                          static_cast<long>(k + 1), nullptr, nullptr);
            continue;
        }
        const auto idx = present_channels(measurements.row(k));
        if (idx.empty()) continue;
        const auto ni = static_cast<Index>(idx.size());
        Matrix h(ni, n);
        Matrix r(ni, ni);
        Vector y(ni);
        for (Index a = 0; a < ni; ++a) {
            h.row(a) = model.observation.row(idx[a]);
            y(a) = measurements(k, idx[a]);
            for (Index b = 0; b < ni; ++b) r(a, b) = model.measurement_noise(idx[a], idx[b]);
        }
        nll += update(m, p, h, r, y, true, static_cast<long>(k + 1), nullptr, nullptr);
    }
    return nll;
}

SignalSeries project(const Matrix& readout, const Matrix& means, const std::vector<Matrix>& covariances) {
    const Index steps = means.rows();
    if (static_cast<Index>(covariances.size()) != steps) throw Error("project: covariances were not stored");
    SignalSeries out;
    out.mean = means * readout.transpose();
    out.variance.resize(steps, readout.rows());
    for (Index k = 0; k < steps; ++k) {
        const Matrix rp = readout * covariances[static_cast<std::size_t>(k)];
        out.variance.row(k) = (rp.cwiseProduct(readout)).rowwise().sum().transpose().cwiseMax(0.0);
    }
    return out;
}

SignalEstimates extract_estimates(const EstimationResult& result, const AugmentedModel& model, EstimateStage stage) {
    const bool smoothed = stage == EstimateStage::smoothed;
    if (smoothed && !result.smoothed()) throw Error("extract_estimates: result has not been smoothed");
    const Matrix& means = smoothed ? result.smoothed_means : result.filtered_means;
    const auto& covs = smoothed ? result.smoothed_covariances : result.filtered_covariances;
    if (means.cols() != model.state_count()) throw DimensionError("extract_estimates: result does not match model");
    SignalEstimates out;
    out.displacement = project(model.displacement_readout, means, covs);
    out.velocity = project(model.velocity_readout, means, covs);
    out.acceleration = project(model.acceleration_readout, means, covs);
    out.force = project(model.force_readout, means, covs);
    return out;
}

}  // namespace gplfm
