#include "gplfm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gplfm/errors.hpp"
#include "gplfm/signals.hpp"

namespace gplfm {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("estimate and truth lengths differ");
    if (a.empty()) throw ValidationError("metrics need at least one sample");
}

}  // namespace

DetectabilityReport detectability_check(const AugmentedModel& model) {
    const Matrix& f = model.f_ac;
    if (f.rows() == 0) throw ValidationError("detectability_check: model is empty");
    const Eigen::VectorXcd eig = Eigen::EigenSolver<Matrix>(f, false).eigenvalues();
    const double radius = eig.cwiseAbs().maxCoeff();
    const double stable_margin = 1e-8 * std::max(1.0, radius);
    const double same = 1e-9 * std::max(1.0, radius);

    DetectabilityReport out;
    for (Index i = 0; i < eig.size(); ++i) {
        const std::complex<double> s = eig(i);
        const bool seen = std::any_of(out.modes.begin(), out.modes.end(),
                                      [&](const ModeCheck& m) { return std::abs(m.eigenvalue - s) <= same; });
        if (seen) continue;
        ModeCheck m;
        m.eigenvalue = s;
        m.pbh = numerics::pbh_rank(f, model.h_ac, s);
        m.observable = m.pbh.deficiency == 0;
        m.stable = s.real() < -stable_margin;
        if (!m.observable) {
            out.unobservable_modes.push_back(s);
            if (!m.stable) out.undetectable_modes.push_back(s);
        }
        out.modes.push_back(m);
    }
    out.detectable = out.undetectable_modes.empty();
    return out;
}

numerics::RankReport transmission_zero_rank(const AugmentedModel& model, std::complex<double> s) {
    const Index ns = model.a_c.rows();
    const Index nl = model.f_star.rows();
    const Index no = model.g_c.rows();
    ComplexMatrix u = ComplexMatrix::Zero(ns + nl + no, ns + nl);
    u.topLeftCorner(ns, ns) = model.a_c.cast<std::complex<double>>();
    u.topLeftCorner(ns, ns).diagonal().array() -= s;
    u.block(0, ns, ns, nl) = model.b_star.cast<std::complex<double>>();
    u.block(ns, ns, nl, nl) = model.f_star.cast<std::complex<double>>();
    u.block(ns, ns, nl, nl).diagonal().array() -= s;
    u.block(ns + nl, 0, no, ns) = model.g_c.cast<std::complex<double>>();
    u.block(ns + nl, ns, no, nl) = model.j_star.cast<std::complex<double>>();
    return numerics::numerical_rank(u);
}

double rms(std::span<const double> x) {
    if (x.empty()) throw ValidationError("rms of an empty series");
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s / static_cast<double>(x.size()));
}

double rmse(std::span<const double> estimate, std::span<const double> truth) {
    require_same_length(estimate, truth);
    double s = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double e = estimate[i] - truth[i];
        s += e * e;
    }
    return std::sqrt(s / static_cast<double>(truth.size()));
}

double normalized_rmse(std::span<const double> estimate, std::span<const double> truth) {
    const double e = rmse(estimate, truth);
    const double t = rms(truth);
    if (t == 0.0) return e == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return e / t;
}

std::optional<double> correlation(std::span<const double> estimate, std::span<const double> truth) {
    require_same_length(estimate, truth);
    const auto n = static_cast<double>(truth.size());
    double me = 0.0;
    double mt = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        me += estimate[i];
        mt += truth[i];
    }
    me /= n;
    mt /= n;
    double see = 0.0;
    double stt = 0.0;
    double set = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double a = estimate[i] - me;
        const double b = truth[i] - mt;
        see += a * a;
        stt += b * b;
        set += a * b;
    }
    if (see <= 0.0 || stt <= 0.0) return std::nullopt;
    return std::clamp(set / std::sqrt(see * stt), -1.0, 1.0);
}

double peak_error(std::span<const double> estimate, std::span<const double> truth) {
    require_same_length(estimate, truth);
    double m = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) m = std::max(m, std::abs(estimate[i] - truth[i]));
    return m;
}

double drift_metric(std::span<const double> estimate, std::span<const double> truth, double cutoff_hz,
                    double sample_rate_hz) {
    require_same_length(estimate, truth);
    const auto sections = signals::butterworth_lowpass(4, cutoff_hz, sample_rate_hz);
    std::vector<double> err(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) err[i] = estimate[i] - truth[i];
    // Pad by three cutoff periods so the start-up transient settles before the record begins.
    const auto pad = static_cast<long>(std::ceil(3.0 * sample_rate_hz / cutoff_hz));
    const double low = rms(signals::sosfiltfilt(sections, err, pad));
    const double t = rms(truth);
    if (t == 0.0) return low == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return low / t;
}

const SignalMetrics* MetricSet::find(const std::string& name) const {
    for (const auto& s : signals) {
        if (s.signal == name) return &s;
    }
    return nullptr;
}

SignalMetrics score_signal(std::string name, std::span<const double> estimate, std::span<const double> truth,
                           double cutoff_hz, double sample_rate_hz) {
    SignalMetrics m;
    m.signal = std::move(name);
    m.rmse = rmse(estimate, truth);
    m.normalized_rmse = normalized_rmse(estimate, truth);
    m.drift = drift_metric(estimate, truth, cutoff_hz, sample_rate_hz);
    m.peak_error = peak_error(estimate, truth);
    m.correlation = correlation(estimate, truth);
    return m;
}

}  // namespace gplfm
