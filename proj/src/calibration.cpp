#include "gplfm/calibration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "gplfm/errors.hpp"
#include "gplfm/kalman.hpp"

namespace gplfm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double radical_inverse(std::uint64_t i, unsigned base) {
    double inv = 1.0 / base;
    double f = inv;
    double r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

unsigned nth_prime(std::size_t n) {
    unsigned c = 1;
    std::size_t found = 0;
    while (true) {
        ++c;
        bool prime = true;
        for (unsigned d = 2; d * d <= c; ++d) {
            if (c % d == 0) {
                prime = false;
                break;
            }
        }
        if (prime && found++ == n) return c;
    }
}

struct SimplexResult {
    std::vector<double> x;
    double value = kInf;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::vector<double> trajectory;
};

// Nelder-Mead with every trial point projected into the box [lo, hi].
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& fn, std::vector<double> x0,
                          const std::vector<double>& lo, const std::vector<double>& hi, double tol, int max_iter) {
    const std::size_t n = x0.size();
    SimplexResult out;
    auto clip = [&](std::vector<double>& x) {
        for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    };
    auto eval = [&](const std::vector<double>& x) {
        ++out.evaluations;
        const double v = fn(x);
        return std::isnan(v) ? kInf : v;
    };
    clip(x0);

    std::vector<std::vector<double>> pts{x0};
    for (std::size_t i = 0; i < n; ++i) {
        auto p = x0;
        const double step = 0.05 * (hi[i] - lo[i]);
        p[i] = (p[i] + step <= hi[i]) ? p[i] + step : p[i] - step;
        clip(p);
        pts.push_back(std::move(p));
    }
    std::vector<double> vals;
    for (const auto& p : pts) vals.push_back(eval(p));

    std::vector<std::size_t> order(n + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    };
    auto diameter = [&] {
        double d = 0.0;
        const auto& best = pts[order[0]];
        for (const auto& p : pts) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s = std::max(s, std::abs(p[i] - best[i]));
            d = std::max(d, s);
        }
        return d;
    };
    auto combine = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = c[i] + t * (w[i] - c[i]);
        clip(p);
        return p;
    };

    sort_simplex();
    while (out.iterations < max_iter) {
        if (diameter() <= tol) {
            out.converged = true;
            break;
        }
        ++out.iterations;
        const std::size_t worst = order[n];
        const std::size_t second = order[n - 1];
        std::vector<double> c(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < n; ++i) c[i] += pts[order[k]][i] / static_cast<double>(n);
        }
        const auto xr = combine(c, pts[worst], -1.0);
        const double fr = eval(xr);
        if (fr < vals[order[0]]) {
            const auto xe = combine(c, pts[worst], -2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
        } else if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
        } else {
            const bool outside = fr < vals[worst];
            const auto xc = combine(c, outside ? xr : pts[worst], 0.5);
            const double fc = eval(xc);
            if (fc < (outside ? fr : vals[worst])) {
                pts[worst] = xc;
                vals[worst] = fc;
            } else {
                const auto best = pts[order[0]];
                for (std::size_t k = 1; k <= n; ++k) {
                    pts[order[k]] = combine(best, pts[order[k]], 0.5);
                    vals[order[k]] = eval(pts[order[k]]);
                }
            }
        }
        sort_simplex();
        out.trajectory.push_back(vals[order[0]]);
    }
    if (!out.converged && diameter() <= tol) out.converged = true;
    out.x = pts[order[0]];
    out.value = vals[order[0]];
    return out;
}

double mean_measurement_variance(const Matrix& y) {
    double total = 0.0;
    Index channels = 0;
    for (Index j = 0; j < y.cols(); ++j) {
        double s = 0.0;
        double s2 = 0.0;
        Index n = 0;
        for (Index k = 0; k < y.rows(); ++k) {
            const double v = y(k, j);
            if (!std::isfinite(v)) continue;
            s += v;
            s2 += v * v;
            ++n;
        }
        if (n < 2) continue;
        const double m = s / static_cast<double>(n);
        total += std::max(0.0, s2 / static_cast<double>(n) - m * m);
        ++channels;
    }
    return channels > 0 && total > 0.0 ? total / static_cast<double>(channels) : 1.0;
}

}  // namespace

std::vector<double> HyperParams::free_values() const {
    std::vector<double> v;
    for (Index g = 0; g < groups(); ++g) {
        const auto u = static_cast<std::size_t>(g);
        if (!fix_alpha2[u]) v.push_back(log_alpha2[u]);
        if (!fix_lengthscale[u]) v.push_back(log_lengthscale[u]);
    }
    return v;
}

void HyperParams::set_free_values(const std::vector<double>& v) {
    std::size_t i = 0;
    for (Index g = 0; g < groups(); ++g) {
        const auto u = static_cast<std::size_t>(g);
        if (!fix_alpha2[u]) log_alpha2[u] = v.at(i++);
        if (!fix_lengthscale[u]) log_lengthscale[u] = v.at(i++);
    }
    if (i != v.size()) throw DimensionError("hyperparameter vector has the wrong length");
}

Index HyperParams::free_count() const { return static_cast<Index>(free_values().size()); }

CalibrationProblem CalibrationProblem::make(ContinuousStateSpace ssm, double dt, Matrix measurements, Matrix q_x,
                                            Matrix r, StatePrior prior, std::vector<KernelSpec> kernels, bool shared) {
    if (static_cast<Index>(kernels.size()) != ssm.input_count()) {
        throw ConfigError("expected one kernel per input force (" + std::to_string(ssm.input_count()) + "), got " +
                          std::to_string(kernels.size()));
    }
    for (const auto& k : kernels) k.validate();
    CalibrationProblem p;
    p.ssm = std::move(ssm);
    p.dt = dt;
    p.measurements = std::move(measurements);
    p.q_x = std::move(q_x);
    p.r = std::move(r);
    p.prior = std::move(prior);
    p.kernels = std::move(kernels);
    std::vector<std::size_t> representative;
    for (std::size_t i = 0; i < p.kernels.size(); ++i) {
        const auto& k = p.kernels[i];
        Index group = -1;
        if (shared) {
            for (std::size_t g = 0; g < representative.size(); ++g) {
                const auto& o = p.kernels[representative[g]];
                if (o.family == k.family && o.order == k.order && o.alpha2 == k.alpha2 && o.lengthscale == k.lengthscale) {
                    group = static_cast<Index>(g);
                    break;
                }
            }
        }
        if (group < 0) {
            group = static_cast<Index>(representative.size());
            representative.push_back(i);
        }
        p.group_of.push_back(group);
    }
    return p;
}

Index CalibrationProblem::group_count() const {
    Index n = 0;
    for (Index g : group_of) n = std::max(n, g + 1);
    return n;
}

HyperParams CalibrationProblem::initial_params() const {
    const auto n = static_cast<std::size_t>(group_count());
    HyperParams h;
    h.log_alpha2.assign(n, 0.0);
    h.log_lengthscale.assign(n, 0.0);
    h.fix_alpha2.assign(n, false);
    h.fix_lengthscale.assign(n, false);
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        const auto g = static_cast<std::size_t>(group_of[i]);
        h.log_alpha2[g] = std::log(kernels[i].alpha2);
        h.log_lengthscale[g] = std::log(kernels[i].lengthscale);
    }
    return h;
}

std::vector<KernelSpec> CalibrationProblem::specs_for(const HyperParams& params) const {
    if (params.groups() != group_count()) throw DimensionError("hyperparameters do not match the kernel groups");
    std::vector<KernelSpec> out = kernels;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto g = static_cast<std::size_t>(group_of[i]);
        out[i].alpha2 = std::exp(params.log_alpha2[g]);
        out[i].lengthscale = std::exp(params.log_lengthscale[g]);
    }
    return out;
}

AugmentedModel CalibrationProblem::model_for(const HyperParams& params) const {
    std::vector<KernelRealization> reals;
    for (const auto& s : specs_for(params)) reals.push_back(kernel_to_ssm(s));
    return discretize(assemble_augmented(ssm, reals, q_x, r, prior), dt);
}

double nll(const HyperParams& params, const CalibrationProblem& problem) {
    try {
        const AugmentedModel model = problem.model_for(params);
        const double v = innovations_nll(model.discretized(), problem.measurements);
        return std::isfinite(v) ? v : kInf;
    } catch (const Error&) {
        return kInf;
    }
}

void default_bounds(const CalibrationProblem& problem, OptimizerSettings& settings) {
    const auto n = static_cast<std::size_t>(problem.group_count());
    const double s2 = mean_measurement_variance(problem.measurements);
    const double span = problem.dt * static_cast<double>(std::max<Index>(problem.measurements.rows(), 2));
    if (settings.log_alpha2_bounds.empty()) {
        settings.log_alpha2_bounds.assign(n, {std::log(1e-4 * s2), std::log(1e6 * s2)});
    }
    if (settings.log_lengthscale_bounds.empty()) {
        settings.log_lengthscale_bounds.assign(n, {std::log(problem.dt), std::log(span)});
    }
}

OptimizationReport optimize(const CalibrationProblem& problem, OptimizerSettings settings) {
    const auto clock_start = std::chrono::steady_clock::now();
    if (settings.n_starts < 1) throw ValidationError("n_starts must be at least 1");
    if (!(settings.tolerance > 0.0) || settings.max_iterations < 1) throw ValidationError("invalid optimizer settings");
    default_bounds(problem, settings);
    const auto groups = static_cast<std::size_t>(problem.group_count());
    if (settings.log_alpha2_bounds.size() != groups || settings.log_lengthscale_bounds.size() != groups) {
        throw DimensionError("optimizer bounds must be given per parameter group");
    }

    HyperParams base = settings.base ? *settings.base
                       : settings.explicit_starts.empty() ? problem.initial_params()
                                                          : settings.explicit_starts.front();
    if (base.groups() != problem.group_count()) throw DimensionError("start point does not match the kernel groups");

    std::vector<double> lo;
    std::vector<double> hi;
    for (std::size_t g = 0; g < groups; ++g) {
        const auto check = [](std::pair<double, double> b) {
            if (!std::isfinite(b.first) || !std::isfinite(b.second) || !(b.first < b.second))
                throw ValidationError("optimizer bounds must be finite with lower < upper");
        };
        check(settings.log_alpha2_bounds[g]);
        check(settings.log_lengthscale_bounds[g]);
        if (!base.fix_alpha2[g]) {
            lo.push_back(settings.log_alpha2_bounds[g].first);
            hi.push_back(settings.log_alpha2_bounds[g].second);
        }
        if (!base.fix_lengthscale[g]) {
            lo.push_back(settings.log_lengthscale_bounds[g].first);
            hi.push_back(settings.log_lengthscale_bounds[g].second);
        }
    }
    const std::size_t dim = lo.size();

    std::vector<HyperParams> starts = settings.explicit_starts;
    std::mt19937_64 rng(settings.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> shift(dim);
    for (auto& s : shift) s = unit(rng);
    for (std::uint64_t i = 1; static_cast<int>(starts.size()) < settings.n_starts; ++i) {
        std::vector<double> v(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            const double u = std::fmod(radical_inverse(i, nth_prime(d)) + shift[d], 1.0);
            v[d] = lo[d] + u * (hi[d] - lo[d]);
        }
        HyperParams h = base;
        h.set_free_values(v);
        starts.push_back(std::move(h));
    }

    OptimizationReport report;
    report.best_nll = kInf;
    for (std::size_t s = 0; s < starts.size(); ++s) {
        StartResult sr;
        sr.start = starts[s];
        sr.best = starts[s];
        if (sr.start.groups() != problem.group_count()) throw DimensionError("start point does not match the kernel groups");
        sr.initial_nll = nll(sr.start, problem);
        if (dim == 0) {
            sr.final_nll = sr.initial_nll;
            sr.converged = true;
            sr.evaluations = 1;
        } else {
            HyperParams work = sr.start;
            const auto objective = [&](const std::vector<double>& v) {
                work.set_free_values(v);
                return nll(work, problem);
            };
            const auto res = nelder_mead(objective, sr.start.free_values(), lo, hi, settings.tolerance,
                                         settings.max_iterations);
            sr.best.set_free_values(res.x);
            sr.final_nll = res.value;
            sr.iterations = res.iterations;
            sr.evaluations = res.evaluations + 1;
            sr.converged = res.converged;
            sr.trajectory = res.trajectory;
            // The start itself may lie outside the box; never report anything worse than it.
            if (sr.initial_nll < sr.final_nll) {
                sr.best = sr.start;
                sr.final_nll = sr.initial_nll;
            }
        }
        if (!std::isfinite(sr.final_nll)) sr.error = "objective was not finite anywhere on the search path";
        if (sr.final_nll < report.best_nll) {
            report.best_nll = sr.final_nll;
            report.best = sr.best;
            report.best_start = s;
        }
        report.starts.push_back(std::move(sr));
    }
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    if (!std::isfinite(report.best_nll)) {
        std::string msg = "all " + std::to_string(report.starts.size()) + " optimizer starts failed";
        throw OptimizationError(msg);
    }
    return report;
}

}  // namespace gplfm
