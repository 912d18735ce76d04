#include "gplfm/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gplfm/errors.hpp"

namespace gplfm {

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

void KernelSpec::validate() const {
    if (family != KernelFamily::matern) throw UnsupportedKernelError("only the Matérn family is available");
    if (order < 0 || order > 2) {
        throw UnsupportedKernelError("Matérn order p=" + std::to_string(order) + " is not supported (p in {0,1,2})");
    }
    if (!(alpha2 > 0.0) || !std::isfinite(alpha2)) throw ValidationError("kernel variance must be positive");
    if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) throw ValidationError("kernel lengthscale must be positive");
}

double matern_eval(const KernelSpec& spec, double tau) {
    spec.validate();
    const double r = std::abs(tau) / spec.lengthscale;
    switch (spec.order) {
        case 0:
            return spec.alpha2 * std::exp(-r);
        case 1: {
            const double s = std::sqrt(3.0) * r;
            return spec.alpha2 * (1.0 + s) * std::exp(-s);
        }
        case 2: {
            const double s = std::sqrt(5.0) * r;
            return spec.alpha2 * (1.0 + s + 5.0 * r * r / 3.0) * std::exp(-s);
        }
        default:
            throw UnsupportedKernelError("unsupported Matérn order");
    }
}

KernelRealization kernel_to_ssm(const KernelSpec& spec) {
    spec.validate();
    const int p = spec.order;
    const int m = p + 1;
    const double nu = p + 0.5;

    KernelRealization out;
    out.lambda = std::sqrt(2.0 * nu) / spec.lengthscale;
    out.f = Matrix::Zero(m, m);
    for (int i = 0; i + 1 < m; ++i) out.f(i, i + 1) = 1.0;
    // Last row: -coefficients of (s + lambda)^m, lowest power first.
    for (int i = 0; i < m; ++i) out.f(m - 1, i) = -binomial(m, i) * std::pow(out.lambda, m - i);
    out.l = Matrix::Zero(m, 1);
    out.l(m - 1, 0) = 1.0;
    out.h = RowVector::Zero(m);
    out.h(0) = 1.0;
    out.sigma_w = 2.0 * spec.alpha2 * std::sqrt(std::numbers::pi) * std::pow(out.lambda, 2 * p + 1) *
                  std::tgamma(p + 1.0) / std::tgamma(p + 0.5);
    out.p_inf = numerics::solve_lyapunov(out.f, out.noise_density());
    return out;
}

double kernel_from_ssm(const KernelRealization& real, double tau) {
    if (tau >= 0.0) {
        const Matrix phi = numerics::matrix_exponential(real.f, tau);
        return (real.h * real.p_inf * phi.transpose() * real.h.transpose())(0, 0);
    }
    const Matrix phi = numerics::matrix_exponential(real.f, -tau);
    return (real.h * phi * real.p_inf * real.h.transpose())(0, 0);
}

KernelRealization random_walk_realization(double sigma_w, double initial_variance) {
    if (sigma_w < 0.0 || initial_variance < 0.0) throw ValidationError("random-walk variances must be non-negative");
    KernelRealization out;
    out.f = Matrix::Zero(1, 1);
    out.l = Matrix::Ones(1, 1);
    out.h = RowVector::Ones(1);
    out.sigma_w = sigma_w;
    out.p_inf = Matrix::Constant(1, 1, initial_variance);
    out.lambda = 0.0;
    return out;
}

GpPosterior gp_regress_batch(std::span<const double> times, std::span<const double> y, const KernelSpec& spec,
                             double noise_var, double t_star) {
    spec.validate();
    if (times.size() != y.size()) throw DimensionError("gp_regress_batch: times and y lengths differ");
    if (!(noise_var > 0.0)) throw ValidationError("gp_regress_batch: noise variance must be positive");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) throw ValidationError("gp_regress_batch: times must be strictly increasing");
    }
    const auto n = static_cast<Index>(times.size());
    GpPosterior out{0.0, matern_eval(spec, 0.0)};
    if (n == 0) return out;

    Matrix gram(n, n);
    Vector k_star(n);
    Vector obs(n);
    for (Index i = 0; i < n; ++i) {
        obs(i) = y[i];
        k_star(i) = matern_eval(spec, times[i] - t_star);
        for (Index j = 0; j < n; ++j) gram(i, j) = matern_eval(spec, times[i] - times[j]);
        gram(i, i) += noise_var;
    }
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) throw ConditioningError("gp_regress_batch: Gram matrix is not positive definite");
    out.mean = k_star.dot(llt.solve(obs));
    out.variance -= k_star.dot(llt.solve(k_star));
    return out;
}

}  // namespace gplfm
