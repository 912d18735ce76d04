// Independent reference computations used by the tests. Nothing here calls into the library
// beyond its matrix aliases.
#pragma once

#include <cmath>
#include <functional>
#include <numbers>

#include "gplfm/numerics.hpp"

namespace oracle {

using gplfm::Matrix;

// Truncated power series of e^{A t}; the argument is halved until its norm is below 1/2
// and the result squared back up.
inline Matrix series_exp(const Matrix& a, double t, int terms = 30) {
    Matrix x = a * t;
    int squarings = 0;
    while (x.lpNorm<Eigen::Infinity>() * static_cast<double>(x.cols()) > 0.5) {
        x /= 2.0;
        ++squarings;
    }
    Matrix term = Matrix::Identity(a.rows(), a.cols());
    Matrix sum = term;
    for (int k = 1; k < terms; ++k) {
        term = term * x / static_cast<double>(k);
        sum += term;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

// Adaptive 15-point Gauss-Kronrod quadrature of a matrix-valued integrand.
class GaussKronrod {
public:
    using Fn = std::function<Matrix(double)>;

    static Matrix integrate(const Fn& f, double a, double b, double rel_tol = 1e-11, int depth = 0) {
        Matrix k15;
        Matrix g7;
        rule(f, a, b, k15, g7);
        const double err = (k15 - g7).norm();
        const double scale = std::max(k15.norm(), 1e-300);
        if (err <= rel_tol * scale || depth > 30) return k15;
        const double m = 0.5 * (a + b);
        return integrate(f, a, m, rel_tol, depth + 1) + integrate(f, m, b, rel_tol, depth + 1);
    }

private:
    static void rule(const Fn& f, double a, double b, Matrix& k15, Matrix& g7) {
        static constexpr double xk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                         0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                         0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                         0.207784955007898467600689403773245, 0.0};
        static constexpr double wk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                         0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                         0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                         0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
        static constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                         0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
        const double c = 0.5 * (a + b);
        const double h = 0.5 * (b - a);
        const Matrix fc = f(c);
        k15 = wk[7] * fc;
        g7 = wg[3] * fc;
        for (int i = 0; i < 7; ++i) {
            const Matrix s = f(c - h * xk[i]) + f(c + h * xk[i]);
            k15 += wk[i] * s;
            if (i % 2 == 1) g7 += wg[i / 2] * s;
        }
        k15 *= h;
        g7 *= h;
    }
};

// Half-integer Matérn covariance through the general Bessel-function form.
inline double matern_bessel(double nu, double alpha2, double lengthscale, double tau) {
    const double r = std::abs(tau);
    if (r == 0.0) return alpha2;
    const double z = std::sqrt(2.0 * nu) * r / lengthscale;
    return alpha2 * std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(z, nu) * std::cyl_bessel_k(nu, z);
}

}  // namespace oracle
