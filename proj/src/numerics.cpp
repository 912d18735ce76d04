#include "gplfm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "gplfm/errors.hpp"

namespace gplfm::numerics {

namespace {

void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw DimensionError(std::string(what) + " must be square, got " + std::to_string(m.rows()) +
                             "x" + std::to_string(m.cols()));
    }
}

void require_finite_step(double dt, const char* what) {
    if (!std::isfinite(dt)) throw ValidationError(std::string(what) + ": time step must be finite");
}

}  // namespace

Matrix matrix_exponential(const Matrix& a, double t) {
    require_square(a, "matrix_exponential: A");
    require_finite_step(t, "matrix_exponential");
    if (a.rows() == 0) return Matrix(0, 0);
    const Matrix scaled = a * t;
    return scaled.exp();
}

bool is_hurwitz(const Matrix& f) {
    require_square(f, "is_hurwitz: F");
    if (f.rows() == 0) return true;
    Eigen::EigenSolver<Matrix> es(f, false);
    return (es.eigenvalues().real().array() < 0.0).all();
}

Matrix solve_lyapunov(const Matrix& f, const Matrix& q) {
    require_square(f, "solve_lyapunov: F");
    require_square(q, "solve_lyapunov: Q");
    if (f.rows() != q.rows()) throw DimensionError("solve_lyapunov: F and Q sizes differ");
    const Index n = f.rows();
    if (n == 0) return Matrix(0, 0);
    if (!is_hurwitz(f)) {
        throw StabilityError("solve_lyapunov: F is not Hurwitz, no steady-state covariance exists");
    }

    // F = U T U^H. With Y = U^H P U the equation becomes T Y + Y T^H = -U^H Q U, which is
    // solved column by column from the right because T^H is lower triangular.
    Eigen::ComplexSchur<Matrix> schur(f);
    const ComplexMatrix& u = schur.matrixU();
    const ComplexMatrix& t = schur.matrixT();
    const ComplexMatrix c = -(u.adjoint() * q.cast<std::complex<double>>() * u);

    ComplexMatrix y = ComplexMatrix::Zero(n, n);
    for (Index j = n - 1; j >= 0; --j) {
        Eigen::VectorXcd rhs = c.col(j);
        for (Index k = j + 1; k < n; ++k) rhs -= std::conj(t(j, k)) * y.col(k);
        ComplexMatrix shifted = t;
        shifted.diagonal().array() += std::conj(t(j, j));
        y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
    }
    const Matrix p = (u * y * u.adjoint()).real();
    return symmetrize(p);
}

ZohDiscretization discretize_zoh(const Matrix& ac, const Matrix& bc, double dt) {
    require_square(ac, "discretize_zoh: A_c");
    if (bc.rows() != ac.rows()) throw DimensionError("discretize_zoh: B_c row count must match A_c");
    require_finite_step(dt, "discretize_zoh");
    if (!(dt > 0.0)) throw ValidationError("discretize_zoh: dt must be positive");

    const Index n = ac.rows();
    const Index m = bc.cols();
    ZohDiscretization out;
    out.a = matrix_exponential(ac, dt);

    Eigen::FullPivLU<Matrix> lu(ac);
    if (n > 0 && lu.isInvertible() && lu.rcond() > 1e-12) {
        out.b = (out.a - Matrix::Identity(n, n)) * lu.solve(bc);
        return out;
    }
    // exp([[A_c, B_c], [0, 0]] dt) = [[A, \int_0^dt e^{A_c s} ds B_c], [0, I]]
    Matrix block = Matrix::Zero(n + m, n + m);
    block.topLeftCorner(n, n) = ac;
    block.topRightCorner(n, m) = bc;
    const Matrix e = matrix_exponential(block, dt);
    out.b = e.topRightCorner(n, m);
    return out;
}

Matrix discrete_process_noise(const Matrix& f, const Matrix& qc, double dt) {
    require_square(f, "discrete_process_noise: F");
    require_square(qc, "discrete_process_noise: Q_c");
    if (f.rows() != qc.rows()) throw DimensionError("discrete_process_noise: F and Q_c sizes differ");
    require_finite_step(dt, "discrete_process_noise");
    if (!(dt > 0.0)) throw ValidationError("discrete_process_noise: dt must be positive");

    const Index n = f.rows();
    if (n == 0) return Matrix(0, 0);
    // exp([[F, c Q_c], [0, -F^T]] dt) = [[Phi, c C], [0, Phi^{-T}]] and Q_d = C Phi^T.
    // Q_d is linear in Q_c, so Q_c is rescaled to the size of F first; a noise density many
    // orders larger than F would otherwise drive the scaling-and-squaring step.
    const double q_norm = qc.cwiseAbs().maxCoeff();
    if (q_norm == 0.0) return Matrix::Zero(n, n);
    const double c = std::max(f.cwiseAbs().maxCoeff(), 1.0 / dt) / q_norm;
    Matrix block = Matrix::Zero(2 * n, 2 * n);
    block.topLeftCorner(n, n) = f;
    block.topRightCorner(n, n) = c * qc;
    block.bottomRightCorner(n, n) = -f.transpose();
    const Matrix e = matrix_exponential(block, dt);
    const Matrix qd = (e.topRightCorner(n, n) * e.topLeftCorner(n, n).transpose()) / c;
    return symmetrize(qd);
}

RankReport numerical_rank(const ComplexMatrix& m) {
    RankReport report;
    if (m.size() == 0) return report;
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    const auto& sv = svd.singularValues();
    const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
    report.tolerance = sigma_max * static_cast<double>(std::max(m.rows(), m.cols())) * std::ldexp(1.0, -40);
    report.rank = 0;
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > report.tolerance) ++report.rank;
    }
    report.smallest_singular_value = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
    if (sv.size() < m.cols()) report.smallest_singular_value = 0.0;
    report.deficiency = m.cols() - report.rank;
    return report;
}

RankReport numerical_rank(const Matrix& m) { return numerical_rank(ComplexMatrix(m.cast<std::complex<double>>())); }

RankReport pbh_rank(const Matrix& f, const Matrix& h, std::complex<double> s) {
    require_square(f, "pbh_rank: F");
    if (h.cols() != f.cols()) throw DimensionError("pbh_rank: H column count must match F");
    const Index n = f.rows();
    ComplexMatrix pbh(n + h.rows(), n);
    pbh.topRows(n) = -f.cast<std::complex<double>>();
    pbh.topRows(n).diagonal().array() += s;
    pbh.bottomRows(h.rows()) = h.cast<std::complex<double>>();
    return numerical_rank(pbh);
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix block_diagonal(const Matrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

}  // namespace gplfm::numerics
