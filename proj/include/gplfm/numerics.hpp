// Dense linear-algebra primitives: matrix exponential, Lyapunov solve,
// zero-order-hold discretization, discrete process noise and rank tests.
//
// All functions are pure and reentrant.
#pragma once

#include <complex>

#include <Eigen/Dense>

namespace gplfm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

namespace numerics {

/// e^{A t} by scaling and squaring with a norm-selected Padé approximant.
Matrix matrix_exponential(const Matrix& a, double t = 1.0);

/// Solves F P + P F^T + Q = 0 for symmetric P (Bartels-Stewart on the complex Schur form).
/// Throws StabilityError if F is not Hurwitz.
Matrix solve_lyapunov(const Matrix& f, const Matrix& q);

/// True when every eigenvalue of `f` has a strictly negative real part.
bool is_hurwitz(const Matrix& f);

struct ZohDiscretization {
    Matrix a;  ///< e^{A_c dt}
    Matrix b;  ///< (A - I) A_c^{-1} B_c, or the equivalent block-exponential integral
};

/// Zero-order-hold discretization of x' = A_c x + B_c u.
ZohDiscretization discretize_zoh(const Matrix& ac, const Matrix& bc, double dt);

/// Q_d = \int_0^dt e^{F s} Q_c e^{F^T s} ds via the matrix-fraction (Van Loan) block exponential.
Matrix discrete_process_noise(const Matrix& f, const Matrix& qc, double dt);

struct RankReport {
    Index rank = 0;
    Index deficiency = 0;  ///< columns minus rank
    double tolerance = 0.0;
    double smallest_singular_value = 0.0;
};

/// Numerical rank with cutoff sigma_max * max(rows, cols) * 2^-40.
RankReport numerical_rank(const ComplexMatrix& m);
RankReport numerical_rank(const Matrix& m);

/// Rank of the stacked PBH matrix [sI - F; H].
RankReport pbh_rank(const Matrix& f, const Matrix& h, std::complex<double> s);

/// (M + M^T) / 2
Matrix symmetrize(const Matrix& m);

/// Block-diagonal concatenation.
Matrix block_diagonal(const Matrix& a, const Matrix& b);

}  // namespace numerics
}  // namespace gplfm
