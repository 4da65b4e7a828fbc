// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace atomdemix::linalg {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr int kMaxEigSize = 4096;
inline constexpr double kConditionLimit = 1e12;

/// Hermitian within 1e-12 of the largest entry magnitude.
bool is_hermitian(const ComplexMatrix& a);

bool all_finite(const ComplexMatrix& a);

struct HermitianEig {
    RealVector eigenvalues;      // ascending
    ComplexMatrix eigenvectors;  // columns, unitary
};

/// Householder tridiagonalization followed by implicit-shift QL.
/// Throws NonHermitianInput, InvalidArgument (size), ConvergenceFailure.
HermitianEig hermitian_eig(const ComplexMatrix& a);

/// Eigenvalues only, ascending.
RealVector hermitian_eigenvalues(const ComplexMatrix& a);

/// Frobenius-nearest PSD matrix: negative eigenvalues clipped to zero.
ComplexMatrix psd_project(const ComplexMatrix& a);

/// Reusable projector for hot loops. It reduces to tridiagonal form once,
/// then resolves only the smaller of the positive/negative eigen-subsets by
/// inverse iteration. Input must already be Hermitian (not re-checked).
class PsdProjector {
public:
    /// Overwrites `a` with its PSD projection. Returns the number of
    /// strictly positive eigenvalues that were kept.
    int project(ComplexMatrix& a);

    /// Smallest eigenvalue seen by the last call.
    double last_min_eigenvalue() const noexcept { return last_min_; }

private:
    ComplexMatrix reduced_;
    ComplexMatrix vectors_;
    RealMatrix tri_vectors_;
    std::vector<double> diag_, offdiag_, eig_;
    std::vector<Complex> tau_, work_;
    std::vector<double> scratch_;
    double last_min_ = 0.0;
};

/// Hermitian Toeplitz matrix with T(i, j) = u[i - j] for i >= j. The
/// diagonal uses Re(u[0]) so the result is exactly Hermitian.
ComplexMatrix toeplitz_from_column(const ComplexVector& u);

/// Adjoint of toeplitz_from_column under <X, Y> = Re tr(Y^H X):
/// entry 0 is Re tr(A); entry k sums the k-th sub-diagonal plus the
/// conjugate of the k-th super-diagonal.
ComplexVector toeplitz_adjoint(const ComplexMatrix& a);

/// LU with partial pivoting and one refinement step. Throws
/// SingularSystemError when the pivot ratio exceeds kConditionLimit.
ComplexVector solve_linear(const ComplexMatrix& a, const ComplexVector& b);

/// Pivot ratio max|U_ii| / min|U_ii| of the partial-pivot LU (inf if singular).
double pivot_condition_estimate(const ComplexMatrix& a);

/// Least squares via column-pivoted Householder QR. Throws RankDeficient.
ComplexVector lstsq(const ComplexMatrix& a, const ComplexVector& b);

/// Re(b^H a).
double real_inner(const ComplexVector& a, const ComplexVector& b);
/// Re tr(B^H A).
double real_inner(const ComplexMatrix& a, const ComplexMatrix& b);

/// Largest singular value, via the top eigenvalue of A^H A.
double operator_norm(const ComplexMatrix& a);

}  // namespace atomdemix::linalg
