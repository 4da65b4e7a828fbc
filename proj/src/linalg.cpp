// SPDX-License-Identifier: Apache-2.0
#include "atomdemix/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include "atomdemix/error.hpp"

namespace atomdemix::linalg {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kQlIterationCap = 60;

double max_abs(const ComplexMatrix& a) {
    double m = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) m = std::max(m, std::abs(a(i, j)));
    return m;
}

void require_square(const ComplexMatrix& a, const char* who) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw Error(ErrorCode::InvalidArgument, std::string(who) + ": matrix must be square and non-empty");
}

// Reduces the Hermitian matrix held in the lower triangle of `a` (n x n,
// column-major) to real symmetric tridiagonal form T = Q^H A Q with
// Q = H(0) H(1) ... H(n-2), H(k) = I - tau_k v_k v_k^H. On exit column k
// below row k+1 stores v_k (v_k[0] = 1 implicit at row k+1).
void tridiagonalize(ComplexMatrix& a, std::vector<double>& d, std::vector<double>& e,
                    std::vector<Complex>& tau, std::vector<Complex>& work) {
    const int n = static_cast<int>(a.rows());
    d.assign(n, 0.0);
    e.assign(n, 0.0);
    tau.assign(std::max(n - 1, 0), Complex(0.0));
    work.resize(n);

    for (int k = 0; k + 1 < n; ++k) {
        const int m = n - k - 1;  // length of the reflector
        auto x = a.col(k).segment(k + 1, m);
        const Complex alpha = x[0];
        const double xnorm2 = m > 1 ? x.tail(m - 1).squaredNorm() : 0.0;
        Complex t = 0.0;
        double beta = alpha.real();
        if (xnorm2 != 0.0 || alpha.imag() != 0.0) {
            beta = -std::copysign(std::sqrt(std::norm(alpha) + xnorm2), alpha.real());
            t = Complex((beta - alpha.real()) / beta, -alpha.imag() / beta);
            if (m > 1) x.tail(m - 1) *= 1.0 / (alpha - beta);
        }
        e[k] = beta;
        tau[k] = t;
        if (t != Complex(0.0)) {
            x[0] = 1.0;
            auto b = a.block(k + 1, k + 1, m, m);
            Eigen::Map<ComplexVector> w(work.data(), m);
            // w = tau B v - (tau/2)(w^H v) v, then B -= v w^H + w v^H.
            w.noalias() = b.selfadjointView<Eigen::Lower>() * (t * x);
            const Complex shift = -0.5 * t * w.dot(x);
            w += shift * x;
            b.selfadjointView<Eigen::Lower>().rankUpdate(x, w, Complex(-1.0));
            for (int i = 0; i < m; ++i) b(i, i) = Complex(b(i, i).real(), 0.0);
        }
        x[0] = beta;
        d[k] = a(k, k).real();
    }
    if (n > 0) d[n - 1] = a(n - 1, n - 1).real();
}

// Applies Q = H(0)...H(n-2) from the left to the n x c matrix `x`.
void apply_q(const ComplexMatrix& reduced, const std::vector<Complex>& tau, ComplexMatrix& x,
             std::vector<Complex>& work) {
    const int n = static_cast<int>(reduced.rows());
    const Eigen::Index c = x.cols();
    work.resize(c);
    Eigen::Map<Eigen::RowVectorXcd> s(work.data(), c);
    ComplexVector v(n);
    for (int k = n - 2; k >= 0; --k) {
        const Complex t = tau[k];
        if (t == Complex(0.0)) continue;
        const int m = n - k - 1;
        auto vk = v.head(m);
        vk = reduced.col(k).segment(k + 1, m);
        vk[0] = 1.0;
        auto block = x.bottomRows(m);
        s.noalias() = vk.adjoint() * block;
        block.noalias() -= (t * vk) * s;
    }
}

// Implicit QL on the symmetric tridiagonal (d, e) with e[i] coupling i and
// i+1. When z is non-null its columns are rotated along (z starts as the
// identity for eigenvectors of T).
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, RealMatrix* z) {
    const int n = static_cast<int>(d.size());
    if (n == 0) return;
    e[n - 1] = 0.0;
    double tnorm = 0.0;
    for (int i = 0; i < n; ++i) tnorm = std::max(tnorm, std::abs(d[i]) + std::abs(e[i]));
    const double floor = kEps * tnorm;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= kEps * dd || std::abs(e[m]) <= floor) break;
            }
            if (m != l) {
                if (iter++ == kQlIterationCap)
                    throw Error(ErrorCode::ConvergenceFailure, "tridiagonal QL exceeded iteration cap");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::sqrt(g * g + 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::sqrt(f * f + g * g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    if (z != nullptr) {
                        double* zi = z->col(i).data();
                        double* zi1 = z->col(i + 1).data();
                        for (int k = 0; k < n; ++k) {
                            f = zi1[k];
                            zi1[k] = s * zi[k] + c * f;
                            zi[k] = c * zi[k] - s * f;
                        }
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

// Eigenvectors of the tridiagonal (d, e) for the ascending eigenvalues in
// `lambdas`, by inverse iteration with Gram-Schmidt inside clusters.
void tridiagonal_inverse_iteration(const std::vector<double>& d, const std::vector<double>& e,
                                   const double* lambdas, int count, RealMatrix& z,
                                   std::vector<double>& scratch) {
    const int n = static_cast<int>(d.size());
    z.resize(n, count);
    if (count == 0) return;
    if (n == 1) {
        z(0, 0) = 1.0;
        return;
    }
    double onenorm = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = std::abs(d[i]);
        if (i > 0) row += std::abs(e[i - 1]);
        if (i + 1 < n) row += std::abs(e[i]);
        onenorm = std::max(onenorm, row);
    }
    if (onenorm == 0.0) onenorm = 1.0;
    const double ortol = 1e-3 * onenorm;
    const double pivot_floor = kEps * onenorm;

    scratch.resize(6 * static_cast<std::size_t>(n));
    double* dl = scratch.data();
    double* dd = dl + n;
    double* du = dd + n;
    double* du2 = du + n;
    double* x = du2 + n;
    double* piv = x + n;

    int cluster_start = 0;
    double prev = 0.0;
    std::uint64_t state = 0x9E3779B97F4A7C15ULL;
    for (int j = 0; j < count; ++j) {
        double shift = lambdas[j];
        if (j > 0) {
            if (shift - lambdas[j - 1] > ortol) cluster_start = j;
            const double pertol = 10.0 * std::abs(kEps * shift);
            if (shift - prev < pertol) shift = prev + pertol;
        }
        prev = shift;

        // LU of T - shift*I with partial pivoting.
        for (int i = 0; i < n; ++i) dd[i] = d[i] - shift;
        for (int i = 0; i + 1 < n; ++i) {
            dl[i] = e[i];
            du[i] = e[i];
        }
        for (int i = 0; i + 1 < n; ++i) {
            du2[i] = 0.0;
            if (std::abs(dd[i]) >= std::abs(dl[i])) {
                piv[i] = 0.0;
                if (dd[i] == 0.0) dd[i] = pivot_floor;
                const double fact = dl[i] / dd[i];
                dl[i] = fact;
                dd[i + 1] -= fact * du[i];
            } else {
                piv[i] = 1.0;
                const double fact = dd[i] / dl[i];
                dd[i] = dl[i];
                dl[i] = fact;
                const double temp = du[i];
                du[i] = dd[i + 1];
                dd[i + 1] = temp - fact * dd[i + 1];
                if (i + 2 < n) {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
            }
        }
        for (int i = 0; i < n; ++i)
            if (std::abs(dd[i]) < pivot_floor) dd[i] = std::copysign(pivot_floor, dd[i] == 0.0 ? 1.0 : dd[i]);

        for (int i = 0; i < n; ++i) {
            state = state * 6364136223846793005ULL + 1442695040888963407ULL;
            x[i] = static_cast<double>(state >> 11) * (2.0 / 9007199254740992.0) - 1.0;
        }
        for (int it = 0; it < 3; ++it) {
            for (int i = 0; i + 1 < n; ++i) {
                if (piv[i] == 0.0) {
                    x[i + 1] -= dl[i] * x[i];
                } else {
                    const double temp = x[i];
                    x[i] = x[i + 1];
                    x[i + 1] = temp - dl[i] * x[i];
                }
            }
            x[n - 1] /= dd[n - 1];
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / dd[n - 2];
            for (int i = n - 3; i >= 0; --i) x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / dd[i];

            for (int q = cluster_start; q < j; ++q) {
                const double* zq = z.col(q).data();
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += zq[i] * x[i];
                for (int i = 0; i < n; ++i) x[i] -= s * zq[i];
            }
            double nrm = 0.0;
            for (int i = 0; i < n; ++i) nrm += x[i] * x[i];
            nrm = std::sqrt(nrm);
            if (nrm == 0.0 || !std::isfinite(nrm)) throw Error(ErrorCode::ConvergenceFailure, "inverse iteration broke down");
            for (int i = 0; i < n; ++i) x[i] /= nrm;
        }
        std::copy(x, x + n, z.col(j).data());
    }
}

void sort_ascending(std::vector<double>& values, RealMatrix* vectors) {
    const int n = static_cast<int>(values.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    std::vector<double> sorted(n);
    for (int i = 0; i < n; ++i) sorted[i] = values[order[i]];
    values.swap(sorted);
    if (vectors != nullptr) {
        RealMatrix permuted(vectors->rows(), n);
        for (int i = 0; i < n; ++i) permuted.col(i) = vectors->col(order[i]);
        vectors->swap(permuted);
    }
}

void check_eig_input(const ComplexMatrix& a) {
    require_square(a, "hermitian_eig");
    if (a.rows() > kMaxEigSize) throw Error(ErrorCode::InvalidArgument, "hermitian_eig: size exceeds 4096");
    if (!all_finite(a)) throw Error(ErrorCode::InvalidArgument, "hermitian_eig: non-finite entries");
    if (!is_hermitian(a)) throw Error(ErrorCode::NonHermitianInput, "hermitian_eig: input is not Hermitian");
}

}  // namespace

bool is_hermitian(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) return false;
    const double scale = max_abs(a);
    double dev = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = j; i < a.rows(); ++i) dev = std::max(dev, std::abs(a(i, j) - std::conj(a(j, i))));
    return dev <= 1e-12 * scale;
}

bool all_finite(const ComplexMatrix& a) {
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
    return true;
}

HermitianEig hermitian_eig(const ComplexMatrix& a) {
    check_eig_input(a);
    const int n = static_cast<int>(a.rows());
    ComplexMatrix reduced = a;
    std::vector<double> d, e;
    std::vector<Complex> tau, work;
    tridiagonalize(reduced, d, e, tau, work);
    RealMatrix z = RealMatrix::Identity(n, n);
    tridiagonal_ql(d, e, &z);
    sort_ascending(d, &z);
    HermitianEig out;
    out.eigenvalues = Eigen::Map<const RealVector>(d.data(), n);
    out.eigenvectors = z.cast<Complex>();
    apply_q(reduced, tau, out.eigenvectors, work);
    return out;
}

RealVector hermitian_eigenvalues(const ComplexMatrix& a) {
    check_eig_input(a);
    ComplexMatrix reduced = a;
    std::vector<double> d, e;
    std::vector<Complex> tau, work;
    tridiagonalize(reduced, d, e, tau, work);
    tridiagonal_ql(d, e, nullptr);
    sort_ascending(d, nullptr);
    return Eigen::Map<const RealVector>(d.data(), static_cast<Eigen::Index>(d.size()));
}

ComplexMatrix psd_project(const ComplexMatrix& a) {
    check_eig_input(a);
    ComplexMatrix out = 0.5 * (a + a.adjoint());
    PsdProjector projector;
    projector.project(out);
    return out;
}

int PsdProjector::project(ComplexMatrix& a) {
    const int n = static_cast<int>(a.rows());
    reduced_ = a;
    tridiagonalize(reduced_, diag_, offdiag_, tau_, work_);
    eig_ = diag_;
    std::vector<double> e = offdiag_;
    tridiagonal_ql(eig_, e, nullptr);
    std::sort(eig_.begin(), eig_.end());
    last_min_ = n > 0 ? eig_.front() : 0.0;

    const int positive = static_cast<int>(std::count_if(eig_.begin(), eig_.end(), [](double v) { return v > 0.0; }));
    if (positive == n) return positive;
    if (positive == 0) {
        a.setZero();
        return 0;
    }
    const bool keep_positive = positive <= n - positive;
    const int first = keep_positive ? n - positive : 0;
    const int count = keep_positive ? positive : n - positive;
    tridiagonal_inverse_iteration(diag_, offdiag_, eig_.data() + first, count, tri_vectors_, scratch_);
    vectors_ = tri_vectors_.cast<Complex>();
    apply_q(reduced_, tau_, vectors_, work_);

    ComplexMatrix scaled = vectors_;
    for (int j = 0; j < count; ++j) scaled.col(j) *= eig_[first + j];
    if (keep_positive) {
        a.noalias() = scaled * vectors_.adjoint();
    } else {
        a.noalias() -= scaled * vectors_.adjoint();
    }
    for (int j = 0; j < n; ++j) {
        a(j, j) = Complex(a(j, j).real(), 0.0);
        for (int i = j + 1; i < n; ++i) {
            const Complex avg = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = avg;
            a(j, i) = std::conj(avg);
        }
    }
    return positive;
}

ComplexMatrix toeplitz_from_column(const ComplexVector& u) {
    const Eigen::Index n = u.size();
    ComplexMatrix t(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        t(j, j) = Complex(u[0].real(), 0.0);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            t(i, j) = u[i - j];
            t(j, i) = std::conj(u[i - j]);
        }
    }
    return t;
}

ComplexVector toeplitz_adjoint(const ComplexMatrix& a) {
    require_square(a, "toeplitz_adjoint");
    const Eigen::Index n = a.rows();
    ComplexVector out = ComplexVector::Zero(n);
    double trace = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) trace += a(i, i).real();
    out[0] = trace;
    for (Eigen::Index k = 1; k < n; ++k) {
        Complex s(0.0);
        for (Eigen::Index j = 0; j + k < n; ++j) s += a(j + k, j) + std::conj(a(j, j + k));
        out[k] = s;
    }
    return out;
}

double pivot_condition_estimate(const ComplexMatrix& a) {
    require_square(a, "pivot_condition_estimate");
    Eigen::PartialPivLU<ComplexMatrix> lu(a);
    const auto& packed = lu.matrixLU();
    double hi = 0.0, lo = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < packed.rows(); ++i) {
        const double m = std::abs(packed(i, i));
        hi = std::max(hi, m);
        lo = std::min(lo, m);
    }
    if (lo == 0.0 || !std::isfinite(lo)) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

ComplexVector solve_linear(const ComplexMatrix& a, const ComplexVector& b) {
    require_square(a, "solve_linear");
    if (b.size() != a.rows()) throw Error(ErrorCode::LengthMismatch, "solve_linear: rhs length differs from matrix size");
    Eigen::PartialPivLU<ComplexMatrix> lu(a);
    const auto& packed = lu.matrixLU();
    double hi = 0.0, lo = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < packed.rows(); ++i) {
        const double m = std::abs(packed(i, i));
        hi = std::max(hi, m);
        lo = std::min(lo, m);
    }
    const double cond = (lo == 0.0) ? std::numeric_limits<double>::infinity() : hi / lo;
    if (!(cond < kConditionLimit))
        throw SingularSystemError("solve_linear: pivot ratio " + std::to_string(cond) + " exceeds limit", cond);
    ComplexVector x = lu.solve(b);
    const ComplexVector r = b - a * x;
    x += lu.solve(r);
    return x;
}

ComplexVector lstsq(const ComplexMatrix& a, const ComplexVector& b) {
    if (a.rows() < a.cols() || a.cols() == 0)
        throw Error(ErrorCode::InvalidArgument, "lstsq: need rows >= cols > 0");
    if (b.size() != a.rows()) throw Error(ErrorCode::LengthMismatch, "lstsq: rhs length differs from row count");
    Eigen::ColPivHouseholderQR<ComplexMatrix> qr(a);
    const auto& r = qr.matrixR();
    const double lead = std::abs(r(0, 0));
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
        if (!(std::abs(r(i, i)) > 1e-10 * lead))
            throw Error(ErrorCode::RankDeficient, "lstsq: column rank below " + std::to_string(a.cols()));
    }
    ComplexVector x = qr.solve(b);
    const ComplexVector resid = b - a * x;
    x += qr.solve(resid);
    return x;
}

double real_inner(const ComplexVector& a, const ComplexVector& b) { return b.dot(a).real(); }

double real_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
    return (b.array().conjugate() * a.array()).sum().real();
}

double operator_norm(const ComplexMatrix& a) {
    if (a.size() == 0) return 0.0;
    const ComplexMatrix gram = a.adjoint() * a;
    ComplexMatrix h = 0.5 * (gram + gram.adjoint());
    const RealVector ev = hermitian_eigenvalues(h);
    return std::sqrt(std::max(ev[ev.size() - 1], 0.0));
}

}  // namespace atomdemix::linalg
