// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "atomdemix/error.hpp"
#include "atomdemix/linalg.hpp"
#include "test_support.hpp"

using namespace atomdemix;
using namespace atomdemix::linalg;
using atomdemix::testing::max_abs;
using atomdemix::testing::random_hermitian;
using atomdemix::testing::random_matrix;
using atomdemix::testing::random_vector;
using atomdemix::testing::throws_code;

namespace {

ComplexMatrix reconstruct(const HermitianEig& eig) {
    return eig.eigenvectors * eig.eigenvalues.cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
}

ComplexMatrix clip_with_full_eig(const ComplexMatrix& a) {
    const HermitianEig eig = hermitian_eig(a);
    const RealVector clipped = eig.eigenvalues.cwiseMax(0.0);
    return eig.eigenvectors * clipped.cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
}

}  // namespace

TEST_CASE("hermitian_eig - identity and diagonal cases")
{
    const HermitianEig id = hermitian_eig(ComplexMatrix::Identity(3, 3));
    for (int i = 0; i < 3; ++i) CHECK(id.eigenvalues[i] == Catch::Approx(1.0).margin(1e-14));

    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = -1.0;
    const HermitianEig eig = hermitian_eig(d);
    CHECK(eig.eigenvalues[0] == Catch::Approx(-1.0).margin(1e-14));
    CHECK(eig.eigenvalues[1] == Catch::Approx(2.0).margin(1e-14));
}

TEST_CASE("hermitian_eig - reconstruction and unitarity on random Hermitian matrices")
{
    std::mt19937_64 rng(17);
    for (int n : {1, 2, 3, 8, 17, 33, 66, 128}) {
        const ComplexMatrix a = random_hermitian(rng, n);
        const HermitianEig eig = hermitian_eig(a);
        const double scale = max_abs(a);
        INFO("n = " << n);
        CHECK(max_abs(reconstruct(eig) - a) <= 1e-10 * n * scale);
        CHECK(max_abs(eig.eigenvectors.adjoint() * eig.eigenvectors - ComplexMatrix::Identity(n, n)) <= 1e-10);
        for (int i = 1; i < n; ++i) CHECK(eig.eigenvalues[i - 1] <= eig.eigenvalues[i]);

        // Independent route: Eigen's self-adjoint solver.
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> ref(a, Eigen::EigenvaluesOnly);
        CHECK((ref.eigenvalues() - eig.eigenvalues).cwiseAbs().maxCoeff() <= 1e-10 * n * scale);
        CHECK((hermitian_eigenvalues(a) - eig.eigenvalues).cwiseAbs().maxCoeff() <= 1e-12 * n * scale);
    }

    // 8 x 8 spot check at the absolute 1e-10 level.
    const ComplexMatrix a8 = random_hermitian(rng, 8);
    CHECK(max_abs(reconstruct(hermitian_eig(a8)) - a8) <= 1e-10);
}

TEST_CASE("hermitian_eig - repeated eigenvalues")
{
    std::mt19937_64 rng(5);
    const int n = 12;
    const HermitianEig basis = hermitian_eig(random_hermitian(rng, n));
    Eigen::VectorXd spectrum(n);
    spectrum << -3, -3, -3, 0, 0, 1, 1, 1, 1, 2, 5, 5;
    const ComplexMatrix a = basis.eigenvectors * spectrum.cast<Complex>().asDiagonal() * basis.eigenvectors.adjoint();
    const ComplexMatrix h = 0.5 * (a + a.adjoint());
    const HermitianEig eig = hermitian_eig(h);
    CHECK((eig.eigenvalues - spectrum).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(max_abs(reconstruct(eig) - h) <= 1e-12);
}

TEST_CASE("hermitian_eig - input validation")
{
    ComplexMatrix a = ComplexMatrix::Identity(3, 3);
    a(0, 1) = Complex(0.0, 1.0);
    CHECK(throws_code(ErrorCode::NonHermitianInput, [&] { hermitian_eig(a); }));
    CHECK(throws_code(ErrorCode::InvalidArgument, [&] { hermitian_eig(ComplexMatrix(2, 3)); }));
}

TEST_CASE("psd_project - fixed point, clipping, and nearest-PSD property")
{
    std::mt19937_64 rng(23);
    const ComplexMatrix b = random_matrix(rng, 6, 3);
    const ComplexMatrix psd = b * b.adjoint();
    CHECK(max_abs(psd_project(psd) - psd) <= 1e-10);

    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -2.0;
    const ComplexMatrix pd = psd_project(d);
    CHECK(std::abs(pd(0, 0) - 1.0) <= 1e-14);
    CHECK(std::abs(pd(1, 1)) <= 1e-14);
    CHECK(std::abs(pd(0, 1)) <= 1e-14);

    for (int n : {4, 9, 30, 66, 128}) {
        const ComplexMatrix a = random_hermitian(rng, n);
        const ComplexMatrix p = psd_project(a);
        const double scale = max_abs(a);
        INFO("n = " << n);
        CHECK(max_abs(p - clip_with_full_eig(a)) <= 1e-10 * n * scale);
        CHECK(hermitian_eigenvalues(p)[0] >= -1e-10 * scale);
        CHECK(max_abs(psd_project(p) - p) <= 1e-10 * n * scale);

        // No PSD candidate from a perturbed family is closer than the projection.
        const double best = (a - p).norm();
        const HermitianEig eig = hermitian_eig(a);
        for (int trial = 0; trial < 25; ++trial) {
            std::uniform_real_distribution<double> jitter(0.0, 0.3);
            RealVector mu = eig.eigenvalues.cwiseMax(0.0);
            for (int i = 0; i < n; ++i) mu[i] += jitter(rng) * (trial % 2 == 0 ? 1.0 : 0.1);
            const ComplexMatrix cand = eig.eigenvectors * mu.cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
            const ComplexMatrix q = random_matrix(rng, n, 2) * 0.05;
            CHECK((a - cand).norm() >= best);
            CHECK((a - (p + q * q.adjoint())).norm() >= best - 1e-12);
        }
    }
}

TEST_CASE("psd_project - low and high rank branches of the subset projector")
{
    std::mt19937_64 rng(99);
    const int n = 66;
    for (int rank : {0, 1, 5, 33, 60, 66}) {
        const HermitianEig basis = hermitian_eig(random_hermitian(rng, n));
        RealVector spectrum(n);
        for (int i = 0; i < n; ++i) spectrum[i] = (i < n - rank) ? -0.5 - 0.01 * i : 1.0 + 0.2 * i;
        const ComplexMatrix a0 = basis.eigenvectors * spectrum.cast<Complex>().asDiagonal() * basis.eigenvectors.adjoint();
        const ComplexMatrix a = 0.5 * (a0 + a0.adjoint());
        ComplexMatrix p = a;
        PsdProjector proj;
        CHECK(proj.project(p) == rank);
        CHECK(max_abs(p - clip_with_full_eig(a)) <= 1e-10 * max_abs(a) * n);
    }
}

TEST_CASE("toeplitz_from_column - examples and Hermitian structure")
{
    ComplexVector u(3);
    u << 1.0, 0.0, 0.0;
    CHECK(max_abs(toeplitz_from_column(u) - ComplexMatrix::Identity(3, 3)) == 0.0);

    ComplexVector v(2);
    v << 2.0, Complex(0.0, 1.0);
    ComplexMatrix expected(2, 2);
    expected << 2.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 2.0;
    CHECK(max_abs(toeplitz_from_column(v) - expected) == 0.0);

    std::mt19937_64 rng(3);
    const ComplexMatrix t = toeplitz_from_column(random_vector(rng, 9));
    CHECK(max_abs(t - t.adjoint()) == 0.0);
}

TEST_CASE("toeplitz_adjoint - identity, composition, and adjoint identity")
{
    const ComplexVector id = toeplitz_adjoint(ComplexMatrix::Identity(5, 5));
    CHECK(std::abs(id[0] - 5.0) == 0.0);
    CHECK(id.tail(4).cwiseAbs().maxCoeff() == 0.0);

    std::mt19937_64 rng(41);
    ComplexVector u = random_vector(rng, 7);
    u[0] = u[0].real();
    const ComplexVector back = toeplitz_adjoint(toeplitz_from_column(u));
    CHECK(std::abs(back[0] - 7.0 * u[0].real()) <= 1e-12);
    CHECK(std::abs(back[0].imag()) == 0.0);

    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 17;
        const ComplexVector w = random_vector(rng, n);
        const ComplexMatrix a = random_matrix(rng, n, n);
        const double lhs = real_inner(toeplitz_from_column(w), a);
        const double rhs = real_inner(w, toeplitz_adjoint(a));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("solve_linear - examples, residual, and singular systems")
{
    std::mt19937_64 rng(8);
    const ComplexVector b3 = random_vector(rng, 3);
    CHECK(max_abs(solve_linear(ComplexMatrix::Identity(3, 3), b3) - b3) <= 1e-15);

    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 4.0;
    ComplexVector b(2);
    b << 2.0, 8.0;
    const ComplexVector x = solve_linear(d, b);
    CHECK(std::abs(x[0] - 1.0) <= 1e-15);
    CHECK(std::abs(x[1] - 2.0) <= 1e-15);

    const ComplexMatrix a = random_matrix(rng, 20, 20) + 8.0 * ComplexMatrix::Identity(20, 20);
    const ComplexVector rhs = random_vector(rng, 20);
    CHECK((a * solve_linear(a, rhs) - rhs).norm() <= 1e-10 * rhs.norm());

    ComplexMatrix singular = ComplexMatrix::Ones(3, 3);
    bool caught = false;
    try {
        solve_linear(singular, b3);
    } catch (const SingularSystemError& e) {
        caught = true;
        CHECK(e.condition_estimate() >= kConditionLimit);
    }
    CHECK(caught);
}

TEST_CASE("lstsq - consistency, exact overdetermined, and orthogonality")
{
    std::mt19937_64 rng(12);
    const ComplexMatrix sq = random_matrix(rng, 6, 6) + 4.0 * ComplexMatrix::Identity(6, 6);
    const ComplexVector b6 = random_vector(rng, 6);
    CHECK(max_abs(lstsq(sq, b6) - solve_linear(sq, b6)) <= 1e-12);

    const ComplexMatrix tall = random_matrix(rng, 12, 4);
    const ComplexVector truth = random_vector(rng, 4);
    CHECK(max_abs(lstsq(tall, tall * truth) - truth) <= 1e-12);

    const ComplexMatrix a = random_matrix(rng, 30, 5);
    const ComplexVector b = random_vector(rng, 30);
    const ComplexVector x = lstsq(a, b);
    CHECK((a.adjoint() * (a * x - b)).norm() <= 1e-10 * b.norm() * a.norm());

    ComplexMatrix dup = random_matrix(rng, 10, 3);
    dup.col(2) = dup.col(0);
    CHECK(throws_code(ErrorCode::RankDeficient, [&] { lstsq(dup, random_vector(rng, 10)); }));
}

TEST_CASE("operator_norm - matches the largest singular value")
{
    std::mt19937_64 rng(77);
    const ComplexMatrix a = random_matrix(rng, 7, 4);
    Eigen::JacobiSVD<ComplexMatrix> svd(a);
    CHECK(operator_norm(a) == Catch::Approx(svd.singularValues()[0]).epsilon(1e-12));
}
