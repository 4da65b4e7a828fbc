// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <random>

#include <Eigen/Dense>

#include "atomdemix/error.hpp"

namespace atomdemix::testing {

inline Eigen::MatrixXcd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> n01;
    Eigen::MatrixXcd a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = {n01(rng), n01(rng)};
    return a;
}

inline Eigen::VectorXcd random_vector(std::mt19937_64& rng, Eigen::Index n) {
    return random_matrix(rng, n, 1).col(0);
}

inline Eigen::MatrixXcd random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
    const Eigen::MatrixXcd a = random_matrix(rng, n, n);
    return 0.5 * (a + a.adjoint());
}

inline double max_abs(const Eigen::MatrixXcd& a) { return a.cwiseAbs().maxCoeff(); }

inline double wrap_distance(double a, double b) {
    double d = std::abs(a - b);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
}

inline bool throws_code(ErrorCode code, auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code() == code;
    }
    return false;
}

}  // namespace atomdemix::testing
