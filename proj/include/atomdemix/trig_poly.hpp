// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "atomdemix/linalg.hpp"

namespace atomdemix::poly {

using linalg::Complex;
using linalg::ComplexVector;

/// Values of f(tau) = sum_n c_n exp(j 2 pi n tau) and its first two
/// derivatives, for coefficients indexed n = -2M..2M.
struct PolyValue {
    Complex value;
    Complex d1;
    Complex d2;
};

/// sum_n c_n (j 2 pi n)^order exp(j 2 pi n tau), any non-negative order.
Complex evaluate(const ComplexVector& c, double tau, int order = 0);

PolyValue evaluate_with_derivatives(const ComplexVector& c, double tau);

/// |f| at tau_k = k / grid_size.
std::vector<double> grid_modulus(const ComplexVector& c, int grid_size);

/// Maximizes |f|^2 by safeguarded Newton starting from a grid point. The
/// iterate must stay within `half_cell` of `tau0`; otherwise `tau0` is
/// returned. Result is reduced to [0, 1).
double refine_peak(const ComplexVector& c, double tau0, double half_cell, int iterations);

struct SupremumResult {
    double value = 0.0;
    double location = 0.0;
};

/// sup_tau |f(tau)| by grid search plus Newton on every grid local maximum
/// within 10% of the grid maximum.
SupremumResult supremum(const ComplexVector& c, int grid_size);

}  // namespace atomdemix::poly
