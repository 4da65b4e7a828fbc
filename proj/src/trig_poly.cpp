// SPDX-License-Identifier: Apache-2.0
#include "atomdemix/trig_poly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "atomdemix/error.hpp"

namespace atomdemix::poly {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int half_degree(const ComplexVector& c) {
    if (c.size() % 4 != 1) throw Error(ErrorCode::LengthMismatch, "coefficient length must be 4M+1");
    return static_cast<int>(c.size() / 2);
}

Complex phasor(double n_tau) { return std::polar(1.0, kTwoPi * (n_tau - std::floor(n_tau))); }

double wrap01(double t) {
    t -= std::floor(t);
    return t >= 1.0 ? 0.0 : t;
}

}  // namespace

Complex evaluate(const ComplexVector& c, double tau, int order) {
    const int L = half_degree(c);
    Complex acc = 0.0;
    for (int i = 0; i < c.size(); ++i) {
        const int n = i - L;
        Complex term = c[i] * phasor(n * tau);
        if (order > 0) term *= std::pow(Complex(0.0, kTwoPi * n), order);
        acc += term;
    }
    return acc;
}

PolyValue evaluate_with_derivatives(const ComplexVector& c, double tau) {
    const int L = half_degree(c);
    PolyValue out{0.0, 0.0, 0.0};
    for (int i = 0; i < c.size(); ++i) {
        const int n = i - L;
        const Complex term = c[i] * phasor(n * tau);
        const double w = kTwoPi * n;
        out.value += term;
        out.d1 += Complex(-w * term.imag(), w * term.real());
        out.d2 -= (w * w) * term;
    }
    return out;
}

std::vector<double> grid_modulus(const ComplexVector& c, int grid_size) {
    if (grid_size < 1) throw Error(ErrorCode::InvalidArgument, "grid size must be positive");
    const int L = half_degree(c);
    std::vector<double> out(grid_size);
    for (int k = 0; k < grid_size; ++k) {
        const double tau = static_cast<double>(k) / grid_size;
        const Complex step = phasor(tau);
        Complex e = phasor(-L * tau);
        Complex acc = 0.0;
        for (int i = 0; i < c.size(); ++i) {
            acc += c[i] * e;
            e *= step;
        }
        out[k] = std::abs(acc);
    }
    return out;
}

double refine_peak(const ComplexVector& c, double tau0, double half_cell, int iterations) {
    double tau = tau0;
    for (int it = 0; it < iterations; ++it) {
        const PolyValue v = evaluate_with_derivatives(c, wrap01(tau));
        const double f1 = 2.0 * std::real(std::conj(v.value) * v.d1);
        const double f2 = 2.0 * (std::norm(v.d1) + std::real(std::conj(v.value) * v.d2));
        if (!(f2 < 0.0)) break;
        const double step = -f1 / f2;
        tau += step;
        if (std::abs(tau - tau0) > half_cell) return wrap01(tau0);
        if (std::abs(step) < 1e-15) break;
    }
    return wrap01(tau);
}

SupremumResult supremum(const ComplexVector& c, int grid_size) {
    const std::vector<double> mod = grid_modulus(c, grid_size);
    const double grid_max = *std::max_element(mod.begin(), mod.end());
    SupremumResult best;
    if (grid_max == 0.0) return best;
    const double h = 1.0 / grid_size;
    for (int k = 0; k < grid_size; ++k) {
        const double left = mod[(k + grid_size - 1) % grid_size];
        const double right = mod[(k + 1) % grid_size];
        if (mod[k] < 0.9 * grid_max || mod[k] < left || mod[k] < right) continue;
        const double tau = refine_peak(c, k * h, h, 30);
        double value = std::abs(evaluate(c, tau));
        double where = tau;
        if (value < mod[k]) {
            value = mod[k];
            where = k * h;
        }
        if (value > best.value) best = {value, where};
    }
    return best;
}

}  // namespace atomdemix::poly
