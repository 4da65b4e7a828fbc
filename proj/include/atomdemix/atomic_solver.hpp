// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "atomdemix/spectral_model.hpp"

namespace atomdemix::solver {

using linalg::Complex;
using linalg::ComplexVector;

/// ADMM over one bordered Toeplitz PSD block per channel.
struct AdmmConfig {
    double rho = 1.0;
    int max_iters = 20000;
    double eps_abs = 1e-7;
    double eps_rel = 1e-7;
    /// Residual balancing: every `adapt_interval` iterations rho is scaled by
    /// `adapt_factor` when one residual exceeds the other by `adapt_ratio`.
    int adapt_interval = 50;
    double adapt_factor = 2.0;
    double adapt_ratio = 10.0;
    bool record_objective = false;

    void validate() const;
};

struct RegularizationConfig {
    double lambda_w = 0.0;
    /// Multiplier already folded into lambda_w; kept for reporting.
    double C_w = 1.0;

    void validate() const;
};

/// sigma sqrt(N) sqrt(1.2 log(8 pi N log N)) with N = 4M+1.
double default_lambda(int M, double sigma);
RegularizationConfig default_regularization(int M, double sigma, double C_w = 1.0);

enum class Mode { Exact, Regularized };

struct DemixSolution {
    Mode mode = Mode::Exact;
    ComplexVector x1_hat;
    ComplexVector x2_hat;
    ComplexVector p_hat;
    /// Exact: sum of the two atomic-norm values. Regularized: the full
    /// penalized objective.
    double objective = 0.0;
    /// Per-channel SDP values 0.5 (u0 + t) at the returned iterate.
    double norm1 = 0.0;
    double norm2 = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double primal_tolerance = 0.0;
    double dual_tolerance = 0.0;
    double lambda_w = 0.0;
    double rho = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;
};

struct AtomicNormResult {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
};

/// min 0.5 (u0 + t) s.t. [[Toep(u), x], [x^H, t]] >= 0.
AtomicNormResult atomic_norm_sdp(const ComplexVector& x, int M, const AdmmConfig& config = {});

/// min ||x1||_A + ||x2||_A s.t. x1 + g .* x2 = y. The constraint is
/// eliminated (x1 = y - g .* x2), so it holds to rounding at every iterate.
DemixSolution demix_exact(const model::MeasurementSet& meas, const AdmmConfig& config = {});

/// min 0.5 ||y - x1 - g .* x2||^2 + lambda (||x1||_A + ||x2||_A).
DemixSolution demix_regularized(const model::MeasurementSet& meas, const RegularizationConfig& reg,
                                const AdmmConfig& config = {});

struct OptimalityReport {
    /// sup-norm of the first and second-channel dual polynomials.
    double dual_norm1 = 0.0;
    double dual_norm2 = 0.0;
    /// 1 for the exact program, lambda_w for the regularized one.
    double bound = 1.0;
    /// Exact: |<p, y> - objective|. Regularized:
    /// |<r, x1 + g .* x2> - lambda (||x1||_A + ||x2||_A)|.
    double gap = 0.0;
    double relative_gap = 0.0;
    bool dual_feasible = false;
    bool converged = false;
    bool satisfied = false;
};

/// Dual-norm feasibility with relative slack `tol` and the duality gap with
/// relative tolerance `gap_tol`.
OptimalityReport check_optimality(const DemixSolution& sol, const model::MeasurementSet& meas,
                                  const std::optional<RegularizationConfig>& reg = std::nullopt,
                                  double tol = 1e-3, double gap_tol = 1e-3, int grid_size = 1 << 14);

/// sup_tau |sum_n p_n exp(j 2 pi n tau)|.
double dual_atomic_norm(const ComplexVector& p, int M, int grid_size = 1 << 14);

nlohmann::json to_json(const DemixSolution& sol);
DemixSolution solution_from_json(const nlohmann::json& j);

}  // namespace atomdemix::solver
