// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "atomdemix/atomic_solver.hpp"
#include "atomdemix/localization.hpp"

namespace atomdemix::crb {

/// Fisher information of (tau1, tau2) for one unit-amplitude source per
/// channel in circular complex Gaussian noise of variance sigma^2.
struct FisherMatrix {
    Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
    double sigma = 0.0;
    int M = 0;
    double tau1 = 0.0;
    double tau2 = 0.0;
};

FisherMatrix fisher(double tau1, double tau2, const model::Modulator& g, int M, double sigma);

/// Diagonal of J^{-1}. Throws SingularFisher when det J <= 1e-12 J11 J22.
std::pair<double, double> crb(const FisherMatrix& f);

struct CrbCurvePoint {
    double snr_db = 0.0;
    double sigma = 0.0;
    double crb1 = 0.0;
    double crb2 = 0.0;
    double mse1 = 0.0;
    double mse2 = 0.0;
    int trials = 0;
    int failures = 0;
    /// False when more than 5% of the trials failed.
    bool valid = true;
};

struct CrbExperiment {
    int M = 10;
    std::vector<double> snr_db;
    int trials = 200;
    std::uint64_t seed = 0;
    double C_w = 1.0;
    solver::AdmmConfig admm;
    loc::LocalizationConfig localization;
};

inline constexpr double kMaxFailureFraction = 0.05;

struct CrbInstance {
    double tau1 = 0.0;
    double tau2 = 0.0;
    model::Modulator g;
    linalg::ComplexVector clean;
};

/// Locations and modulator shared by every trial of an experiment.
CrbInstance crb_instance(int M, std::uint64_t seed);

/// Peak of |P| (channel 1) and |Q| (channel 2) from a regularized solve.
std::pair<double, double> estimate_locations(const solver::DemixSolution& sol, const model::Modulator& g,
                                             const loc::LocalizationConfig& cfg);

std::vector<CrbCurvePoint> mse_vs_crb(const CrbExperiment& exp);

/// Header "snr_db,crb1,crb2,mse1,mse2,trials,failures", 17 significant digits.
std::string curve_to_csv(const std::vector<CrbCurvePoint>& points);
std::vector<CrbCurvePoint> curve_from_csv(const std::string& text);

}  // namespace atomdemix::crb
