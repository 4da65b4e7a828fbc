// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "atomdemix/atomic_solver.hpp"
#include "atomdemix/instance_io.hpp"

namespace atomdemix::exp {

/// Normalized error at or below this counts as exact recovery.
inline constexpr double kSuccessThreshold = 1e-4;

struct InstanceSpec {
    int M = 8;
    int K1 = 1;
    int K2 = 1;
    /// Non-positive means 1 / (2M).
    double delta_min = 0.0;
    model::AmplitudeKind amplitudes = model::AmplitudeKind::ComplexGaussian;
    model::NoiseKind noise = model::NoiseKind::None;
    double sigma = 0.0;
    /// When set, sigma is derived from the clean signal and this SNR.
    std::optional<double> snr_db;

    double separation() const { return delta_min > 0.0 ? delta_min : 0.5 / M; }
};

/// Supports, amplitudes and modulator drawn from streams of `seed`.
io::Instance make_instance(const InstanceSpec& spec, std::uint64_t seed);

/// sum_i ||xhat_i - x_i|| / ||x_i||; a channel with no sources contributes
/// ||xhat_i|| / ||y|| instead.
double normalized_error(const io::Instance& inst, const solver::DemixSolution& sol);

struct PhaseCell {
    int K1 = 0;
    int K2 = 0;
    int successes = 0;
    int trials = 0;
    double rate = 0.0;
};

struct PhaseTransitionConfig {
    int M = 8;
    std::vector<int> K1_values;
    std::vector<int> K2_values;
    int trials = 20;
    std::uint64_t seed = 0;
    /// Non-positive means 1 / (2M).
    double delta_min = 0.0;
    solver::AdmmConfig admm;
};

/// Noise-free trials of the exact program for every (K1, K2) cell. Trial
/// seeds depend only on (seed, K1, K2, M, trial), never on grid layout or
/// scheduling.
std::vector<PhaseCell> run_phase_transition(const PhaseTransitionConfig& cfg);

struct SweepPoint {
    int x = 0;
    int successes = 0;
    int trials = 0;
    double rate = 0.0;
};

enum class SweepAxis { M, K };

/// Success rate along M (with K1, K2 from cfg) or along K = K1 = K2 (with M
/// from cfg).
std::vector<SweepPoint> run_success_sweep(const PhaseTransitionConfig& cfg, SweepAxis axis, const std::vector<int>& values);

/// One exact-recovery trial; true on success. Solver errors count as failure.
bool exact_recovery_trial(int M, int K1, int K2, double delta_min, std::uint64_t seed, const solver::AdmmConfig& admm,
                          double* error_out = nullptr);

std::string phase_to_csv(const std::vector<PhaseCell>& cells);
std::vector<PhaseCell> phase_from_csv(const std::string& text);
std::string sweep_to_csv(const std::vector<SweepPoint>& points, const std::string& axis_name);
std::vector<SweepPoint> sweep_from_csv(const std::string& text);

}  // namespace atomdemix::exp
