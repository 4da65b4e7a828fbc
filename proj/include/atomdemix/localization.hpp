// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "atomdemix/spectral_model.hpp"

namespace atomdemix::loc {

using linalg::Complex;
using linalg::ComplexVector;

/// f(tau) = sum_n c_n exp(j 2 pi n tau), n = -2M..2M.
struct DualPolynomial {
    ComplexVector coefficients;
    int M = 0;

    /// P(tau) from the dual vector p.
    static DualPolynomial first_channel(const ComplexVector& p, int M);
    /// Q(tau) from conj(g) .* p.
    static DualPolynomial second_channel(const ComplexVector& p, const model::Modulator& g);
};

struct LocalizationConfig {
    int grid_size = 16384;
    /// Peaks with |f| >= 1 - peak_epsilon are accepted.
    double peak_epsilon = 1e-3;
    int newton_iters = 20;
    /// Non-positive means 0.25 / M.
    double merge_radius = 0.0;

    double radius_for(int M) const { return merge_radius > 0.0 ? merge_radius : 0.25 / M; }
    void validate(int M) const;
};

/// sum_n c_n (j 2 pi n)^order exp(j 2 pi n tau), order in {0, 1, 2, 3}.
Complex eval_poly(const DualPolynomial& poly, double tau, int order = 0);

struct Peak {
    double tau = 0.0;
    double value = 0.0;
};

/// Refined local maxima of |f| with value >= 1 - peak_epsilon, merged within
/// the merge radius and sorted by location. Throws NoPeaksFound.
std::vector<Peak> find_peaks(const DualPolynomial& poly, const LocalizationConfig& cfg = {});
std::vector<double> locate(const DualPolynomial& poly, const LocalizationConfig& cfg = {});

struct AmplitudeFit {
    std::vector<Complex> amplitudes1;
    std::vector<Complex> amplitudes2;
    double residual = 0.0;
};

/// Least squares for y ~ [A1 | g .* A2] a with atom columns at the supports.
AmplitudeFit estimate_amplitudes(const model::MeasurementSet& meas, const std::vector<double>& supports1,
                                 const std::vector<double>& supports2);

struct RecoveryEstimate {
    std::vector<double> supports1;
    std::vector<double> supports2;
    std::vector<Complex> amplitudes1;
    std::vector<Complex> amplitudes2;
    double residual_norm = 0.0;
};

/// Supports below this fraction of the largest fitted amplitude are dropped
/// before a single refit.
inline constexpr double kPruneRatio = 1e-3;

/// Peaks of P and Q from the dual vector, amplitude fit, pruning, refit. A
/// channel with no peaks contributes no supports.
RecoveryEstimate recover_sources(const model::MeasurementSet& meas, const ComplexVector& p_hat,
                                 const LocalizationConfig& cfg = {});

struct ChannelScore {
    int truth_count = 0;
    int estimate_count = 0;
    int matched = 0;
    int false_positives = 0;
    int false_negatives = 0;
    double location_rmse = 0.0;
    double max_location_error = 0.0;
    double amplitude_rmse = 0.0;
};

struct MatchReport {
    ChannelScore channel1;
    ChannelScore channel2;

    bool all_matched() const {
        return channel1.false_negatives == 0 && channel2.false_negatives == 0;
    }
    double max_location_error() const {
        return std::max(channel1.max_location_error, channel2.max_location_error);
    }
};

/// Greedy nearest-pair matching under wrap distance, pairs farther than
/// `radius` are never matched.
ChannelScore score_channel(const model::PointSourceSignal& truth, const std::vector<double>& supports,
                           const std::vector<Complex>& amplitudes, double radius);
MatchReport match_and_score(const model::PointSourceSignal& truth1, const model::PointSourceSignal& truth2,
                            const RecoveryEstimate& est, double radius);

struct CurveRow {
    double tau = 0.0;
    double absP = 0.0;
    double absQ = 0.0;
};

/// |P| and |Q| on tau_k = k / grid_size.
std::vector<CurveRow> dual_curves(const ComplexVector& p, const model::Modulator& g, int grid_size);
/// Header "tau,absP,absQ", 17 significant digits.
std::string curves_to_csv(const std::vector<CurveRow>& rows);
std::vector<CurveRow> curves_from_csv(const std::string& text);

}  // namespace atomdemix::loc
