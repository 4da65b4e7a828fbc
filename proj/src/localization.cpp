// SPDX-License-Identifier: Apache-2.0
#include "atomdemix/localization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "atomdemix/error.hpp"
#include "atomdemix/trig_poly.hpp"

namespace atomdemix::loc {
namespace {

void check_poly(const DualPolynomial& poly) {
    if (poly.M < 1 || poly.coefficients.size() != model::spectrum_length(poly.M))
        throw Error(ErrorCode::LengthMismatch, "polynomial needs 4M+1 coefficients");
}

// Keeps the stronger of two peaks closer than `radius` (wrap-aware).
std::vector<Peak> merge_peaks(std::vector<Peak> peaks, double radius) {
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.value > b.value; });
    std::vector<Peak> kept;
    for (const Peak& p : peaks) {
        const bool close = std::any_of(kept.begin(), kept.end(),
                                       [&](const Peak& q) { return model::wrap_distance(p.tau, q.tau) < radius; });
        if (!close) kept.push_back(p);
    }
    std::sort(kept.begin(), kept.end(), [](const Peak& a, const Peak& b) { return a.tau < b.tau; });
    return kept;
}

linalg::ComplexMatrix design_matrix(const model::MeasurementSet& meas, const std::vector<double>& s1,
                                    const std::vector<double>& s2) {
    const int N = model::spectrum_length(meas.M);
    linalg::ComplexMatrix a(N, static_cast<Eigen::Index>(s1.size() + s2.size()));
    Eigen::Index col = 0;
    for (double t : s1) a.col(col++) = model::atom(t, meas.M);
    for (double t : s2) a.col(col++) = meas.g.samples().cwiseProduct(model::atom(t, meas.M));
    return a;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

DualPolynomial DualPolynomial::first_channel(const ComplexVector& p, int M) {
    DualPolynomial out{p, M};
    check_poly(out);
    return out;
}

DualPolynomial DualPolynomial::second_channel(const ComplexVector& p, const model::Modulator& g) {
    if (p.size() != g.samples().size()) throw Error(ErrorCode::LengthMismatch, "dual vector and modulator differ");
    DualPolynomial out{g.samples().conjugate().cwiseProduct(p), g.M()};
    check_poly(out);
    return out;
}

void LocalizationConfig::validate(int M) const {
    if (grid_size < 8 * M) throw Error(ErrorCode::InvalidArgument, "grid_size must be at least 8M");
    if (!(peak_epsilon > 0.0 && peak_epsilon < 1.0)) throw Error(ErrorCode::InvalidArgument, "peak_epsilon outside (0, 1)");
    if (newton_iters < 0) throw Error(ErrorCode::InvalidArgument, "newton_iters must be non-negative");
}

Complex eval_poly(const DualPolynomial& poly, double tau, int order) {
    check_poly(poly);
    if (!(tau >= 0.0 && tau < 1.0)) throw Error(ErrorCode::OutOfRangeTau, "tau = " + std::to_string(tau));
    if (order < 0 || order > 3) throw Error(ErrorCode::InvalidArgument, "derivative order must be 0..3");
    return poly::evaluate(poly.coefficients, tau, order);
}

std::vector<Peak> find_peaks(const DualPolynomial& poly, const LocalizationConfig& cfg) {
    check_poly(poly);
    cfg.validate(poly.M);
    const int G = cfg.grid_size;
    const std::vector<double> mod = poly::grid_modulus(poly.coefficients, G);
    const double accept = 1.0 - cfg.peak_epsilon;
    // Grid values sit below the true peak by O(M^2 h^2); screen generously.
    const double screen = 1.0 - 2.0 * cfg.peak_epsilon;
    const double h = 1.0 / G;
    std::vector<Peak> peaks;
    for (int k = 0; k < G; ++k) {
        const double left = mod[(k + G - 1) % G];
        const double right = mod[(k + 1) % G];
        if (mod[k] < screen || mod[k] < left || mod[k] <= right) continue;
        Peak p{k * h, mod[k]};
        const double tau = poly::refine_peak(poly.coefficients, p.tau, h, cfg.newton_iters);
        const double value = std::abs(poly::evaluate(poly.coefficients, tau));
        if (value >= p.value) p = {tau, value};
        if (p.value >= accept) peaks.push_back(p);
    }
    peaks = merge_peaks(std::move(peaks), cfg.radius_for(poly.M));
    if (peaks.empty()) throw Error(ErrorCode::NoPeaksFound, "no peak reaches 1 - epsilon");
    return peaks;
}

std::vector<double> locate(const DualPolynomial& poly, const LocalizationConfig& cfg) {
    std::vector<double> out;
    for (const Peak& p : find_peaks(poly, cfg)) out.push_back(p.tau);
    return out;
}

AmplitudeFit estimate_amplitudes(const model::MeasurementSet& meas, const std::vector<double>& supports1,
                                 const std::vector<double>& supports2) {
    const int N = model::spectrum_length(meas.M);
    if (meas.y.size() != N) throw Error(ErrorCode::LengthMismatch, "measurement must have 4M+1 entries");
    AmplitudeFit fit;
    const std::size_t cols = supports1.size() + supports2.size();
    if (cols == 0) {
        fit.residual = meas.y.norm();
        return fit;
    }
    if (static_cast<int>(cols) > N) throw Error(ErrorCode::RankDeficient, "more supports than measurements");
    const linalg::ComplexMatrix a = design_matrix(meas, supports1, supports2);
    const ComplexVector coef = linalg::lstsq(a, meas.y);
    for (std::size_t k = 0; k < supports1.size(); ++k) fit.amplitudes1.push_back(coef[k]);
    for (std::size_t k = 0; k < supports2.size(); ++k) fit.amplitudes2.push_back(coef[supports1.size() + k]);
    fit.residual = (meas.y - a * coef).norm();
    return fit;
}

RecoveryEstimate recover_sources(const model::MeasurementSet& meas, const ComplexVector& p_hat,
                                 const LocalizationConfig& cfg) {
    RecoveryEstimate est;
    auto peaks_or_empty = [&](const DualPolynomial& poly) {
        try {
            return locate(poly, cfg);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoPeaksFound) throw;
            return std::vector<double>{};
        }
    };
    est.supports1 = peaks_or_empty(DualPolynomial::first_channel(p_hat, meas.M));
    est.supports2 = peaks_or_empty(DualPolynomial::second_channel(p_hat, meas.g));
    AmplitudeFit fit = estimate_amplitudes(meas, est.supports1, est.supports2);

    double largest = 0.0;
    for (const auto& a : fit.amplitudes1) largest = std::max(largest, std::abs(a));
    for (const auto& a : fit.amplitudes2) largest = std::max(largest, std::abs(a));
    auto prune = [&](std::vector<double>& supports, const std::vector<Complex>& amps) {
        std::vector<double> kept;
        for (std::size_t k = 0; k < supports.size(); ++k)
            if (std::abs(amps[k]) >= kPruneRatio * largest) kept.push_back(supports[k]);
        const bool changed = kept.size() != supports.size();
        supports.swap(kept);
        return changed;
    };
    const bool changed1 = prune(est.supports1, fit.amplitudes1);
    const bool changed2 = prune(est.supports2, fit.amplitudes2);
    if (changed1 || changed2) fit = estimate_amplitudes(meas, est.supports1, est.supports2);
    est.amplitudes1 = fit.amplitudes1;
    est.amplitudes2 = fit.amplitudes2;
    est.residual_norm = fit.residual;
    return est;
}

ChannelScore score_channel(const model::PointSourceSignal& truth, const std::vector<double>& supports,
                           const std::vector<Complex>& amplitudes, double radius) {
    if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "matching radius must be positive");
    ChannelScore s;
    s.truth_count = static_cast<int>(truth.count());
    s.estimate_count = static_cast<int>(supports.size());
    struct Pair {
        double dist;
        std::size_t i, j;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < truth.count(); ++i)
        for (std::size_t j = 0; j < supports.size(); ++j) {
            const double d = model::wrap_distance(truth.locations[i], supports[j]);
            if (d <= radius) pairs.push_back({d, i, j});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.dist < b.dist; });
    std::vector<bool> used_truth(truth.count(), false), used_est(supports.size(), false);
    double loc2 = 0.0, amp2 = 0.0;
    int amp_count = 0;
    for (const Pair& p : pairs) {
        if (used_truth[p.i] || used_est[p.j]) continue;
        used_truth[p.i] = used_est[p.j] = true;
        ++s.matched;
        loc2 += p.dist * p.dist;
        s.max_location_error = std::max(s.max_location_error, p.dist);
        if (p.j < amplitudes.size()) {
            amp2 += std::norm(amplitudes[p.j] - truth.amplitudes[p.i]);
            ++amp_count;
        }
    }
    s.false_negatives = s.truth_count - s.matched;
    s.false_positives = s.estimate_count - s.matched;
    if (s.matched > 0) s.location_rmse = std::sqrt(loc2 / s.matched);
    if (amp_count > 0) s.amplitude_rmse = std::sqrt(amp2 / amp_count);
    return s;
}

MatchReport match_and_score(const model::PointSourceSignal& truth1, const model::PointSourceSignal& truth2,
                            const RecoveryEstimate& est, double radius) {
    return {score_channel(truth1, est.supports1, est.amplitudes1, radius),
            score_channel(truth2, est.supports2, est.amplitudes2, radius)};
}

std::vector<CurveRow> dual_curves(const ComplexVector& p, const model::Modulator& g, int grid_size) {
    const DualPolynomial P = DualPolynomial::first_channel(p, g.M());
    const DualPolynomial Q = DualPolynomial::second_channel(p, g);
    const std::vector<double> absP = poly::grid_modulus(P.coefficients, grid_size);
    const std::vector<double> absQ = poly::grid_modulus(Q.coefficients, grid_size);
    std::vector<CurveRow> rows(grid_size);
    for (int k = 0; k < grid_size; ++k) rows[k] = {static_cast<double>(k) / grid_size, absP[k], absQ[k]};
    return rows;
}

std::string curves_to_csv(const std::vector<CurveRow>& rows) {
    std::string out = "tau,absP,absQ\n";
    for (const CurveRow& r : rows) out += format_double(r.tau) + "," + format_double(r.absP) + "," + format_double(r.absQ) + "\n";
    return out;
}

std::vector<CurveRow> curves_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "tau,absP,absQ") throw Error(ErrorCode::Io, "unexpected curve CSV header");
    std::vector<CurveRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        CurveRow r;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &r.tau, &r.absP, &r.absQ) != 3)
            throw Error(ErrorCode::Io, "malformed curve CSV row: " + line);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace atomdemix::loc
