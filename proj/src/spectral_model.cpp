// SPDX-License-Identifier: Apache-2.0
#include "atomdemix/spectral_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "atomdemix/error.hpp"

namespace atomdemix::model {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kRejectionAttempts = 10000;

// exp(-j 2 pi n tau) with the phase reduced mod 1 before scaling.
Complex unit_phasor(double n_tau) {
    const double frac = n_tau - std::floor(n_tau);
    return std::polar(1.0, -kTwoPi * frac);
}

}  // namespace

void PointSourceSignal::validate() const {
    if (locations.size() != amplitudes.size())
        throw Error(ErrorCode::LengthMismatch, "signal has " + std::to_string(locations.size()) + " locations but " +
                                                   std::to_string(amplitudes.size()) + " amplitudes");
    for (double t : locations)
        if (!(t >= 0.0 && t < 1.0)) throw Error(ErrorCode::OutOfRangeTau, "location " + std::to_string(t) + " outside [0, 1)");
    for (const Complex& a : amplitudes)
        if (a == Complex(0.0)) throw Error(ErrorCode::InvalidArgument, "zero amplitude");
    std::vector<double> sorted = locations;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] == sorted[i - 1]) throw Error(ErrorCode::DuplicateSupport, "repeated location");
}

Modulator Modulator::from_phases(int M, std::vector<double> phases) {
    if (M < 1) throw Error(ErrorCode::InvalidArgument, "modulator needs M >= 1");
    if (static_cast<int>(phases.size()) != spectrum_length(M))
        throw Error(ErrorCode::LengthMismatch, "modulator needs 4M+1 phases");
    Modulator out;
    out.M_ = M;
    out.g_.resize(spectrum_length(M));
    for (int i = 0; i < spectrum_length(M); ++i) out.g_[i] = std::polar(1.0, kTwoPi * phases[i]);
    out.phases_ = std::move(phases);
    return out;
}

Modulator Modulator::identity(int M) { return from_phases(M, std::vector<double>(spectrum_length(M), 0.0)); }

Modulator Modulator::from_samples(int M, const ComplexVector& g) {
    if (g.size() != spectrum_length(M)) throw Error(ErrorCode::LengthMismatch, "modulator needs 4M+1 samples");
    Modulator out;
    out.M_ = M;
    out.g_ = g;
    out.phases_.resize(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double ph = std::arg(g[i]) / kTwoPi;
        out.phases_[i] = ph < 0.0 ? ph + 1.0 : ph;
    }
    return out;
}

double wrap_distance(double a, double b) noexcept {
    double d = std::abs(a - b);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
}

double signed_wrap_difference(double a, double b) noexcept {
    const double d = a - b;
    return d - std::floor(d + 0.5);
}

ComplexVector atom(double tau, int M) {
    if (!(tau >= 0.0 && tau < 1.0)) throw Error(ErrorCode::OutOfRangeTau, "tau = " + std::to_string(tau));
    if (M < 1) throw Error(ErrorCode::InvalidArgument, "atom needs M >= 1");
    const int n_len = spectrum_length(M);
    ComplexVector c(n_len);
    for (int i = 0; i < n_len; ++i) c[i] = unit_phasor(static_cast<double>(i - 2 * M) * tau);
    return c;
}

ComplexVector synthesize_spectrum(const PointSourceSignal& x, int M) {
    x.validate();
    ComplexVector out = ComplexVector::Zero(spectrum_length(M));
    for (std::size_t k = 0; k < x.count(); ++k) out += x.amplitudes[k] * atom(x.locations[k], M);
    return out;
}

MeasurementSet synthesize_measurement(const PointSourceSignal& x1, const PointSourceSignal& x2, const Modulator& g,
                                      const std::optional<ComplexVector>& w, std::optional<double> sigma_w) {
    const int M = g.M();
    if (M < 1) throw Error(ErrorCode::InvalidArgument, "modulator is empty");
    if (w && w->size() != spectrum_length(M)) throw Error(ErrorCode::LengthMismatch, "noise length differs from 4M+1");
    MeasurementSet out;
    out.M = M;
    out.g = g;
    out.y = synthesize_spectrum(x1, M) + g.samples().cwiseProduct(synthesize_spectrum(x2, M));
    if (w) out.y += *w;
    out.sigma_w = sigma_w.value_or(w ? w->norm() : 0.0);
    return out;
}

Modulator draw_modulator(int M, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<double> phases(spectrum_length(M));
    for (double& p : phases) p = u01(rng);
    return Modulator::from_phases(M, std::move(phases));
}

std::vector<double> draw_supports(int K, double delta_min, std::uint64_t seed) {
    if (K < 0) throw Error(ErrorCode::InvalidArgument, "negative source count");
    if (K == 0) return {};
    if (K > 1 && !(K * delta_min < 1.0))
        throw Error(ErrorCode::InfeasibleSeparation,
                    std::to_string(K) + " sources cannot be separated by " + std::to_string(delta_min));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<double> taus(K);
    for (int attempt = 0; attempt < kRejectionAttempts; ++attempt) {
        for (double& t : taus) t = u01(rng);
        if (min_separation(taus) >= delta_min) {
            std::sort(taus.begin(), taus.end());
            return taus;
        }
    }
    // Evenly spaced fallback; each jitter stays below half the spare gap.
    const double spacing = 1.0 / K;
    const double slack = 0.45 * (spacing - delta_min);
    const double offset = u01(rng);
    std::uniform_real_distribution<double> jitter(-slack, slack);
    for (int k = 0; k < K; ++k) {
        double t = offset + k * spacing + jitter(rng);
        t -= std::floor(t);
        taus[k] = t >= 1.0 ? 0.0 : t;
    }
    std::sort(taus.begin(), taus.end());
    return taus;
}

std::vector<Complex> draw_amplitudes(int K, AmplitudeKind kind, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Complex> out(std::max(K, 0));
    if (kind == AmplitudeKind::ComplexGaussian) {
        std::normal_distribution<double> n01(0.0, std::sqrt(0.5));
        for (Complex& a : out) {
            do {
                a = Complex(n01(rng), n01(rng));
            } while (a == Complex(0.0));
        }
    } else {
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (Complex& a : out) a = std::polar(1.0, kTwoPi * u01(rng));
    }
    return out;
}

double min_separation(std::span<const double> locations) {
    double best = 0.5;
    for (std::size_t i = 0; i < locations.size(); ++i)
        for (std::size_t j = i + 1; j < locations.size(); ++j) best = std::min(best, wrap_distance(locations[i], locations[j]));
    return best;
}

SeparationReport separation(const PointSourceSignal& x1, const PointSourceSignal& x2) {
    SeparationReport r;
    r.delta1 = min_separation(x1.locations);
    r.delta2 = min_separation(x2.locations);
    r.delta = std::min(r.delta1, r.delta2);
    return r;
}

ComplexVector draw_noise(int M, double sigma, NoiseKind kind, std::uint64_t seed) {
    if (sigma < 0.0) throw Error(ErrorCode::InvalidArgument, "negative noise level");
    const int n_len = spectrum_length(M);
    ComplexVector w = ComplexVector::Zero(n_len);
    if (sigma == 0.0 || kind == NoiseKind::None) return w;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, std::sqrt(0.5));
    for (int i = 0; i < n_len; ++i) w[i] = Complex(n01(rng), n01(rng));
    if (kind == NoiseKind::Bounded) {
        w *= sigma / w.norm();
    } else {
        w *= sigma;
    }
    return w;
}

double snr_db(const ComplexVector& clean, double sigma) {
    const double per_entry = clean.squaredNorm() / static_cast<double>(clean.size());
    return 10.0 * std::log10(per_entry / (sigma * sigma));
}

double sigma_for_snr(const ComplexVector& clean, double snr) {
    const double per_entry = clean.squaredNorm() / static_cast<double>(clean.size());
    return std::sqrt(per_entry / std::pow(10.0, snr / 10.0));
}

}  // namespace atomdemix::model
