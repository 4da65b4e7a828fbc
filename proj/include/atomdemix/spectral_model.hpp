// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "atomdemix/linalg.hpp"

namespace atomdemix::model {

using linalg::Complex;
using linalg::ComplexVector;

/// Spectral vectors hold indices n = -2M..2M in ascending order.
constexpr int spectrum_length(int M) noexcept { return 4 * M + 1; }

/// Point sources on the unit circle [0, 1) with complex amplitudes.
struct PointSourceSignal {
    std::vector<double> locations;
    std::vector<Complex> amplitudes;

    std::size_t count() const noexcept { return locations.size(); }

    /// Throws if sizes differ, a location is outside [0, 1), two locations
    /// coincide, or an amplitude is zero.
    void validate() const;
};

/// g_n = exp(j 2 pi phi_n) for n = -2M..2M.
class Modulator {
public:
    Modulator() = default;
    static Modulator from_phases(int M, std::vector<double> phases);
    static Modulator identity(int M);
    /// Arbitrary unit-modulus samples; phases are recovered with arg().
    static Modulator from_samples(int M, const ComplexVector& g);

    int M() const noexcept { return M_; }
    const ComplexVector& samples() const noexcept { return g_; }
    const std::vector<double>& phases() const noexcept { return phases_; }
    Complex operator[](Eigen::Index i) const { return g_[i]; }

private:
    int M_ = 0;
    std::vector<double> phases_;
    ComplexVector g_;
};

struct MeasurementSet {
    ComplexVector y;
    Modulator g;
    int M = 0;
    double sigma_w = 0.0;
};

struct SeparationReport {
    double delta = 0.5;
    double delta1 = 0.5;
    double delta2 = 0.5;
};

enum class NoiseKind { None, Bounded, Gaussian };
enum class AmplitudeKind { ComplexGaussian, UnitModulus };

/// min(|a - b|, 1 - |a - b|) after reduction to the circle.
double wrap_distance(double a, double b) noexcept;
/// Signed representative of (a - b) in [-0.5, 0.5).
double signed_wrap_difference(double a, double b) noexcept;

/// c(tau) with entries exp(-j 2 pi n tau). Throws OutOfRangeTau.
ComplexVector atom(double tau, int M);

ComplexVector synthesize_spectrum(const PointSourceSignal& x, int M);

/// y = spectrum(x1) + g .* spectrum(x2) + w. `sigma_w` defaults to ||w||.
MeasurementSet synthesize_measurement(const PointSourceSignal& x1, const PointSourceSignal& x2, const Modulator& g,
                                      const std::optional<ComplexVector>& w = std::nullopt,
                                      std::optional<double> sigma_w = std::nullopt);

Modulator draw_modulator(int M, std::uint64_t seed);

/// K sorted locations with wrap-around separation >= delta_min.
/// Throws InfeasibleSeparation when K * delta_min >= 1.
std::vector<double> draw_supports(int K, double delta_min, std::uint64_t seed);

std::vector<Complex> draw_amplitudes(int K, AmplitudeKind kind, std::uint64_t seed);

/// Minimum pairwise wrap distance; 0.5 for fewer than two locations.
double min_separation(std::span<const double> locations);
SeparationReport separation(const PointSourceSignal& x1, const PointSourceSignal& x2);

/// Bounded: uniform direction with ||w|| = sigma. Gaussian: i.i.d. CN(0, sigma^2).
ComplexVector draw_noise(int M, double sigma, NoiseKind kind, std::uint64_t seed);

/// 10 log10( (||clean||^2 / (4M+1)) / sigma^2 ).
double snr_db(const ComplexVector& clean, double sigma);
/// Per-entry noise standard deviation that realizes `snr` on `clean`.
double sigma_for_snr(const ComplexVector& clean, double snr);

}  // namespace atomdemix::model
