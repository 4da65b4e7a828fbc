// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "atomdemix/spectral_model.hpp"

namespace atomdemix::cert {

using linalg::Complex;
using linalg::ComplexMatrix;
using linalg::ComplexVector;
using linalg::RealVector;

/// Squared Fejer kernel K(tau) = (1/M) sum_n s_n exp(j 2 pi n tau).
struct FejerKernel {
    int M = 0;
    RealVector s;  // n = -2M..2M
    double kpp0 = 0.0;

    double abs_kpp0() const noexcept { return std::abs(kpp0); }
};

/// Throws DegenerateM for M < 2 unless `allow_degenerate` (M = 1 yields the
/// constant-kernel diagnostic).
FejerKernel fejer_coeffs(int M, bool allow_degenerate = false);

/// -(4/3) pi^2 (M^2 - 1).
double fejer_kpp0(int M) noexcept;

/// K^(l)(tau) = (1/M) sum_n s_n (j 2 pi n)^l exp(j 2 pi n tau); tau may be any
/// real (the kernel is 1-periodic).
Complex kernel_eval(const FejerKernel& kernel, int l, double tau);

/// K_g^(l) or, with `conjugate`, K_gbar^(l).
Complex modulated_kernel_eval(const FejerKernel& kernel, const model::Modulator& g, bool conjugate, int l,
                              double tau);

/// Coefficients (1/M) s_n [g_n | conj(g_n)] of the (modulated) kernel.
ComplexVector kernel_coefficients(const FejerKernel& kernel, const model::Modulator* g = nullptr, bool conjugate = false);

struct CertificateSystem {
    int M = 0;
    FejerKernel kernel;
    model::Modulator g;
    std::vector<double> supports1, supports2;
    std::vector<Complex> signs1, signs2;
    /// Unknown order: alpha1, sqrt|K''(0)| beta1, alpha2, sqrt|K''(0)| beta2.
    ComplexMatrix W;
    ComplexVector rhs;
    /// Unscaled coefficients, filled by solve_certificate.
    std::vector<Complex> alpha1, beta1, alpha2, beta2;
    double condition_estimate = 0.0;
    bool solved = false;

    int K1() const noexcept { return static_cast<int>(supports1.size()); }
    int K2() const noexcept { return static_cast<int>(supports2.size()); }
    ComplexMatrix W1() const { return W.topLeftCorner(2 * K1(), 2 * K1()); }
    ComplexMatrix W2() const { return W.bottomRightCorner(2 * K2(), 2 * K2()); }
    ComplexMatrix Wg() const { return W.topRightCorner(2 * K1(), 2 * K2()); }
    ComplexMatrix Wgbar() const { return W.bottomLeftCorner(2 * K2(), 2 * K1()); }
};

/// Fills W block by block from kernel evaluations at support differences;
/// rhs = (u1, 0, u2, 0). Throws DuplicateSupport, LengthMismatch.
CertificateSystem assemble_system(const std::vector<double>& supports1, const std::vector<double>& supports2,
                                  const std::vector<Complex>& signs1, const std::vector<Complex>& signs2,
                                  const model::Modulator& g, int M);

/// Random instance: supports with separation >= delta_min per channel, random
/// unit-modulus signs and a random modulator, all derived from `seed`.
CertificateSystem draw_certificate_system(int M, int K1, int K2, double delta_min, std::uint64_t seed);

/// Only the cross block W_g; used by the concentration Monte Carlo.
ComplexMatrix cross_block(const FejerKernel& kernel, const std::vector<double>& supports1,
                          const std::vector<double>& supports2, const model::Modulator& g);

inline constexpr double kCertificateConditionLimit = 1e10;

/// Throws SingularSystemError when the pivot-ratio estimate reaches 1e10.
CertificateSystem solve_certificate(CertificateSystem sys);

/// (P^(l)(tau), Q^(l)(tau)) for l in {0, 1, 2}.
std::pair<Complex, Complex> eval_cert_polys(const CertificateSystem& sys, int l, double tau);

/// Coefficient vector p with P(tau) = sum p_n exp(j 2 pi n tau); then
/// Q(tau) = sum conj(g_n) p_n exp(j 2 pi n tau).
ComplexVector certificate_to_p(const CertificateSystem& sys);

struct ValidationConfig {
    int grid_size = 65536;
    /// Non-positive means 8.245e-2 / M.
    double tau_s = 0.0;
    double interp_tol = 1e-8;
    double strict_margin = 1e-9;

    double split_for(int M) const { return tau_s > 0.0 ? tau_s : 8.245e-2 / M; }
};

struct ChannelValidation {
    /// Largest |f| on grid points at wrap distance >= tau_s from every support.
    double max_far = 0.0;
    /// Largest |f| on grid points off the supports (near and far).
    double max_off_support = 0.0;
    /// c with 1 - |f| = c M^2 d^2 fitted by least squares over the near grid,
    /// and the largest c for which the quadratic bound holds at every near
    /// grid point.
    double c_fit = 0.0;
    double c_min = 0.0;
    bool ok = false;
};

struct ValidationReport {
    double interp_residual = 0.0;
    double tau_s = 0.0;
    ChannelValidation P, Q;
    bool signs_unit = true;
    bool valid = false;
};

ValidationReport validate_certificate(const CertificateSystem& sys, const ValidationConfig& cfg = {});

struct BlockNorms {
    double i_minus_w1 = 0.0, i_minus_w2 = 0.0;
    double w1 = 0.0, w2 = 0.0;
    double w1_inv = 0.0, w2_inv = 0.0;
    double wg = 0.0;

    static constexpr double kIminusWBound = 0.3623;
    static constexpr double kWBound = 1.3623;
    static constexpr double kWInvBound = 1.568;
    bool within_bounds() const;
};

BlockNorms block_norm_report(const CertificateSystem& sys);

struct ConcentrationConfig {
    double delta = 0.5;
    double eta = 0.1;
    int trials = 200;
    void validate() const;
};

struct ConcentrationResult {
    double rate = 0.0;
    int exceedances = 0;
    int trials = 0;
    double max_norm = 0.0;
    double mean_norm = 0.0;
    bool empty_warning = false;
    std::vector<double> supports1, supports2;
};

/// ceil((46 / delta^2) K_max log(2 (K1 + K2) / eta)).
int concentration_sample_size(int K1, int K2, double delta, double eta);

/// Fixed supports with separation >= 1/M drawn from `seed`; fresh g per trial.
ConcentrationResult wg_concentration_mc(int M, int K1, int K2, const ConcentrationConfig& cc, std::uint64_t seed);
ConcentrationResult wg_concentration_mc(int M, const std::vector<double>& supports1,
                                        const std::vector<double>& supports2, const ConcentrationConfig& cc,
                                        std::uint64_t seed);

nlohmann::json to_json(const ValidationReport& rep, const BlockNorms& norms);

}  // namespace atomdemix::cert
