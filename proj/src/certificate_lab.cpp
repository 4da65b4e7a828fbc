// SPDX-License-Identifier: Apache-2.0
#include "atomdemix/certificate_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "atomdemix/error.hpp"
#include "atomdemix/parallel.hpp"
#include "atomdemix/random.hpp"
#include "atomdemix/trig_poly.hpp"

namespace atomdemix::cert {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Complex phasor(double n_tau) {
    const double frac = n_tau - std::floor(n_tau);
    return std::polar(1.0, kTwoPi * frac);
}

Complex derivative_factor(int n, int l) {
    Complex f(1.0);
    const Complex jw(0.0, kTwoPi * n);
    for (int i = 0; i < l; ++i) f *= jw;
    return f;
}

// (1/M) sum_n s_n w_n (j 2 pi n)^l exp(j 2 pi n tau), w_n = 1 when `weights`
// is null.
Complex kernel_sum(const FejerKernel& k, const ComplexVector* weights, bool conj, int l, double tau) {
    if (l < 0 || l > 3) throw Error(ErrorCode::InvalidArgument, "kernel derivative order must be 0..3");
    const int twoM = 2 * k.M;
    Complex acc(0.0);
    for (int n = -twoM; n <= twoM; ++n) {
        const int i = n + twoM;
        if (k.s[i] == 0.0) continue;
        Complex term = k.s[i] * derivative_factor(n, l) * phasor(n * tau);
        if (weights) term *= conj ? std::conj((*weights)[i]) : (*weights)[i];
        acc += term;
    }
    return acc / static_cast<double>(k.M);
}

void check_support_list(const std::vector<double>& s, const char* name) {
    for (double t : s)
        if (!(t >= 0.0 && t < 1.0)) throw Error(ErrorCode::OutOfRangeTau, std::string(name) + " outside [0, 1)");
    std::vector<double> sorted = s;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] == sorted[i - 1]) throw Error(ErrorCode::DuplicateSupport, std::string("repeated ") + name);
}

// Fills the 2x2 block of kernel rows/cols for row supports `ra` against
// column supports `cb`, placed at (r0, c0).
template <class Eval>
void fill_block(ComplexMatrix& W, Eigen::Index r0, Eigen::Index c0, const std::vector<double>& ra,
                const std::vector<double>& cb, double a, Eval eval) {
    const Eigen::Index Kr = static_cast<Eigen::Index>(ra.size());
    const Eigen::Index Kc = static_cast<Eigen::Index>(cb.size());
    for (Eigen::Index l = 0; l < Kr; ++l)
        for (Eigen::Index k = 0; k < Kc; ++k) {
            const double d = ra[l] - cb[k];
            const Complex k0 = eval(0, d), k1 = eval(1, d), k2 = eval(2, d);
            W(r0 + l, c0 + k) = k0;
            W(r0 + l, c0 + Kc + k) = a * k1;
            W(r0 + Kr + l, c0 + k) = -a * k1;
            W(r0 + Kr + l, c0 + Kc + k) = -a * a * k2;
        }
}

ChannelValidation validate_channel(const std::vector<double>& mod, const std::vector<double>& supports, int M,
                                   double tau_s, double margin) {
    ChannelValidation out;
    const int G = static_cast<int>(mod.size());
    out.c_min = std::numeric_limits<double>::infinity();
    double num = 0.0, den = 0.0;
    bool any_near = false;
    const double M2 = static_cast<double>(M) * M;
    for (int i = 0; i < G; ++i) {
        const double tau = static_cast<double>(i) / G;
        double d = 1.0;
        for (double t : supports) d = std::min(d, model::wrap_distance(tau, t));
        if (d < 1e-14) continue;
        out.max_off_support = std::max(out.max_off_support, mod[i]);
        if (d >= tau_s) {
            out.max_far = std::max(out.max_far, mod[i]);
            continue;
        }
        any_near = true;
        const double x = M2 * d * d;
        const double r = 1.0 - mod[i];
        num += r * x;
        den += x * x;
        out.c_min = std::min(out.c_min, r / x);
    }
    if (any_near) {
        out.c_fit = num / den;
    } else {
        out.c_min = 0.0;
    }
    const bool near_ok = !any_near || (out.c_fit > 0.0 && out.c_min > 0.0);
    out.ok = out.max_far < 1.0 - margin && near_ok;
    return out;
}

}  // namespace

double fejer_kpp0(int M) noexcept {
    return -(4.0 / 3.0) * std::numbers::pi * std::numbers::pi * (static_cast<double>(M) * M - 1.0);
}

FejerKernel fejer_coeffs(int M, bool allow_degenerate) {
    if (M < 1 || (M < 2 && !allow_degenerate))
        throw Error(ErrorCode::DegenerateM, "kernel construction needs M >= 2, got " + std::to_string(M));
    FejerKernel k;
    k.M = M;
    k.s = RealVector::Zero(model::spectrum_length(M));
    const double m = M;
    for (int n = -2 * M; n <= 2 * M; ++n) {
        double acc = 0.0;
        for (int i = std::max(n - M, -M); i <= std::min(n + M, M); ++i)
            acc += (1.0 - std::abs(i) / m) * (1.0 - std::abs(n - i) / m);
        k.s[n + 2 * M] = acc / m;
    }
    k.kpp0 = fejer_kpp0(M);
    return k;
}

Complex kernel_eval(const FejerKernel& kernel, int l, double tau) { return kernel_sum(kernel, nullptr, false, l, tau); }

Complex modulated_kernel_eval(const FejerKernel& kernel, const model::Modulator& g, bool conjugate, int l,
                              double tau) {
    if (g.M() != kernel.M) throw Error(ErrorCode::LengthMismatch, "modulator and kernel lengths differ");
    return kernel_sum(kernel, &g.samples(), conjugate, l, tau);
}

ComplexVector kernel_coefficients(const FejerKernel& kernel, const model::Modulator* g, bool conjugate) {
    ComplexVector c = kernel.s.cast<Complex>() / static_cast<double>(kernel.M);
    if (g) {
        if (g->M() != kernel.M) throw Error(ErrorCode::LengthMismatch, "modulator and kernel lengths differ");
        c = c.cwiseProduct(conjugate ? ComplexVector(g->samples().conjugate()) : g->samples());
    }
    return c;
}

CertificateSystem assemble_system(const std::vector<double>& supports1, const std::vector<double>& supports2,
                                  const std::vector<Complex>& signs1, const std::vector<Complex>& signs2,
                                  const model::Modulator& g, int M) {
    if (signs1.size() != supports1.size() || signs2.size() != supports2.size())
        throw Error(ErrorCode::LengthMismatch, "one sign per support is required");
    if (g.M() != M) throw Error(ErrorCode::LengthMismatch, "modulator length does not match M");
    check_support_list(supports1, "first-channel support");
    check_support_list(supports2, "second-channel support");

    CertificateSystem sys;
    sys.M = M;
    sys.kernel = fejer_coeffs(M);
    sys.g = g;
    sys.supports1 = supports1;
    sys.supports2 = supports2;
    sys.signs1 = signs1;
    sys.signs2 = signs2;

    const Eigen::Index K1 = sys.K1(), K2 = sys.K2();
    const Eigen::Index n = 2 * (K1 + K2);
    const double a = 1.0 / std::sqrt(sys.kernel.abs_kpp0());
    sys.W = ComplexMatrix::Zero(n, n);
    const FejerKernel& k = sys.kernel;
    const ComplexVector& gs = g.samples();
    fill_block(sys.W, 0, 0, supports1, supports1, a, [&](int l, double d) { return kernel_sum(k, nullptr, false, l, d); });
    fill_block(sys.W, 0, 2 * K1, supports1, supports2, a, [&](int l, double d) { return kernel_sum(k, &gs, false, l, d); });
    fill_block(sys.W, 2 * K1, 0, supports2, supports1, a, [&](int l, double d) { return kernel_sum(k, &gs, true, l, d); });
    fill_block(sys.W, 2 * K1, 2 * K1, supports2, supports2, a,
               [&](int l, double d) { return kernel_sum(k, nullptr, false, l, d); });

    sys.rhs = ComplexVector::Zero(n);
    for (Eigen::Index i = 0; i < K1; ++i) sys.rhs[i] = signs1[i];
    for (Eigen::Index i = 0; i < K2; ++i) sys.rhs[2 * K1 + i] = signs2[i];
    return sys;
}

CertificateSystem draw_certificate_system(int M, int K1, int K2, double delta_min, std::uint64_t seed) {
    if (K1 < 0 || K2 < 0) throw Error(ErrorCode::InvalidArgument, "support counts must be non-negative");
    const auto s1 = model::draw_supports(K1, delta_min, derive_seed(seed, 0, stream::kSupports1));
    const auto s2 = model::draw_supports(K2, delta_min, derive_seed(seed, 0, stream::kSupports2));
    const auto u1 = model::draw_amplitudes(K1, model::AmplitudeKind::UnitModulus, derive_seed(seed, 0, stream::kSigns));
    const auto u2 = model::draw_amplitudes(K2, model::AmplitudeKind::UnitModulus, derive_seed(seed, 1, stream::kSigns));
    const model::Modulator g = model::draw_modulator(M, derive_seed(seed, 0, stream::kModulator));
    return assemble_system(s1, s2, u1, u2, g, M);
}

ComplexMatrix cross_block(const FejerKernel& kernel, const std::vector<double>& supports1,
                          const std::vector<double>& supports2, const model::Modulator& g) {
    if (g.M() != kernel.M) throw Error(ErrorCode::LengthMismatch, "modulator and kernel lengths differ");
    const double a = 1.0 / std::sqrt(kernel.abs_kpp0());
    ComplexMatrix W = ComplexMatrix::Zero(2 * supports1.size(), 2 * supports2.size());
    fill_block(W, 0, 0, supports1, supports2, a,
               [&](int l, double d) { return kernel_sum(kernel, &g.samples(), false, l, d); });
    return W;
}

CertificateSystem solve_certificate(CertificateSystem sys) {
    const Eigen::Index n = sys.W.rows();
    sys.alpha1.assign(sys.K1(), Complex(0.0));
    sys.beta1.assign(sys.K1(), Complex(0.0));
    sys.alpha2.assign(sys.K2(), Complex(0.0));
    sys.beta2.assign(sys.K2(), Complex(0.0));
    if (n == 0) {
        sys.solved = true;
        sys.condition_estimate = 1.0;
        return sys;
    }
    sys.condition_estimate = linalg::pivot_condition_estimate(sys.W);
    if (!(sys.condition_estimate < kCertificateConditionLimit))
        throw SingularSystemError("interpolation system is numerically singular", sys.condition_estimate);
    const ComplexVector z = Eigen::PartialPivLU<ComplexMatrix>(sys.W).solve(sys.rhs);
    const double a = 1.0 / std::sqrt(sys.kernel.abs_kpp0());
    const int K1 = sys.K1(), K2 = sys.K2();
    for (int i = 0; i < K1; ++i) {
        sys.alpha1[i] = z[i];
        sys.beta1[i] = a * z[K1 + i];
    }
    for (int i = 0; i < K2; ++i) {
        sys.alpha2[i] = z[2 * K1 + i];
        sys.beta2[i] = a * z[2 * K1 + K2 + i];
    }
    sys.solved = true;
    return sys;
}

std::pair<Complex, Complex> eval_cert_polys(const CertificateSystem& sys, int l, double tau) {
    if (!sys.solved) throw Error(ErrorCode::InvalidArgument, "certificate system has not been solved");
    if (l < 0 || l > 2) throw Error(ErrorCode::InvalidArgument, "certificate derivative order must be 0..2");
    const FejerKernel& k = sys.kernel;
    const ComplexVector& gs = sys.g.samples();
    Complex P(0.0), Q(0.0);
    for (int i = 0; i < sys.K1(); ++i) {
        const double d = tau - sys.supports1[i];
        P += sys.alpha1[i] * kernel_sum(k, nullptr, false, l, d) + sys.beta1[i] * kernel_sum(k, nullptr, false, l + 1, d);
        Q += sys.alpha1[i] * kernel_sum(k, &gs, true, l, d) + sys.beta1[i] * kernel_sum(k, &gs, true, l + 1, d);
    }
    for (int i = 0; i < sys.K2(); ++i) {
        const double d = tau - sys.supports2[i];
        P += sys.alpha2[i] * kernel_sum(k, &gs, false, l, d) + sys.beta2[i] * kernel_sum(k, &gs, false, l + 1, d);
        Q += sys.alpha2[i] * kernel_sum(k, nullptr, false, l, d) + sys.beta2[i] * kernel_sum(k, nullptr, false, l + 1, d);
    }
    return {P, Q};
}

ComplexVector certificate_to_p(const CertificateSystem& sys) {
    if (!sys.solved) throw Error(ErrorCode::InvalidArgument, "certificate system has not been solved");
    const int M = sys.M;
    const int N = model::spectrum_length(M);
    ComplexVector p = ComplexVector::Zero(N);
    for (int i = 0; i < N; ++i) {
        const int n = i - 2 * M;
        const Complex jw(0.0, kTwoPi * n);
        Complex c1(0.0), c2(0.0);
        for (int k = 0; k < sys.K1(); ++k) c1 += (sys.alpha1[k] + sys.beta1[k] * jw) * phasor(-n * sys.supports1[k]);
        for (int k = 0; k < sys.K2(); ++k) c2 += (sys.alpha2[k] + sys.beta2[k] * jw) * phasor(-n * sys.supports2[k]);
        p[i] = sys.kernel.s[i] / M * (c1 + sys.g[i] * c2);
    }
    return p;
}

ValidationReport validate_certificate(const CertificateSystem& sys, const ValidationConfig& cfg) {
    if (cfg.grid_size < 8 * sys.M) throw Error(ErrorCode::InvalidArgument, "validation grid must be at least 8M");
    ValidationReport rep;
    rep.tau_s = cfg.split_for(sys.M);
    for (const Complex& u : sys.signs1) rep.signs_unit = rep.signs_unit && std::abs(std::abs(u) - 1.0) <= 1e-12;
    for (const Complex& u : sys.signs2) rep.signs_unit = rep.signs_unit && std::abs(std::abs(u) - 1.0) <= 1e-12;

    for (int k = 0; k < sys.K1(); ++k) {
        const double t = sys.supports1[k];
        rep.interp_residual = std::max({rep.interp_residual, std::abs(eval_cert_polys(sys, 0, t).first - sys.signs1[k]),
                                        std::abs(eval_cert_polys(sys, 1, t).first)});
    }
    for (int k = 0; k < sys.K2(); ++k) {
        const double t = sys.supports2[k];
        rep.interp_residual = std::max({rep.interp_residual, std::abs(eval_cert_polys(sys, 0, t).second - sys.signs2[k]),
                                        std::abs(eval_cert_polys(sys, 1, t).second)});
    }

    const ComplexVector p = certificate_to_p(sys);
    const ComplexVector q = sys.g.samples().conjugate().cwiseProduct(p);
    rep.P = validate_channel(poly::grid_modulus(p, cfg.grid_size), sys.supports1, sys.M, rep.tau_s, cfg.strict_margin);
    rep.Q = validate_channel(poly::grid_modulus(q, cfg.grid_size), sys.supports2, sys.M, rep.tau_s, cfg.strict_margin);
    rep.valid = rep.signs_unit && rep.interp_residual <= cfg.interp_tol && rep.P.ok && rep.Q.ok;
    return rep;
}

bool BlockNorms::within_bounds() const {
    const double slack = 1e-12;
    return i_minus_w1 <= kIminusWBound + slack && i_minus_w2 <= kIminusWBound + slack && w1 <= kWBound + slack &&
           w2 <= kWBound + slack && w1_inv <= kWInvBound + slack && w2_inv <= kWInvBound + slack;
}

BlockNorms block_norm_report(const CertificateSystem& sys) {
    BlockNorms out;
    auto diag_block = [](const ComplexMatrix& w, double& i_minus, double& norm, double& inv) {
        if (w.size() == 0) return;
        const ComplexMatrix sym = 0.5 * (w + w.adjoint());
        const RealVector ev = linalg::hermitian_eigenvalues(sym);
        i_minus = (1.0 - ev.array()).abs().maxCoeff();
        norm = ev.array().abs().maxCoeff();
        const double smallest = ev.array().abs().minCoeff();
        inv = smallest > 0.0 ? 1.0 / smallest : std::numeric_limits<double>::infinity();
    };
    diag_block(sys.W1(), out.i_minus_w1, out.w1, out.w1_inv);
    diag_block(sys.W2(), out.i_minus_w2, out.w2, out.w2_inv);
    const ComplexMatrix wg = sys.Wg();
    if (wg.size() > 0) out.wg = linalg::operator_norm(wg);
    return out;
}

void ConcentrationConfig::validate() const {
    if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
    if (!(eta > 0.0 && eta < 1.0)) throw Error(ErrorCode::InvalidArgument, "eta must lie in (0, 1)");
    if (trials < 0) throw Error(ErrorCode::InvalidArgument, "trials must be non-negative");
}

int concentration_sample_size(int K1, int K2, double delta, double eta) {
    if (K1 + K2 <= 0 || !(delta > 0.0) || !(eta > 0.0 && eta < 1.0))
        throw Error(ErrorCode::InvalidArgument, "concentration size needs K1 + K2 > 0, delta > 0, eta in (0, 1)");
    const double kmax = std::max(K1, K2);
    return static_cast<int>(std::ceil(46.0 / (delta * delta) * kmax * std::log(2.0 * (K1 + K2) / eta)));
}

ConcentrationResult wg_concentration_mc(int M, const std::vector<double>& supports1,
                                        const std::vector<double>& supports2, const ConcentrationConfig& cc,
                                        std::uint64_t seed) {
    cc.validate();
    check_support_list(supports1, "first-channel support");
    check_support_list(supports2, "second-channel support");
    ConcentrationResult out;
    out.supports1 = supports1;
    out.supports2 = supports2;
    out.trials = cc.trials;
    if (cc.trials == 0) {
        out.empty_warning = true;
        return out;
    }
    const FejerKernel kernel = fejer_coeffs(M);
    std::vector<double> norms(cc.trials, 0.0);
    parallel_for(static_cast<std::size_t>(cc.trials), [&](std::size_t t) {
        const model::Modulator g = model::draw_modulator(M, derive_seed(seed, t, stream::kModulator));
        norms[t] = linalg::operator_norm(cross_block(kernel, supports1, supports2, g));
    });
    double sum = 0.0;
    for (double v : norms) {
        if (v >= cc.delta) ++out.exceedances;
        out.max_norm = std::max(out.max_norm, v);
        sum += v;
    }
    out.mean_norm = sum / cc.trials;
    out.rate = static_cast<double>(out.exceedances) / cc.trials;
    return out;
}

ConcentrationResult wg_concentration_mc(int M, int K1, int K2, const ConcentrationConfig& cc, std::uint64_t seed) {
    const double delta_min = 1.0 / M;
    const std::vector<double> s1 = model::draw_supports(K1, delta_min, derive_seed(seed, 0, stream::kSupports1));
    const std::vector<double> s2 = model::draw_supports(K2, delta_min, derive_seed(seed, 0, stream::kSupports2));
    return wg_concentration_mc(M, s1, s2, cc, seed);
}

nlohmann::json to_json(const ValidationReport& rep, const BlockNorms& norms) {
    auto channel = [](const ChannelValidation& c) {
        return nlohmann::json{{"max_far", c.max_far},
                              {"max_off_support", c.max_off_support},
                              {"c_fit", c.c_fit},
                              {"c_min", c.c_min},
                              {"ok", c.ok}};
    };
    return nlohmann::json{{"interp_residual", rep.interp_residual},
                          {"maxP_far", rep.P.max_far},
                          {"maxQ_far", rep.Q.max_far},
                          {"tau_s", rep.tau_s},
                          {"signs_unit", rep.signs_unit},
                          {"valid", rep.valid},
                          {"P", channel(rep.P)},
                          {"Q", channel(rep.Q)},
                          {"block_norms",
                           {{"I_minus_W1", norms.i_minus_w1},
                            {"I_minus_W2", norms.i_minus_w2},
                            {"W1", norms.w1},
                            {"W2", norms.w2},
                            {"W1_inv", norms.w1_inv},
                            {"W2_inv", norms.w2_inv},
                            {"Wg", norms.wg},
                            {"within_bounds", norms.within_bounds()}}}};
}

}  // namespace atomdemix::cert
