// SPDX-License-Identifier: Apache-2.0
#include "atomdemix/atomic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "atomdemix/error.hpp"
#include "atomdemix/trig_poly.hpp"

namespace atomdemix::solver {
namespace {

using linalg::ComplexMatrix;

struct Channel {
    ComplexMatrix Z, L, S, C, Z_prev;
    linalg::PsdProjector projector;
    double u0 = 0.0;
    double t = 0.0;

    explicit Channel(int D)
        : Z(ComplexMatrix::Zero(D, D)),
          L(ComplexMatrix::Zero(D, D)),
          S(ComplexMatrix::Zero(D, D)),
          C(ComplexMatrix::Zero(D, D)),
          Z_prev(ComplexMatrix::Zero(D, D)) {}

    double norm_value() const { return 0.5 * (u0 + t); }
};

struct RunStats {
    int iterations = 0;
    bool converged = false;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double primal_tolerance = 0.0;
    double dual_tolerance = 0.0;
    double rho = 0.0;
};

// Shared ADMM loop. Each channel carries S = [[T(u), x], [x^H, t]], its PSD
// copy Z and the scaled multiplier L for S = Z. `x_update` receives the
// border columns of C = Z - L and writes the signal iterates; `objective`
// evaluates the cost at the current S blocks.
class AdmmEngine {
public:
    AdmmEngine(int N, int channels, double weight, const AdmmConfig& config)
        : N_(N), weight_(weight), config_(config), rho_(config.rho * weight) {
        for (int c = 0; c < channels; ++c) ch_.emplace_back(N + 1);
        cx_.assign(channels, ComplexVector::Zero(N));
        x_.assign(channels, ComplexVector::Zero(N));
    }

    template <class XUpdate, class Objective>
    RunStats run(XUpdate&& x_update, Objective&& objective, std::vector<double>* trace) {
        const int nchan = static_cast<int>(ch_.size());
        const double D = N_ + 1;
        const double abs_floor = config_.eps_abs * std::sqrt(static_cast<double>(nchan)) * D;
        // The multiplier scales with the objective weight, so its floor does too.
        const double dual_floor = abs_floor * weight_;
        RunStats stats;
        for (int it = 1; it <= config_.max_iters; ++it) {
            for (int c = 0; c < nchan; ++c) {
                Channel& h = ch_[c];
                h.C = h.Z - h.L;
                cx_[c] = 0.5 * (h.C.col(N_).head(N_) + h.C.row(N_).head(N_).adjoint());
            }
            x_update(cx_, rho_, x_);
            double rp2 = 0.0, rd2 = 0.0, s2 = 0.0, z2 = 0.0, l2 = 0.0;
            for (int c = 0; c < nchan; ++c) {
                Channel& h = ch_[c];
                build_block(h, x_[c]);
                std::swap(h.Z, h.Z_prev);
                h.Z = h.S + h.L;
                h.projector.project(h.Z);
                h.L += h.S - h.Z;
                rp2 += (h.S - h.Z).squaredNorm();
                rd2 += (h.Z - h.Z_prev).squaredNorm();
                s2 += h.S.squaredNorm();
                z2 += h.Z.squaredNorm();
                l2 += h.L.squaredNorm();
            }
            stats.iterations = it;
            stats.primal_residual = std::sqrt(rp2);
            stats.dual_residual = rho_ * std::sqrt(rd2);
            stats.primal_tolerance = abs_floor + config_.eps_rel * std::sqrt(std::max(s2, z2));
            stats.dual_tolerance = dual_floor + config_.eps_rel * rho_ * std::sqrt(l2);
            if (trace) trace->push_back(objective(ch_, x_));
            if (stats.primal_residual <= stats.primal_tolerance && stats.dual_residual <= stats.dual_tolerance) {
                stats.converged = true;
                break;
            }
            if (config_.adapt_interval > 0 && it % config_.adapt_interval == 0) rebalance(stats);
        }
        stats.rho = rho_;
        return stats;
    }

    const std::vector<Channel>& channels() const { return ch_; }
    const std::vector<ComplexVector>& signals() const { return x_; }
    double rho() const { return rho_; }

    /// 2 rho L[0:N, N], symmetrized over the two border copies.
    ComplexVector border_multiplier(int c) const {
        const ComplexMatrix& L = ch_[c].L;
        return rho_ * (L.col(N_).head(N_) + L.row(N_).head(N_).adjoint());
    }

private:
    // Residuals are compared relative to their own tolerances.
    void rebalance(const RunStats& s) {
        const double rp = s.primal_residual / s.primal_tolerance;
        const double rd = s.dual_residual / s.dual_tolerance;
        double scale = 1.0;
        if (rp > config_.adapt_ratio * rd) {
            scale = config_.adapt_factor;
        } else if (rd > config_.adapt_ratio * rp) {
            scale = 1.0 / config_.adapt_factor;
        }
        if (scale == 1.0) return;
        rho_ *= scale;
        for (Channel& h : ch_) h.L /= scale;
    }

    void build_block(Channel& h, const ComplexVector& x) {
        const int N = N_;
        const double shift = weight_ / (2.0 * rho_);
        ComplexMatrix& C = h.C;
        ComplexMatrix& S = h.S;
        // Toeplitz adjoint of the leading N x N block, then the closed-form
        // minimizer of weight/2 u0 + rho/2 ||T(u) - C||^2.
        double trace = 0.0;
        for (int i = 0; i < N; ++i) trace += C(i, i).real();
        u_.resize(N);
        u_[0] = Complex((trace - shift) / N, 0.0);
        for (int k = 1; k < N; ++k) {
            Complex acc = 0.0;
            for (int i = 0; i + k < N; ++i) acc += C(i + k, i) + std::conj(C(i, i + k));
            u_[k] = acc / (2.0 * (N - k));
        }
        for (int j = 0; j < N; ++j) {
            S(j, j) = u_[0];
            for (int i = j + 1; i < N; ++i) {
                S(i, j) = u_[i - j];
                S(j, i) = std::conj(u_[i - j]);
            }
        }
        h.u0 = u_[0].real();
        h.t = C(N, N).real() - shift;
        S.col(N).head(N) = x;
        S.row(N).head(N) = x.adjoint();
        S(N, N) = h.t;
    }

    int N_;
    double weight_;
    AdmmConfig config_;
    double rho_;
    std::vector<Channel> ch_;
    std::vector<ComplexVector> cx_;
    std::vector<ComplexVector> x_;
    std::vector<Complex> u_;
};

// Both programs are homogeneous in y, so ADMM runs on y / s with
// s = rms(y); rho and the tolerances then mean the same thing at any scale.
double data_scale(const ComplexVector& v) { return v.norm() / std::sqrt(static_cast<double>(v.size())); }

void fill_stats(DemixSolution& sol, const RunStats& stats, double scale) {
    sol.primal_residual = scale * stats.primal_residual;
    sol.dual_residual = scale * stats.dual_residual;
    sol.primal_tolerance = scale * stats.primal_tolerance;
    sol.dual_tolerance = scale * stats.dual_tolerance;
    sol.rho = stats.rho;
    sol.iterations = stats.iterations;
    sol.converged = stats.converged;
}

DemixSolution zero_solution(Mode mode, int N, double lambda) {
    DemixSolution sol;
    sol.mode = mode;
    sol.lambda_w = lambda;
    sol.x1_hat = ComplexVector::Zero(N);
    sol.x2_hat = ComplexVector::Zero(N);
    sol.p_hat = ComplexVector::Zero(N);
    sol.converged = true;
    return sol;
}

void check_measurement(const model::MeasurementSet& meas) {
    const int N = model::spectrum_length(meas.M);
    if (meas.M < 1) throw Error(ErrorCode::InvalidArgument, "M must be positive");
    if (meas.y.size() != N || meas.g.samples().size() != N)
        throw Error(ErrorCode::LengthMismatch, "measurement and modulator must have 4M+1 entries");
    if (!linalg::all_finite(meas.y)) throw Error(ErrorCode::InvalidArgument, "measurement is not finite");
}

std::vector<double> real_part(const ComplexVector& v) {
    std::vector<double> out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i].real();
    return out;
}

std::vector<double> imag_part(const ComplexVector& v) {
    std::vector<double> out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i].imag();
    return out;
}

ComplexVector complex_from(const nlohmann::json& j, const char* re, const char* im) {
    const auto r = j.at(re).get<std::vector<double>>();
    const auto i = j.at(im).get<std::vector<double>>();
    if (r.size() != i.size()) throw Error(ErrorCode::LengthMismatch, std::string(re) + " and " + im + " differ");
    ComplexVector v(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) v[k] = Complex(r[k], i[k]);
    return v;
}

}  // namespace

void AdmmConfig::validate() const {
    if (!(rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");
    if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "max_iters must be positive");
    if (!(eps_abs >= 1e-12) || !(eps_rel >= 1e-12)) throw Error(ErrorCode::InvalidArgument, "tolerances must be >= 1e-12");
    if (adapt_interval < 0 || !(adapt_factor > 1.0) || !(adapt_ratio > 1.0))
        throw Error(ErrorCode::InvalidArgument, "invalid residual balancing settings");
}

void RegularizationConfig::validate() const {
    if (!(lambda_w > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda_w must be positive");
    if (!(C_w >= 1.0)) throw Error(ErrorCode::InvalidArgument, "C_w must be at least 1");
}

double default_lambda(int M, double sigma) {
    const double N = model::spectrum_length(M);
    return sigma * std::sqrt(N) * std::sqrt(1.2 * std::log(8.0 * std::numbers::pi * N * std::log(N)));
}

RegularizationConfig default_regularization(int M, double sigma, double C_w) {
    return RegularizationConfig{C_w * default_lambda(M, sigma), C_w};
}

AtomicNormResult atomic_norm_sdp(const ComplexVector& x, int M, const AdmmConfig& config) {
    config.validate();
    const int N = model::spectrum_length(M);
    if (x.size() != N) throw Error(ErrorCode::LengthMismatch, "vector must have 4M+1 entries");
    AtomicNormResult out;
    if (x.norm() == 0.0) {
        out.converged = true;
        return out;
    }
    const double scale = data_scale(x);
    const ComplexVector xs0 = x / scale;
    AdmmEngine engine(N, 1, 1.0, config);
    auto fixed = [&](const std::vector<ComplexVector>&, double, std::vector<ComplexVector>& xs) { xs[0] = xs0; };
    auto objective = [](const std::vector<Channel>& ch, const std::vector<ComplexVector>&) { return ch[0].norm_value(); };
    const RunStats stats = engine.run(fixed, objective, nullptr);
    out.value = scale * engine.channels()[0].norm_value();
    out.iterations = stats.iterations;
    out.converged = stats.converged;
    out.primal_residual = scale * stats.primal_residual;
    out.dual_residual = scale * stats.dual_residual;
    return out;
}

DemixSolution demix_exact(const model::MeasurementSet& meas, const AdmmConfig& config) {
    config.validate();
    check_measurement(meas);
    const int N = model::spectrum_length(meas.M);
    const ComplexVector& g = meas.g.samples();
    const ComplexVector gg = g.cwiseAbs2();
    const double scale = data_scale(meas.y);
    if (scale == 0.0) return zero_solution(Mode::Exact, N, 0.0);
    const ComplexVector y = meas.y / scale;

    DemixSolution sol;
    sol.mode = Mode::Exact;
    AdmmEngine engine(N, 2, 1.0, config);
    // argmin ||y - g x2 - c1||^2 + ||x2 - c2||^2, then x1 = y - g x2.
    auto eliminate = [&](const std::vector<ComplexVector>& c, double, std::vector<ComplexVector>& xs) {
        xs[1] = (g.conjugate().cwiseProduct(y - c[0]) + c[1]).cwiseQuotient(gg + ComplexVector::Ones(N));
        xs[0] = y - g.cwiseProduct(xs[1]);
    };
    auto objective = [](const std::vector<Channel>& ch, const std::vector<ComplexVector>&) {
        return ch[0].norm_value() + ch[1].norm_value();
    };
    const RunStats stats = engine.run(eliminate, objective, config.record_objective ? &sol.objective_trace : nullptr);

    sol.x1_hat = scale * engine.signals()[0];
    sol.x2_hat = scale * engine.signals()[1];
    sol.p_hat = engine.border_multiplier(0);
    sol.norm1 = scale * engine.channels()[0].norm_value();
    sol.norm2 = scale * engine.channels()[1].norm_value();
    sol.objective = sol.norm1 + sol.norm2;
    for (double& v : sol.objective_trace) v *= scale;
    fill_stats(sol, stats, scale);
    return sol;
}

DemixSolution demix_regularized(const model::MeasurementSet& meas, const RegularizationConfig& reg,
                                const AdmmConfig& config) {
    config.validate();
    reg.validate();
    check_measurement(meas);
    const int N = model::spectrum_length(meas.M);
    const ComplexVector& g = meas.g.samples();
    const ComplexVector gg = g.cwiseAbs2();
    const double scale = data_scale(meas.y);
    if (scale == 0.0) return zero_solution(Mode::Regularized, N, reg.lambda_w);
    const ComplexVector y = meas.y / scale;
    const double lambda = reg.lambda_w / scale;

    DemixSolution sol;
    sol.mode = Mode::Regularized;
    sol.lambda_w = reg.lambda_w;
    AdmmEngine engine(N, 2, lambda, config);
    // argmin 0.5 ||y - x1 - g x2||^2 + rho ||x1 - c1||^2 + rho ||x2 - c2||^2.
    auto prox = [&](const std::vector<ComplexVector>& c, double rho, std::vector<ComplexVector>& xs) {
        const double s = 1.0 / (2.0 * rho);
        const ComplexVector r =
            (y - c[0] - g.cwiseProduct(c[1])).cwiseQuotient((ComplexVector::Ones(N) + gg) * s + ComplexVector::Ones(N));
        xs[0] = c[0] + s * r;
        xs[1] = c[1] + s * g.conjugate().cwiseProduct(r);
    };
    auto objective = [&](const std::vector<Channel>& ch, const std::vector<ComplexVector>& xs) {
        const ComplexVector r = y - xs[0] - g.cwiseProduct(xs[1]);
        return 0.5 * r.squaredNorm() + lambda * (ch[0].norm_value() + ch[1].norm_value());
    };
    const RunStats stats = engine.run(prox, objective, config.record_objective ? &sol.objective_trace : nullptr);

    sol.x1_hat = scale * engine.signals()[0];
    sol.x2_hat = scale * engine.signals()[1];
    const ComplexVector r = meas.y - sol.x1_hat - g.cwiseProduct(sol.x2_hat);
    sol.p_hat = r / reg.lambda_w;
    sol.norm1 = scale * engine.channels()[0].norm_value();
    sol.norm2 = scale * engine.channels()[1].norm_value();
    sol.objective = 0.5 * r.squaredNorm() + reg.lambda_w * (sol.norm1 + sol.norm2);
    for (double& v : sol.objective_trace) v *= scale * scale;
    fill_stats(sol, stats, scale);
    return sol;
}

double dual_atomic_norm(const ComplexVector& p, int M, int grid_size) {
    if (p.size() != model::spectrum_length(M)) throw Error(ErrorCode::LengthMismatch, "vector must have 4M+1 entries");
    if (grid_size < 8 * M) throw Error(ErrorCode::InvalidArgument, "grid too coarse for the polynomial degree");
    return poly::supremum(p, grid_size).value;
}

OptimalityReport check_optimality(const DemixSolution& sol, const model::MeasurementSet& meas,
                                  const std::optional<RegularizationConfig>& reg, double tol, double gap_tol,
                                  int grid_size) {
    check_measurement(meas);
    const ComplexVector& g = meas.g.samples();
    OptimalityReport rep;
    rep.converged = sol.converged;
    ComplexVector dual;
    double primal_part = 0.0;
    double reference = 0.0;
    if (reg) {
        rep.bound = reg->lambda_w;
        dual = meas.y - sol.x1_hat - g.cwiseProduct(sol.x2_hat);
        primal_part = linalg::real_inner(sol.x1_hat + g.cwiseProduct(sol.x2_hat), dual);
        reference = reg->lambda_w * (sol.norm1 + sol.norm2);
    } else {
        rep.bound = 1.0;
        dual = sol.p_hat;
        primal_part = linalg::real_inner(meas.y, dual);
        reference = sol.norm1 + sol.norm2;
    }
    rep.dual_norm1 = dual_atomic_norm(dual, meas.M, grid_size);
    rep.dual_norm2 = dual_atomic_norm(g.conjugate().cwiseProduct(dual), meas.M, grid_size);
    rep.gap = std::abs(primal_part - reference);
    rep.relative_gap = reference > 0.0 ? rep.gap / reference : rep.gap;
    const double limit = rep.bound * (1.0 + tol);
    rep.dual_feasible = rep.dual_norm1 <= limit && rep.dual_norm2 <= limit;
    const bool gap_ok = reference > 0.0 ? rep.relative_gap <= gap_tol : rep.gap <= gap_tol * rep.bound;
    rep.satisfied = rep.converged && rep.dual_feasible && gap_ok;
    return rep;
}

nlohmann::json to_json(const DemixSolution& sol) {
    return nlohmann::json{{"mode", sol.mode == Mode::Exact ? "exact" : "regularized"},
                          {"x1_re", real_part(sol.x1_hat)},
                          {"x1_im", imag_part(sol.x1_hat)},
                          {"x2_re", real_part(sol.x2_hat)},
                          {"x2_im", imag_part(sol.x2_hat)},
                          {"p_re", real_part(sol.p_hat)},
                          {"p_im", imag_part(sol.p_hat)},
                          {"objective", sol.objective},
                          {"norm1", sol.norm1},
                          {"norm2", sol.norm2},
                          {"lambda_w", sol.lambda_w},
                          {"iterations", sol.iterations},
                          {"converged", sol.converged},
                          {"residuals",
                           {{"primal", sol.primal_residual},
                            {"dual", sol.dual_residual},
                            {"primal_tolerance", sol.primal_tolerance},
                            {"dual_tolerance", sol.dual_tolerance}}}};
}

DemixSolution solution_from_json(const nlohmann::json& j) {
    try {
        DemixSolution sol;
        sol.mode = j.value("mode", std::string("exact")) == "regularized" ? Mode::Regularized : Mode::Exact;
        sol.x1_hat = complex_from(j, "x1_re", "x1_im");
        sol.x2_hat = complex_from(j, "x2_re", "x2_im");
        sol.p_hat = complex_from(j, "p_re", "p_im");
        sol.objective = j.at("objective").get<double>();
        sol.norm1 = j.value("norm1", 0.0);
        sol.norm2 = j.value("norm2", 0.0);
        sol.lambda_w = j.value("lambda_w", 0.0);
        sol.iterations = j.at("iterations").get<int>();
        sol.converged = j.value("converged", false);
        const auto& r = j.at("residuals");
        sol.primal_residual = r.at("primal").get<double>();
        sol.dual_residual = r.at("dual").get<double>();
        sol.primal_tolerance = r.value("primal_tolerance", 0.0);
        sol.dual_tolerance = r.value("dual_tolerance", 0.0);
        return sol;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, std::string("malformed solution: ") + e.what());
    }
}

}  // namespace atomdemix::solver
