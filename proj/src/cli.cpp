// SPDX-License-Identifier: Apache-2.0
#include "atomdemix/cli.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "atomdemix/certificate_lab.hpp"
#include "atomdemix/crb_bench.hpp"
#include "atomdemix/error.hpp"
#include "atomdemix/experiments.hpp"
#include "atomdemix/localization.hpp"

namespace atomdemix {
namespace {

struct Options {
    int M = 0;
    int K1 = -1;
    int K2 = -1;
    int k_min = 1;
    double delta_min = 0.0;
    int trials = 20;
    std::uint64_t seed = 0;
    std::optional<double> sigma;
    std::optional<double> snr_db;
    std::optional<double> lambda;
    double C_w = 1.0;
    std::string noise = "gaussian";
    std::string amplitudes = "gaussian";
    std::string out;
    std::string instance;
    std::string solution;
    std::string curves;
    int grid_size = 0;
    std::string sweep_M;
    std::string sweep_K;
    std::string snr_list = "0,5,10,15,20,25,30";
    double rho = 1.0;
    int max_iters = 20000;
    double eps_abs = 1e-7;
    double eps_rel = 1e-7;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::istringstream is(item);
        T v;
        if (!(is >> v) || !is.eof()) throw ConfigError(std::string("bad value '") + item + "' in " + flag);
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(std::string(flag) + " needs at least one value");
    return out;
}

void require(bool present, const char* flag, const std::string& sub) {
    if (!present) throw ConfigError(sub + " requires " + flag);
}

solver::AdmmConfig admm_from(const Options& o) {
    solver::AdmmConfig a;
    a.rho = o.rho;
    a.max_iters = o.max_iters;
    a.eps_abs = o.eps_abs;
    a.eps_rel = o.eps_rel;
    return a;
}

// Writes to the output path atomically, or to stdout without one.
void emit(const Options& o, const std::string& text) {
    if (o.out.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
    } else {
        io::write_text_atomic(o.out, text);
    }
}

// Summary lines go to stdout when the payload went to a file.
std::ostream& info(const Options& o) { return o.out.empty() ? std::cerr : std::cout; }

model::AmplitudeKind amplitude_kind(const std::string& s) {
    if (s == "gaussian") return model::AmplitudeKind::ComplexGaussian;
    if (s == "unit") return model::AmplitudeKind::UnitModulus;
    throw ConfigError("unknown amplitude kind '" + s + "' (gaussian, unit)");
}

struct Solved {
    io::Instance inst;
    model::MeasurementSet meas;
    solver::DemixSolution sol;
    std::optional<solver::RegularizationConfig> reg;
};

Solved solve_instance(const Options& o) {
    Solved s;
    s.inst = io::instance_from_json(io::read_json(o.instance));
    s.meas = s.inst.measurement();
    const bool noisy = s.inst.noise_kind != model::NoiseKind::None && s.inst.noise_sigma > 0.0;
    if (o.lambda) {
        s.reg = solver::RegularizationConfig{*o.lambda, o.C_w};
    } else if (noisy) {
        // bounded noise stores ||w||; the weight formula takes a per-entry level
        double level = s.inst.noise_sigma;
        if (s.inst.noise_kind == model::NoiseKind::Bounded) level /= std::sqrt(static_cast<double>(s.meas.y.size()));
        s.reg = solver::default_regularization(s.inst.M, level, o.C_w);
    }
    if (!o.solution.empty()) {
        s.sol = solver::solution_from_json(io::read_json(o.solution));
    } else if (s.reg) {
        s.sol = solver::demix_regularized(s.meas, *s.reg, admm_from(o));
    } else {
        s.sol = solver::demix_exact(s.meas, admm_from(o));
    }
    return s;
}

int cmd_synth(const Options& o) {
    require(o.M > 0, "--M", "synth");
    require(o.K1 >= 0, "--K1", "synth");
    require(o.K2 >= 0, "--K2", "synth");
    exp::InstanceSpec spec;
    spec.M = o.M;
    spec.K1 = o.K1;
    spec.K2 = o.K2;
    spec.delta_min = o.delta_min;
    spec.amplitudes = amplitude_kind(o.amplitudes);
    if (o.sigma || o.snr_db) {
        spec.noise = io::noise_kind_from_string(o.noise);
        spec.sigma = o.sigma.value_or(0.0);
        spec.snr_db = o.snr_db;
    }
    const io::Instance inst = exp::make_instance(spec, o.seed);
    emit(o, io::to_json(inst).dump(2));
    return kExitOk;
}

int cmd_solve(const Options& o) {
    require(!o.instance.empty(), "--instance", "solve");
    Options no_solution = o;
    no_solution.solution.clear();
    const Solved s = solve_instance(no_solution);
    emit(o, solver::to_json(s.sol).dump(2));
    const auto opt = solver::check_optimality(s.sol, s.meas, s.reg);
    char buf[256];
    std::snprintf(buf, sizeof buf, "normalized_error %.6e\niterations %d\nconverged %s\ndual_norms %.6f %.6f\n",
                  exp::normalized_error(s.inst, s.sol), s.sol.iterations, s.sol.converged ? "true" : "false",
                  opt.dual_norm1 / opt.bound, opt.dual_norm2 / opt.bound);
    info(o) << buf;
    return s.sol.converged ? kExitOk : kExitSolver;
}

nlohmann::json score_json(const loc::ChannelScore& s) {
    return {{"truth", s.truth_count},
            {"estimated", s.estimate_count},
            {"matched", s.matched},
            {"false_positives", s.false_positives},
            {"false_negatives", s.false_negatives},
            {"location_rmse", s.location_rmse},
            {"max_location_error", s.max_location_error}};
}

int cmd_localize(const Options& o) {
    require(!o.instance.empty(), "--instance", "localize");
    const Solved s = solve_instance(o);
    loc::LocalizationConfig lc;
    if (o.grid_size > 0) lc.grid_size = o.grid_size;
    const loc::RecoveryEstimate est = loc::recover_sources(s.meas, s.sol.p_hat, lc);
    const loc::MatchReport match = loc::match_and_score(s.inst.x1, s.inst.x2, est, 0.5 / s.inst.M);
    auto amps = [](const std::vector<linalg::Complex>& a) {
        nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
        for (const auto& v : a) {
            re.push_back(v.real());
            im.push_back(v.imag());
        }
        return nlohmann::json{{"re", re}, {"im", im}};
    };
    const nlohmann::json j{{"supports1", est.supports1},
                           {"supports2", est.supports2},
                           {"amplitudes1", amps(est.amplitudes1)},
                           {"amplitudes2", amps(est.amplitudes2)},
                           {"residual_norm", est.residual_norm},
                           {"converged", s.sol.converged},
                           {"match", {{"channel1", score_json(match.channel1)}, {"channel2", score_json(match.channel2)}}}};
    emit(o, j.dump(2));
    if (!o.curves.empty())
        io::write_text_atomic(o.curves, loc::curves_to_csv(loc::dual_curves(s.sol.p_hat, s.meas.g, lc.grid_size)));
    return s.sol.converged ? kExitOk : kExitSolver;
}

int cmd_certify(const Options& o) {
    require(o.M > 0, "--M", "certify");
    require(o.K1 >= 0, "--K1", "certify");
    require(o.K2 >= 0, "--K2", "certify");
    const double dmin = o.delta_min > 0.0 ? o.delta_min : 1.0 / o.M;
    const auto sys = cert::solve_certificate(cert::draw_certificate_system(o.M, o.K1, o.K2, dmin, o.seed));
    cert::ValidationConfig vc;
    if (o.grid_size > 0) vc.grid_size = o.grid_size;
    const auto rep = cert::validate_certificate(sys, vc);
    nlohmann::json j = cert::to_json(rep, cert::block_norm_report(sys));
    j["supports1"] = sys.supports1;
    j["supports2"] = sys.supports2;
    j["condition_estimate"] = sys.condition_estimate;
    emit(o, j.dump(2));
    if (!o.curves.empty())
        io::write_text_atomic(o.curves, loc::curves_to_csv(loc::dual_curves(cert::certificate_to_p(sys), sys.g, vc.grid_size)));
    return kExitOk;
}

int cmd_phase(const Options& o) {
    require(o.M > 0 || !o.sweep_M.empty(), "--M", "phase-transition");
    exp::PhaseTransitionConfig cfg;
    cfg.M = o.M;
    cfg.trials = o.trials;
    cfg.seed = o.seed;
    cfg.delta_min = o.delta_min;
    cfg.admm = admm_from(o);
    if (!o.sweep_M.empty() || !o.sweep_K.empty()) {
        if (!o.sweep_M.empty() && !o.sweep_K.empty()) throw ConfigError("choose one of --sweep-M and --sweep-K");
        cfg.K1_values = {o.K1 >= 0 ? o.K1 : 1};
        cfg.K2_values = {o.K2 >= 0 ? o.K2 : 1};
        const bool byM = !o.sweep_M.empty();
        if (!byM) require(o.M > 0, "--M", "phase-transition --sweep-K");
        const auto values = parse_list<int>(byM ? o.sweep_M : o.sweep_K, byM ? "--sweep-M" : "--sweep-K");
        const auto pts = exp::run_success_sweep(cfg, byM ? exp::SweepAxis::M : exp::SweepAxis::K, values);
        emit(o, exp::sweep_to_csv(pts, byM ? "M" : "K"));
        return kExitOk;
    }
    require(o.K1 >= 0, "--K1", "phase-transition");
    require(o.K2 >= 0, "--K2", "phase-transition");
    if (o.k_min < 0 || o.k_min > std::min(o.K1, o.K2)) throw ConfigError("--k-min must lie in [0, min(K1, K2)]");
    for (int k = o.k_min; k <= o.K1; ++k) cfg.K1_values.push_back(k);
    for (int k = o.k_min; k <= o.K2; ++k) cfg.K2_values.push_back(k);
    emit(o, exp::phase_to_csv(exp::run_phase_transition(cfg)));
    return kExitOk;
}

int cmd_crb(const Options& o) {
    require(o.M > 0, "--M", "crb-compare");
    crb::CrbExperiment e;
    e.M = o.M;
    e.snr_db = parse_list<double>(o.snr_list, "--snr-list");
    e.trials = o.trials;
    e.seed = o.seed;
    e.C_w = o.C_w;
    e.admm = admm_from(o);
    if (o.grid_size > 0) e.localization.grid_size = o.grid_size;
    const auto pts = crb::mse_vs_crb(e);
    emit(o, crb::curve_to_csv(pts));
    for (const auto& p : pts)
        if (!p.valid) return kExitSolver;
    return kExitOk;
}

int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::ConvergenceFailure:
        case ErrorCode::SingularSystem:
        case ErrorCode::RankDeficient:
        case ErrorCode::NoPeaksFound:
        case ErrorCode::SingularFisher:
        case ErrorCode::NonHermitianInput:
            return kExitSolver;
        default:
            return kExitConfig;
    }
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Demixing of point sources observed through two modulations."};
    app.set_config("--config", "", "key = value file mirroring the long flags");
    app.require_subcommand(1);
    app.fallthrough();
    Options o;

    app.add_option("--M", o.M, "half bandwidth; spectra have 4M+1 samples");
    app.add_option("--K1", o.K1, "first-channel source count (phase-transition: largest value)");
    app.add_option("--K2", o.K2, "second-channel source count (phase-transition: largest value)");
    app.add_option("--k-min", o.k_min, "smallest source count of the phase-transition grid");
    app.add_option("--delta-min", o.delta_min, "minimum wrap separation (default 1/(2M), certify 1/M)");
    app.add_option("--trials", o.trials, "Monte Carlo trials per point")->check(CLI::PositiveNumber);
    app.add_option("--seed", o.seed, "master seed");
    auto* sigma = app.add_option("--sigma", o.sigma, "noise level");
    auto* snr = app.add_option("--snr-db", o.snr_db, "noise level as SNR in dB");
    sigma->excludes(snr);
    app.add_option("--noise", o.noise, "noise kind for synth: gaussian or bounded");
    app.add_option("--amplitudes", o.amplitudes, "amplitude kind for synth: gaussian or unit");
    app.add_option("--lambda", o.lambda, "regularization weight override")->check(CLI::PositiveNumber);
    app.add_option("--C-w", o.C_w, "multiplier on the default regularization weight");
    app.add_option("--out", o.out, "output path (stdout when omitted)");
    app.add_option("--instance", o.instance, "instance JSON");
    app.add_option("--solution", o.solution, "solution JSON (localize: skip the solve)");
    app.add_option("--curves", o.curves, "CSV of |P| and |Q| on the grid");
    app.add_option("--grid-size", o.grid_size, "evaluation grid size");
    app.add_option("--sweep-M", o.sweep_M, "phase-transition: comma list of M values");
    app.add_option("--sweep-K", o.sweep_K, "phase-transition: comma list of K1 = K2 values");
    app.add_option("--snr-list", o.snr_list, "crb-compare: comma list of SNR values in dB");
    app.add_option("--rho", o.rho, "initial ADMM penalty");
    app.add_option("--max-iters", o.max_iters, "ADMM iteration cap");
    app.add_option("--eps-abs", o.eps_abs, "ADMM absolute tolerance");
    app.add_option("--eps-rel", o.eps_rel, "ADMM relative tolerance");

    auto* synth = app.add_subcommand("synth", "draw an instance and write it as JSON");
    auto* solve = app.add_subcommand("solve", "solve an instance (exact when noise-free)");
    auto* localize = app.add_subcommand("localize", "solve and localize from the dual polynomials");
    auto* certify = app.add_subcommand("certify", "build and validate an interpolating certificate");
    auto* phase = app.add_subcommand("phase-transition", "exact-recovery success rates");
    auto* crbc = app.add_subcommand("crb-compare", "localization MSE against the Cramer-Rao bound");

    const std::string usage = app.help();
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << usage;
        return kExitConfig;
    }

    try {
        if (synth->parsed()) return cmd_synth(o);
        if (solve->parsed()) return cmd_solve(o);
        if (localize->parsed()) return cmd_localize(o);
        if (certify->parsed()) return cmd_certify(o);
        if (phase->parsed()) return cmd_phase(o);
        if (crbc->parsed()) return cmd_crb(o);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << usage;
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}

}  // namespace atomdemix
