// SPDX-License-Identifier: Apache-2.0
#include "atomdemix/experiments.hpp"

#include <cstdio>
#include <limits>
#include <sstream>

#include "atomdemix/error.hpp"
#include "atomdemix/parallel.hpp"
#include "atomdemix/random.hpp"

namespace atomdemix::exp {
namespace {

std::uint64_t cell_seed(std::uint64_t seed, int M, int K1, int K2) {
    const std::uint64_t key = (static_cast<std::uint64_t>(M) << 32) | (static_cast<std::uint64_t>(K1) << 16) |
                              static_cast<std::uint64_t>(K2);
    return derive_seed(seed, key, stream::kTrial);
}

struct Job {
    int M, K1, K2;
    std::size_t slot;
    std::uint64_t seed;
};

// Runs every job and returns per-slot success counts.
std::vector<int> run_jobs(const std::vector<Job>& jobs, std::size_t slots, double delta_min_override,
                          const solver::AdmmConfig& admm) {
    std::vector<char> ok(jobs.size(), 0);
    parallel_for(jobs.size(), [&](std::size_t i) {
        const Job& j = jobs[i];
        const double dmin = delta_min_override > 0.0 ? delta_min_override : 0.5 / j.M;
        ok[i] = exact_recovery_trial(j.M, j.K1, j.K2, dmin, j.seed, admm) ? 1 : 0;
    });
    std::vector<int> counts(slots, 0);
    for (std::size_t i = 0; i < jobs.size(); ++i) counts[jobs[i].slot] += ok[i];
    return counts;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

io::Instance make_instance(const InstanceSpec& spec, std::uint64_t seed) {
    if (spec.M < 1) throw Error(ErrorCode::InvalidArgument, "M must be positive");
    io::Instance inst;
    inst.M = spec.M;
    inst.seed = seed;
    const double dmin = spec.separation();
    inst.x1.locations = model::draw_supports(spec.K1, dmin, derive_seed(seed, 0, stream::kSupports1));
    inst.x2.locations = model::draw_supports(spec.K2, dmin, derive_seed(seed, 0, stream::kSupports2));
    inst.x1.amplitudes = model::draw_amplitudes(spec.K1, spec.amplitudes, derive_seed(seed, 0, stream::kAmplitudes1));
    inst.x2.amplitudes = model::draw_amplitudes(spec.K2, spec.amplitudes, derive_seed(seed, 0, stream::kAmplitudes2));
    inst.modulator_phases = model::draw_modulator(spec.M, derive_seed(seed, 0, stream::kModulator)).phases();
    inst.noise_kind = spec.noise;
    inst.noise_sigma = spec.sigma;
    if (spec.noise != model::NoiseKind::None && spec.snr_db) {
        const auto clean = inst.clean_signal();
        if (clean.norm() == 0.0) throw Error(ErrorCode::InvalidArgument, "SNR is undefined for a zero signal");
        inst.noise_sigma = model::sigma_for_snr(clean, *spec.snr_db);
    }
    if (spec.noise == model::NoiseKind::None) inst.noise_sigma = 0.0;
    return inst;
}

double normalized_error(const io::Instance& inst, const solver::DemixSolution& sol) {
    const auto s1 = model::synthesize_spectrum(inst.x1, inst.M);
    const auto s2 = model::synthesize_spectrum(inst.x2, inst.M);
    const double ynorm = inst.measurement().y.norm();
    auto term = [&](const linalg::ComplexVector& est, const linalg::ComplexVector& truth) {
        const double tn = truth.norm();
        if (tn > 0.0) return (est - truth).norm() / tn;
        return ynorm > 0.0 ? est.norm() / ynorm : est.norm();
    };
    return term(sol.x1_hat, s1) + term(sol.x2_hat, s2);
}

bool exact_recovery_trial(int M, int K1, int K2, double delta_min, std::uint64_t seed, const solver::AdmmConfig& admm,
                          double* error_out) {
    if (K1 == 0 && K2 == 0) {
        if (error_out) *error_out = 0.0;
        return true;
    }
    InstanceSpec spec;
    spec.M = M;
    spec.K1 = K1;
    spec.K2 = K2;
    spec.delta_min = delta_min;
    try {
        const io::Instance inst = make_instance(spec, seed);
        const auto sol = solver::demix_exact(inst.measurement(), admm);
        const double err = normalized_error(inst, sol);
        if (error_out) *error_out = err;
        return err <= kSuccessThreshold;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InfeasibleSeparation) throw;
        if (error_out) *error_out = std::numeric_limits<double>::infinity();
        return false;
    }
}

std::vector<PhaseCell> run_phase_transition(const PhaseTransitionConfig& cfg) {
    if (cfg.trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be positive");
    cfg.admm.validate();
    std::vector<PhaseCell> cells;
    std::vector<Job> jobs;
    for (int K1 : cfg.K1_values)
        for (int K2 : cfg.K2_values) {
            if (K1 < 0 || K2 < 0) throw Error(ErrorCode::InvalidArgument, "source counts must be non-negative");
            const std::size_t slot = cells.size();
            cells.push_back({K1, K2, 0, cfg.trials, 0.0});
            const std::uint64_t cs = cell_seed(cfg.seed, cfg.M, K1, K2);
            for (int t = 0; t < cfg.trials; ++t) jobs.push_back({cfg.M, K1, K2, slot, derive_seed(cs, t, stream::kTrial)});
        }
    const std::vector<int> counts = run_jobs(jobs, cells.size(), cfg.delta_min, cfg.admm);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        cells[i].successes = counts[i];
        cells[i].rate = static_cast<double>(counts[i]) / cells[i].trials;
    }
    return cells;
}

std::vector<SweepPoint> run_success_sweep(const PhaseTransitionConfig& cfg, SweepAxis axis, const std::vector<int>& values) {
    if (cfg.trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be positive");
    cfg.admm.validate();
    const int K1 = cfg.K1_values.empty() ? 1 : cfg.K1_values.front();
    const int K2 = cfg.K2_values.empty() ? 1 : cfg.K2_values.front();
    std::vector<SweepPoint> points;
    std::vector<Job> jobs;
    for (int v : values) {
        const int M = axis == SweepAxis::M ? v : cfg.M;
        const int k1 = axis == SweepAxis::K ? v : K1;
        const int k2 = axis == SweepAxis::K ? v : K2;
        if (M < 1 || k1 < 0 || k2 < 0) throw Error(ErrorCode::InvalidArgument, "invalid sweep value");
        const std::size_t slot = points.size();
        points.push_back({v, 0, cfg.trials, 0.0});
        const std::uint64_t cs = cell_seed(cfg.seed, M, k1, k2);
        for (int t = 0; t < cfg.trials; ++t) jobs.push_back({M, k1, k2, slot, derive_seed(cs, t, stream::kTrial)});
    }
    const std::vector<int> counts = run_jobs(jobs, points.size(), cfg.delta_min, cfg.admm);
    for (std::size_t i = 0; i < points.size(); ++i) {
        points[i].successes = counts[i];
        points[i].rate = static_cast<double>(counts[i]) / points[i].trials;
    }
    return points;
}

std::string phase_to_csv(const std::vector<PhaseCell>& cells) {
    std::string out = "K1,K2,successes,trials,rate\n";
    for (const PhaseCell& c : cells)
        out += std::to_string(c.K1) + "," + std::to_string(c.K2) + "," + std::to_string(c.successes) + "," +
               std::to_string(c.trials) + "," + format_double(c.rate) + "\n";
    return out;
}

std::vector<PhaseCell> phase_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "K1,K2,successes,trials,rate")
        throw Error(ErrorCode::Io, "unexpected phase-transition CSV header");
    std::vector<PhaseCell> cells;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        PhaseCell c;
        if (std::sscanf(line.c_str(), "%d,%d,%d,%d,%lf", &c.K1, &c.K2, &c.successes, &c.trials, &c.rate) != 5)
            throw Error(ErrorCode::Io, "malformed phase-transition CSV row: " + line);
        cells.push_back(c);
    }
    return cells;
}

std::string sweep_to_csv(const std::vector<SweepPoint>& points, const std::string& axis_name) {
    std::string out = axis_name + ",successes,trials,rate\n";
    for (const SweepPoint& p : points)
        out += std::to_string(p.x) + "," + std::to_string(p.successes) + "," + std::to_string(p.trials) + "," +
               format_double(p.rate) + "\n";
    return out;
}

std::vector<SweepPoint> sweep_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.find(",successes,trials,rate") == std::string::npos)
        throw Error(ErrorCode::Io, "unexpected sweep CSV header");
    std::vector<SweepPoint> points;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        SweepPoint p;
        if (std::sscanf(line.c_str(), "%d,%d,%d,%lf", &p.x, &p.successes, &p.trials, &p.rate) != 4)
            throw Error(ErrorCode::Io, "malformed sweep CSV row: " + line);
        points.push_back(p);
    }
    return points;
}

}  // namespace atomdemix::exp
