// SPDX-License-Identifier: Apache-2.0
#include "atomdemix/instance_io.hpp"

#include <fstream>
#include <sstream>

#include "atomdemix/error.hpp"
#include "atomdemix/random.hpp"

namespace atomdemix::io {
namespace {

using nlohmann::json;

json signal_to_json(const model::PointSourceSignal& x) {
    std::vector<double> re, im;
    for (const auto& a : x.amplitudes) {
        re.push_back(a.real());
        im.push_back(a.imag());
    }
    return json{{"locations", x.locations}, {"amplitudes_re", re}, {"amplitudes_im", im}};
}

model::PointSourceSignal signal_from_json(const json& j) {
    model::PointSourceSignal x;
    x.locations = j.at("locations").get<std::vector<double>>();
    const auto re = j.at("amplitudes_re").get<std::vector<double>>();
    const auto im = j.at("amplitudes_im").get<std::vector<double>>();
    if (re.size() != im.size() || re.size() != x.locations.size())
        throw Error(ErrorCode::LengthMismatch, "signal arrays differ in length");
    for (std::size_t k = 0; k < re.size(); ++k) x.amplitudes.emplace_back(re[k], im[k]);
    x.validate();
    return x;
}

std::filesystem::path temp_sibling(const std::filesystem::path& path) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    return tmp;
}

}  // namespace

model::Modulator Instance::modulator() const { return model::Modulator::from_phases(M, modulator_phases); }

model::ComplexVector Instance::noise() const {
    return model::draw_noise(M, noise_sigma, noise_kind, derive_seed(seed, 0, stream::kNoise));
}

model::ComplexVector Instance::clean_signal() const {
    const model::Modulator g = modulator();
    return model::synthesize_spectrum(x1, M) + g.samples().cwiseProduct(model::synthesize_spectrum(x2, M));
}

model::MeasurementSet Instance::measurement() const {
    const model::ComplexVector w = noise();
    std::optional<double> budget;
    if (noise_kind == model::NoiseKind::Gaussian) budget = w.norm();
    if (noise_kind == model::NoiseKind::Bounded) budget = noise_sigma;
    return model::synthesize_measurement(x1, x2, modulator(), w, budget);
}

std::string to_string(model::NoiseKind kind) {
    switch (kind) {
        case model::NoiseKind::None: return "none";
        case model::NoiseKind::Bounded: return "bounded";
        case model::NoiseKind::Gaussian: return "gaussian";
    }
    return "none";
}

model::NoiseKind noise_kind_from_string(const std::string& s) {
    if (s == "none") return model::NoiseKind::None;
    if (s == "bounded") return model::NoiseKind::Bounded;
    if (s == "gaussian") return model::NoiseKind::Gaussian;
    throw Error(ErrorCode::InvalidArgument, "unknown noise kind '" + s + "'");
}

json to_json(const Instance& inst) {
    return json{{"M", inst.M},
                {"seed", inst.seed},
                {"signals", json::array({signal_to_json(inst.x1), signal_to_json(inst.x2)})},
                {"modulator_phases", inst.modulator_phases},
                {"noise", {{"kind", to_string(inst.noise_kind)}, {"sigma", inst.noise_sigma}}}};
}

Instance instance_from_json(const json& j) {
    try {
        Instance inst;
        inst.M = j.at("M").get<int>();
        if (inst.M < 1) throw Error(ErrorCode::InvalidArgument, "M must be positive");
        inst.seed = j.value("seed", std::uint64_t{0});
        const json& sig = j.at("signals");
        if (!sig.is_array() || sig.size() != 2) throw Error(ErrorCode::InvalidArgument, "expected two signals");
        inst.x1 = signal_from_json(sig[0]);
        inst.x2 = signal_from_json(sig[1]);
        inst.modulator_phases = j.at("modulator_phases").get<std::vector<double>>();
        if (static_cast<int>(inst.modulator_phases.size()) != model::spectrum_length(inst.M))
            throw Error(ErrorCode::LengthMismatch, "modulator_phases must have 4M+1 entries");
        if (j.contains("noise")) {
            inst.noise_kind = noise_kind_from_string(j["noise"].value("kind", std::string("none")));
            inst.noise_sigma = j["noise"].value("sigma", 0.0);
        }
        return inst;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Io, std::string("malformed instance: ") + e.what());
    }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = temp_sibling(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot open " + tmp.string());
        out << text;
        if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::Io, "rename to " + path.string() + " failed: " + ec.message());
}

void write_json_atomic(const std::filesystem::path& path, const json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Io, path.string() + ": " + e.what());
    }
}

}  // namespace atomdemix::io
