// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "atomdemix/spectral_model.hpp"

namespace atomdemix::io {

/// A fully specified demixing problem. The noise vector is not stored; it is
/// regenerated from (seed, kind, sigma) so files stay small and reproducible.
struct Instance {
    int M = 0;
    std::uint64_t seed = 0;
    model::PointSourceSignal x1;
    model::PointSourceSignal x2;
    std::vector<double> modulator_phases;
    model::NoiseKind noise_kind = model::NoiseKind::None;
    double noise_sigma = 0.0;

    model::Modulator modulator() const;
    model::ComplexVector noise() const;
    model::MeasurementSet measurement() const;
    /// spectrum(x1) + g .* spectrum(x2).
    model::ComplexVector clean_signal() const;
};

std::string to_string(model::NoiseKind kind);
model::NoiseKind noise_kind_from_string(const std::string& s);

nlohmann::json to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);

/// Writes pretty JSON through a temporary sibling file and a rename.
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Atomic write of arbitrary text.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace atomdemix::io
