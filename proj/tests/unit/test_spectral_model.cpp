// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "atomdemix/error.hpp"
#include "atomdemix/instance_io.hpp"
#include "atomdemix/random.hpp"
#include "atomdemix/spectral_model.hpp"
#include "test_support.hpp"

using namespace atomdemix;
using namespace atomdemix::model;
using atomdemix::testing::throws_code;

TEST_CASE("atom - examples") {
    const ComplexVector ones = atom(0.0, 3);
    REQUIRE(ones.size() == 13);
    CHECK((ones - ComplexVector::Ones(13)).norm() == 0.0);

    const ComplexVector half = atom(0.5, 1);
    const double expect[] = {1, -1, 1, -1, 1};
    for (int i = 0; i < 5; ++i) CHECK(std::abs(half[i] - Complex(expect[i])) < 1e-15);

    CHECK(atom(0.3, 4).squaredNorm() == Catch::Approx(17.0).epsilon(1e-14));

    // entry n is exp(-j 2 pi n tau); n = -2M sits at index 0
    const ComplexVector c = atom(0.123, 2);
    CHECK(std::abs(c[0] - std::polar(1.0, 2.0 * std::numbers::pi * 4 * 0.123)) < 1e-14);

    CHECK(throws_code(ErrorCode::OutOfRangeTau, [] { atom(1.0, 2); }));
    CHECK(throws_code(ErrorCode::OutOfRangeTau, [] { atom(-0.1, 2); }));
}

TEST_CASE("atom - phase telescoping") {
    for (double tau : {0.01, 0.37, 0.5, 0.999}) {
        const ComplexVector c = atom(tau, 16);
        const Complex step = std::polar(1.0, -2.0 * std::numbers::pi * tau);
        for (Eigen::Index i = 0; i + 1 < c.size(); ++i) CHECK(std::abs(c[i + 1] - c[i] * step) < 1e-12);
    }
}

TEST_CASE("synthesize - spectrum and measurement") {
    const int M = 6;
    CHECK(synthesize_spectrum(PointSourceSignal{}, M).norm() == 0.0);

    PointSourceSignal one{{0.2}, {Complex(3.0)}};
    CHECK((synthesize_spectrum(one, M) - 3.0 * atom(0.2, M)).norm() < 1e-14);

    PointSourceSignal two{{0.2, 0.71}, {Complex(1.0, -2.0), Complex(0.5, 0.25)}};
    const ComplexVector direct = two.amplitudes[0] * atom(0.2, M) + two.amplitudes[1] * atom(0.71, M);
    CHECK((synthesize_spectrum(two, M) - direct).norm() < 1e-14);

    const MeasurementSet only1 = synthesize_measurement(two, PointSourceSignal{}, draw_modulator(M, 3));
    CHECK((only1.y - direct).norm() < 1e-14);

    PointSourceSignal unit{{0.4}, {Complex(1.0)}};
    const MeasurementSet coherent = synthesize_measurement(unit, unit, Modulator::identity(M));
    CHECK((coherent.y - 2.0 * atom(0.4, M)).norm() < 1e-13);

    const Modulator g = draw_modulator(M, 11);
    const ComplexVector w = draw_noise(M, 0.1, NoiseKind::Gaussian, 5);
    const MeasurementSet meas = synthesize_measurement(two, one, g, w);
    const ComplexVector s1 = synthesize_spectrum(two, M);
    const ComplexVector s2 = synthesize_spectrum(one, M);
    for (Eigen::Index n = 0; n < meas.y.size(); ++n) CHECK(std::abs(meas.y[n] - (s1[n] + g[n] * s2[n] + w[n])) < 1e-14);

    // Linearity in the amplitudes.
    PointSourceSignal two2 = two, one2 = one;
    for (auto& a : two2.amplitudes) a *= 2.0;
    for (auto& a : one2.amplitudes) a *= 2.0;
    const MeasurementSet doubled = synthesize_measurement(two2, one2, g, w);
    CHECK(((doubled.y - w) - 2.0 * (meas.y - w)).norm() < 1e-13);

    CHECK(throws_code(ErrorCode::LengthMismatch,
                      [&] { synthesize_measurement(two, one, g, ComplexVector::Zero(3)); }));
    CHECK(throws_code(ErrorCode::LengthMismatch, [] { PointSourceSignal{{0.1}, {}}.validate(); }));
    CHECK(throws_code(ErrorCode::DuplicateSupport,
                      [] { PointSourceSignal{{0.1, 0.1}, {Complex(1), Complex(1)}}.validate(); }));
}

TEST_CASE("modulator - unit modulus, determinism, zero mean") {
    const Modulator a = draw_modulator(8, 42);
    const Modulator b = draw_modulator(8, 42);
    for (Eigen::Index i = 0; i < a.samples().size(); ++i) {
        CHECK(std::abs(std::abs(a[i]) - 1.0) < 1e-12);
        CHECK(a[i] == b[i]);
    }
    CHECK((a.samples() - draw_modulator(8, 43).samples()).norm() > 0.1);

    // Mean of one coordinate over 1e5 independent draws.
    Complex mean = 0.0;
    const int draws = 100000;
    for (int t = 0; t < draws; ++t) mean += draw_modulator(1, derive_seed(9, t))[2];
    CHECK(std::abs(mean / double(draws)) <= 0.02);

    const Modulator back = Modulator::from_samples(8, a.samples());
    const Modulator again = Modulator::from_phases(8, back.phases());
    CHECK((again.samples() - a.samples()).norm() < 1e-13);
}

TEST_CASE("separation - examples") {
    const std::vector<double> wrap = {0.1, 0.9};
    CHECK(min_separation(wrap) == Catch::Approx(0.2).margin(1e-15));
    const std::vector<double> three = {0.1, 0.3, 0.65};
    CHECK(min_separation(three) == Catch::Approx(0.2).margin(1e-15));
    const std::vector<double> single = {0.42};
    CHECK(min_separation(single) == 0.5);

    const SeparationReport r = separation(PointSourceSignal{{0.1, 0.9}, {Complex(1), Complex(1)}},
                                          PointSourceSignal{{0.5}, {Complex(1)}});
    CHECK(r.delta1 == Catch::Approx(0.2));
    CHECK(r.delta2 == 0.5);
    CHECK(r.delta == r.delta1);

    CHECK(signed_wrap_difference(0.02, 0.98) == Catch::Approx(0.04));
    CHECK(signed_wrap_difference(0.98, 0.02) == Catch::Approx(-0.04));
    CHECK(wrap_distance(0.0, 0.75) == Catch::Approx(0.25));
}

TEST_CASE("draw_supports - separation and feasibility") {
    CHECK(draw_supports(1, 0.3, 1).size() == 1);
    CHECK(draw_supports(0, 0.3, 1).empty());
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto taus = draw_supports(4, 1.0 / 32, seed);
        REQUIRE(taus.size() == 4);
        CHECK(std::is_sorted(taus.begin(), taus.end()));
        for (std::size_t i = 0; i < taus.size(); ++i) {
            CHECK((taus[i] >= 0.0 && taus[i] < 1.0));
            for (std::size_t j = i + 1; j < taus.size(); ++j) CHECK(wrap_distance(taus[i], taus[j]) >= 1.0 / 32);
        }
    }
    // Dense packing forces the evenly spaced fallback.
    const auto packed = draw_supports(9, 0.105, 3);
    CHECK(min_separation(packed) >= 0.105);
    CHECK(draw_supports(4, 0.1, 9) == draw_supports(4, 0.1, 9));
    CHECK(throws_code(ErrorCode::InfeasibleSeparation, [] { draw_supports(4, 0.25, 1); }));
}

TEST_CASE("draw_noise - levels") {
    CHECK(draw_noise(4, 0.0, NoiseKind::Gaussian, 1).norm() == 0.0);
    CHECK(draw_noise(4, 0.3, NoiseKind::Bounded, 1).norm() == Catch::Approx(0.3).epsilon(1e-12));

    const double sigma = 0.7;
    double acc = 0.0;
    const int draws = 10000;
    for (int t = 0; t < draws; ++t) acc += draw_noise(4, sigma, NoiseKind::Gaussian, derive_seed(77, t)).squaredNorm() / 17.0;
    CHECK(std::abs(acc / draws - sigma * sigma) <= 0.05 * sigma * sigma);
}

TEST_CASE("snr - definition and inverse") {
    const int M = 8;
    const PointSourceSignal x1{{0.1, 0.6}, {Complex(1.0, 1.0), Complex(-0.5)}};
    const PointSourceSignal x2{{0.3}, {Complex(0.0, 2.0)}};
    const Modulator g = draw_modulator(M, 2);
    const ComplexVector clean = synthesize_measurement(x1, x2, g).y;
    const double sigma = 0.05;
    const double expect = 10.0 * std::log10(clean.squaredNorm() / (33.0 * sigma * sigma));
    CHECK(snr_db(clean, sigma) == Catch::Approx(expect).epsilon(1e-14));
    CHECK(sigma_for_snr(clean, snr_db(clean, sigma)) == Catch::Approx(sigma).epsilon(1e-13));
}

TEST_CASE("draw_amplitudes - kinds") {
    const auto gauss = draw_amplitudes(5, AmplitudeKind::ComplexGaussian, 3);
    CHECK(gauss.size() == 5);
    const auto unit = draw_amplitudes(5, AmplitudeKind::UnitModulus, 3);
    for (const auto& a : unit) CHECK(std::abs(a) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(draw_amplitudes(5, AmplitudeKind::ComplexGaussian, 3) == gauss);
}

TEST_CASE("instance - json round trip") {
    io::Instance inst;
    inst.M = 5;
    inst.seed = 1234567890123ULL;
    inst.x1 = {{0.1, 0.1 + 1e-16 * 3, 0.7}, {Complex(1.0 / 3.0, -2.0 / 7.0), Complex(1e-300, 1.0), Complex(-0.1)}};
    inst.x2 = {{std::nextafter(1.0, 0.0)}, {Complex(std::numbers::pi)}};
    inst.modulator_phases = draw_modulator(5, 8).phases();
    inst.noise_kind = NoiseKind::Gaussian;
    inst.noise_sigma = 0.0123456789012345678;

    const std::string text = io::to_json(inst).dump();
    const io::Instance back = io::instance_from_json(nlohmann::json::parse(text));
    CHECK(back.M == inst.M);
    CHECK(back.seed == inst.seed);
    CHECK(back.x1.locations == inst.x1.locations);
    CHECK(back.x1.amplitudes == inst.x1.amplitudes);
    CHECK(back.x2.locations == inst.x2.locations);
    CHECK(back.x2.amplitudes == inst.x2.amplitudes);
    CHECK(back.modulator_phases == inst.modulator_phases);
    CHECK(back.noise_sigma == inst.noise_sigma);
    CHECK(back.noise_kind == inst.noise_kind);
    CHECK(io::to_json(back).dump() == text);
    CHECK((back.measurement().y - inst.measurement().y).norm() == 0.0);

    const auto path = std::filesystem::temp_directory_path() / "atomdemix_instance_test.json";
    io::write_json_atomic(path, io::to_json(inst));
    CHECK(io::to_json(io::instance_from_json(io::read_json(path))).dump() == text);
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    std::filesystem::remove(path);

    nlohmann::json bad = io::to_json(inst);
    bad["modulator_phases"].erase(0);
    CHECK(throws_code(ErrorCode::LengthMismatch, [&] { io::instance_from_json(bad); }));
    CHECK(throws_code(ErrorCode::Io, [] { io::instance_from_json(nlohmann::json::object()); }));
}
