// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "atomdemix/localization.hpp"
#include "atomdemix/random.hpp"
#include "test_support.hpp"

using namespace atomdemix;
using namespace atomdemix::loc;
using atomdemix::testing::throws_code;

namespace {

// atom(tau0) / (4M+1) peaks at tau0 with value 1.
ComplexVector autocorrelation(double tau0, int M) {
    return model::atom(tau0, M) / static_cast<double>(model::spectrum_length(M));
}

}  // namespace

TEST_CASE("eval_poly - examples") {
    ComplexVector c = ComplexVector::Zero(model::spectrum_length(4));
    c[8] = Complex(2.5, -1.0);  // n = 0
    const DualPolynomial constant = DualPolynomial::first_channel(c, 4);
    for (double t : {0.0, 0.25, 0.9}) {
        CHECK(std::abs(eval_poly(constant, t) - Complex(2.5, -1.0)) < 1e-15);
        CHECK(std::abs(eval_poly(constant, t, 1)) < 1e-15);
    }
    CHECK(std::abs(eval_poly(DualPolynomial::first_channel(autocorrelation(0.3, 8), 8), 0.3) - 1.0) < 1e-13);
    CHECK(throws_code(ErrorCode::OutOfRangeTau, [&] { eval_poly(constant, 1.0); }));
    CHECK(throws_code(ErrorCode::InvalidArgument, [&] { eval_poly(constant, 0.1, 4); }));
    CHECK(throws_code(ErrorCode::LengthMismatch, [] { DualPolynomial::first_channel(ComplexVector::Zero(5), 2); }));
}

TEST_CASE("eval_poly - derivatives match finite differences") {
    std::mt19937_64 rng(11);
    const int M = 6;
    const DualPolynomial f = DualPolynomial::first_channel(testing::random_vector(rng, model::spectrum_length(M)), M);
    const double h = 1e-5;
    for (double t : {0.11, 0.42, 0.77}) {
        for (int order = 1; order <= 3; ++order) {
            const Complex fd = (eval_poly(f, t + h, order - 1) - eval_poly(f, t - h, order - 1)) / (2.0 * h);
            const Complex exact = eval_poly(f, t, order);
            CHECK(std::abs(fd - exact) <= 1e-5 * std::abs(exact));
        }
    }
}

TEST_CASE("second channel polynomial uses conj(g) p") {
    std::mt19937_64 rng(5);
    const int M = 4;
    const model::Modulator g = model::draw_modulator(M, 9);
    const ComplexVector p = testing::random_vector(rng, model::spectrum_length(M));
    const DualPolynomial Q = DualPolynomial::second_channel(p, g);
    for (double t : {0.05, 0.6}) {
        Complex direct = 0.0;
        for (int n = -2 * M; n <= 2 * M; ++n)
            direct += std::conj(g[n + 2 * M]) * p[n + 2 * M] * std::polar(1.0, 2.0 * std::numbers::pi * n * t);
        CHECK(std::abs(eval_poly(Q, t) - direct) < 1e-12);
    }
}

TEST_CASE("find_peaks - autocorrelation, pairs and empty") {
    for (double tau0 : {0.0, 0.3, 0.731}) {
        const auto peaks = find_peaks(DualPolynomial::first_channel(autocorrelation(tau0, 8), 8));
        REQUIRE(peaks.size() == 1);
        CHECK(testing::wrap_distance(peaks[0].tau, tau0) < 1e-9);
        CHECK(peaks[0].value == Catch::Approx(1.0).epsilon(1e-12));
    }
    const DualPolynomial zero = DualPolynomial::first_channel(ComplexVector::Zero(33), 8);
    CHECK(throws_code(ErrorCode::NoPeaksFound, [&] { find_peaks(zero); }));
    CHECK(throws_code(ErrorCode::NoPeaksFound, [] {
        find_peaks(DualPolynomial::first_channel(0.9 * autocorrelation(0.4, 8), 8));
    }));

    // sum of two far-apart unit peaks, rescaled so both reach 1
    const int M = 16;
    ComplexVector two = autocorrelation(0.2, M) + autocorrelation(0.7, M);
    two /= std::abs(eval_poly(DualPolynomial::first_channel(two, M), 0.2));
    const auto peaks = find_peaks(DualPolynomial::first_channel(two, M));
    REQUIRE(peaks.size() == 2);
    CHECK(peaks[0].tau < peaks[1].tau);
    CHECK(testing::wrap_distance(peaks[0].tau, 0.2) < 1e-6);
    CHECK(testing::wrap_distance(peaks[1].tau, 0.7) < 1e-6);

    LocalizationConfig bad;
    bad.grid_size = 10;
    CHECK(throws_code(ErrorCode::InvalidArgument, [&] { find_peaks(DualPolynomial::first_channel(two, M), bad); }));
}

TEST_CASE("estimate_amplitudes - exact supports recover amplitudes") {
    const int M = 8;
    const model::PointSourceSignal x1{{0.11, 0.52}, {Complex(1.0, 0.5), Complex(-0.7, 0.2)}};
    const model::PointSourceSignal x2{{0.3, 0.81}, {Complex(0.0, 1.2), Complex(2.0, 0.0)}};
    const auto meas = model::synthesize_measurement(x1, x2, model::draw_modulator(M, 3));
    const AmplitudeFit fit = estimate_amplitudes(meas, x1.locations, x2.locations);
    REQUIRE(fit.amplitudes1.size() == 2);
    REQUIRE(fit.amplitudes2.size() == 2);
    for (int k = 0; k < 2; ++k) {
        CHECK(std::abs(fit.amplitudes1[k] - x1.amplitudes[k]) < 1e-8);
        CHECK(std::abs(fit.amplitudes2[k] - x2.amplitudes[k]) < 1e-8);
    }
    CHECK(fit.residual < 1e-8);

    // single atom with amplitude 5 and g = 1
    model::MeasurementSet single{5.0 * model::atom(0.3, M), model::Modulator::identity(M), M, 0.0};
    const AmplitudeFit one = estimate_amplitudes(single, {0.3}, {});
    REQUIRE(one.amplitudes1.size() == 1);
    CHECK(std::abs(one.amplitudes1[0] - 5.0) < 1e-10);

    // supports off by a small fraction of the resolution: amplitudes within 10%
    const AmplitudeFit near = estimate_amplitudes(meas, {0.11 + 0.002 / M, 0.52 - 0.002 / M}, {0.3 + 0.002 / M, 0.81});
    for (int k = 0; k < 2; ++k) {
        CHECK(std::abs(near.amplitudes1[k] - x1.amplitudes[k]) <= 0.1 * std::abs(x1.amplitudes[k]));
        CHECK(std::abs(near.amplitudes2[k] - x2.amplitudes[k]) <= 0.1 * std::abs(x2.amplitudes[k]));
    }

    const AmplitudeFit empty = estimate_amplitudes(meas, {}, {});
    CHECK(empty.amplitudes1.empty());
    CHECK(empty.residual == Catch::Approx(meas.y.norm()));
}

TEST_CASE("recover_sources - from an oracle dual vector") {
    // p = atom(tau1) / N gives |P| peaking only at tau1; Q stays well
    // below 1 for a random modulator.
    const int M = 16;
    const model::Modulator g = model::draw_modulator(M, 21);
    const model::PointSourceSignal x1{{0.25}, {Complex(1.5, -0.5)}};
    const model::PointSourceSignal x2{{}, {}};
    const auto meas = model::synthesize_measurement(x1, x2, g);
    const RecoveryEstimate est = recover_sources(meas, autocorrelation(0.25, M));
    REQUIRE(est.supports1.size() == 1);
    CHECK(est.supports2.empty());
    CHECK(testing::wrap_distance(est.supports1[0], 0.25) < 1e-9);
    CHECK(std::abs(est.amplitudes1[0] - x1.amplitudes[0]) < 1e-8);
}

TEST_CASE("match_and_score - examples") {
    const model::PointSourceSignal truth1{{0.1, 0.4, 0.8}, {1.0, 1.0, 1.0}};
    const model::PointSourceSignal truth2{{0.6}, {Complex(0.0, 1.0)}};

    RecoveryEstimate exact{{0.1, 0.4, 0.8}, {0.6}, {1.0, 1.0, 1.0}, {Complex(0.0, 1.0)}, 0.0};
    const MatchReport r0 = match_and_score(truth1, truth2, exact, 0.05);
    CHECK(r0.all_matched());
    CHECK(r0.channel1.location_rmse == 0.0);
    CHECK(r0.channel1.false_positives == 0);
    CHECK(r0.channel2.amplitude_rmse == 0.0);

    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> sign(0, 1);
    RecoveryEstimate jitter = exact;
    for (double& t : jitter.supports1) t += (sign(rng) ? 1e-3 : -1e-3);
    const MatchReport r1 = match_and_score(truth1, truth2, jitter, 0.05);
    CHECK(r1.channel1.location_rmse >= 0.5e-3);
    CHECK(r1.channel1.location_rmse <= 2e-3);
    CHECK(r1.max_location_error() == Catch::Approx(1e-3).epsilon(1e-9));

    // wrap-around match and a spurious estimate
    const model::PointSourceSignal edge{{0.999}, {1.0}};
    RecoveryEstimate wrapped{{0.0005, 0.5}, {}, {1.0, 1.0}, {}, 0.0};
    const MatchReport r2 = match_and_score(edge, {{}, {}}, wrapped, 0.05);
    CHECK(r2.channel1.matched == 1);
    CHECK(r2.channel1.false_positives == 1);
    CHECK(r2.channel1.max_location_error == Catch::Approx(0.0015).epsilon(1e-9));

    RecoveryEstimate missing{{}, {}, {}, {}, 0.0};
    const MatchReport r3 = match_and_score(truth1, truth2, missing, 0.05);
    CHECK(r3.channel1.false_negatives == 3);
    CHECK_FALSE(r3.all_matched());
}

TEST_CASE("dual curves - CSV round trip") {
    std::mt19937_64 rng(8);
    const int M = 4;
    const ComplexVector p = testing::random_vector(rng, model::spectrum_length(M));
    const auto rows = dual_curves(p, model::draw_modulator(M, 2), 64);
    REQUIRE(rows.size() == 64);
    const auto back = curves_from_csv(curves_to_csv(rows));
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].tau == rows[i].tau);
        CHECK(back[i].absP == rows[i].absP);
        CHECK(back[i].absQ == rows[i].absQ);
    }
    CHECK(throws_code(ErrorCode::Io, [] { curves_from_csv("x,y\n1,2\n"); }));
}
