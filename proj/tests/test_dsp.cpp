#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "rumble/dsp.hpp"
#include "rumble/rng.hpp"

using namespace rumble;
using namespace rumble::dsp;

namespace {

TimeSeries make_series(std::vector<double> samples, double fs = 475.0) {
    return TimeSeries{std::move(samples), fs, Unit::Dimensionless};
}

TimeSeries tone(double freq, double seconds, double fs = 475.0) {
    const auto n = static_cast<std::size_t>(seconds * fs);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i)
        s[i] = std::sin(2.0 * oracle::pi * freq * static_cast<double>(i) / fs);
    return make_series(std::move(s), fs);
}

} // namespace

TEST_CASE("framing: 25 ms at 475 Hz gives 12-sample frames, hop 6") {
    const auto frames = frame_signal(tone(50.0, 1.0));
    REQUIRE(!frames.empty());
    CHECK(frames.front().size() == 12);
    // 475 samples: 78 full frames, then a padded tail
    CHECK(frames.size() == 79);
}

TEST_CASE("framing: frame counts across boundary lengths") {
    auto count = [](std::size_t n) {
        return frame_signal(make_series(std::vector<double>(n, 1.0))).size();
    };
    CHECK(count(12) == 1);
    CHECK(count(13) == 2);
    CHECK(count(18) == 2);
    CHECK(count(24) == 3);
    CHECK(count(25) == 4);
}

TEST_CASE("framing: tail frame is zero padded to full length") {
    std::vector<double> s(15);
    std::iota(s.begin(), s.end(), 1.0);
    const auto frames = frame_signal(make_series(s));
    REQUIRE(frames.size() == 2);
    CHECK(frames[1][0] == 7.0);
    CHECK(frames[1][8] == 15.0);
    for (std::size_t i = 9; i < 12; ++i)
        CHECK(frames[1][i] == 0.0);
}

TEST_CASE("framing: hop equals frame length at zero overlap") {
    std::vector<double> s(36, 1.0);
    const auto frames = frame_signal(make_series(s), 25.0, 0.0);
    CHECK(frames.size() == 3);
}

TEST_CASE("framing: rejects bad inputs") {
    CHECK_THROWS_AS(frame_signal(make_series(std::vector<double>(5, 1.0))), const SizeError&);
    CHECK_THROWS_AS(frame_signal(tone(50.0, 1.0), 25.0, 1.0), const ConfigError&);
    CHECK_THROWS_AS(frame_signal(tone(50.0, 1.0), 25.0, -0.1), const ConfigError&);
}

TEST_CASE("hamming window endpoints and symmetry") {
    const auto w = hamming_window(12);
    CHECK(w[0] == doctest::Approx(0.08).epsilon(1e-12));
    CHECK(w[11] == doctest::Approx(0.08).epsilon(1e-12));
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(w[i] == doctest::Approx(w[11 - i]).epsilon(1e-12));
    CHECK_THROWS_AS(hamming_window(1), const SizeError&);
}

TEST_CASE("next_pow2") {
    CHECK(next_pow2(1) == 1);
    CHECK(next_pow2(2) == 2);
    CHECK(next_pow2(12) == 16);
    CHECK(next_pow2(16) == 16);
    CHECK(next_pow2(17) == 32);
}

TEST_CASE("dft matches the O(N^2) definition on random input") {
    Rng rng(42);
    std::vector<double> x(8);
    for (auto& v : x)
        v = rng.uniform(-1.0, 1.0);
    const auto fast = dft(x);
    const auto slow = oracle::naive_dft(x);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t k = 0; k < 8; ++k)
        CHECK(std::abs(fast[k] - slow[k]) < 1e-9);
}

TEST_CASE("dft of constant and impulse") {
    const auto c = dft(std::vector<double>(8, 3.0));
    CHECK(std::abs(c[0] - std::complex<double>(24.0, 0.0)) < 1e-12);
    for (std::size_t k = 1; k < 8; ++k)
        CHECK(std::abs(c[k]) < 1e-12);

    std::vector<double> imp(8, 0.0);
    imp[0] = 1.0;
    for (const auto& v : dft(imp))
        CHECK(std::abs(v - std::complex<double>(1.0, 0.0)) < 1e-12);
}

TEST_CASE("dft zero pads non power-of-two frames") {
    std::vector<double> x(12, 0.0);
    x[0] = 1.0;
    CHECK(dft(x).size() == 16);
}

TEST_CASE("dft of real input has conjugate-symmetric magnitudes") {
    Rng rng(7);
    std::vector<double> x(16);
    for (auto& v : x)
        v = rng.gaussian();
    const auto mag = dft_magnitude(x);
    for (std::size_t k = 1; k < 16; ++k)
        CHECK(mag[k] == doctest::Approx(mag[16 - k]).epsilon(1e-12));
}

TEST_CASE("dft satisfies Parseval under zero padding") {
    Rng rng(11);
    std::vector<double> x(12);
    for (auto& v : x)
        v = rng.gaussian();
    const double time_energy =
        std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
    const auto spec = dft(x);
    double freq_energy = 0.0;
    for (const auto& v : spec)
        freq_energy += std::norm(v);
    freq_energy /= static_cast<double>(spec.size());
    CHECK(freq_energy == doctest::Approx(time_energy).epsilon(1e-9));
}

TEST_CASE("stft: shape, axes and scale tag") {
    const auto s = stft_spectrogram(tone(50.0, 1.0));
    CHECK(s.scale == Scale::Power);
    CHECK(s.frame_len == 12);
    CHECK(s.hop == 6);
    CHECK(s.n_frames() == 79);
    CHECK(s.n_bins() == 9);
    CHECK(s.bin_freqs[0] == 0.0);
    CHECK(s.bin_freqs[1] == doctest::Approx(475.0 / 16.0).epsilon(1e-12));
    CHECK(s.bin_freqs[8] == doctest::Approx(475.0 / 2.0).epsilon(1e-12));
    CHECK(s.frame_times[0] == doctest::Approx(6.0 / 475.0).epsilon(1e-12));
    CHECK(s.frame_times[1] - s.frame_times[0] ==
          doctest::Approx(6.0 / 475.0).epsilon(1e-12));
}

TEST_CASE("stft: bin-centred tone peaks in its own bin") {
    const double f = 3.0 * 475.0 / 16.0;
    const auto s = stft_spectrogram(tone(f, 1.0));
    // interior frame, away from edge effects
    const std::size_t row = 30;
    std::size_t argmax = 0;
    for (std::size_t k = 1; k < s.n_bins(); ++k)
        if (s.values(row, k) > s.values(row, argmax))
            argmax = k;
    CHECK(argmax == 3);
}

TEST_CASE("stft of zero signal is all zero power") {
    const auto s = stft_spectrogram(make_series(std::vector<double>(100, 0.0)));
    for (double v : s.values.values())
        CHECK(v == 0.0);
}

TEST_CASE("to_decibel: reference points and floor") {
    Spectrogram s;
    s.values = Matrix(1, 3);
    s.values(0, 0) = 1.0;
    s.values(0, 1) = 100.0;
    s.values(0, 2) = 0.0;
    s.scale = Scale::Power;
    s.frame_times = {0.0};
    s.bin_freqs = {0.0, 1.0, 2.0};
    const auto db = to_decibel(s);
    CHECK(db.scale == Scale::Decibel);
    CHECK(db.values(0, 0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(db.values(0, 1) == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(db.values(0, 2) == -100.0);
    CHECK_THROWS_AS(to_decibel(db), const StateError&);
}
