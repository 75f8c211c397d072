#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rumble/enhance.hpp"
#include "rumble/rng.hpp"

using namespace rumble;
using namespace rumble::enhance;

namespace {

dsp::Spectrogram wrap(Matrix m, dsp::Scale scale = dsp::Scale::Power) {
    dsp::Spectrogram s;
    s.frame_times.resize(m.rows());
    s.bin_freqs.resize(m.cols());
    for (std::size_t i = 0; i < s.frame_times.size(); ++i)
        s.frame_times[i] = static_cast<double>(i) * 0.0126;
    for (std::size_t k = 0; k < s.bin_freqs.size(); ++k)
        s.bin_freqs[k] = static_cast<double>(k) * 29.6875;
    s.values = std::move(m);
    s.scale = scale;
    s.frame_len = 12;
    s.hop = 6;
    return s;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = 0.0,
                     double hi = 1.0) {
    Matrix m(rows, cols);
    for (auto& v : m.values())
        v = rng.uniform(lo, hi);
    return m;
}

// noisy power grid with one loud frequency bin across all frames
dsp::Spectrogram line_in_noise(std::size_t rows, std::size_t cols, std::size_t line_col,
                               double line_power, Rng& rng) {
    Matrix m(rows, cols);
    for (auto& v : m.values()) {
        const double g = 0.1 * rng.gaussian();
        v = g * g;
    }
    for (std::size_t i = 0; i < rows; ++i)
        m(i, line_col) = line_power;
    return wrap(std::move(m));
}

double mean_on_line(const Matrix& m, std::size_t col, bool on) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if ((j == col) == on) {
                acc += m(i, j);
                ++count;
            }
        }
    }
    return acc / static_cast<double>(count);
}

} // namespace

TEST_CASE("gaussian smoothing matches the brute-force oracle") {
    Rng rng(3);
    const auto m = random_matrix(8, 8, rng);
    const auto fast = gaussian_smooth(m, 1.5);
    const auto slow = oracle::gaussian_blur_2d(m.values(), 8, 8, 1.5);
    for (std::size_t i = 0; i < slow.size(); ++i)
        CHECK(fast.values()[i] == doctest::Approx(slow[i]).epsilon(1e-12));
}

TEST_CASE("gaussian smoothing preserves a constant grid") {
    const Matrix m(5, 7, 3.25);
    const auto smoothed = gaussian_smooth(m, 1.5);
    for (double v : smoothed.values())
        CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("gradient: central differences with one-sided borders") {
    Matrix m(3, 3);
    const double vals[9] = {0, 1, 2, 3, 5, 8, 9, 10, 11};
    for (std::size_t i = 0; i < 9; ++i)
        m.values()[i] = vals[i];

    const auto gt = gradient(m, 0);
    CHECK(gt(0, 0) == 3.0);
    CHECK(gt(1, 0) == 4.5);
    CHECK(gt(2, 0) == 6.0);
    CHECK(gt(1, 2) == 4.5);

    const auto gf = gradient(m, 1);
    CHECK(gf(0, 0) == 1.0);
    CHECK(gf(0, 1) == 1.0);
    CHECK(gf(1, 1) == 2.5);
    CHECK(gf(2, 2) == 1.0);
}

TEST_CASE("ridge filter: all-zero input is returned unchanged") {
    const auto s = wrap(Matrix(6, 6, 0.0));
    const auto out = ridge_filter(s);
    for (double v : out.values.values())
        CHECK(v == 0.0);
    CHECK(out.scale == dsp::Scale::Power);
}

TEST_CASE("ridge filter keeps the crest of a clean line") {
    Matrix m(10, 9, 0.001);
    for (std::size_t i = 0; i < 10; ++i)
        m(i, 4) = 1.0;
    const auto out = ridge_filter(wrap(std::move(m)));
    for (std::size_t i = 0; i < 10; ++i) {
        std::size_t argmax = 0;
        for (std::size_t j = 1; j < 9; ++j)
            if (out.values(i, j) > out.values(i, argmax))
                argmax = j;
        CHECK(argmax == 4);
    }
}

TEST_CASE("ridge filter raises the line-to-background ratio") {
    Rng rng(9);
    const auto s = line_in_noise(40, 9, 3, 1.0, rng);
    const auto out = ridge_filter(s);
    const double before =
        mean_on_line(s.values, 3, true) / mean_on_line(s.values, 3, false);
    const double after =
        mean_on_line(out.values, 3, true) / mean_on_line(out.values, 3, false);
    CHECK(after > before);
}

TEST_CASE("structure tensor of a constant grid vanishes") {
    const auto t = structure_tensor(Matrix(6, 6, 2.0));
    for (double v : t.j_tt.values())
        CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
    for (double v : t.j_ff.values())
        CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
    for (double v : t.j_tf.values())
        CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("structure tensor of a time ramp concentrates in j_tt") {
    Matrix m(9, 9);
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 9; ++j)
            m(i, j) = static_cast<double>(i);
    const auto t = structure_tensor(m);
    CHECK(t.j_tt(4, 4) > 0.5);
    CHECK(std::abs(t.j_ff(4, 4)) < 1e-9);
    CHECK(std::abs(t.j_tf(4, 4)) < 1e-9);
}

TEST_CASE("structure tensor matches the gradient-product oracle") {
    Rng rng(21);
    const auto m = random_matrix(8, 8, rng);
    const auto t = structure_tensor(m, 1.5);

    const auto gt = gradient(m, 0);
    const auto gf = gradient(m, 1);
    std::vector<double> tt(64), ff(64), tf(64);
    for (std::size_t i = 0; i < 64; ++i) {
        tt[i] = gt.values()[i] * gt.values()[i];
        ff[i] = gf.values()[i] * gf.values()[i];
        tf[i] = gt.values()[i] * gf.values()[i];
    }
    const auto ott = oracle::gaussian_blur_2d(tt, 8, 8, 1.5);
    const auto off = oracle::gaussian_blur_2d(ff, 8, 8, 1.5);
    const auto otf = oracle::gaussian_blur_2d(tf, 8, 8, 1.5);
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK(t.j_tt.values()[i] == doctest::Approx(ott[i]).epsilon(1e-9));
        CHECK(t.j_ff.values()[i] == doctest::Approx(off[i]).epsilon(1e-9));
        CHECK(t.j_tf.values()[i] == doctest::Approx(otf[i]).epsilon(1e-9));
    }
}

TEST_CASE("structure tensor honours Cauchy-Schwarz after smoothing") {
    Rng rng(33);
    const auto t = structure_tensor(random_matrix(10, 10, rng, -5.0, 5.0));
    for (std::size_t i = 0; i < t.j_tt.size(); ++i) {
        CHECK(t.j_tt.values()[i] >= 0.0);
        CHECK(t.j_ff.values()[i] >= 0.0);
        CHECK(t.j_tf.values()[i] * t.j_tf.values()[i] <=
              t.j_tt.values()[i] * t.j_ff.values()[i] + 1e-9);
    }
}

TEST_CASE("structure tensor rejects grids below 3x3") {
    CHECK_THROWS_AS(structure_tensor(Matrix(2, 5, 1.0)), const SizeError&);
}

TEST_CASE("tensor eigenvalues: hand-solved cases") {
    StructureTensorField t;
    t.j_tt = Matrix(1, 3);
    t.j_ff = Matrix(1, 3);
    t.j_tf = Matrix(1, 3);
    t.j_tt(0, 0) = 4.0; // diagonal
    t.j_tt(0, 1) = 1.0; // isotropic
    t.j_ff(0, 1) = 1.0;
    t.j_tt(0, 2) = 2.0; // full
    t.j_ff(0, 2) = 1.0;
    t.j_tf(0, 2) = 1.0;

    const auto [l1, l2] = tensor_eigenvalues(t);
    CHECK(l1(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(l2(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(l1(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l2(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l1(0, 2) == doctest::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-12));
    CHECK(l2(0, 2) == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-12));
}

TEST_CASE("tensor eigenvalues satisfy trace and determinant identities") {
    Rng rng(55);
    const auto t = structure_tensor(random_matrix(9, 9, rng, -2.0, 2.0));
    const auto [l1, l2] = tensor_eigenvalues(t);
    for (std::size_t i = 0; i < l1.size(); ++i) {
        const double tr = t.j_tt.values()[i] + t.j_ff.values()[i];
        const double det = t.j_tt.values()[i] * t.j_ff.values()[i] -
                           t.j_tf.values()[i] * t.j_tf.values()[i];
        CHECK(l1.values()[i] + l2.values()[i] == doctest::Approx(tr).epsilon(1e-9));
        CHECK(l1.values()[i] * l2.values()[i] == doctest::Approx(det).epsilon(1e-9));
        CHECK(l1.values()[i] >= l2.values()[i]);
        CHECK(l2.values()[i] >= -1e-12);
    }
}

TEST_CASE("coherence: guard and limit cases") {
    Matrix l1(1, 3), l2(1, 3);
    l1(0, 0) = 2.0; // equal eigenvalues
    l2(0, 0) = 2.0;
    l1(0, 1) = 3.0; // perfect edge
    l2(0, 1) = 0.0;
    // (0,2): both zero
    const auto c = coherence(l1, l2);
    CHECK(c.c(0, 0) == 0.0);
    CHECK(c.c(0, 1) == 1.0);
    CHECK(c.c(0, 2) == 0.0);
}

TEST_CASE("coherence stays in [0,1] on random fields") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const auto t = structure_tensor(random_matrix(7, 7, rng, -3.0, 3.0));
        const auto [l1, l2] = tensor_eigenvalues(t);
        const auto map = coherence(l1, l2);
        for (double v : map.c.values()) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("coherence enhancement of a constant grid reduces to plain decibels") {
    const auto s = wrap(Matrix(6, 6, 4.0));
    const auto out = enhance_coherence(s);
    CHECK(out.scale == dsp::Scale::Decibel);
    for (double v : out.values.values())
        CHECK(v == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-9));
}

TEST_CASE("coherence enhancement equals the composition of its stages") {
    Rng rng(13);
    const auto s = wrap(random_matrix(8, 8, rng, 0.0, 2.0));
    const auto direct = enhance_coherence(s);

    const auto ridge = ridge_filter(s);
    const auto [l1, l2] = tensor_eigenvalues(structure_tensor(s));
    const auto coh = coherence(l1, l2);
    const auto db = dsp::to_decibel(ridge);
    for (std::size_t i = 0; i < direct.values.size(); ++i) {
        const double expected = db.values.values()[i] * (1.0 + coh.c.values()[i]);
        CHECK(direct.values.values()[i] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("coherence enhancement widens the line/background contrast gap") {
    Rng rng(29);
    const auto s = line_in_noise(30, 9, 4, 2.0, rng);
    const auto plain = dsp::to_decibel(s);
    const auto out = enhance_coherence(s);
    const double gap_plain =
        mean_on_line(plain.values, 4, true) - mean_on_line(plain.values, 4, false);
    const double gap_enhanced =
        mean_on_line(out.values, 4, true) - mean_on_line(out.values, 4, false);
    CHECK(gap_enhanced > gap_plain);
}

TEST_CASE("percentile: linear interpolation between order statistics") {
    const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
    CHECK(percentile(v, 25.0) == doctest::Approx(1.75).epsilon(1e-12));
    CHECK(percentile(v, 50.0) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(percentile(v, 75.0) == doctest::Approx(3.25).epsilon(1e-12));
    CHECK(percentile(v, 0.0) == 1.0);
    CHECK(percentile(v, 100.0) == 4.0);
    CHECK_THROWS_AS(percentile({}, 50.0), const SizeError&);
    CHECK_THROWS_AS(percentile(v, 101.0), const RangeError&);
}

TEST_CASE("threshold stage: 2x2 worked example") {
    Matrix m(2, 2);
    m(0, 0) = 1.0;
    m(0, 1) = 2.0;
    m(1, 0) = 3.0;
    m(1, 1) = 4.0;
    const auto out = threshold_adjust(wrap(std::move(m), dsp::Scale::Decibel));
    CHECK(out.values(0, 0) == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK(out.values(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(out.values(1, 0) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(out.values(1, 1) == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("threshold stage: constant grid takes the lowest branch") {
    const auto s = wrap(Matrix(4, 4, -7.0), dsp::Scale::Decibel);
    const auto pre = threshold_adjust(s);
    for (double v : pre.values.values())
        CHECK(v == doctest::Approx(-12.0).epsilon(1e-12));
    const auto blurred = enhance_threshold(s);
    for (double v : blurred.values.values())
        CHECK(v == doctest::Approx(-12.0).epsilon(1e-12));
}

TEST_CASE("threshold stage branch choice is affine invariant") {
    Rng rng(41);
    const auto m = random_matrix(6, 6, rng, -30.0, 10.0);
    const auto s = wrap(m, dsp::Scale::Decibel);
    const auto scaled = wrap(m.map([](double v) { return 2.5 * v + 7.0; }),
                             dsp::Scale::Decibel);
    const auto adj_a = threshold_adjust(s);
    const auto adj_b = threshold_adjust(scaled);
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double delta_a = adj_a.values.values()[i] - m.values()[i];
        const double delta_b =
            adj_b.values.values()[i] - (2.5 * m.values()[i] + 7.0);
        CHECK(delta_a == doctest::Approx(delta_b).epsilon(1e-12));
    }
}

TEST_CASE("threshold stage rejects power-scale input") {
    CHECK_THROWS_AS(threshold_adjust(wrap(Matrix(3, 3, 1.0))), const StateError&);
}

TEST_CASE("ssim: identity, symmetry and mean-shift penalty") {
    Rng rng(61);
    const auto x = random_matrix(6, 6, rng, -20.0, 10.0);
    const auto y = random_matrix(6, 6, rng, -20.0, 10.0);
    CHECK(ssim(x, x) == 1.0);
    CHECK(ssim(x, y) == doctest::Approx(ssim(y, x)).epsilon(1e-12));
    CHECK(ssim(x, x.map([](double v) { return v + 30.0; })) < 1.0);
}

TEST_CASE("ssim: joint affine invariance") {
    Rng rng(67);
    const auto x = random_matrix(5, 5, rng, -20.0, 10.0);
    const auto y = random_matrix(5, 5, rng, -20.0, 10.0);
    const auto fx = [](double v) { return 2.5 * v + 7.0; };
    CHECK(ssim(x.map(fx), y.map(fx)) == doctest::Approx(ssim(x, y)).epsilon(1e-9));
}

TEST_CASE("ssim: frozen 4x4 references") {
    Matrix x(4, 4), y(4, 4);
    for (std::size_t i = 0; i < 16; ++i)
        x.values()[i] = static_cast<double>(i + 1);
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; c += 2) {
            y(r, c) = x(r, c + 1);
            y(r, c + 1) = x(r, c);
        }
    }
    CHECK(ssim(x, y) == doctest::Approx(0.9765821673204145).epsilon(1e-9));

    const double av[16] = {-40, -35, -20, -10, -38, -5, -18, -12,
                           -36, -33, -2,  -14, -34, -31, -28, 0};
    const double bv[16] = {-39, -36, -21, -9, -37, -6, -17, -13,
                           -35, -32, -3,  -15, -33, -30, -27, -1};
    Matrix a(4, 4), b(4, 4);
    for (std::size_t i = 0; i < 16; ++i) {
        a.values()[i] = av[i];
        b.values()[i] = bv[i];
    }
    CHECK(ssim(a, b) == doctest::Approx(0.9970705103814101).epsilon(1e-9));
}

TEST_CASE("ssim rejects mismatched shapes") {
    CHECK_THROWS_AS(ssim(Matrix(3, 3, 1.0), Matrix(3, 4, 1.0)), const SizeError&);
}

TEST_CASE("full enhancement changes structure more than ridge filtering alone") {
    Rng rng(83);
    const auto s = line_in_noise(40, 9, 3, 2.0, rng);
    const auto original = dsp::to_decibel(s);
    const auto ridge_only = dsp::to_decibel(ridge_filter(s));
    const auto final_enhanced = enhance_threshold(enhance_coherence(s));
    CHECK(ssim(final_enhanced, original) < ssim(ridge_only, original));
}
