#include "rumble/wavelet.hpp"

#include <algorithm>
#include <cmath>

namespace rumble::wavelet {

namespace {

FilterBank make_db3() {
    const double s2 = std::sqrt(2.0);
    const double s10 = std::sqrt(10.0);
    const double b = std::sqrt(5.0 + 2.0 * s10);
    const std::vector<double> h = {
        s2 * (1.0 + s10 + b) / 32.0,       s2 * (5.0 + s10 + 3.0 * b) / 32.0,
        s2 * (10.0 - 2.0 * s10 + 2.0 * b) / 32.0, s2 * (10.0 - 2.0 * s10 - 2.0 * b) / 32.0,
        s2 * (5.0 + s10 - 3.0 * b) / 32.0, s2 * (1.0 + s10 - b) / 32.0};
    const std::size_t f = h.size();
    FilterBank fb;
    fb.rec_lo = h;
    fb.dec_lo.resize(f);
    fb.rec_hi.resize(f);
    fb.dec_hi.resize(f);
    for (std::size_t k = 0; k < f; ++k) {
        fb.dec_lo[k] = h[f - 1 - k];
        fb.rec_hi[k] = (k % 2 == 0 ? 1.0 : -1.0) * h[f - 1 - k];
    }
    for (std::size_t k = 0; k < f; ++k)
        fb.dec_hi[k] = fb.rec_hi[f - 1 - k];
    return fb;
}

// Half-sample symmetric index: ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} ...
std::size_t reflect(long i, long n) {
    while (i < 0 || i >= n) {
        if (i < 0)
            i = -1 - i;
        if (i >= n)
            i = 2 * n - 1 - i;
    }
    return static_cast<std::size_t>(i);
}

} // namespace

const FilterBank& db3_filters() {
    static const FilterBank fb = make_db3();
    return fb;
}

std::pair<std::vector<double>, std::vector<double>>
dwt_single(const std::vector<double>& x, const FilterBank& fb) {
    const long n = static_cast<long>(x.size());
    const long f = static_cast<long>(fb.length());
    if (n < f)
        throw SizeError("signal shorter than the wavelet filter");
    const std::size_t out_len = static_cast<std::size_t>((n + f - 1) / 2);
    std::vector<double> a(out_len), d(out_len);
    // valid convolution over the symmetric extension, keeping odd outputs
    for (std::size_t j = 0; j < out_len; ++j) {
        double sa = 0.0, sd = 0.0;
        for (long m = 0; m < f; ++m) {
            const double v = x[reflect(static_cast<long>(2 * j + 1) - m, n)];
            sa += fb.dec_lo[static_cast<std::size_t>(m)] * v;
            sd += fb.dec_hi[static_cast<std::size_t>(m)] * v;
        }
        a[j] = sa;
        d[j] = sd;
    }
    return {std::move(a), std::move(d)};
}

std::vector<double> idwt_single(const std::vector<double>& approx,
                                const std::vector<double>& detail, std::size_t out_len,
                                const FilterBank& fb) {
    if (approx.size() != detail.size())
        throw SizeError("approx/detail length mismatch");
    const std::size_t m = approx.size();
    const std::size_t f = fb.length();
    const std::size_t up_len = 2 * m - 1;
    const std::size_t full_len = up_len + f - 1;
    if (out_len > full_len - 2 * (f - 2))
        throw SizeError("requested output longer than the reconstruction");
    std::vector<double> rec(full_len, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < f; ++k) {
            rec[2 * i + k] += approx[i] * fb.rec_lo[k] + detail[i] * fb.rec_hi[k];
        }
    }
    std::vector<double> out(out_len);
    std::copy_n(rec.begin() + static_cast<std::ptrdiff_t>(f - 2), out_len, out.begin());
    return out;
}

WaveletDecomposition db3_decompose(const TimeSeries& x, std::size_t levels) {
    x.validate();
    if (levels < 1)
        throw ConfigError("at least one decomposition level required");
    const auto& fb = db3_filters();
    const std::size_t min_len = fb.length() << levels;
    if (x.size() < min_len)
        throw SizeError("signal too short for the requested decomposition depth");

    WaveletDecomposition out;
    std::vector<double> a = x.samples;
    for (std::size_t lvl = 0; lvl < levels; ++lvl) {
        out.level_lengths.push_back(a.size());
        auto [next_a, d] = dwt_single(a, fb);
        out.details.push_back(std::move(d));
        a = std::move(next_a);
    }
    out.approx = std::move(a);
    return out;
}

std::vector<double> db3_reconstruct(const WaveletDecomposition& d) {
    if (d.details.empty() || d.details.size() != d.level_lengths.size())
        throw StateError("decomposition missing levels");
    const auto& fb = db3_filters();
    std::vector<double> a = d.approx;
    for (std::size_t lvl = d.details.size(); lvl-- > 0;)
        a = idwt_single(a, d.details[lvl], d.level_lengths[lvl], fb);
    return a;
}

std::vector<double> soft_threshold(const std::vector<double>& x, double threshold) {
    if (threshold < 0.0)
        throw RangeError("threshold must be non-negative");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double mag = std::abs(x[i]) - threshold;
        out[i] = mag > 0.0 ? std::copysign(mag, x[i]) : 0.0;
    }
    return out;
}

double universal_threshold(const std::vector<double>& finest_detail, std::size_t signal_len) {
    if (finest_detail.empty() || signal_len < 2)
        throw SizeError("need detail coefficients and at least two samples");
    std::vector<double> mags(finest_detail.size());
    std::transform(finest_detail.begin(), finest_detail.end(), mags.begin(),
                   [](double v) { return std::abs(v); });
    std::sort(mags.begin(), mags.end());
    const std::size_t m = mags.size();
    const double median =
        m % 2 == 1 ? mags[m / 2] : 0.5 * (mags[m / 2 - 1] + mags[m / 2]);
    const double sigma = median / 0.6745;
    return sigma * std::sqrt(2.0 * std::log(static_cast<double>(signal_len)));
}

TimeSeries db3_denoise(const TimeSeries& x, std::size_t levels) {
    auto d = db3_decompose(x, levels);
    const double thr = universal_threshold(d.details.front(), x.size());
    for (auto& lvl : d.details)
        lvl = soft_threshold(lvl, thr);
    return TimeSeries{db3_reconstruct(d), x.sample_rate, x.unit};
}

} // namespace rumble::wavelet
