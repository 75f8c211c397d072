#include "rumble/enhance.hpp"

#include <algorithm>
#include <cmath>

#include "rumble/errors.hpp"

namespace rumble::enhance {

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    if (sigma <= 0.0)
        throw ConfigError("sigma must be positive");
    const auto radius = static_cast<long>(std::llround(4.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (long i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (auto& v : k)
        v /= sum;
    return k;
}

std::size_t reflect(long i, long n) {
    if (n == 1)
        return 0;
    const long period = 2 * n;
    long m = i % period;
    if (m < 0)
        m += period;
    return static_cast<std::size_t>(m < n ? m : period - 1 - m);
}

void require_power(const dsp::Spectrogram& s) {
    if (s.scale != dsp::Scale::Power)
        throw StateError("operation expects a power-scale spectrogram");
}

void require_decibel(const dsp::Spectrogram& s) {
    if (s.scale != dsp::Scale::Decibel)
        throw StateError("operation expects a decibel-scale spectrogram");
}

} // namespace

Matrix gaussian_smooth(const Matrix& m, double sigma) {
    const auto kernel = gaussian_kernel(sigma);
    const long radius = static_cast<long>(kernel.size() / 2);
    const long rows = static_cast<long>(m.rows());
    const long cols = static_cast<long>(m.cols());

    Matrix tmp(m.rows(), m.cols());
    for (long r = 0; r < rows; ++r) {
        for (long c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (long d = -radius; d <= radius; ++d)
                acc += kernel[static_cast<std::size_t>(d + radius)] *
                       m(reflect(r + d, rows), static_cast<std::size_t>(c));
            tmp(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
        }
    }
    Matrix out(m.rows(), m.cols());
    for (long r = 0; r < rows; ++r) {
        for (long c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (long d = -radius; d <= radius; ++d)
                acc += kernel[static_cast<std::size_t>(d + radius)] *
                       tmp(static_cast<std::size_t>(r), reflect(c + d, cols));
            out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
        }
    }
    return out;
}

Matrix gradient(const Matrix& m, int axis) {
    if (axis != 0 && axis != 1)
        throw ConfigError("axis must be 0 or 1");
    const std::size_t n = axis == 0 ? m.rows() : m.cols();
    if (n < 2)
        throw SizeError("gradient needs at least 2 samples along the axis");
    Matrix out(m.rows(), m.cols());
    auto at = [&](std::size_t i, std::size_t j) {
        return axis == 0 ? m(i, j) : m(j, i);
    };
    const std::size_t other = axis == 0 ? m.cols() : m.rows();
    for (std::size_t j = 0; j < other; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            double v;
            if (i == 0)
                v = at(1, j) - at(0, j);
            else if (i == n - 1)
                v = at(n - 1, j) - at(n - 2, j);
            else
                v = 0.5 * (at(i + 1, j) - at(i - 1, j));
            if (axis == 0)
                out(i, j) = v;
            else
                out(j, i) = v;
        }
    }
    return out;
}

dsp::Spectrogram ridge_filter(const dsp::Spectrogram& s, double sigma_r) {
    require_power(s);
    if (s.values.rows() < 3 || s.values.cols() < 3)
        throw SizeError("ridge filter needs at least a 3x3 grid");

    const Matrix smoothed = gaussian_smooth(s.values, sigma_r);
    const Matrix gt = gradient(smoothed, 0);
    const Matrix gf = gradient(smoothed, 1);
    const Matrix htt = gradient(gt, 0);
    const Matrix htf = gradient(gt, 1);
    const Matrix hff = gradient(gf, 1);

    Matrix ridge(s.values.rows(), s.values.cols());
    double r_max = 0.0;
    for (std::size_t i = 0; i < ridge.rows(); ++i) {
        for (std::size_t j = 0; j < ridge.cols(); ++j) {
            const double tr = htt(i, j) + hff(i, j);
            const double diff = htt(i, j) - hff(i, j);
            const double root = std::sqrt(diff * diff + 4.0 * htf(i, j) * htf(i, j));
            const double lambda_min = 0.5 * (tr - root);
            ridge(i, j) = std::max(0.0, -lambda_min);
            r_max = std::max(r_max, ridge(i, j));
        }
    }
    if (r_max == 0.0)
        return s;

    dsp::Spectrogram out = s;
    for (std::size_t i = 0; i < ridge.rows(); ++i)
        for (std::size_t j = 0; j < ridge.cols(); ++j)
            out.values(i, j) = s.values(i, j) * (1.0 + ridge(i, j) / r_max);
    return out;
}

StructureTensorField structure_tensor(const Matrix& values, double sigma) {
    if (values.rows() < 3 || values.cols() < 3)
        throw SizeError("structure tensor needs at least a 3x3 grid");
    const Matrix gt = gradient(values, 0);
    const Matrix gf = gradient(values, 1);
    StructureTensorField t;
    t.sigma = sigma;
    t.j_tt = gaussian_smooth(gt.zip(gt, [](double a, double b) { return a * b; }), sigma);
    t.j_ff = gaussian_smooth(gf.zip(gf, [](double a, double b) { return a * b; }), sigma);
    t.j_tf = gaussian_smooth(gt.zip(gf, [](double a, double b) { return a * b; }), sigma);
    return t;
}

StructureTensorField structure_tensor(const dsp::Spectrogram& s, double sigma) {
    return structure_tensor(s.values, sigma);
}

std::pair<Matrix, Matrix> tensor_eigenvalues(const StructureTensorField& t) {
    if (!t.j_tt.same_shape(t.j_ff) || !t.j_tt.same_shape(t.j_tf))
        throw SizeError("tensor component shapes differ");
    Matrix l1(t.j_tt.rows(), t.j_tt.cols());
    Matrix l2(t.j_tt.rows(), t.j_tt.cols());
    for (std::size_t i = 0; i < l1.rows(); ++i) {
        for (std::size_t j = 0; j < l1.cols(); ++j) {
            const double tr = t.j_tt(i, j) + t.j_ff(i, j);
            const double diff = t.j_tt(i, j) - t.j_ff(i, j);
            const double root = std::sqrt(diff * diff + 4.0 * t.j_tf(i, j) * t.j_tf(i, j));
            l1(i, j) = 0.5 * (tr + root);
            l2(i, j) = 0.5 * (tr - root);
        }
    }
    return {std::move(l1), std::move(l2)};
}

CoherenceMap coherence(const Matrix& l1, const Matrix& l2, double eps) {
    if (!l1.same_shape(l2))
        throw SizeError("eigenvalue grids differ in shape");
    CoherenceMap map;
    map.epsilon_guard = eps;
    map.c = l1.zip(l2, [eps](double a, double b) {
        const double denom = a + b;
        if (denom < eps)
            return 0.0;
        return std::clamp((a - b) / denom, 0.0, 1.0);
    });
    return map;
}

dsp::Spectrogram enhance_coherence(const dsp::Spectrogram& s, double sigma, double sigma_r) {
    require_power(s);
    const auto ridge = ridge_filter(s, sigma_r);
    const auto tensor = structure_tensor(s, sigma);
    const auto [l1, l2] = tensor_eigenvalues(tensor);
    const auto coh = coherence(l1, l2);
    auto out = dsp::to_decibel(ridge);
    out.values = out.values.zip(coh.c, [](double db, double c) { return db * (1.0 + c); });
    return out;
}

double percentile(std::vector<double> values, double p) {
    if (values.empty())
        throw SizeError("percentile of an empty set");
    if (p < 0.0 || p > 100.0)
        throw RangeError("percentile rank outside [0, 100]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p / 100.0;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size())
        return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

dsp::Spectrogram threshold_adjust(const dsp::Spectrogram& s, const std::array<double, 4>& deltas) {
    require_decibel(s);
    const auto& v = s.values.values();
    const double p25 = percentile(v, 25.0);
    const double p50 = percentile(v, 50.0);
    const double p75 = percentile(v, 75.0);
    dsp::Spectrogram out = s;
    out.values = s.values.map([&](double x) {
        if (x > p75)
            return x + deltas[0];
        if (x > p50)
            return x + deltas[1];
        if (x > p25)
            return x + deltas[2];
        return x + deltas[3];
    });
    return out;
}

dsp::Spectrogram enhance_threshold(const dsp::Spectrogram& s, double blur_sigma,
                                   const std::array<double, 4>& deltas) {
    auto out = threshold_adjust(s, deltas);
    out.values = gaussian_smooth(out.values, blur_sigma);
    return out;
}

double ssim(const Matrix& x, const Matrix& y, double k1, double k2) {
    if (!x.same_shape(y))
        throw SizeError("ssim inputs differ in shape");
    if (x.values().empty())
        throw SizeError("ssim of empty grids");

    double joint_min = x.values().front(), joint_max = joint_min;
    for (double v : x.values()) {
        joint_min = std::min(joint_min, v);
        joint_max = std::max(joint_max, v);
    }
    for (double v : y.values()) {
        joint_min = std::min(joint_min, v);
        joint_max = std::max(joint_max, v);
    }
    const double range = joint_max - joint_min;
    if (range == 0.0)
        return 1.0;

    const auto n = static_cast<double>(x.values().size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.values().size(); ++i) {
        mx += x.values()[i] - joint_min;
        my += y.values()[i] - joint_min;
    }
    mx /= n;
    my /= n;
    double vx = 0.0, vy = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < x.values().size(); ++i) {
        const double dx = (x.values()[i] - joint_min) - mx;
        const double dy = (y.values()[i] - joint_min) - my;
        vx += dx * dx;
        vy += dy * dy;
        cov += dx * dy;
    }
    vx /= n;
    vy /= n;
    cov /= n;

    const double c1 = (k1 * range) * (k1 * range);
    const double c2 = (k2 * range) * (k2 * range);
    return ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
           ((mx * mx + my * my + c1) * (vx + vy + c2));
}

double ssim(const dsp::Spectrogram& x, const dsp::Spectrogram& y, double k1, double k2) {
    if (x.scale != y.scale)
        throw StateError("ssim inputs must share a scale");
    return ssim(x.values, y.values, k1, k2);
}

} // namespace rumble::enhance
