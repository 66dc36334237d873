#ifndef MODSPIKE_TESTS_SUPPORT_HPP
#define MODSPIKE_TESTS_SUPPORT_HPP

// Generators and brute-force oracles shared by the test suites. Nothing here calls into the
// code path it is used to check.

#include <modspike/modspike.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace modspike::testing {

inline Raster random_raster(std::size_t h, std::size_t w, double lo, double hi, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> dist(lo, hi);
    Raster r(h, w);
    for (double& v : r.values())
        v = dist(rng);
    return r;
}

inline Raster random_integer_raster(std::size_t h, std::size_t w, std::int64_t max_value, std::mt19937_64& rng)
{
    std::uniform_int_distribution<std::int64_t> dist(0, max_value);
    Raster r(h, w);
    for (double& v : r.values())
        v = static_cast<double>(dist(rng));
    return r;
}

inline Raster mod_raster(const Raster& r, std::int64_t m)
{
    Raster out(r.height(), r.width());
    for (std::size_t p = 0; p < r.size(); ++p)
        out[p] = static_cast<double>(static_cast<std::int64_t>(r[p]) % m);
    return out;
}

/// Smooth field from a few low-frequency cosines, values in roughly [-amp, amp].
inline Raster smooth_random_raster(std::size_t h, std::size_t w, double amp, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Raster r(h, w);
    for (int term = 0; term < 4; ++term) {
        const double fy = 0.5 + 2.0 * unit(rng);
        const double fx = 0.5 + 2.0 * unit(rng);
        const double phase = 6.283185307179586 * unit(rng);
        const double a = amp * (0.25 + 0.75 * unit(rng)) / 4.0;
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j)
                r(i, j) += a * std::sin(fy * 3.14159265358979 * static_cast<double>(i) / static_cast<double>(h) +
                                        fx * 3.14159265358979 * static_cast<double>(j) / static_cast<double>(w) + phase);
    }
    return r;
}

/// Neumann 5-point Laplacian by explicit neighbour enumeration.
inline Raster stencil_laplacian(const Raster& x)
{
    const auto h = static_cast<long>(x.height());
    const auto w = static_cast<long>(x.width());
    Raster out(x.height(), x.width());
    const long di[4] = {-1, 1, 0, 0};
    const long dj[4] = {0, 0, -1, 1};
    for (long i = 0; i < h; ++i)
        for (long j = 0; j < w; ++j) {
            double s = 0.0;
            for (int n = 0; n < 4; ++n) {
                const long ni = i + di[n];
                const long nj = j + dj[n];
                if (ni < 0 || nj < 0 || ni >= h || nj >= w)
                    continue;
                s += x(ni, nj) - x(i, j);
            }
            out(i, j) = s;
        }
    return out;
}

inline double raster_mean(const Raster& r)
{
    double s = 0.0;
    for (double v : r.values())
        s += v;
    return r.size() ? s / static_cast<double>(r.size()) : 0.0;
}

inline double raster_range(const Raster& r)
{
    const auto [lo, hi] = std::minmax_element(r.values().begin(), r.values().end());
    return *hi - *lo;
}

inline Raster remove_mean(const Raster& r)
{
    Raster out = r;
    const double m = raster_mean(r);
    for (double& v : out.values())
        v -= m;
    return out;
}

inline double max_abs_diff(const Raster& a, const Raster& b)
{
    double d = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p)
        d = std::max(d, std::abs(a[p] - b[p]));
    return d;
}

/// Largest |forward difference| along either axis over all channels.
inline double max_forward_difference(const HdrImage& img)
{
    double d = 0.0;
    for (std::size_t ch = 0; ch < img.channels(); ++ch)
        for (std::size_t i = 0; i < img.height(); ++i)
            for (std::size_t j = 0; j < img.width(); ++j) {
                if (j + 1 < img.width())
                    d = std::max(d, std::abs(double(img.at(i, j + 1, ch)) - double(img.at(i, j, ch))));
                if (i + 1 < img.height())
                    d = std::max(d, std::abs(double(img.at(i + 1, j, ch)) - double(img.at(i, j, ch))));
            }
    return d;
}

/// Random smooth integer scene, peak <= requested, rescaled until every forward difference
/// is at most max_step.
inline HdrImage itoh_scene(std::size_t h, std::size_t w, double peak, double max_step, std::uint64_t seed)
{
    HdrImage img = smooth_scene(h, w, 1, peak, seed);
    double worst = max_forward_difference(img);
    while (worst > max_step) {
        peak *= 0.95 * max_step / worst;
        img = smooth_scene(h, w, 1, peak, seed);
        worst = max_forward_difference(img);
    }
    return img;
}

inline HdrImage image_from(const Raster& r) { return HdrImage::from_channels({r}); }

/// Random packed spike stream with the given bit density.
inline SpikeStream random_stream(std::size_t h, std::size_t w, std::size_t c, std::size_t frames, double density,
                                 std::mt19937_64& rng, std::uint32_t rate = 20000)
{
    std::bernoulli_distribution bit(density);
    const std::size_t pb = plane_bytes(h, w);
    std::vector<std::uint8_t> packed(frames * c * pb, 0);
    for (std::size_t f = 0; f < frames; ++f)
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t p = 0; p < h * w; ++p)
                if (bit(rng))
                    packed[(f * c + ch) * pb + p / 8] |= static_cast<std::uint8_t>(1u << (p % 8));
    return SpikeStream(h, w, c, frames, rate, std::move(packed));
}

/// Direct evaluation of the sliding-window count encoder from individual bits.
inline std::vector<std::vector<std::uint16_t>> naive_encode(const SpikeStream& s, const EncoderConfig& cfg)
{
    std::vector<std::vector<std::uint16_t>> frames;
    const std::uint64_t m = std::uint64_t{1} << cfg.bit_depth;
    for (std::size_t a = 0; a + cfg.window <= s.frame_count(); a += cfg.stride) {
        std::vector<std::uint16_t> f(s.height() * s.width() * s.channels());
        for (std::size_t i = 0; i < s.height(); ++i)
            for (std::size_t j = 0; j < s.width(); ++j)
                for (std::size_t ch = 0; ch < s.channels(); ++ch) {
                    std::uint64_t count = 0;
                    for (std::size_t r = a; r < a + cfg.window; ++r)
                        count += s.bit(r, i, j, ch) ? 1 : 0;
                    const auto v = static_cast<std::uint64_t>(std::floor(cfg.gain * static_cast<double>(count)));
                    f[(i * s.width() + j) * s.channels() + ch] = static_cast<std::uint16_t>(v % m);
                }
        frames.push_back(std::move(f));
    }
    return frames;
}

/// SSIM with explicit 11x11 Gaussian weights at every valid window position.
inline double brute_ssim(const HdrImage& a, const HdrImage& b, double peak)
{
    double g[11];
    double total = 0.0;
    for (int t = 0; t < 11; ++t) {
        g[t] = std::exp(-double((t - 5) * (t - 5)) / (2.0 * 1.5 * 1.5));
        total += g[t];
    }
    double wgt[11][11];
    for (int u = 0; u < 11; ++u)
        for (int v = 0; v < 11; ++v)
            wgt[u][v] = g[u] * g[v] / (total * total);
    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t ch = 0; ch < a.channels(); ++ch)
        for (std::size_t i = 0; i + 11 <= a.height(); ++i)
            for (std::size_t j = 0; j + 11 <= a.width(); ++j) {
                double mx = 0, my = 0;
                for (int u = 0; u < 11; ++u)
                    for (int v = 0; v < 11; ++v) {
                        mx += wgt[u][v] * a.at(i + u, j + v, ch);
                        my += wgt[u][v] * b.at(i + u, j + v, ch);
                    }
                double vx = 0, vy = 0, cxy = 0;
                for (int u = 0; u < 11; ++u)
                    for (int v = 0; v < 11; ++v) {
                        const double dx = a.at(i + u, j + v, ch) - mx;
                        const double dy = b.at(i + u, j + v, ch) - my;
                        vx += wgt[u][v] * dx * dx;
                        vy += wgt[u][v] * dy * dy;
                        cxy += wgt[u][v] * dx * dy;
                    }
                sum += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
                ++n;
            }
    return sum / static_cast<double>(n);
}

} // namespace modspike::testing

#endif // MODSPIKE_TESTS_SUPPORT_HPP
