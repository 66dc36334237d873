#ifndef MODSPIKE_METRICS_HPP
#define MODSPIKE_METRICS_HPP

#include <modspike/core_types.hpp>
#include <modspike/unwrapper.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace modspike {

/// Returned by the PSNR functions when the two images are identical.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

inline double mean_squared_error(const HdrImage& a, const HdrImage& b)
{
    require(a.same_shape(b), "metrics: image dimensions differ");
    require(!a.values().empty(), "metrics: empty image");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        const double d = static_cast<double>(a.values()[i]) - static_cast<double>(b.values()[i]);
        sum += d * d;
    }
    return sum / static_cast<double>(a.values().size());
}

/// 10 log10(peak^2 / MSE) in the linear radiance domain; kPsnrIdentical when MSE is zero.
inline double psnr_linear(const HdrImage& a, const HdrImage& b, double peak = kDefaultPeak)
{
    require(peak > 0.0, "psnr: peak must be positive");
    const double mse = mean_squared_error(a, b);
    if (mse == 0.0)
        return kPsnrIdentical;
    return 10.0 * std::log10(peak * peak / mse);
}

namespace detail {

inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

inline std::array<double, kSsimWindow> ssim_kernel()
{
    std::array<double, kSsimWindow> k{};
    const double centre = 0.5 * static_cast<double>(kSsimWindow - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < kSsimWindow; ++i) {
        const double d = static_cast<double>(i) - centre;
        k[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        total += k[i];
    }
    for (double& v : k)
        v /= total;
    return k;
}

// Separable Gaussian filter keeping only fully covered windows.
inline Raster filter_valid(const Raster& in)
{
    const auto k = ssim_kernel();
    const std::size_t h = in.height();
    const std::size_t w = in.width();
    const std::size_t oh = h - kSsimWindow + 1;
    const std::size_t ow = w - kSsimWindow + 1;
    Raster rows(h, ow);
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < kSsimWindow; ++t)
                s += k[t] * in(i, j + t);
            rows(i, j) = s;
        }
    Raster out(oh, ow);
    for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < kSsimWindow; ++t)
                s += k[t] * rows(i + t, j);
            out(i, j) = s;
        }
    return out;
}

inline Raster product(const Raster& a, const Raster& b)
{
    Raster out(a.height(), a.width());
    for (std::size_t p = 0; p < a.size(); ++p)
        out[p] = a[p] * b[p];
    return out;
}

} // namespace detail

/// Mean SSIM over 11x11 Gaussian windows (sigma 1.5, K1 0.01, K2 0.03, dynamic range = peak),
/// averaged over every valid window position and channel.
inline double ssim_linear(const HdrImage& a, const HdrImage& b, double peak = kDefaultPeak)
{
    using detail::kSsimWindow;
    require(a.same_shape(b), "ssim: image dimensions differ");
    require(peak > 0.0, "ssim: peak must be positive");
    require(a.height() >= kSsimWindow && a.width() >= kSsimWindow, "ssim: image smaller than 11x11");
    const double c1 = (detail::kSsimK1 * peak) * (detail::kSsimK1 * peak);
    const double c2 = (detail::kSsimK2 * peak) * (detail::kSsimK2 * peak);

    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t ch = 0; ch < a.channels(); ++ch) {
        const Raster x = a.channel(ch);
        const Raster y = b.channel(ch);
        const Raster mx = detail::filter_valid(x);
        const Raster my = detail::filter_valid(y);
        const Raster sxx = detail::filter_valid(detail::product(x, x));
        const Raster syy = detail::filter_valid(detail::product(y, y));
        const Raster sxy = detail::filter_valid(detail::product(x, y));
        for (std::size_t p = 0; p < mx.size(); ++p) {
            const double var_x = sxx[p] - mx[p] * mx[p];
            const double var_y = syy[p] - my[p] * my[p];
            const double cov = sxy[p] - mx[p] * my[p];
            const double num = (2.0 * mx[p] * my[p] + c1) * (2.0 * cov + c2);
            const double den = (mx[p] * mx[p] + my[p] * my[p] + c1) * (var_x + var_y + c2);
            total += num / den;
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

/// PSNR of the mu-law tone-mapped images with unit peak.
inline double psnr_mu(const HdrImage& a, const HdrImage& b, double mu = kDefaultMu, double peak = kDefaultPeak)
{
    require(a.same_shape(b), "psnr_mu: image dimensions differ");
    return psnr_linear(mu_law(a, mu, peak), mu_law(b, mu, peak), 1.0);
}

/// Link budget of a raw spike stream versus its modulo-encoded output.
struct BandwidthReport
{
    std::uint64_t raw_bps = 0;
    double modulo_bps = 0.0;  // exact whenever pixels*N*f is divisible by the stride
    double reduction_ratio = 0.0;
    std::size_t encoded_height = 0;
    std::size_t encoded_width = 0;
    std::size_t encoded_channels = 0;

    static double to_gbps(double bps) { return bps / 1e9; }
};

/// With `mosaic`, the raw baseline is a single-channel full-resolution (Bayer) stream and the
/// encoded output is (h/2)x(w/2)x3; otherwise both carry h*w*channels samples.
inline BandwidthReport bandwidth_report(std::size_t height, std::size_t width, std::size_t channels,
                                        std::uint64_t readout_hz, unsigned bits, std::size_t stride, bool mosaic)
{
    require(height > 0 && width > 0, "bandwidth: height and width must be positive");
    require(channels > 0, "bandwidth: channels must be positive");
    require(readout_hz > 0, "bandwidth: readout rate must be positive");
    require(valid_bit_depth(bits), "bandwidth: bits must be in 1..16");
    require(stride > 0, "bandwidth: stride must be positive");
    if (mosaic)
        require(height % 2 == 0 && width % 2 == 0, "bandwidth: mosaic needs even height and width");

    BandwidthReport r;
    const std::uint64_t raw_channels = mosaic ? 1 : channels;
    r.raw_bps = std::uint64_t{height} * width * raw_channels * readout_hz;
    r.encoded_height = mosaic ? height / 2 : height;
    r.encoded_width = mosaic ? width / 2 : width;
    r.encoded_channels = mosaic ? 3 : channels;
    const std::uint64_t encoded_bits_per_frame =
        std::uint64_t{r.encoded_height} * r.encoded_width * r.encoded_channels * bits;
    const std::uint64_t numerator = encoded_bits_per_frame * readout_hz;  // modulo_bps * stride
    r.modulo_bps = static_cast<double>(numerator) / static_cast<double>(stride);
    // one rounding: (raw*P - numerator) / (raw*P)
    const auto raw_scaled = static_cast<double>(r.raw_bps) * static_cast<double>(stride);
    r.reduction_ratio = (raw_scaled - static_cast<double>(numerator)) / raw_scaled;
    return r;
}

} // namespace modspike

#endif // MODSPIKE_METRICS_HPP
