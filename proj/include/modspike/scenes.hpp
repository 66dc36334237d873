#ifndef MODSPIKE_SCENES_HPP
#define MODSPIKE_SCENES_HPP

// Synthetic test scenes.

#include <modspike/core_types.hpp>

#include <cmath>
#include <random>

namespace modspike {

/// Sum of random isotropic Gaussian bumps, rescaled to span [0, peak] and rounded to integers.
/// Bump widths scale with the image size, so larger images are smoother per pixel.
inline HdrImage smooth_scene(std::size_t height, std::size_t width, std::size_t channels, double peak,
                             std::uint64_t seed, std::size_t bumps = 4)
{
    require(height > 0 && width > 0, "smooth_scene: empty image");
    require(peak >= 0.0, "smooth_scene: peak must be nonnegative");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double extent = static_cast<double>(std::max(height, width));

    std::vector<Raster> planes;
    for (std::size_t ch = 0; ch < channels; ++ch) {
        Raster field(height, width);
        for (std::size_t b = 0; b < bumps; ++b) {
            const double cy = unit(rng) * static_cast<double>(height);
            const double cx = unit(rng) * static_cast<double>(width);
            const double sigma = extent * (0.12 + 0.18 * unit(rng));
            const double amp = 0.3 + 0.7 * unit(rng);
            for (std::size_t i = 0; i < height; ++i)
                for (std::size_t j = 0; j < width; ++j) {
                    const double dy = static_cast<double>(i) - cy;
                    const double dx = static_cast<double>(j) - cx;
                    field(i, j) += amp * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
                }
        }
        const auto [lo, hi] = std::minmax_element(field.values().begin(), field.values().end());
        const double low = *lo;
        const double span = *hi - *lo;
        for (double& v : field.values())
            v = span > 0.0 ? std::round(peak * (v - low) / span) : 0.0;
        planes.push_back(std::move(field));
    }
    return HdrImage::from_channels(planes);
}

/// Horizontal ramp: value(j) = start + step * j on every row and channel.
inline HdrImage horizontal_ramp(std::size_t height, std::size_t width, double start, double step,
                                std::size_t channels = 1)
{
    std::vector<float> data(height * width * channels);
    for (std::size_t i = 0; i < height; ++i)
        for (std::size_t j = 0; j < width; ++j)
            for (std::size_t ch = 0; ch < channels; ++ch)
                data[(i * width + j) * channels + ch] = static_cast<float>(start + step * static_cast<double>(j));
    return HdrImage(height, width, channels, std::move(data));
}

/// Wraps an integer-valued image modulo 2^bits.
inline ModuloFrame wrap_image(const HdrImage& img, unsigned bits)
{
    require(valid_bit_depth(bits), "wrap_image: bit_depth must be in 1..16");
    const std::uint64_t mask = modulus_for(bits) - 1;
    std::vector<std::uint16_t> out(img.values().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const float v = img.values()[i];
        require(v == std::floor(v), "wrap_image: samples must be integers");
        out[i] = static_cast<std::uint16_t>(static_cast<std::uint64_t>(v) & mask);
    }
    return ModuloFrame(img.height(), img.width(), img.channels(), bits, std::move(out));
}

} // namespace modspike

#endif // MODSPIKE_SCENES_HPP
