#ifndef MODSPIKE_UNWRAPPER_HPP
#define MODSPIKE_UNWRAPPER_HPP

#include <modspike/core_types.hpp>
#include <modspike/lar_ops.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace modspike {

/// Zeroth-, first- and second-order consistency between an HDR estimate and a modulo frame.
/// Each term is a mean absolute value over all entries (both gradient components for l_grad).
struct Residuals
{
    double l_mod = 0.0;
    double l_grad = 0.0;
    double l_lap = 0.0;

    bool below(double tol) const { return l_mod < tol && l_grad < tol && l_lap < tol; }
};

inline constexpr double kConvergenceTolerance = 1e-6;

namespace detail {

struct ResidualSums
{
    double mod = 0.0;
    double grad = 0.0;
    double lap = 0.0;
};

inline void accumulate_residuals(const Raster& estimate, const Raster& wrapped, double m, ResidualSums& sums)
{
    for (std::size_t p = 0; p < estimate.size(); ++p)
        sums.mod += std::abs(lar(estimate[p] - wrapped[p], m));

    const GradientField ge = lar(gradient(estimate), m);
    const GradientField gw = lar(gradient(wrapped), m);
    for (std::size_t p = 0; p < estimate.size(); ++p)
        sums.grad += std::abs(ge.gx[p] - gw.gx[p]) + std::abs(ge.gy[p] - gw.gy[p]);

    const Raster le = lar(laplacian(estimate), m);
    const Raster lw = lar(laplacian(wrapped), m);
    for (std::size_t p = 0; p < estimate.size(); ++p)
        sums.lap += std::abs(le[p] - lw[p]);
}

inline Residuals finish_residuals(const ResidualSums& sums, std::size_t entries)
{
    if (entries == 0)
        return {};
    const auto n = static_cast<double>(entries);
    return {sums.mod / n, sums.grad / (2.0 * n), sums.lap / n};
}

} // namespace detail

inline Residuals consistency_residuals(const HdrImage& hdr, const ModuloFrame& frame)
{
    require(hdr.height() == frame.height() && hdr.width() == frame.width() && hdr.channels() == frame.channels(),
            "consistency_residuals: dimension mismatch");
    const double m = frame.modulus();
    detail::ResidualSums sums;
    for (std::size_t ch = 0; ch < hdr.channels(); ++ch)
        detail::accumulate_residuals(hdr.channel(ch), frame.channel(ch), m, sums);
    return detail::finish_residuals(sums, hdr.values().size());
}

/// Result of classical unwrapping of one modulo frame.
struct UnwrapResult
{
    HdrImage hdr;                        // frame + rollover * 2^N
    std::vector<std::int64_t> rollover;  // wrap counts, interleaved like hdr
    Residuals residuals;                 // of hdr against the frame
    Residuals estimate_residuals;        // of the real-valued Poisson estimate before snapping
    bool converged = false;
};

/// Per-channel intermediate products, exposed for diagnostics and tests.
struct ChannelUnwrap
{
    Raster estimate;                     // Poisson solution with its constant fixed, before snapping
    Grid<std::int64_t> rollover;
    std::uint32_t offset = 0;            // integer constant c picked by the congruence search
};

/// Integer c in [0, m) minimising sum |lar(x + c - wrapped)|; ties go to the smaller c.
inline std::uint32_t congruence_offset(const Raster& x, const Raster& wrapped, std::uint32_t modulus)
{
    const double m = modulus;
    const double half = 0.5 * m;
    std::vector<double> phase(x.size());
    for (std::size_t p = 0; p < x.size(); ++p) {
        double e = std::fmod(x[p] - wrapped[p], m);
        if (e < 0.0)
            e += m;
        if (e >= m)
            e -= m;
        phase[p] = e;
    }
    std::uint32_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::uint32_t c = 0; c < modulus; ++c) {
        const double shift = c;
        double cost = 0.0;
        for (double e : phase) {
            double y = e + shift;
            if (y >= m)
                y -= m;
            cost += y < half ? y : m - y;
        }
        if (cost < best_cost) {
            best_cost = cost;
            best = c;
        }
    }
    return best;
}

/// LAR-gradient Poisson reconstruction of one channel followed by congruence snapping.
/// The rollover map is anchored so that its minimum is zero (darkest region unwrapped).
inline ChannelUnwrap unwrap_channel(const Raster& wrapped, std::uint32_t modulus)
{
    const double m = modulus;
    const Raster x = poisson_solve(divergence(lar(gradient(wrapped), m)));
    const std::uint32_t c = congruence_offset(x, wrapped, modulus);

    ChannelUnwrap out;
    out.offset = c;
    out.rollover = Grid<std::int64_t>(wrapped.height(), wrapped.width());
    std::int64_t lowest = std::numeric_limits<std::int64_t>::max();
    double drift = 0.0;
    for (std::size_t p = 0; p < x.size(); ++p) {
        const double d = x[p] + c - wrapped[p];
        out.rollover[p] = static_cast<std::int64_t>(std::round(d / m));
        lowest = std::min(lowest, out.rollover[p]);
        drift += lar(d, m);
    }
    if (x.size() == 0)
        lowest = 0;
    for (auto& k : out.rollover.values())
        k -= lowest;

    // remaining sub-count constant so the estimate sits on the frame's lattice on average
    const double shift = static_cast<double>(c) - (x.size() ? drift / static_cast<double>(x.size()) : 0.0) -
                         static_cast<double>(lowest) * m;
    out.estimate = Raster(x.height(), x.width());
    for (std::size_t p = 0; p < x.size(); ++p)
        out.estimate[p] = x[p] + shift;
    return out;
}

/// Iteration-free classical unwrapping of a modulo frame, channel by channel.
inline UnwrapResult unwrap_poisson(const ModuloFrame& frame)
{
    require(frame.channels() == 1 || frame.channels() == 3, "unwrap_poisson: frame must have 1 or 3 channels");
    const std::size_t c = frame.channels();
    const std::size_t n = frame.pixel_count();
    const std::uint32_t m = frame.modulus();

    UnwrapResult result;
    result.rollover.assign(n * c, 0);
    std::vector<float> values(n * c);
    detail::ResidualSums estimate_sums;
    for (std::size_t ch = 0; ch < c; ++ch) {
        const Raster wrapped = frame.channel(ch);
        const ChannelUnwrap cu = unwrap_channel(wrapped, m);
        for (std::size_t p = 0; p < n; ++p) {
            const std::int64_t k = cu.rollover[p];
            result.rollover[p * c + ch] = k;
            values[p * c + ch] = static_cast<float>(wrapped[p] + static_cast<double>(k) * m);
        }
        detail::accumulate_residuals(cu.estimate, wrapped, m, estimate_sums);
    }
    result.hdr = HdrImage(frame.height(), frame.width(), c, std::move(values));
    result.residuals = consistency_residuals(result.hdr, frame);
    result.estimate_residuals = detail::finish_residuals(estimate_sums, n * c);
    result.converged = result.residuals.below(kConvergenceTolerance) &&
                       result.estimate_residuals.below(kConvergenceTolerance);
    return result;
}

/// Sinusoidal embedding of the wrap phase, same layout as the source image.
struct CyclicEmbedding
{
    std::vector<double> sin;
    std::vector<double> cos;
};

inline CyclicEmbedding cyclic_encode(const HdrImage& hdr, unsigned bits)
{
    require(valid_bit_depth(bits), "cyclic_encode: bit_depth must be in 1..16");
    const double m = modulus_for(bits);
    CyclicEmbedding out;
    out.sin.reserve(hdr.values().size());
    out.cos.reserve(hdr.values().size());
    for (float v : hdr.values()) {
        double wrapped = std::fmod(static_cast<double>(v), m);
        if (wrapped < 0.0)
            wrapped += m;
        const double angle = 2.0 * std::numbers::pi * wrapped / m;
        out.sin.push_back(std::sin(angle));
        out.cos.push_back(std::cos(angle));
    }
    return out;
}

inline constexpr double kDefaultMu = 5000.0;
inline constexpr double kDefaultPeak = 4095.0;  // 12-bit linear ground truth

/// log(1 + mu x) / log(1 + mu) for a normalised x >= 0.
inline double mu_law(double x, double mu)
{
    require(mu > 0.0, "mu_law: mu must be positive");
    require(x >= 0.0, "mu_law: input must be nonnegative");
    return std::log1p(mu * x) / std::log1p(mu);
}

inline double mu_law_inverse(double y, double mu)
{
    require(mu > 0.0, "mu_law_inverse: mu must be positive");
    require(y >= 0.0, "mu_law_inverse: input must be nonnegative");
    return std::expm1(y * std::log1p(mu)) / mu;
}

/// Tone-maps hdr/peak; values above peak map above 1.
inline HdrImage mu_law(const HdrImage& hdr, double mu = kDefaultMu, double peak = kDefaultPeak)
{
    require(peak > 0.0, "mu_law: peak must be positive");
    std::vector<float> out(hdr.values().size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<float>(mu_law(static_cast<double>(hdr.values()[i]) / peak, mu));
    return HdrImage(hdr.height(), hdr.width(), hdr.channels(), std::move(out));
}

inline HdrImage mu_law_inverse(const HdrImage& tone_mapped, double mu = kDefaultMu, double peak = kDefaultPeak)
{
    require(peak > 0.0, "mu_law_inverse: peak must be positive");
    std::vector<float> out(tone_mapped.values().size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<float>(peak * mu_law_inverse(static_cast<double>(tone_mapped.values()[i]), mu));
    return HdrImage(tone_mapped.height(), tone_mapped.width(), tone_mapped.channels(), std::move(out));
}

} // namespace modspike

#endif // MODSPIKE_UNWRAPPER_HPP
