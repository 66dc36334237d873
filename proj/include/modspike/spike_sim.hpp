#ifndef MODSPIKE_SPIKE_SIM_HPP
#define MODSPIKE_SPIKE_SIM_HPP

#include <modspike/core_types.hpp>

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <string_view>

namespace modspike {

/// Per-micro-interval irradiance integrals U_1..U_K of a scene, each an h*w*c interleaved raster.
class IrradianceClip
{
public:
    IrradianceClip() = default;
    IrradianceClip(std::size_t height, std::size_t width, std::size_t channels, std::size_t micro_intervals,
                   double total_time, std::vector<float> integrals)
        : height_(height), width_(width), channels_(channels), intervals_(micro_intervals),
          total_time_(total_time), data_(std::move(integrals))
    {
        require(intervals_ >= 1, "IrradianceClip: micro_intervals must be at least 1");
        require(channels_ >= 1, "IrradianceClip: channels must be positive");
        require(total_time_ > 0.0, "IrradianceClip: total_time must be positive");
        require(data_.size() == intervals_ * frame_size(), "IrradianceClip: data length mismatch");
        for (float v : data_)
            require(std::isfinite(v) && v >= 0.0f, "IrradianceClip: integrals must be finite and nonnegative");
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t micro_intervals() const noexcept { return intervals_; }
    double total_time() const noexcept { return total_time_; }
    std::size_t frame_size() const noexcept { return height_ * width_ * channels_; }
    const std::vector<float>& values() const noexcept { return data_; }

    /// Interleaved integrals of the k-th interval (0-based).
    const float* interval(std::size_t k) const { return data_.data() + k * frame_size(); }

    float at(std::size_t k, std::size_t row, std::size_t col, std::size_t ch = 0) const
    {
        return interval(k)[(row * width_ + col) * channels_ + ch];
    }

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 1;
    std::size_t intervals_ = 0;
    double total_time_ = 1.0;
    std::vector<float> data_;
};

/// 2x3 affine map from sensor coordinates (x = column, y = row) to base-image coordinates.
struct Affine2
{
    double a = 1.0, b = 0.0, tx = 0.0;
    double c = 0.0, d = 1.0, ty = 0.0;

    std::array<double, 2> apply(double x, double y) const { return {a * x + b * y + tx, c * x + d * y + ty}; }
    bool is_identity() const { return a == 1.0 && b == 0.0 && tx == 0.0 && c == 0.0 && d == 1.0 && ty == 0.0; }
};

/// Global motion parameterised per micro-interval k: content translates by k*velocity,
/// rotates by k*angular_rate about the image centre and scales by (1 + k*scale_rate).
struct GlobalMotion
{
    double velocity_x = 0.0;  // px per interval
    double velocity_y = 0.0;
    double angular_rate = 0.0;  // rad per interval
    double scale_rate = 0.0;

    bool is_static() const { return velocity_x == 0.0 && velocity_y == 0.0 && angular_rate == 0.0 && scale_rate == 0.0; }

    /// Sampling map for interval k: a sensor pixel reads the base image at the returned position.
    Affine2 sampling_map(std::size_t k, std::size_t height, std::size_t width) const
    {
        if (is_static())
            return {};
        const double t = static_cast<double>(k);
        const double cx = 0.5 * static_cast<double>(width - 1);
        const double cy = 0.5 * static_cast<double>(height - 1);
        const double s = 1.0 + scale_rate * t;
        require(s > 0.0, "GlobalMotion: scale collapses to zero within the clip");
        const double cs = std::cos(-angular_rate * t) / s;
        const double sn = std::sin(-angular_rate * t) / s;
        // src = C + R(-theta)/s * (dst - C - v*t)
        const double ox = -cx - velocity_x * t;
        const double oy = -cy - velocity_y * t;
        Affine2 m;
        m.a = cs;
        m.b = -sn;
        m.c = sn;
        m.d = cs;
        m.tx = cx + cs * ox - sn * oy;
        m.ty = cy + sn * ox + cs * oy;
        return m;
    }
};

/// Parses "none", "translate:vx,vy" or "affine:vx,vy,omega,scale".
inline GlobalMotion parse_motion(std::string_view spec)
{
    GlobalMotion m;
    if (spec.empty() || spec == "none" || spec == "static")
        return m;
    const auto colon = spec.find(':');
    require(colon != std::string_view::npos, "motion: expected 'kind:params', got '" + std::string(spec) + "'");
    const std::string_view kind = spec.substr(0, colon);
    std::vector<double> params;
    std::string rest(spec.substr(colon + 1));
    std::size_t pos = 0;
    while (pos <= rest.size()) {
        const std::size_t next = std::min(rest.find(',', pos), rest.size());
        const std::string token = rest.substr(pos, next - pos);
        try {
            std::size_t used = 0;
            params.push_back(std::stod(token, &used));
            require(used == token.size(), "");
        } catch (const std::exception&) {
            throw Error("motion: bad number '" + token + "'");
        }
        pos = next + 1;
    }
    if (kind == "translate") {
        require(params.size() == 2, "motion: translate needs vx,vy");
        m.velocity_x = params[0];
        m.velocity_y = params[1];
    } else if (kind == "affine") {
        require(params.size() == 4, "motion: affine needs vx,vy,omega,scale");
        m.velocity_x = params[0];
        m.velocity_y = params[1];
        m.angular_rate = params[2];
        m.scale_rate = params[3];
    } else {
        throw Error("motion: unknown kind '" + std::string(kind) + "'");
    }
    return m;
}

namespace detail {

/// Bilinear lookup with clamp-to-edge addressing.
inline double sample_bilinear(const HdrImage& img, double x, double y, std::size_t ch)
{
    const double maxx = static_cast<double>(img.width() - 1);
    const double maxy = static_cast<double>(img.height() - 1);
    x = std::clamp(x, 0.0, maxx);
    y = std::clamp(y, 0.0, maxy);
    const auto x0 = static_cast<std::size_t>(std::floor(x));
    const auto y0 = static_cast<std::size_t>(std::floor(y));
    const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
    const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
    const double fx = x - static_cast<double>(x0);
    const double fy = y - static_cast<double>(y0);
    const double top = (1.0 - fx) * img.at(y0, x0, ch) + fx * img.at(y0, x1, ch);
    const double bottom = (1.0 - fx) * img.at(y1, x0, ch) + fx * img.at(y1, x1, ch);
    return (1.0 - fy) * top + fy * bottom;
}

} // namespace detail

/// U_k = warp(base, motion(k)) * T/K for k = 0..K-1.
inline IrradianceClip synthesize_clip(const HdrImage& base, const GlobalMotion& motion, const SensorConfig& cfg)
{
    require(cfg.micro_intervals >= 1, "synthesize_clip: micro_intervals must be at least 1");
    require(cfg.total_time > 0.0, "synthesize_clip: total_time must be positive");
    const std::size_t h = base.height();
    const std::size_t w = base.width();
    const std::size_t c = base.channels();
    const std::size_t k_total = cfg.micro_intervals;
    const double dt = cfg.total_time / static_cast<double>(k_total);

    std::vector<float> data(k_total * h * w * c);
    for (std::size_t k = 0; k < k_total; ++k) {
        float* out = data.data() + k * h * w * c;
        const Affine2 map = motion.sampling_map(k, h, w);
        if (map.is_identity()) {
            for (std::size_t i = 0; i < h * w * c; ++i)
                out[i] = static_cast<float>(static_cast<double>(base.values()[i]) * dt);
            continue;
        }
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const auto src = map.apply(static_cast<double>(x), static_cast<double>(y));
                for (std::size_t ch = 0; ch < c; ++ch) {
                    const double v = detail::sample_bilinear(base, src[0], src[1], ch);
                    out[(y * w + x) * c + ch] = static_cast<float>(std::max(0.0, v) * dt);
                }
            }
        }
    }
    return IrradianceClip(h, w, c, k_total, cfg.total_time, std::move(data));
}

/// Spike stream plus the number of true firings per pixel and channel (interleaved).
struct FiringTrace
{
    SpikeStream stream;
    std::vector<std::uint64_t> firings;
};

/// Integrate-and-fire front end with synchronous binary readout, keeping the true firing counts.
inline FiringTrace integrate_and_fire_traced(const IrradianceClip& clip, const SensorConfig& cfg)
{
    require_valid(cfg);
    require(clip.micro_intervals() == cfg.micro_intervals,
            "integrate_and_fire: clip length differs from micro_intervals");
    const std::size_t readouts = cfg.readout_frames();
    require(clip.micro_intervals() % readouts == 0, "integrate_and_fire: K is not divisible by R = f*T");
    const std::size_t per_readout = clip.micro_intervals() / readouts;

    const std::size_t h = clip.height();
    const std::size_t w = clip.width();
    const std::size_t c = clip.channels();
    const std::size_t n = h * w * c;
    const std::size_t pbytes = plane_bytes(h, w);
    const double eta = cfg.threshold;
    const double q = cfg.conversion_gain;

    std::vector<double> acc(n, 0.0);
    std::vector<std::uint64_t> firings(n, 0);
    std::vector<std::uint8_t> fired(n);
    std::vector<std::uint8_t> packed(readouts * c * pbytes, 0);
    std::mt19937_64 rng(cfg.rng_seed);

    for (std::size_t r = 0; r < readouts; ++r) {
        std::fill(fired.begin(), fired.end(), 0);
        for (std::size_t sub = 0; sub < per_readout; ++sub) {
            const float* u = clip.interval(r * per_readout + sub);
            for (std::size_t i = 0; i < n; ++i) {
                double inc = q * static_cast<double>(u[i]);
                if (cfg.shot_noise && inc > 0.0)
                    inc = static_cast<double>(std::poisson_distribution<std::uint64_t>(inc)(rng));
                double a = acc[i] + inc;
                if (a >= eta) {
                    fired[i] = 1;
                    if (cfg.reset == ResetMode::subtract) {
                        const double k = std::floor(a / eta);
                        firings[i] += static_cast<std::uint64_t>(k);
                        a -= k * eta;
                        // guard against a / eta rounding down across an exact multiple
                        while (a >= eta) {
                            a -= eta;
                            ++firings[i];
                        }
                    } else {
                        ++firings[i];
                        a = 0.0;
                    }
                }
                acc[i] = a;
            }
        }
        std::uint8_t* frame = packed.data() + r * c * pbytes;
        for (std::size_t p = 0; p < h * w; ++p) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                if (fired[p * c + ch])
                    frame[ch * pbytes + p / 8] |= static_cast<std::uint8_t>(1u << (p % 8));
            }
        }
    }

    return {SpikeStream(h, w, c, readouts, cfg.readout_rate, std::move(packed)), std::move(firings)};
}

inline SpikeStream integrate_and_fire(const IrradianceClip& clip, const SensorConfig& cfg)
{
    return integrate_and_fire_traced(clip, cfg).stream;
}

/// Positions of the R, G and B filters inside a 2x2 macro-pixel, as (row, col).
struct MosaicLayout
{
    std::array<std::array<std::size_t, 2>, 3> position{{{0, 0}, {0, 1}, {1, 0}}};
};

inline Status validate(const MosaicLayout& layout)
{
    for (std::size_t a = 0; a < 3; ++a) {
        if (layout.position[a][0] > 1 || layout.position[a][1] > 1)
            return Status::failure("mosaic: filter position outside the 2x2 block");
        for (std::size_t b = a + 1; b < 3; ++b)
            if (layout.position[a] == layout.position[b])
                return Status::failure("mosaic: two filters share a position");
    }
    return Status::success();
}

/// Non-Bayer macro-pixel sampling: each 2x2 block yields one co-located RGB sample.
/// A 3-channel input contributes channel c at filter c's position; a 1-channel input
/// is taken as already filtered.
inline IrradianceClip mosaic_sample(const IrradianceClip& full, const MosaicLayout& layout = {})
{
    require_valid(layout);
    require(full.height() % 2 == 0 && full.width() % 2 == 0, "mosaic_sample: height and width must be even");
    require(full.channels() == 1 || full.channels() == 3, "mosaic_sample: input must have 1 or 3 channels");
    const std::size_t oh = full.height() / 2;
    const std::size_t ow = full.width() / 2;
    const std::size_t in_c = full.channels();
    std::vector<float> data(full.micro_intervals() * oh * ow * 3);
    for (std::size_t k = 0; k < full.micro_intervals(); ++k) {
        float* out = data.data() + k * oh * ow * 3;
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
                for (std::size_t ch = 0; ch < 3; ++ch) {
                    const std::size_t row = 2 * i + layout.position[ch][0];
                    const std::size_t col = 2 * j + layout.position[ch][1];
                    out[(i * ow + j) * 3 + ch] = full.at(k, row, col, in_c == 3 ? ch : 0);
                }
            }
        }
    }
    return IrradianceClip(oh, ow, 3, full.micro_intervals(), full.total_time(), std::move(data));
}

} // namespace modspike

#endif // MODSPIKE_SPIKE_SIM_HPP
