#ifndef MODSPIKE_CORE_TYPES_HPP
#define MODSPIKE_CORE_TYPES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace modspike {

/// Raised for every precondition or format violation in the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Outcome of a configuration check. Converts to true when valid.
struct Status
{
    bool ok = true;
    std::string message;

    static Status success() { return {}; }
    static Status failure(std::string msg) { return {false, std::move(msg)}; }

    explicit operator bool() const noexcept { return ok; }
};

inline void require(bool condition, const std::string& message)
{
    if (!condition)
        throw Error(message);
}

/// Single-channel row-major 2-D array.
template <typename T>
class Grid
{
public:
    using value_type = T;

    Grid() = default;
    Grid(std::size_t height, std::size_t width, T fill = T{})
        : height_(height), width_(width), data_(height * width, fill)
    {
    }
    Grid(std::size_t height, std::size_t width, std::vector<T> data)
        : height_(height), width_(width), data_(std::move(data))
    {
        require(data_.size() == height_ * width_, "Grid: data length does not match height*width");
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }
    const T& operator()(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::vector<T>& values() noexcept { return data_; }
    const std::vector<T>& values() const noexcept { return data_; }

    bool same_shape(const Grid& other) const noexcept
    {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<T> data_;
};

using Raster = Grid<double>;

/// Linear-radiance image, row-major and channel-interleaved (R,G,B order for colour).
class HdrImage
{
public:
    HdrImage() = default;
    HdrImage(std::size_t height, std::size_t width, std::size_t channels, std::vector<float> data)
        : height_(height), width_(width), channels_(channels), data_(std::move(data))
    {
        require(channels_ == 1 || channels_ == 3, "HdrImage: channels must be 1 or 3");
        require(data_.size() == height_ * width_ * channels_,
                "HdrImage: data length does not match height*width*channels");
        for (float v : data_) {
            require(std::isfinite(v), "HdrImage: samples must be finite");
            require(v >= 0.0f, "HdrImage: samples must be nonnegative");
        }
    }
    HdrImage(std::size_t height, std::size_t width, std::size_t channels, float fill = 0.0f)
        : HdrImage(height, width, channels, std::vector<float>(height * width * channels, fill))
    {
    }

    /// Builds an image from one raster per channel. Values are rounded to float.
    static HdrImage from_channels(const std::vector<Raster>& planes)
    {
        require(planes.size() == 1 || planes.size() == 3, "HdrImage: channels must be 1 or 3");
        const std::size_t h = planes.front().height();
        const std::size_t w = planes.front().width();
        const std::size_t c = planes.size();
        std::vector<float> data(h * w * c);
        for (std::size_t ch = 0; ch < c; ++ch) {
            require(planes[ch].height() == h && planes[ch].width() == w,
                    "HdrImage: channel rasters differ in shape");
            for (std::size_t p = 0; p < h * w; ++p)
                data[p * c + ch] = static_cast<float>(planes[ch][p]);
        }
        return HdrImage(h, w, c, std::move(data));
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept { return height_ * width_; }
    const std::vector<float>& values() const noexcept { return data_; }

    float at(std::size_t row, std::size_t col, std::size_t ch = 0) const
    {
        return data_[(row * width_ + col) * channels_ + ch];
    }

    Raster channel(std::size_t ch) const
    {
        require(ch < channels_, "HdrImage: channel index out of range");
        Raster out(height_, width_);
        for (std::size_t p = 0; p < pixel_count(); ++p)
            out[p] = data_[p * channels_ + ch];
        return out;
    }

    bool same_shape(const HdrImage& other) const noexcept
    {
        return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
    }

    friend bool operator==(const HdrImage&, const HdrImage&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 1;
    std::vector<float> data_;
};

inline constexpr unsigned kMaxBitDepth = 16;

inline bool valid_bit_depth(unsigned bits) noexcept { return bits >= 1 && bits <= kMaxBitDepth; }

inline std::uint32_t modulus_for(unsigned bits) { return std::uint32_t{1} << bits; }

/// N-bit wrapped observation. Samples are held as u16 for every N.
class ModuloFrame
{
public:
    ModuloFrame() = default;
    ModuloFrame(std::size_t height, std::size_t width, std::size_t channels, unsigned bit_depth,
                std::vector<std::uint16_t> data)
        : height_(height), width_(width), channels_(channels), bit_depth_(bit_depth), data_(std::move(data))
    {
        require(valid_bit_depth(bit_depth_), "ModuloFrame: bit_depth must be in 1..16");
        require(channels_ >= 1, "ModuloFrame: channels must be positive");
        require(data_.size() == height_ * width_ * channels_,
                "ModuloFrame: data length does not match height*width*channels");
        const std::uint32_t m = modulus_for(bit_depth_);
        for (auto v : data_)
            require(v < m, "ModuloFrame: sample out of range [0, 2^N)");
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept { return height_ * width_; }
    unsigned bit_depth() const noexcept { return bit_depth_; }
    std::uint32_t modulus() const { return modulus_for(bit_depth_); }
    const std::vector<std::uint16_t>& values() const noexcept { return data_; }

    std::uint16_t at(std::size_t row, std::size_t col, std::size_t ch = 0) const
    {
        return data_[(row * width_ + col) * channels_ + ch];
    }

    Raster channel(std::size_t ch) const
    {
        require(ch < channels_, "ModuloFrame: channel index out of range");
        Raster out(height_, width_);
        for (std::size_t p = 0; p < pixel_count(); ++p)
            out[p] = data_[p * channels_ + ch];
        return out;
    }

    friend bool operator==(const ModuloFrame&, const ModuloFrame&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 1;
    unsigned bit_depth_ = 8;
    std::vector<std::uint16_t> data_;
};

/// Bytes occupied by one bit-packed h*w plane.
inline std::size_t plane_bytes(std::size_t height, std::size_t width) { return (height * width + 7) / 8; }

/// Binary spike frames. Each frame stores one bit plane per channel, pixels row-major,
/// LSB-first within a byte, every plane padded to a whole byte.
class SpikeStream
{
public:
    SpikeStream() = default;
    SpikeStream(std::size_t height, std::size_t width, std::size_t channels, std::size_t frame_count,
                std::uint32_t readout_rate_hz, std::vector<std::uint8_t> packed)
        : height_(height), width_(width), channels_(channels), frame_count_(frame_count),
          readout_rate_(readout_rate_hz), packed_(std::move(packed))
    {
        require(frame_count_ >= 1, "SpikeStream: frame_count must be at least 1");
        require(readout_rate_ > 0, "SpikeStream: readout_rate must be positive");
        require(channels_ >= 1, "SpikeStream: channels must be positive");
        require(packed_.size() == frame_count_ * frame_bytes(),
                "SpikeStream: payload size does not match frame_count");
        const std::size_t tail = (height_ * width_) % 8;
        if (tail != 0) {
            const auto pad_mask = static_cast<std::uint8_t>(0xFFu << tail);
            for (std::size_t plane = 0; plane < frame_count_ * channels_; ++plane)
                require((packed_[(plane + 1) * plane_size() - 1] & pad_mask) == 0,
                        "SpikeStream: padding bits must be zero");
        }
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t frame_count() const noexcept { return frame_count_; }
    std::uint32_t readout_rate() const noexcept { return readout_rate_; }
    std::size_t plane_size() const { return plane_bytes(height_, width_); }
    std::size_t frame_bytes() const { return plane_size() * channels_; }
    const std::vector<std::uint8_t>& packed() const noexcept { return packed_; }

    const std::uint8_t* plane(std::size_t frame, std::size_t ch) const
    {
        return packed_.data() + (frame * channels_ + ch) * plane_size();
    }

    bool bit(std::size_t frame, std::size_t row, std::size_t col, std::size_t ch = 0) const
    {
        const std::size_t p = row * width_ + col;
        return (plane(frame, ch)[p / 8] >> (p % 8)) & 1u;
    }

    friend bool operator==(const SpikeStream&, const SpikeStream&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 1;
    std::size_t frame_count_ = 0;
    std::uint32_t readout_rate_ = 0;
    std::vector<std::uint8_t> packed_;
};

enum class ResetMode { subtract, zero };

/// Integrate-and-fire sensor parameters.
struct SensorConfig
{
    double threshold = 1.0;         // eta, radiance*time quanta per spike
    double conversion_gain = 1.0;   // q
    std::uint32_t readout_rate = 20000;  // f [Hz]
    double total_time = 0.01;       // T [s]
    std::size_t micro_intervals = 200;   // K
    bool shot_noise = false;
    std::uint64_t rng_seed = 0;
    ResetMode reset = ResetMode::subtract;

    /// Readout frame count R = f*T, or 0 when f*T is not an integer.
    std::size_t readout_frames() const
    {
        const double r = static_cast<double>(readout_rate) * total_time;
        const double rounded = std::round(r);
        if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * std::max(1.0, r))
            return 0;
        return static_cast<std::size_t>(rounded);
    }
};

/// Sliding-window spike-count encoder parameters. Defaults are the 20 kHz prototype setting.
struct EncoderConfig
{
    std::size_t window = 25;  // W
    std::size_t stride = 20;  // P
    double gain = 15.0;       // g
    unsigned bit_depth = 8;   // N
};

/// Ideal-domain query over micro-interval integrals.
struct QuerySpec
{
    std::size_t window_length = 25;  // L, micro-intervals
    std::size_t stride = 20;         // V, micro-intervals
    double h_gain = 1.0;             // radiometric-to-digital conversion gain
};

inline Status validate(const SensorConfig& cfg)
{
    if (!(cfg.threshold > 0.0) || !std::isfinite(cfg.threshold))
        return Status::failure("threshold: must be positive");
    if (!(cfg.conversion_gain > 0.0) || !std::isfinite(cfg.conversion_gain))
        return Status::failure("conversion_gain: must be positive");
    if (cfg.readout_rate == 0)
        return Status::failure("readout_rate: must be positive");
    if (!(cfg.total_time > 0.0) || !std::isfinite(cfg.total_time))
        return Status::failure("total_time: must be positive");
    const std::size_t r = cfg.readout_frames();
    if (r == 0)
        return Status::failure("total_time: readout_rate*total_time must be a positive integer");
    if (cfg.micro_intervals < r)
        return Status::failure("micro_intervals: must be at least readout_rate*total_time");
    if (cfg.micro_intervals % r != 0)
        return Status::failure("micro_intervals: must be divisible by readout_rate*total_time");
    return Status::success();
}

inline Status validate(const EncoderConfig& cfg)
{
    if (cfg.window < 1)
        return Status::failure("window: must be at least 1");
    if (cfg.stride < 1)
        return Status::failure("stride: must be at least 1");
    if (cfg.stride > cfg.window)
        return Status::failure("stride: stride exceeds window");
    if (!(cfg.gain > 0.0) || !std::isfinite(cfg.gain))
        return Status::failure("gain: must be positive");
    if (!valid_bit_depth(cfg.bit_depth))
        return Status::failure("bit_depth: must be in 1..16");
    return Status::success();
}

/// Checks a query against the clip length K it will run over.
inline Status validate(const QuerySpec& spec, std::size_t micro_intervals)
{
    if (spec.stride < 1)
        return Status::failure("stride: must be at least 1");
    if (spec.window_length < spec.stride)
        return Status::failure("stride: stride exceeds window_length");
    if (spec.window_length > micro_intervals) {
        std::ostringstream os;
        os << "window_length: " << spec.window_length << " exceeds micro_intervals " << micro_intervals;
        return Status::failure(os.str());
    }
    if (!(spec.h_gain > 0.0) || !std::isfinite(spec.h_gain))
        return Status::failure("h_gain: must be positive");
    return Status::success();
}

template <typename Config>
void require_valid(const Config& cfg)
{
    if (Status s = validate(cfg); !s)
        throw Error(s.message);
}

} // namespace modspike

#endif // MODSPIKE_CORE_TYPES_HPP
