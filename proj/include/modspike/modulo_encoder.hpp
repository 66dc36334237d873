#ifndef MODSPIKE_MODULO_ENCODER_HPP
#define MODSPIKE_MODULO_ENCODER_HPP

#include <modspike/core_types.hpp>
#include <modspike/spike_sim.hpp>

#include <bit>
#include <cmath>
#include <span>

namespace modspike {

/// Sliding-window modulo frames. Frame j (0-based) covers source frames [j*stride, j*stride + window).
struct ModuloSequence
{
    std::vector<ModuloFrame> frames;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::size_t window = 25;
    std::size_t stride = 20;
    double gain = 15.0;
    unsigned bit_depth = 8;
    std::uint32_t source_rate = 20000;  // Hz

    double effective_rate() const { return static_cast<double>(source_rate) / static_cast<double>(stride); }

    friend bool operator==(const ModuloSequence&, const ModuloSequence&) = default;
};

/// Number of complete windows over `length` source frames; partial trailing windows are dropped.
inline std::size_t window_count(std::size_t length, std::size_t window, std::size_t stride)
{
    if (length < window || stride == 0)
        return 0;
    return (length - window) / stride + 1;
}

/// mod(floor(gain * value), 2^bits) for a nonnegative value.
inline std::uint16_t wrap_scaled(double gain, double value, unsigned bits)
{
    const double scaled = std::floor(gain * value);
    const auto digital = static_cast<std::uint64_t>(std::max(0.0, scaled));
    return static_cast<std::uint16_t>(digital & (std::uint64_t{modulus_for(bits)} - 1));
}

/// Pre-wrap digital values floor(h_gain * sum_{k in window i} U_k), one image per query window.
inline std::vector<HdrImage> ideal_counts(const IrradianceClip& clip, const QuerySpec& spec)
{
    if (Status s = validate(spec, clip.micro_intervals()); !s)
        throw Error("query_ideal: " + s.message);
    const std::size_t count = window_count(clip.micro_intervals(), spec.window_length, spec.stride);
    const std::size_t n = clip.frame_size();
    std::vector<HdrImage> out;
    out.reserve(count);
    std::vector<double> sum(n);
    std::vector<float> values(n);
    for (std::size_t i = 0; i < count; ++i) {
        std::fill(sum.begin(), sum.end(), 0.0);
        const std::size_t begin = i * spec.stride;
        for (std::size_t k = begin; k < begin + spec.window_length; ++k) {
            const float* u = clip.interval(k);
            for (std::size_t p = 0; p < n; ++p)
                sum[p] += static_cast<double>(u[p]);
        }
        for (std::size_t p = 0; p < n; ++p)
            values[p] = static_cast<float>(std::floor(spec.h_gain * sum[p]));
        out.emplace_back(clip.height(), clip.width(), clip.channels(), values);
    }
    return out;
}

/// Exposure-decoupled query: window L and stride V over the micro-interval integrals.
inline ModuloSequence query_ideal(const IrradianceClip& clip, const QuerySpec& spec, unsigned bits)
{
    require(valid_bit_depth(bits), "query_ideal: bit_depth must be in 1..16");
    ModuloSequence seq;
    seq.height = clip.height();
    seq.width = clip.width();
    seq.channels = clip.channels();
    seq.window = spec.window_length;
    seq.stride = spec.stride;
    seq.gain = spec.h_gain;
    seq.bit_depth = bits;
    seq.source_rate = static_cast<std::uint32_t>(
        std::llround(static_cast<double>(clip.micro_intervals()) / clip.total_time()));
    for (const HdrImage& counts : ideal_counts(clip, spec)) {
        std::vector<std::uint16_t> wrapped(counts.values().size());
        for (std::size_t p = 0; p < wrapped.size(); ++p)
            wrapped[p] = wrap_scaled(1.0, counts.values()[p], bits);
        seq.frames.emplace_back(counts.height(), counts.width(), counts.channels(), bits, std::move(wrapped));
    }
    return seq;
}

/// Exposure-coupled capture: back-to-back windows of L intervals, i.e. stride = window.
inline ModuloSequence query_exposure_coupled(const IrradianceClip& clip, std::size_t window_length,
                                             double h_gain, unsigned bits)
{
    return query_ideal(clip, QuerySpec{window_length, window_length, h_gain}, bits);
}

/// Ideal query covering the same time spans as the spike-domain encoder: each readout interval
/// spans K/R micro-intervals, and h_gain = g * q / eta inverts the amplifier relation g = eta * h / q.
inline QuerySpec aligned_query(const EncoderConfig& cfg, const SensorConfig& sensor)
{
    require_valid(cfg);
    require_valid(sensor);
    const std::size_t per_readout = sensor.micro_intervals / sensor.readout_frames();
    return {cfg.window * per_readout, cfg.stride * per_readout,
            cfg.gain * sensor.conversion_gain / sensor.threshold};
}

/// A contiguous run of spike frames, in SpikeStream packing, starting at `first_frame`.
struct SpikeChunk
{
    std::size_t first_frame = 0;
    std::size_t frame_count = 0;
    std::vector<std::uint8_t> packed;
};

/// Cuts a stream into chunks at the given ascending frame offsets.
inline std::vector<SpikeChunk> split_stream(const SpikeStream& stream, std::span<const std::size_t> cuts)
{
    std::vector<SpikeChunk> chunks;
    std::size_t begin = 0;
    auto emit = [&](std::size_t end) {
        SpikeChunk chunk;
        chunk.first_frame = begin;
        chunk.frame_count = end - begin;
        const auto* first = stream.packed().data() + begin * stream.frame_bytes();
        chunk.packed.assign(first, first + chunk.frame_count * stream.frame_bytes());
        chunks.push_back(std::move(chunk));
        begin = end;
    };
    for (std::size_t cut : cuts) {
        require(cut >= begin && cut <= stream.frame_count(), "split_stream: cuts must be ascending and in range");
        emit(cut);
    }
    emit(stream.frame_count());
    return chunks;
}

/// Sliding-window spike counter. Keeps the last W bit planes in a ring and a running count
/// per pixel and channel; each incoming frame adds its bits and retires the frame W behind it.
class StreamingEncoder
{
public:
    StreamingEncoder(std::size_t height, std::size_t width, std::size_t channels, EncoderConfig cfg)
        : height_(height), width_(width), channels_(channels), cfg_(cfg),
          plane_(plane_bytes(height, width)), counts_(height * width * channels, 0),
          ring_(cfg.window * plane_bytes(height, width) * channels, 0)
    {
        require_valid(cfg_);
        require(channels_ >= 1, "StreamingEncoder: channels must be positive");
    }

    const EncoderConfig& config() const noexcept { return cfg_; }
    std::size_t frames_seen() const noexcept { return next_; }

    /// Consumes one chunk and returns every frame whose window closed inside it.
    std::vector<ModuloFrame> push(const SpikeChunk& chunk)
    {
        require(chunk.first_frame == next_, "StreamingEncoder: out-of-order chunk (expected frame " +
                                                std::to_string(next_) + ", got " +
                                                std::to_string(chunk.first_frame) + ")");
        require(chunk.packed.size() == chunk.frame_count * frame_bytes(),
                "StreamingEncoder: chunk payload does not match its frame count");
        std::vector<ModuloFrame> out;
        for (std::size_t f = 0; f < chunk.frame_count; ++f) {
            if (push_frame(chunk.packed.data() + f * frame_bytes()))
                out.push_back(snapshot());
        }
        return out;
    }

private:
    std::size_t frame_bytes() const { return plane_ * channels_; }

    bool push_frame(const std::uint8_t* frame)
    {
        std::uint8_t* slot = ring_.data() + (next_ % cfg_.window) * frame_bytes();
        // slot holds frame next_-W (zeros while the ring fills)
        for (std::size_t ch = 0; ch < channels_; ++ch) {
            const std::uint8_t* enter = frame + ch * plane_;
            const std::uint8_t* leave = slot + ch * plane_;
            for (std::size_t byte = 0; byte < plane_; ++byte) {
                unsigned diff = static_cast<unsigned>(enter[byte] ^ leave[byte]);
                while (diff != 0) {
                    const int bit = std::countr_zero(diff);
                    diff &= diff - 1;
                    const std::size_t p = byte * 8 + static_cast<std::size_t>(bit);
                    if (p >= height_ * width_)
                        break;
                    std::uint32_t& count = counts_[p * channels_ + ch];
                    if ((enter[byte] >> bit) & 1u)
                        ++count;
                    else
                        --count;
                }
            }
        }
        std::copy(frame, frame + frame_bytes(), slot);
        ++next_;
        return next_ >= cfg_.window && (next_ - cfg_.window) % cfg_.stride == 0;
    }

    ModuloFrame snapshot() const
    {
        std::vector<std::uint16_t> values(counts_.size());
        for (std::size_t i = 0; i < counts_.size(); ++i)
            values[i] = wrap_scaled(cfg_.gain, static_cast<double>(counts_[i]), cfg_.bit_depth);
        return ModuloFrame(height_, width_, channels_, cfg_.bit_depth, std::move(values));
    }

    std::size_t height_;
    std::size_t width_;
    std::size_t channels_;
    EncoderConfig cfg_;
    std::size_t plane_;
    std::size_t next_ = 0;
    std::vector<std::uint32_t> counts_;
    std::vector<std::uint8_t> ring_;
};

inline ModuloSequence make_sequence_header(std::size_t height, std::size_t width, std::size_t channels,
                                           const EncoderConfig& cfg, std::uint32_t source_rate)
{
    ModuloSequence seq;
    seq.height = height;
    seq.width = width;
    seq.channels = channels;
    seq.window = cfg.window;
    seq.stride = cfg.stride;
    seq.gain = cfg.gain;
    seq.bit_depth = cfg.bit_depth;
    seq.source_rate = source_rate;
    return seq;
}

/// Chunk-at-a-time encoding; the concatenated frames equal encode_stream on the whole stream.
inline ModuloSequence encode_streaming_chunked(std::span<const SpikeChunk> chunks, std::size_t height,
                                               std::size_t width, std::size_t channels,
                                               std::uint32_t source_rate, const EncoderConfig& cfg)
{
    StreamingEncoder encoder(height, width, channels, cfg);
    ModuloSequence seq = make_sequence_header(height, width, channels, cfg, source_rate);
    for (const SpikeChunk& chunk : chunks) {
        auto frames = encoder.push(chunk);
        std::move(frames.begin(), frames.end(), std::back_inserter(seq.frames));
    }
    return seq;
}

/// Sliding-window spike counting with gain and N-bit wrap over a whole stream.
inline ModuloSequence encode_stream(const SpikeStream& stream, const EncoderConfig& cfg)
{
    require_valid(cfg);
    require(stream.frame_count() >= cfg.window, "encode: stream has " + std::to_string(stream.frame_count()) +
                                                    " frames, shorter than window " +
                                                    std::to_string(cfg.window));
    const auto chunks = split_stream(stream, {});
    return encode_streaming_chunked(chunks, stream.height(), stream.width(), stream.channels(),
                                    stream.readout_rate(), cfg);
}

} // namespace modspike

#endif // MODSPIKE_MODULO_ENCODER_HPP
