#ifndef MODSPIKE_IO_HPP
#define MODSPIKE_IO_HPP

// Binary containers. All integers little-endian. Common header:
//   magic[4] | version u16 (=1) | height u32 | width u32 | channels u32
// LHDR: dtype u8 (0 = f32, 1 = u16) | row-major channel-interleaved samples
// SPKB: frame_count u32 | readout_rate_hz u32 | per frame, per channel, a bit plane of
//       ceil(h*w/8) bytes (row-major, LSB-first)
// MODQ: N u8 | W u16 | P u16 | gain f32 | source_rate u32 | frame_count u32 |
//       interleaved samples, u8 when N <= 8 else u16

#include <modspike/core_types.hpp>
#include <modspike/modulo_encoder.hpp>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string_view>

namespace modspike {

enum class SampleType : std::uint8_t { f32 = 0, u16 = 1 };

inline constexpr std::uint16_t kFormatVersion = 1;

namespace detail {

class ByteWriter
{
public:
    void bytes(const void* p, std::size_t n)
    {
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    void magic(std::string_view m) { bytes(m.data(), 4); }
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v)
    {
        buf_.push_back(static_cast<std::uint8_t>(v));
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v)
    {
        for (int s = 0; s < 32; s += 8)
            buf_.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

    const std::vector<std::uint8_t>& buffer() const noexcept { return buf_; }

private:
    std::vector<std::uint8_t> buf_;
};

class ByteReader
{
public:
    explicit ByteReader(std::vector<std::uint8_t> data) : data_(std::move(data)) {}

    std::size_t remaining() const noexcept { return data_.size() - pos_; }

    const std::uint8_t* take(std::size_t n, const char* what)
    {
        if (remaining() < n)
            throw Error(std::string("truncated ") + what);
        const std::uint8_t* p = data_.data() + pos_;
        pos_ += n;
        return p;
    }
    std::uint8_t u8(const char* what = "header") { return *take(1, what); }
    std::uint16_t u16(const char* what = "header")
    {
        const auto* p = take(2, what);
        return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    }
    std::uint32_t u32(const char* what = "header")
    {
        const auto* p = take(4, what);
        return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
               (std::uint32_t{p[3]} << 24);
    }
    float f32(const char* what = "header") { return std::bit_cast<float>(u32(what)); }

private:
    std::vector<std::uint8_t> data_;
    std::size_t pos_ = 0;
};

struct CommonHeader
{
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::uint32_t channels = 0;
};

inline std::uint32_t checked_u32(std::size_t v, const char* field)
{
    require(v <= 0xFFFFFFFFu, std::string(field) + " does not fit in u32");
    return static_cast<std::uint32_t>(v);
}

inline void write_common(ByteWriter& w, std::string_view magic, std::size_t h, std::size_t wd, std::size_t c)
{
    w.magic(magic);
    w.u16(kFormatVersion);
    w.u32(checked_u32(h, "height"));
    w.u32(checked_u32(wd, "width"));
    w.u32(checked_u32(c, "channels"));
}

inline CommonHeader read_common(ByteReader& r, std::string_view expected_magic)
{
    const std::uint8_t* m = r.take(4, "header");
    if (std::memcmp(m, expected_magic.data(), 4) != 0)
        throw Error("bad magic: expected " + std::string(expected_magic) + ", found '" +
                    std::string(reinterpret_cast<const char*>(m), 4) + "'");
    const std::uint16_t version = r.u16();
    if (version != kFormatVersion)
        throw Error("unsupported version " + std::to_string(version));
    CommonHeader h;
    h.height = r.u32();
    h.width = r.u32();
    h.channels = r.u32();
    return h;
}

inline void expect_end(const ByteReader& r)
{
    if (r.remaining() != 0)
        throw Error("payload longer than the header declares (" + std::to_string(r.remaining()) +
                    " trailing bytes)");
}

inline std::vector<std::uint8_t> slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void dump(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error("write failed: " + path.string());
}

} // namespace detail

// ---- LHDR ----

/// u16 storage requires every sample to be an integer in [0, 65535].
inline std::vector<std::uint8_t> encode_hdr(const HdrImage& img, SampleType type = SampleType::f32)
{
    detail::ByteWriter w;
    detail::write_common(w, "LHDR", img.height(), img.width(), img.channels());
    w.u8(static_cast<std::uint8_t>(type));
    if (type == SampleType::f32) {
        for (float v : img.values())
            w.f32(v);
    } else {
        for (float v : img.values()) {
            require(v <= 65535.0f && v == std::floor(v), "write_hdr: sample not representable as u16");
            w.u16(static_cast<std::uint16_t>(v));
        }
    }
    return w.buffer();
}

inline HdrImage decode_hdr(std::vector<std::uint8_t> bytes)
{
    detail::ByteReader r(std::move(bytes));
    const auto h = detail::read_common(r, "LHDR");
    const std::uint8_t tag = r.u8();
    if (tag > 1)
        throw Error("unknown dtype tag " + std::to_string(tag));
    const std::size_t n = std::size_t{h.height} * h.width * h.channels;
    std::vector<float> values(n);
    for (std::size_t i = 0; i < n; ++i)
        values[i] = tag == 0 ? r.f32("payload") : static_cast<float>(r.u16("payload"));
    detail::expect_end(r);
    return HdrImage(h.height, h.width, h.channels, std::move(values));
}

inline void write_hdr(const std::filesystem::path& path, const HdrImage& img, SampleType type = SampleType::f32)
{
    detail::dump(path, encode_hdr(img, type));
}

inline HdrImage read_hdr(const std::filesystem::path& path) { return decode_hdr(detail::slurp(path)); }

// ---- SPKB ----

inline std::vector<std::uint8_t> encode_spikes(const SpikeStream& s)
{
    detail::ByteWriter w;
    detail::write_common(w, "SPKB", s.height(), s.width(), s.channels());
    w.u32(detail::checked_u32(s.frame_count(), "frame_count"));
    w.u32(s.readout_rate());
    w.bytes(s.packed().data(), s.packed().size());
    return w.buffer();
}

inline SpikeStream decode_spikes(std::vector<std::uint8_t> bytes)
{
    detail::ByteReader r(std::move(bytes));
    const auto h = detail::read_common(r, "SPKB");
    const std::uint32_t frames = r.u32();
    const std::uint32_t rate = r.u32();
    const std::size_t expected = std::size_t{frames} * plane_bytes(h.height, h.width) * h.channels;
    if (r.remaining() != expected)
        throw Error("frame_count " + std::to_string(frames) + " does not match payload of " +
                    std::to_string(r.remaining()) + " bytes (expected " + std::to_string(expected) + ")");
    const std::uint8_t* p = r.take(expected, "payload");
    return SpikeStream(h.height, h.width, h.channels, frames, rate, std::vector<std::uint8_t>(p, p + expected));
}

inline void write_spikes(const std::filesystem::path& path, const SpikeStream& s)
{
    detail::dump(path, encode_spikes(s));
}

inline SpikeStream read_spikes(const std::filesystem::path& path) { return decode_spikes(detail::slurp(path)); }

// ---- MODQ ----

/// The gain is stored as f32; sequences whose gain is not f32-representable come back rounded.
inline std::vector<std::uint8_t> encode_modulo(const ModuloSequence& seq)
{
    const std::size_t height = seq.height;
    const std::size_t width = seq.width;
    const std::size_t channels = seq.channels;
    require(valid_bit_depth(seq.bit_depth), "write_modulo: bit_depth must be in 1..16");
    require(seq.window <= 0xFFFF && seq.stride <= 0xFFFF, "write_modulo: window/stride exceed u16");
    detail::ByteWriter w;
    detail::write_common(w, "MODQ", height, width, channels);
    w.u8(static_cast<std::uint8_t>(seq.bit_depth));
    w.u16(static_cast<std::uint16_t>(seq.window));
    w.u16(static_cast<std::uint16_t>(seq.stride));
    w.f32(static_cast<float>(seq.gain));
    w.u32(seq.source_rate);
    w.u32(detail::checked_u32(seq.frames.size(), "frame_count"));
    const bool narrow = seq.bit_depth <= 8;
    for (const ModuloFrame& f : seq.frames) {
        require(f.height() == height && f.width() == width && f.channels() == channels &&
                    f.bit_depth() == seq.bit_depth,
                "write_modulo: frame geometry differs from the sequence");
        for (std::uint16_t v : f.values()) {
            if (narrow)
                w.u8(static_cast<std::uint8_t>(v));
            else
                w.u16(v);
        }
    }
    return w.buffer();
}

inline ModuloSequence decode_modulo(std::vector<std::uint8_t> bytes)
{
    detail::ByteReader r(std::move(bytes));
    const auto h = detail::read_common(r, "MODQ");
    ModuloSequence seq;
    seq.height = h.height;
    seq.width = h.width;
    seq.channels = h.channels;
    seq.bit_depth = r.u8();
    require(valid_bit_depth(seq.bit_depth), "read_modulo: bit depth out of range");
    seq.window = r.u16();
    seq.stride = r.u16();
    seq.gain = r.f32();
    seq.source_rate = r.u32();
    const std::uint32_t frames = r.u32();
    const std::size_t n = std::size_t{h.height} * h.width * h.channels;
    const bool narrow = seq.bit_depth <= 8;
    const std::size_t expected = std::size_t{frames} * n * (narrow ? 1 : 2);
    if (r.remaining() != expected)
        throw Error("frame_count " + std::to_string(frames) + " does not match payload of " +
                    std::to_string(r.remaining()) + " bytes (expected " + std::to_string(expected) + ")");
    seq.frames.reserve(frames);
    for (std::uint32_t j = 0; j < frames; ++j) {
        std::vector<std::uint16_t> values(n);
        for (auto& v : values)
            v = narrow ? r.u8("payload") : r.u16("payload");
        seq.frames.emplace_back(h.height, h.width, h.channels, seq.bit_depth, std::move(values));
    }
    return seq;
}

inline void write_modulo(const std::filesystem::path& path, const ModuloSequence& seq)
{
    detail::dump(path, encode_modulo(seq));
}

inline ModuloSequence read_modulo(const std::filesystem::path& path) { return decode_modulo(detail::slurp(path)); }

} // namespace modspike

#endif // MODSPIKE_IO_HPP
