#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nvmx/core/constants.hpp>
#include <nvmx/core/frames.hpp>
#include <nvmx/holo/field.hpp>

namespace nvmx {

namespace detail {

inline void put_f32le(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32le(out, bits);
}

inline float get_f32le(const unsigned char* p) {
    std::uint32_t bits = get_u32le(p);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

} // namespace detail

// Phase mask container: magic "PHAS", width/height/1 as little-endian u32
// (same header shape as the frame format), then phases as little-endian
// float32 in radians. Wavelength and pitch are not stored; they belong to
// the experiment config, not the mask.
inline void write_phas(const std::string& path, const PhasePattern& p) {
    p.validate();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_phas: cannot open " + path);
    std::string buf = "PHAS";
    detail::put_u32le(buf, static_cast<std::uint32_t>(p.width));
    detail::put_u32le(buf, static_cast<std::uint32_t>(p.height));
    detail::put_u32le(buf, 1);
    for (double v : p.phase) detail::put_f32le(buf, static_cast<float>(v));
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw std::runtime_error("write_phas: short write to " + path);
}

inline PhasePattern read_phas(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_phas: cannot open " + path);
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
    if (raw.size() < 16) throw std::runtime_error("read_phas: " + path + " is truncated");
    if (std::memcmp(raw.data(), "PHAS", 4) != 0)
        throw std::runtime_error("read_phas: " + path + " has bad magic");
    PhasePattern p;
    p.width = detail::get_u32le(raw.data() + 4);
    p.height = detail::get_u32le(raw.data() + 8);
    std::size_t n = p.width * p.height;
    if (raw.size() != 16 + 4 * n)
        throw std::runtime_error("read_phas: " + path + " payload does not match header");
    p.phase.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        // float32 storage can round right up to the period; fold it back
        p.phase[i] = wrap_phase(static_cast<double>(detail::get_f32le(raw.data() + 16 + 4 * i)));
    }
    return p;
}

namespace detail {

inline std::uint32_t crc32_png(const unsigned char* data, std::size_t n, std::uint32_t crc = 0) {
    static const auto table = [] {
        std::vector<std::uint32_t> t(256);
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    crc ^= 0xffffffffu;
    for (std::size_t i = 0; i < n; ++i) crc = table[(crc ^ data[i]) & 0xffu] ^ (crc >> 8);
    return crc ^ 0xffffffffu;
}

inline std::uint32_t adler32(const unsigned char* data, std::size_t n) {
    std::uint32_t a = 1, b = 0;
    for (std::size_t i = 0; i < n; ++i) {
        a = (a + data[i]) % 65521u;
        b = (b + a) % 65521u;
    }
    return (b << 16) | a;
}

inline void put_u32be(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
}

inline void png_chunk(std::string& out, const char type[5], const std::string& payload) {
    put_u32be(out, static_cast<std::uint32_t>(payload.size()));
    std::string body = type + payload;
    out += body;
    put_u32be(out, crc32_png(reinterpret_cast<const unsigned char*>(body.data()), body.size()));
}

} // namespace detail

// 8-bit grayscale PNG of a phase mask, mapping [0, 2pi) onto 0..255. This is
// a lossy export intended for driving 8-bit SLMs and for quick visual checks;
// round-trip through it loses the low phase bits. The deflate stream uses
// stored (uncompressed) blocks, which every PNG reader accepts.
inline void write_phase_png(const std::string& path, const PhasePattern& p) {
    p.validate();

    // one filter byte (0 = none) in front of every row
    std::string raw;
    raw.reserve((p.width + 1) * p.height);
    for (std::size_t y = 0; y < p.height; ++y) {
        raw.push_back('\0');
        for (std::size_t x = 0; x < p.width; ++x) {
            double q = p.at(x, y) / kTwoPi * 256.0;
            auto level = static_cast<unsigned>(q) & 0xffu;
            raw.push_back(static_cast<char>(level));
        }
    }

    std::string zlib;
    zlib.push_back('\x78');
    zlib.push_back('\x01');
    std::size_t off = 0;
    while (off < raw.size()) {
        std::size_t len = std::min<std::size_t>(65535, raw.size() - off);
        bool final = off + len == raw.size();
        zlib.push_back(final ? '\x01' : '\x00');
        zlib.push_back(static_cast<char>(len & 0xff));
        zlib.push_back(static_cast<char>((len >> 8) & 0xff));
        zlib.push_back(static_cast<char>(~len & 0xff));
        zlib.push_back(static_cast<char>((~len >> 8) & 0xff));
        zlib.append(raw, off, len);
        off += len;
    }
    detail::put_u32be(zlib, detail::adler32(reinterpret_cast<const unsigned char*>(raw.data()),
                                            raw.size()));

    std::string ihdr;
    detail::put_u32be(ihdr, static_cast<std::uint32_t>(p.width));
    detail::put_u32be(ihdr, static_cast<std::uint32_t>(p.height));
    ihdr.push_back('\x08');  // bit depth
    ihdr.push_back('\0');    // color type: grayscale
    ihdr.push_back('\0');    // compression
    ihdr.push_back('\0');    // filter
    ihdr.push_back('\0');    // interlace

    std::string png("\x89PNG\r\n\x1a\n", 8);
    detail::png_chunk(png, "IHDR", ihdr);
    detail::png_chunk(png, "IDAT", zlib);
    detail::png_chunk(png, "IEND", "");

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_phase_png: cannot open " + path);
    f.write(png.data(), static_cast<std::streamsize>(png.size()));
    if (!f) throw std::runtime_error("write_phase_png: short write to " + path);
}

} // namespace nvmx
