#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nvmx {

// Stack of 16-bit camera frames, frame-major, row-major within a frame.
struct FrameStack {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t n_frames = 0;
    std::vector<std::uint16_t> data;

    FrameStack() = default;
    FrameStack(std::uint32_t w, std::uint32_t h, std::uint32_t n)
        : width(w), height(h), n_frames(n),
          data(static_cast<std::size_t>(w) * h * n, 0) {}

    std::size_t frame_size() const { return static_cast<std::size_t>(width) * height; }

    std::uint16_t& at(std::uint32_t f, std::uint32_t y, std::uint32_t x) {
        return data[frame_size() * f + static_cast<std::size_t>(y) * width + x];
    }
    std::uint16_t at(std::uint32_t f, std::uint32_t y, std::uint32_t x) const {
        return data[frame_size() * f + static_cast<std::size_t>(y) * width + x];
    }
    const std::uint16_t* frame(std::uint32_t f) const { return data.data() + frame_size() * f; }
    std::uint16_t* frame(std::uint32_t f) { return data.data() + frame_size() * f; }
};

namespace detail {

inline void put_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

} // namespace detail

// Frame container format: magic "NVFR", then width/height/n_frames as
// little-endian u32, then the pixel payload as little-endian u16.
inline void write_nvfr(const std::string& path, const FrameStack& s) {
    if (s.data.size() != s.frame_size() * s.n_frames)
        throw std::runtime_error("write_nvfr: data size does not match header dimensions");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_nvfr: cannot open " + path);
    std::string header = "NVFR";
    detail::put_u32le(header, s.width);
    detail::put_u32le(header, s.height);
    detail::put_u32le(header, s.n_frames);
    f.write(header.data(), static_cast<std::streamsize>(header.size()));
    std::string buf;
    buf.reserve(s.data.size() * 2);
    for (std::uint16_t v : s.data) {
        buf.push_back(static_cast<char>(v & 0xff));
        buf.push_back(static_cast<char>((v >> 8) & 0xff));
    }
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw std::runtime_error("write_nvfr: short write to " + path);
}

inline FrameStack read_nvfr(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_nvfr: cannot open " + path);
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
    if (raw.size() < 16) throw std::runtime_error("read_nvfr: " + path + " is truncated");
    if (std::memcmp(raw.data(), "NVFR", 4) != 0)
        throw std::runtime_error("read_nvfr: " + path + " has bad magic");
    FrameStack s;
    s.width = detail::get_u32le(raw.data() + 4);
    s.height = detail::get_u32le(raw.data() + 8);
    s.n_frames = detail::get_u32le(raw.data() + 12);
    std::size_t n_px = s.frame_size() * s.n_frames;
    if (raw.size() != 16 + 2 * n_px)
        throw std::runtime_error("read_nvfr: " + path + " payload does not match header dimensions");
    s.data.resize(n_px);
    for (std::size_t i = 0; i < n_px; ++i)
        s.data[i] = static_cast<std::uint16_t>(raw[16 + 2 * i] |
                                               (static_cast<unsigned>(raw[17 + 2 * i]) << 8));
    return s;
}

} // namespace nvmx
