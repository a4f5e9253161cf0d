// Latent grid positions, the h x w x d latent tensor, and the binary
// ".slce" file format.
//
// File layout (all integers little-endian):
//   bytes 0..3   magic "SLCE" (53 4C 43 45)
//   bytes 4..5   u16 format version, currently 1
//   bytes 6..17  u32 h, u32 w, u32 d
//   then h*w*d float32 values, row-major (i, then j, then channel)
//
// Grids hold binary64 in memory; the file stores binary32.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "slice/error.hpp"

namespace slice {

struct Position {
    std::uint32_t i = 0;  // row, < h
    std::uint32_t j = 0;  // col, < w

    constexpr bool operator==(const Position&) const = default;
};

class LatentGrid {
public:
    LatentGrid() = default;

    // Zero-filled grid. Dims must satisfy h >= 2, w >= 2, d >= 1.
    LatentGrid(std::uint32_t h, std::uint32_t w, std::uint32_t d)
        : h_(h), w_(w), d_(d), values_(check_dims(h, w, d), 0.0) {}

    std::uint32_t height() const { return h_; }
    std::uint32_t width() const { return w_; }
    std::uint32_t depth() const { return d_; }
    std::size_t value_count() const { return values_.size(); }
    std::size_t position_count() const { return std::size_t(h_) * w_; }

    std::size_t index(std::uint32_t i, std::uint32_t j, std::uint32_t c) const {
        return (std::size_t(i) * w_ + j) * d_ + c;
    }

    double at(std::uint32_t i, std::uint32_t j, std::uint32_t c) const {
        return values_[index(i, j, c)];
    }
    double& at(std::uint32_t i, std::uint32_t j, std::uint32_t c) {
        return values_[index(i, j, c)];
    }
    double at(Position p, std::uint32_t c) const { return at(p.i, p.j, c); }
    double& at(Position p, std::uint32_t c) { return at(p.i, p.j, c); }

    // d channel values at one position.
    std::span<const double> channels(Position p) const {
        return {values_.data() + index(p.i, p.j, 0), d_};
    }
    std::span<double> channels(Position p) {
        return {values_.data() + index(p.i, p.j, 0), d_};
    }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    bool same_dims(const LatentGrid& o) const {
        return h_ == o.h_ && w_ == o.w_ && d_ == o.d_;
    }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const LatentGrid&) const = default;

private:
    static std::size_t check_dims(std::uint32_t h, std::uint32_t w, std::uint32_t d) {
        if (h < 2 || w < 2 || d < 1)
            throw std::invalid_argument("latent grid dims too small (need h>=2, w>=2, d>=1)");
        // Guard against absurd headers before allocating.
        constexpr std::uint64_t kMaxValues = std::uint64_t(1) << 32;
        std::uint64_t n = std::uint64_t(h) * w * d;
        if (n > kMaxValues)
            throw std::invalid_argument("latent grid dims too large");
        return static_cast<std::size_t>(n);
    }

    std::uint32_t h_ = 0;
    std::uint32_t w_ = 0;
    std::uint32_t d_ = 0;
    std::vector<double> values_;
};

namespace detail {

inline void put_u16le(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8)
        out.push_back(static_cast<std::uint8_t>((v >> s) & 0xff));
}

inline std::uint16_t get_u16le(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (std::uint16_t(p[1]) << 8));
}

inline std::uint32_t get_u32le(const std::uint8_t* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
           (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

}  // namespace detail

inline constexpr std::array<std::uint8_t, 4> kSlceMagic = {0x53, 0x4C, 0x43, 0x45};
inline constexpr std::uint16_t kSlceVersion = 1;

// Serializes a grid to .slce bytes. Values are truncated to binary32.
inline std::vector<std::uint8_t> encode_slce(const LatentGrid& grid) {
    if (!grid.all_finite())
        throw Error("refusing to serialize non-finite latent values");
    std::vector<std::uint8_t> out;
    out.reserve(18 + grid.value_count() * 4);
    for (std::uint8_t b : kSlceMagic) out.push_back(b);
    detail::put_u16le(out, kSlceVersion);
    detail::put_u32le(out, grid.height());
    detail::put_u32le(out, grid.width());
    detail::put_u32le(out, grid.depth());
    for (double v : grid.values()) {
        auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        detail::put_u32le(out, bits);
    }
    return out;
}

inline LatentGrid decode_slce(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 18)
        throw Error("slce: truncated header");
    if (!std::equal(kSlceMagic.begin(), kSlceMagic.end(), bytes.begin()))
        throw Error("slce: bad magic");
    std::uint16_t version = detail::get_u16le(bytes.data() + 4);
    if (version != kSlceVersion)
        throw Error("slce: unsupported version " + std::to_string(version));
    std::uint32_t h = detail::get_u32le(bytes.data() + 6);
    std::uint32_t w = detail::get_u32le(bytes.data() + 10);
    std::uint32_t d = detail::get_u32le(bytes.data() + 14);
    LatentGrid grid = [&] {
        try {
            return LatentGrid(h, w, d);
        } catch (const std::invalid_argument& e) {
            throw Error(std::string("slce: ") + e.what());
        }
    }();
    std::size_t expected = 18 + grid.value_count() * 4;
    if (bytes.size() != expected)
        throw Error("slce: payload size mismatch (expected " + std::to_string(expected) +
                    " bytes, got " + std::to_string(bytes.size()) + ")");
    const std::uint8_t* p = bytes.data() + 18;
    for (double& v : grid.values()) {
        float f = std::bit_cast<float>(detail::get_u32le(p));
        if (!std::isfinite(f))
            throw Error("slce: non-finite value in payload");
        v = static_cast<double>(f);
        p += 4;
    }
    return grid;
}

inline void write_slce_file(const std::filesystem::path& path, const LatentGrid& grid) {
    auto bytes = encode_slce(grid);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error("write failed: " + path.string());
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

inline LatentGrid read_slce_file(const std::filesystem::path& path) {
    return decode_slce(read_file_bytes(path));
}

}  // namespace slice
