// The 256-bit watermarking key shared between embedding and verification.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>

#include "slice/error.hpp"

#ifdef __unix__
#include <sys/stat.h>
#endif

namespace slice {

class SecretKey {
public:
    static constexpr std::size_t kSize = 32;

    SecretKey() = default;
    explicit SecretKey(const std::array<std::uint8_t, kSize>& bytes) : bytes_(bytes) {}

    // Fresh key from the system entropy source.
    static SecretKey generate() {
        std::random_device rd;
        std::array<std::uint8_t, kSize> bytes;
        for (std::size_t i = 0; i < kSize; i += 4) {
            std::uint32_t word = rd();
            bytes[i + 0] = static_cast<std::uint8_t>(word);
            bytes[i + 1] = static_cast<std::uint8_t>(word >> 8);
            bytes[i + 2] = static_cast<std::uint8_t>(word >> 16);
            bytes[i + 3] = static_cast<std::uint8_t>(word >> 24);
        }
        return SecretKey(bytes);
    }

    // Deterministic key expansion from a 64-bit seed. Testing hook, not
    // for production keys.
    static SecretKey from_seed(std::uint64_t seed) {
        std::array<std::uint8_t, kSize> bytes;
        std::uint64_t state = seed;
        for (std::size_t i = 0; i < kSize; i += 8) {
            state += 0x9e3779b97f4a7c15ull;  // splitmix64
            std::uint64_t z = state;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            z ^= z >> 31;
            for (int b = 0; b < 8; ++b)
                bytes[i + b] = static_cast<std::uint8_t>(z >> (8 * b));
        }
        return SecretKey(bytes);
    }

    std::span<const std::uint8_t, kSize> bytes() const { return bytes_; }

    bool operator==(const SecretKey&) const = default;

    void save(const std::filesystem::path& path) const {
        {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out)
                throw Error("cannot open key file for writing: " + path.string());
            out.write(reinterpret_cast<const char*>(bytes_.data()), kSize);
            if (!out)
                throw Error("key write failed: " + path.string());
        }
#ifdef __unix__
        ::chmod(path.c_str(), S_IRUSR | S_IWUSR);  // 0600
#endif
    }

    static SecretKey load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw Error("cannot open key file: " + path.string());
        std::array<std::uint8_t, kSize> bytes;
        in.read(reinterpret_cast<char*>(bytes.data()), kSize);
        if (in.gcount() != static_cast<std::streamsize>(kSize))
            throw Error("key file too short (need exactly 32 bytes): " + path.string());
        char extra;
        if (in.read(&extra, 1); in.gcount() != 0)
            throw Error("key file too long (need exactly 32 bytes): " + path.string());
        return SecretKey(bytes);
    }

private:
    std::array<std::uint8_t, kSize> bytes_{};
};

}  // namespace slice
