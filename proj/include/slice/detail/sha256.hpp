// Self-contained SHA-256 and HMAC-SHA-256 (FIPS 180-4 / RFC 2104).
//
// The watermark synthesis path evaluates one keyed MAC per latent value
// block, so HmacSha256 precomputes the inner/outer key midstates once
// per key; each MAC afterwards costs two compression calls and no
// allocation. Verified against the FIPS 180-4 and RFC 4231 vectors in
// the unit tests.

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>

namespace slice::detail {

class Sha256 {
public:
    using Digest = std::array<std::uint8_t, 32>;

    struct State {
        std::array<std::uint32_t, 8> h;
    };

    static constexpr State initial_state() {
        return {{{0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au, 0x510e527fu, 0x9b05688cu,
                  0x1f83d9abu, 0x5be0cd19u}}};
    }

    Sha256() : state_(initial_state()) {}

    // Resume from a midstate that already absorbed `bytes_done` bytes
    // (must be a multiple of 64).
    Sha256(const State& state, std::uint64_t bytes_done) : state_(state), total_(bytes_done) {}

    void update(const void* data, std::size_t len) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        total_ += len;
        if (buf_len_ > 0) {
            std::size_t take = std::min<std::size_t>(64 - buf_len_, len);
            std::memcpy(buf_.data() + buf_len_, p, take);
            buf_len_ += take;
            p += take;
            len -= take;
            if (buf_len_ == 64) {
                compress(state_, buf_.data());
                buf_len_ = 0;
            }
        }
        while (len >= 64) {
            compress(state_, p);
            p += 64;
            len -= 64;
        }
        if (len > 0) {
            std::memcpy(buf_.data(), p, len);
            buf_len_ = len;
        }
    }

    Digest finish() {
        std::uint64_t bit_len = total_ * 8;  // captured before padding
        std::uint8_t pad = 0x80;
        update(&pad, 1);
        static constexpr std::array<std::uint8_t, 64> zeros{};
        std::size_t fill = (buf_len_ <= 56) ? 56 - buf_len_ : 64 - buf_len_ + 56;
        update(zeros.data(), fill);
        std::array<std::uint8_t, 8> len_be;
        for (int i = 0; i < 8; ++i)
            len_be[i] = static_cast<std::uint8_t>(bit_len >> (56 - 8 * i));
        update(len_be.data(), 8);
        Digest out;
        for (int i = 0; i < 8; ++i) {
            out[4 * i + 0] = static_cast<std::uint8_t>(state_.h[i] >> 24);
            out[4 * i + 1] = static_cast<std::uint8_t>(state_.h[i] >> 16);
            out[4 * i + 2] = static_cast<std::uint8_t>(state_.h[i] >> 8);
            out[4 * i + 3] = static_cast<std::uint8_t>(state_.h[i]);
        }
        return out;
    }

    static Digest hash(std::span<const std::uint8_t> data) {
        Sha256 h;
        h.update(data.data(), data.size());
        return h.finish();
    }

    static void compress(State& s, const std::uint8_t block[64]) {
        static constexpr std::uint32_t K[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
            0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
            0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
            0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
            0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
            0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
            0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
            0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
            0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
            0xc67178f2};

        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i) {
            w[i] = (std::uint32_t(block[4 * i]) << 24) | (std::uint32_t(block[4 * i + 1]) << 16) |
                   (std::uint32_t(block[4 * i + 2]) << 8) | std::uint32_t(block[4 * i + 3]);
        }
        for (int i = 16; i < 64; ++i) {
            std::uint32_t s0 = std::rotr(w[i - 15], 7) ^ std::rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            std::uint32_t s1 = std::rotr(w[i - 2], 17) ^ std::rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }

        std::uint32_t a = s.h[0], b = s.h[1], c = s.h[2], d = s.h[3];
        std::uint32_t e = s.h[4], f = s.h[5], g = s.h[6], hh = s.h[7];
        for (int i = 0; i < 64; ++i) {
            std::uint32_t S1 = std::rotr(e, 6) ^ std::rotr(e, 11) ^ std::rotr(e, 25);
            std::uint32_t ch = (e & f) ^ (~e & g);
            std::uint32_t t1 = hh + S1 + ch + K[i] + w[i];
            std::uint32_t S0 = std::rotr(a, 2) ^ std::rotr(a, 13) ^ std::rotr(a, 22);
            std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            std::uint32_t t2 = S0 + maj;
            hh = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        s.h[0] += a;
        s.h[1] += b;
        s.h[2] += c;
        s.h[3] += d;
        s.h[4] += e;
        s.h[5] += f;
        s.h[6] += g;
        s.h[7] += hh;
    }

private:
    State state_;
    std::uint64_t total_ = 0;
    std::array<std::uint8_t, 64> buf_{};
    std::size_t buf_len_ = 0;
};

class HmacSha256 {
public:
    explicit HmacSha256(std::span<const std::uint8_t> key) {
        std::array<std::uint8_t, 64> key_block{};
        if (key.size() > 64) {
            auto hashed = Sha256::hash(key);
            std::memcpy(key_block.data(), hashed.data(), hashed.size());
        } else {
            std::memcpy(key_block.data(), key.data(), key.size());
        }
        std::array<std::uint8_t, 64> pad;
        for (int i = 0; i < 64; ++i) pad[i] = key_block[i] ^ 0x36;
        inner_ = Sha256::initial_state();
        Sha256::compress(inner_, pad.data());
        for (int i = 0; i < 64; ++i) pad[i] = key_block[i] ^ 0x5c;
        outer_ = Sha256::initial_state();
        Sha256::compress(outer_, pad.data());
    }

    Sha256::Digest mac(std::span<const std::uint8_t> message) const {
        Sha256 inner(inner_, 64);
        inner.update(message.data(), message.size());
        auto inner_digest = inner.finish();
        Sha256 outer(outer_, 64);
        outer.update(inner_digest.data(), inner_digest.size());
        return outer.finish();
    }

private:
    Sha256::State inner_;
    Sha256::State outer_;
};

}  // namespace slice::detail
