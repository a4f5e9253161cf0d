// Keyed deterministic synthesis of Gaussian latents from semantic
// descriptors.
//
// Each latent value is a pure function of (descriptor digest, position,
// channel, secret key): a keyed MAC over the domain-separated tuple
//
//   "SLICE.v1" || digest || i:u32le || j:u32le || c:u32le || t:u8
//
// yields one 64-bit block per t in {0,1}; each block maps to a uniform
// in (0,1] via u = ((block >> 11) + 1) * 2^-53, and the pair feeds the
// Box-Muller transform. Values are standard normal, bit-deterministic
// within a build, and reproducible across platforms to ~1e-12 (libm
// rounding of log/cos may differ).

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>

#include "slice/descriptor.hpp"
#include "slice/detail/sha256.hpp"
#include "slice/error.hpp"
#include "slice/factor.hpp"
#include "slice/latent.hpp"
#include "slice/partition.hpp"
#include "slice/secret_key.hpp"

namespace slice {

inline constexpr std::string_view kSynthesisDomainTag = "SLICE.v1";

// 256-bit stable identifier of a normalized descriptor. Stands in for a
// text-encoder embedding: the synthesis path only needs a deterministic
// identifier, not geometry. A real encoder can replace this behind the
// same 32-byte surface.
struct SemanticDigest {
    std::array<std::uint8_t, 32> bytes{};

    bool operator==(const SemanticDigest&) const = default;
};

// SHA-256 of the normalized descriptor text. Caller normalizes first.
inline SemanticDigest digest_descriptor(std::string_view normalized_text) {
    if (normalized_text.empty())
        throw std::invalid_argument("digest_descriptor: empty descriptor");
    SemanticDigest d;
    d.bytes = detail::Sha256::hash(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(normalized_text.data()), normalized_text.size()));
    return d;
}

inline FactorMap<SemanticDigest> digest_descriptors(const DescriptorSet& descriptors) {
    FactorMap<SemanticDigest> out;
    for (FactorKey k : kAllFactors)
        out[k] = digest_descriptor(descriptors.text(k));
    return out;
}

// Keyed PRF sampler. Construction precomputes the MAC key schedule, so
// per-value sampling costs two compressions per block and no allocation.
class GaussianPrf {
public:
    explicit GaussianPrf(const SecretKey& key) : mac_(key.bytes()) {}

    // One 64-bit PRF block for the (digest, position, channel, t) tuple.
    std::uint64_t block(const SemanticDigest& digest, Position p, std::uint32_t channel,
                        std::uint8_t t) const {
        std::array<std::uint8_t, 53> msg;
        std::size_t off = 0;
        for (char ch : kSynthesisDomainTag) msg[off++] = static_cast<std::uint8_t>(ch);
        for (std::uint8_t b : digest.bytes) msg[off++] = b;
        put_u32le(msg.data() + off, p.i);
        off += 4;
        put_u32le(msg.data() + off, p.j);
        off += 4;
        put_u32le(msg.data() + off, channel);
        off += 4;
        msg[off++] = t;
        auto tag = mac_.mac(msg);
        std::uint64_t out = 0;
        for (int b = 7; b >= 0; --b) out = (out << 8) | tag[static_cast<std::size_t>(b)];
        return out;
    }

    // Standard-normal variate for one (position, channel) cell.
    double sample(const SemanticDigest& digest, Position p, std::uint32_t channel) const {
        double u0 = to_unit(block(digest, p, channel, 0));
        double u1 = to_unit(block(digest, p, channel, 1));
        return std::sqrt(-2.0 * std::log(u0)) *
               std::cos(2.0 * std::numbers::pi_v<double> * u1);
    }

    // Maps a 64-bit block to (0,1]; the +1 keeps log() off zero.
    static double to_unit(std::uint64_t block) {
        return static_cast<double>((block >> 11) + 1) * 0x1p-53;
    }

private:
    static void put_u32le(std::uint8_t* out, std::uint32_t v) {
        out[0] = static_cast<std::uint8_t>(v);
        out[1] = static_cast<std::uint8_t>(v >> 8);
        out[2] = static_cast<std::uint8_t>(v >> 16);
        out[3] = static_cast<std::uint8_t>(v >> 24);
    }

    detail::HmacSha256 mac_;
};

inline double sample_gaussian_prf(const SemanticDigest& digest, Position p, std::uint32_t channel,
                                  const SecretKey& key) {
    return GaussianPrf(key).sample(digest, p, channel);
}

// Full watermarked latent: every cell inside region k depends only on
// descriptor k, the cell's position/channel, and the key. The same rule
// reconstructs the reference latent from re-extracted descriptors at
// detection time.
inline LatentGrid synthesize_latent(const DescriptorSet& descriptors,
                                    const PartitionLayout& layout, std::uint32_t depth,
                                    const SecretKey& key) {
    if (depth < 1)
        throw std::invalid_argument("synthesize_latent: depth must be >= 1");
    FactorMap<SemanticDigest> digests = digest_descriptors(descriptors);
    GaussianPrf prf(key);
    LatentGrid grid(layout.h, layout.w, depth);
    for (std::uint32_t i = 0; i < layout.h; ++i) {
        for (std::uint32_t j = 0; j < layout.w; ++j) {
            const SemanticDigest& digest = digests[layout.factor_at(i, j)];
            for (std::uint32_t c = 0; c < depth; ++c)
                grid.at(i, j, c) = prf.sample(digest, {i, j}, c);
        }
    }
    return grid;
}

}  // namespace slice
