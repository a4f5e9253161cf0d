// Deterministic RNG substreams for simulation.
//
// Stream seeds derive from (master_seed, stream_id) through a fixed
// 64-bit mix, so per-trial streams are independent of execution order
// and thread count. Distribution helpers are implemented here rather
// than with <random> distributions because the standard leaves those
// implementation-defined; these produce identical sequences on every
// platform for a given stream.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace slice {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace detail

class StreamRng {
public:
    StreamRng(std::uint64_t master_seed, std::uint64_t stream_id) {
        std::uint64_t s = master_seed;
        std::uint64_t a = detail::splitmix64(s);
        s ^= stream_id * 0xd1342543de82ef95ull + 0x633d5c0e9a2b87f3ull;
        std::uint64_t b = detail::splitmix64(s);
        engine_.seed(a ^ (b << 1));
        engine_.discard(8);  // move past the low-entropy warmup of a raw seed
    }

    std::uint64_t next_u64() { return engine_(); }

    // [0, 1)
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }

    // (0, 1]
    double uniform_open01() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1p-53; }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    double normal() {
        double u0 = uniform_open01();
        double u1 = uniform_open01();
        return std::sqrt(-2.0 * std::log(u0)) * std::cos(2.0 * std::numbers::pi_v<double> * u1);
    }

    std::uint64_t below(std::uint64_t n) {
        // Lemire-style rejection-free enough for simulation use; the tiny
        // modulo bias at n << 2^64 is irrelevant here, but reject anyway
        // to keep draws exactly uniform.
        std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Uniform direction on the unit sphere in R^dim, written into out.
    void unit_vector(std::span<double> out) {
        for (;;) {
            double norm_sq = 0.0;
            for (double& v : out) {
                v = normal();
                norm_sq += v * v;
            }
            if (norm_sq > 0.0) {
                double inv = 1.0 / std::sqrt(norm_sq);
                for (double& v : out) v *= inv;
                return;
            }
        }
    }

    // First k entries of a uniformly random permutation of 0..n-1.
    std::vector<std::uint32_t> sample_indices(std::uint32_t n, std::uint32_t k) {
        std::vector<std::uint32_t> idx(n);
        for (std::uint32_t i = 0; i < n; ++i) idx[i] = i;
        std::uint32_t take = std::min(k, n);
        for (std::uint32_t i = 0; i < take; ++i) {
            std::uint32_t j = i + static_cast<std::uint32_t>(below(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(take);
        return idx;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace slice
