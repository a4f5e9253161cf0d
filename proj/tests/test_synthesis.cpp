// Synthesis tests. The PRF block and sample vectors below were computed
// with an independent HMAC implementation (Python hashlib/hmac) from the
// construction documented in synthesis.hpp and frozen here.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "slice/descriptor.hpp"
#include "slice/latent.hpp"
#include "slice/partition.hpp"
#include "slice/secret_key.hpp"
#include "slice/synthesis.hpp"

using namespace slice;

namespace {

SecretKey counting_key() {
    std::array<std::uint8_t, 32> bytes;
    for (std::size_t i = 0; i < 32; ++i) bytes[i] = static_cast<std::uint8_t>(i);
    return SecretKey(bytes);
}

std::string digest_hex(const SemanticDigest& d) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (std::uint8_t b : d.bytes) {
        out.push_back(hex[b >> 4]);
        out.push_back(hex[b & 0xf]);
    }
    return out;
}

double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2_v<double>); }

DescriptorSet demo_descriptors() {
    return DescriptorSet("Young boy.", "Grassy field, daytime, park setting.",
                         "Running, sprinting forward.", "Red t-shirt, motion blur on legs.");
}

}  // namespace

TEST_CASE("normalize_descriptor trims and collapses whitespace") {
    CHECK(normalize_descriptor("  Young  boy ") == "Young boy");
    CHECK(normalize_descriptor("Young boy") == "Young boy");
    CHECK(normalize_descriptor("\tYoung\n\nboy\r ") == "Young boy");
    CHECK(normalize_descriptor("草地上奔跑") == "草地上奔跑");
    CHECK_THROWS_AS(normalize_descriptor("   "), Error);
    CHECK_THROWS_AS(normalize_descriptor(""), Error);
}

TEST_CASE("normalize_descriptor composes to NFC") {
    // "Cafe" + combining acute accent (U+0301) composes to U+00E9.
    CHECK(normalize_descriptor("Cafe\xCC\x81") == "Caf\xC3\xA9");
    // Already-composed input is untouched.
    CHECK(normalize_descriptor("Caf\xC3\xA9") == "Caf\xC3\xA9");
}

TEST_CASE("normalize_descriptor does not case fold") {
    CHECK(normalize_descriptor("Young Boy") == "Young Boy");
}

TEST_CASE("digest_descriptor is deterministic and collision-separated") {
    auto a = digest_descriptor("Young boy");
    CHECK(a == digest_descriptor("Young boy"));
    CHECK(digest_hex(a) == "8b6da5bccf8e5d0ed2613cb75624a7af99cda663292a0a446eab1c795bc0c9de");
    CHECK_FALSE(a == digest_descriptor("Young boys"));
    CHECK_THROWS_AS(digest_descriptor(""), std::invalid_argument);

    // Four demonstration descriptors digest pairwise distinct.
    auto set = demo_descriptors();
    std::vector<std::string> hexes;
    for (FactorKey k : kAllFactors)
        hexes.push_back(digest_hex(digest_descriptor(set.text(k))));
    std::sort(hexes.begin(), hexes.end());
    CHECK(std::adjacent_find(hexes.begin(), hexes.end()) == hexes.end());
}

TEST_CASE("gaussian prf reproduces frozen reference vectors") {
    GaussianPrf prf(counting_key());
    auto digest = digest_descriptor("Young boy");

    CHECK(prf.block(digest, {0, 0}, 0, 0) == 0xa6184209c344aaeaull);
    CHECK(prf.block(digest, {0, 0}, 0, 1) == 0xa3c6ff9f71b79e5bull);
    CHECK(prf.block(digest, {0, 0}, 1, 0) == 0x5087a9b2538a5582ull);
    CHECK(prf.block(digest, {3, 7}, 2, 0) == 0x4076552e4dbfa97cull);
    CHECK(prf.block(digest, {63, 63}, 3, 0) == 0xadfff572e6ea2a30ull);

    CHECK_THAT(prf.sample(digest, {0, 0}, 0),
               Catch::Matchers::WithinAbs(-0.5940217037981305, 1e-12));
    CHECK_THAT(prf.sample(digest, {0, 0}, 1),
               Catch::Matchers::WithinAbs(-0.5409331745991041, 1e-12));
    CHECK_THAT(prf.sample(digest, {3, 7}, 2),
               Catch::Matchers::WithinAbs(-1.4647568938720112, 1e-12));
    CHECK_THAT(prf.sample(digest, {63, 63}, 3),
               Catch::Matchers::WithinAbs(-0.6183506688238584, 1e-12));

    // Identical inputs twice are bit-identical.
    CHECK(prf.sample(digest, {5, 9}, 1) == prf.sample(digest, {5, 9}, 1));
    CHECK(sample_gaussian_prf(digest, {5, 9}, 1, counting_key()) ==
          prf.sample(digest, {5, 9}, 1));
}

TEST_CASE("block-to-uniform mapping lands in (0,1]") {
    CHECK(GaussianPrf::to_unit(0) == 0x1p-53);
    CHECK(GaussianPrf::to_unit(~0ull) == 1.0);
}

TEST_CASE("prf samples have standard-normal moments") {
    GaussianPrf prf(counting_key());
    auto digest = digest_descriptor("moment probe");
    double sum = 0.0, sum_sq = 0.0;
    const std::size_t n = 100000;  // 100 x 100 positions x 10 channels
    for (std::uint32_t i = 0; i < 100; ++i)
        for (std::uint32_t j = 0; j < 100; ++j)
            for (std::uint32_t c = 0; c < 10; ++c) {
                double v = prf.sample(digest, {i, j}, c);
                sum += v;
                sum_sq += v * v;
            }
    double mean = sum / n;
    double variance = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) <= 0.015);
    CHECK(variance >= 0.97);
    CHECK(variance <= 1.03);
}

TEST_CASE("independent keys give uncorrelated streams") {
    GaussianPrf prf_a(SecretKey::from_seed(1));
    GaussianPrf prf_b(SecretKey::from_seed(2));
    auto digest = digest_descriptor("Young boy");
    const std::uint32_t side = 64;
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    const double n = side * side;
    for (std::uint32_t i = 0; i < side; ++i)
        for (std::uint32_t j = 0; j < side; ++j) {
            double a = prf_a.sample(digest, {i, j}, 0);
            double b = prf_b.sample(digest, {i, j}, 0);
            sa += a;
            sb += b;
            saa += a * a;
            sbb += b * b;
            sab += a * b;
        }
    double cov = sab / n - (sa / n) * (sb / n);
    double var_a = saa / n - (sa / n) * (sa / n);
    double var_b = sbb / n - (sb / n) * (sb / n);
    double r = cov / std::sqrt(var_a * var_b);
    CHECK(std::abs(r) <= 0.05);
}

TEST_CASE("flipping one key bit changes nearly every sample") {
    auto base = counting_key();
    auto flipped_bytes = std::array<std::uint8_t, 32>{};
    std::copy(base.bytes().begin(), base.bytes().end(), flipped_bytes.begin());
    flipped_bytes[17] ^= 0x10;
    GaussianPrf prf_a(base);
    GaussianPrf prf_b{SecretKey(flipped_bytes)};
    auto digest = digest_descriptor("Young boy");
    std::size_t changed = 0, total = 0;
    for (std::uint32_t i = 0; i < 100; ++i)
        for (std::uint32_t j = 0; j < 100; ++j) {
            ++total;
            if (prf_a.sample(digest, {i, j}, 0) != prf_b.sample(digest, {i, j}, 0)) ++changed;
        }
    CHECK(static_cast<double>(changed) / total >= 0.999);
}

TEST_CASE("synthesize_latent is deterministic at byte level") {
    auto layout = build_layout(16, 16, LayoutSpec::quadrant());
    auto set = demo_descriptors();
    auto key = SecretKey::from_seed(7);
    auto a = synthesize_latent(set, layout, 4, key);
    auto b = synthesize_latent(set, layout, 4, key);
    CHECK(encode_slce(a) == encode_slce(b));
}

TEST_CASE("changing one descriptor only rewrites its own region") {
    auto layout = build_layout(16, 16, LayoutSpec::quadrant());
    auto key = SecretKey::from_seed(11);
    auto set = demo_descriptors();
    auto tampered = set.with(FactorKey::Action, "Standing still.");
    auto a = synthesize_latent(set, layout, 4, key);
    auto b = synthesize_latent(tampered, layout, 4, key);
    std::size_t inside_diffs = 0;
    for (std::uint32_t i = 0; i < 16; ++i)
        for (std::uint32_t j = 0; j < 16; ++j)
            for (std::uint32_t c = 0; c < 4; ++c) {
                if (layout.factor_at(i, j) == FactorKey::Action) {
                    if (a.at(i, j, c) != b.at(i, j, c)) ++inside_diffs;
                } else {
                    REQUIRE(a.at(i, j, c) == b.at(i, j, c));
                }
            }
    CHECK(inside_diffs > 0);
}

TEST_CASE("synthesized values pass per-region variance and KS checks") {
    auto layout = build_layout(64, 64, LayoutSpec::quadrant());
    auto key = SecretKey::from_seed(21);
    auto grid = synthesize_latent(demo_descriptors(), layout, 4, key);

    // Per-region variance over 4096 values per region.
    for (FactorKey k : kAllFactors) {
        double sum = 0, sum_sq = 0;
        std::size_t n = 0;
        for (Position p : region_positions(layout, k))
            for (std::uint32_t c = 0; c < 4; ++c) {
                double v = grid.at(p, c);
                sum += v;
                sum_sq += v * v;
                ++n;
            }
        double mean = sum / double(n);
        double variance = sum_sq / double(n) - mean * mean;
        INFO(factor_name(k));
        CHECK(variance >= 0.95);
        CHECK(variance <= 1.05);
    }

    // Kolmogorov-Smirnov distance to the standard normal CDF over all
    // 16384 values; 0.016 is the alpha ~ 0.001 critical value.
    std::vector<double> values(grid.values().begin(), grid.values().end());
    std::sort(values.begin(), values.end());
    double n = static_cast<double>(values.size());
    double ks = 0.0;
    for (std::size_t idx = 0; idx < values.size(); ++idx) {
        double cdf = phi(values[idx]);
        ks = std::max(ks, std::abs(cdf - double(idx) / n));
        ks = std::max(ks, std::abs(double(idx + 1) / n - cdf));
    }
    CHECK(ks <= 0.016);
}
