// End-to-end embed/verify orchestration over pluggable backends.
//
// The production seams are interfaces: a diffusion backend (generate an
// image from a latent, invert an image back to a latent) and a semantic
// extractor (descriptors from an image). The stub backend shipped here
// carries the latent itself as the image payload and models inversion
// error as additive Gaussian noise, which exercises every pipeline seam
// with no ML dependencies; real adapters drop in behind the same
// interfaces.
//
// Bundle directory layout: payload.slce, meta.txt (prompt), and
// optionally descriptors.json (the embed-time sidecar).

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "slice/descriptor.hpp"
#include "slice/detection.hpp"
#include "slice/error.hpp"
#include "slice/latent.hpp"
#include "slice/partition.hpp"
#include "slice/rng.hpp"
#include "slice/secret_key.hpp"
#include "slice/synthesis.hpp"

namespace slice {

struct ImageBundle {
    std::vector<std::uint8_t> payload;       // stands in for image bytes
    std::string prompt;                      // generation conditioning text
    std::optional<DescriptorSet> sidecar;    // embed-time descriptors
};

class DiffusionBackend {
public:
    virtual ~DiffusionBackend() = default;
    virtual ImageBundle generate(const LatentGrid& latent, std::string_view prompt) = 0;
    virtual LatentGrid invert(const ImageBundle& bundle) = 0;
};

class SemanticExtractor {
public:
    virtual ~SemanticExtractor() = default;
    virtual DescriptorSet extract(const ImageBundle& bundle) = 0;
};

// Identity stand-in for the generative model: the payload is the .slce
// serialization of the latent.
inline ImageBundle stub_generate(const LatentGrid& latent, std::string_view prompt) {
    ImageBundle bundle;
    bundle.payload = encode_slce(latent);
    bundle.prompt = std::string(prompt);
    return bundle;
}

// Recovers the payload latent plus additive Gaussian noise of scale
// noise_sigma per value, drawn from the given stream.
inline LatentGrid stub_invert(const ImageBundle& bundle, double noise_sigma, StreamRng& rng) {
    if (noise_sigma < 0.0)
        throw std::invalid_argument("stub_invert: noise_sigma must be >= 0");
    LatentGrid grid = decode_slce(bundle.payload);
    if (noise_sigma > 0.0)
        for (double& v : grid.values()) v += noise_sigma * rng.normal();
    return grid;
}

class StubDiffusionBackend : public DiffusionBackend {
public:
    explicit StubDiffusionBackend(double noise_sigma = 0.0, std::uint64_t noise_seed = 0)
        : noise_sigma_(noise_sigma), noise_seed_(noise_seed) {}

    ImageBundle generate(const LatentGrid& latent, std::string_view prompt) override {
        return stub_generate(latent, prompt);
    }

    LatentGrid invert(const ImageBundle& bundle) override {
        StreamRng rng(noise_seed_, 0);
        return stub_invert(bundle, noise_sigma_, rng);
    }

private:
    double noise_sigma_;
    std::uint64_t noise_seed_;
};

// Reads descriptors from the bundle sidecar. Stands in for a VLM-based
// extractor; because it returns the embed-time descriptors verbatim, it
// models perfect re-extraction.
class SidecarExtractor : public SemanticExtractor {
public:
    DescriptorSet extract(const ImageBundle& bundle) override {
        if (!bundle.sidecar)
            throw Error("bundle has no descriptor sidecar to extract from");
        return *bundle.sidecar;
    }
};

struct EmbedResult {
    ImageBundle bundle;
    LatentGrid latent;  // the synthesized z_T, before any backend effects
};

inline EmbedResult embed_pipeline(const DescriptorSet& descriptors, std::string_view prompt,
                                  const PartitionLayout& layout, std::uint32_t depth,
                                  const SecretKey& key, DiffusionBackend& backend) {
    EmbedResult result{.bundle = {}, .latent = synthesize_latent(descriptors, layout, depth, key)};
    result.bundle = backend.generate(result.latent, prompt);
    result.bundle.sidecar = descriptors;
    return result;
}

// Full detection flow: invert the suspect image, re-extract descriptors,
// and run partition-wise verification. The embed-time sidecar is never
// consulted directly; descriptors always come from the extractor.
inline VerificationReport verify_pipeline(const ImageBundle& bundle,
                                          const PartitionLayout& layout, std::uint32_t depth,
                                          const SecretKey& key, const ThresholdSet& thresholds,
                                          const FactorMap<double>& local_ratio_thresholds,
                                          DiffusionBackend& backend,
                                          SemanticExtractor& extractor) {
    LatentGrid z_inv = backend.invert(bundle);
    if (z_inv.height() != layout.h || z_inv.width() != layout.w || z_inv.depth() != depth)
        throw Error("inverted latent dims disagree with the configured layout/depth");
    DescriptorSet suspect = extractor.extract(bundle);
    return verify(z_inv, suspect, layout, key, thresholds, local_ratio_thresholds);
}

inline void save_bundle(const std::filesystem::path& dir, const ImageBundle& bundle) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "payload.slce", std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot open for writing: " + (dir / "payload.slce").string());
        out.write(reinterpret_cast<const char*>(bundle.payload.data()),
                  static_cast<std::streamsize>(bundle.payload.size()));
        if (!out)
            throw Error("write failed: " + (dir / "payload.slce").string());
    }
    {
        std::ofstream out(dir / "meta.txt", std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot open for writing: " + (dir / "meta.txt").string());
        out << bundle.prompt << "\n";
    }
    if (bundle.sidecar)
        bundle.sidecar->save(dir / "descriptors.json");
}

inline ImageBundle load_bundle(const std::filesystem::path& dir) {
    ImageBundle bundle;
    bundle.payload = read_file_bytes(dir / "payload.slce");
    {
        std::ifstream in(dir / "meta.txt");
        if (!in)
            throw Error("cannot open: " + (dir / "meta.txt").string());
        std::getline(in, bundle.prompt);
    }
    if (std::filesystem::exists(dir / "descriptors.json"))
        bundle.sidecar = DescriptorSet::load(dir / "descriptors.json");
    return bundle;
}

}  // namespace slice
