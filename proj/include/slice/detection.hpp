// Pointwise matching between an inverted latent and a reconstructed
// reference latent, region/global match ratios, and the three-state
// verdict:
//
//   State I    authentic and intact: global ratio and every local ratio
//              clear their thresholds
//   State II   localized semantic tampering: global passes, at least one
//              factor fails locally; the failed factors localize the edit
//   State III  unwatermarked or severely corrupted: global fails
//
// Matching uses one map for both granularities: position p matches when
// the channel-vector distance is at most the local distance threshold of
// the region containing p.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slice/descriptor.hpp"
#include "slice/factor.hpp"
#include "slice/json.hpp"
#include "slice/latent.hpp"
#include "slice/partition.hpp"
#include "slice/secret_key.hpp"
#include "slice/synthesis.hpp"

namespace slice {

struct ThresholdSet {
    double tau_global = 0.6;          // acceptance ratio in [0,1]
    FactorMap<double> tau_local{1.0};  // L2 distance threshold per factor, >= 0

    void validate() const {
        if (!(tau_global >= 0.0 && tau_global <= 1.0))
            throw std::invalid_argument("tau_global must lie in [0,1]");
        for (FactorKey k : kAllFactors)
            if (!(tau_local[k] >= 0.0) || !std::isfinite(tau_local[k]))
                throw std::invalid_argument("tau_local must be finite and >= 0");
    }
};

struct MatchMap {
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    std::vector<std::uint8_t> matched;  // row-major booleans

    bool at(std::uint32_t i, std::uint32_t j) const { return matched[std::size_t(i) * w + j] != 0; }
};

enum class VerificationState {
    AuthenticIntact = 1,           // State I
    LocalizedTampering = 2,        // State II
    UnwatermarkedOrCorrupted = 3,  // State III
};

constexpr std::string_view verification_state_name(VerificationState s) {
    switch (s) {
    case VerificationState::AuthenticIntact: return "I";
    case VerificationState::LocalizedTampering: return "II";
    case VerificationState::UnwatermarkedOrCorrupted: return "III";
    }
    return "?";
}

inline std::optional<VerificationState> parse_verification_state(std::string_view name) {
    if (name == "I") return VerificationState::AuthenticIntact;
    if (name == "II") return VerificationState::LocalizedTampering;
    if (name == "III") return VerificationState::UnwatermarkedOrCorrupted;
    return std::nullopt;
}

struct MatchRatios {
    double global = 0.0;
    FactorMap<double> local{0.0};
    FactorMap<std::uint32_t> counts{0};
    std::uint32_t total_matches = 0;
    std::uint32_t total_positions = 0;
};

struct VerificationReport {
    VerificationState state = VerificationState::UnwatermarkedOrCorrupted;
    double m_global = 0.0;
    FactorMap<double> m_local{0.0};
    std::vector<FactorKey> failed_factors;  // sorted by factor order; empty for State I
    ThresholdSet thresholds;
    FactorMap<double> local_ratio_thresholds{0.5};
    FactorMap<std::uint32_t> match_counts{0};
    FactorMap<std::uint32_t> region_sizes{0};
    std::uint32_t total_matches = 0;
    std::uint32_t total_positions = 0;
};

// L2 norm of the channel-vector difference at one position.
inline double pointwise_distance(const LatentGrid& a, const LatentGrid& b, Position p) {
    if (!a.same_dims(b))
        throw std::invalid_argument("pointwise_distance: grid dims differ");
    double sum = 0.0;
    auto va = a.channels(p);
    auto vb = b.channels(p);
    for (std::uint32_t c = 0; c < a.depth(); ++c) {
        double diff = va[c] - vb[c];
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

inline MatchMap match_map(const LatentGrid& z_inv, const LatentGrid& z_ref,
                          const PartitionLayout& layout, const ThresholdSet& th) {
    if (!z_inv.same_dims(z_ref))
        throw std::invalid_argument("match_map: grid dims differ");
    if (z_inv.height() != layout.h || z_inv.width() != layout.w)
        throw std::invalid_argument("match_map: layout dims differ from grids");
    th.validate();
    MatchMap map;
    map.h = layout.h;
    map.w = layout.w;
    map.matched.assign(layout.position_count(), 0);
    for (std::uint32_t i = 0; i < layout.h; ++i) {
        for (std::uint32_t j = 0; j < layout.w; ++j) {
            double dist = pointwise_distance(z_inv, z_ref, {i, j});
            double tau = th.tau_local[layout.factor_at(i, j)];
            map.matched[std::size_t(i) * layout.w + j] = (dist <= tau) ? 1 : 0;
        }
    }
    return map;
}

// Region and global match ratios from one map. The global ratio counts
// the same matches, so sum_k |region_k| * m_k == hw * m_g exactly on the
// underlying integers.
inline MatchRatios match_ratios(const MatchMap& map, const PartitionLayout& layout) {
    if (map.h != layout.h || map.w != layout.w)
        throw std::invalid_argument("match_ratios: map dims differ from layout");
    MatchRatios out;
    for (std::uint32_t i = 0; i < layout.h; ++i)
        for (std::uint32_t j = 0; j < layout.w; ++j)
            if (map.at(i, j)) out.counts[layout.factor_at(i, j)] += 1;
    out.total_positions = static_cast<std::uint32_t>(layout.position_count());
    for (FactorKey k : kAllFactors) {
        out.total_matches += out.counts[k];
        out.local[k] = layout.region_sizes[k] > 0
                           ? static_cast<double>(out.counts[k]) / layout.region_sizes[k]
                           : 0.0;
    }
    out.global = static_cast<double>(out.total_matches) / out.total_positions;
    return out;
}

inline VerificationReport classify(const MatchRatios& ratios, const PartitionLayout& layout,
                                   const ThresholdSet& th,
                                   const FactorMap<double>& local_ratio_thresholds) {
    th.validate();
    for (FactorKey k : kAllFactors)
        if (!(local_ratio_thresholds[k] >= 0.0 && local_ratio_thresholds[k] <= 1.0))
            throw std::invalid_argument("local ratio thresholds must lie in [0,1]");

    VerificationReport report;
    report.m_global = ratios.global;
    report.m_local = ratios.local;
    report.thresholds = th;
    report.local_ratio_thresholds = local_ratio_thresholds;
    report.match_counts = ratios.counts;
    report.region_sizes = layout.region_sizes;
    report.total_matches = ratios.total_matches;
    report.total_positions = ratios.total_positions;

    for (FactorKey k : kAllFactors)
        if (ratios.local[k] < local_ratio_thresholds[k]) report.failed_factors.push_back(k);

    if (ratios.global < th.tau_global) {
        report.state = VerificationState::UnwatermarkedOrCorrupted;
    } else if (!report.failed_factors.empty()) {
        report.state = VerificationState::LocalizedTampering;
    } else {
        report.state = VerificationState::AuthenticIntact;
    }
    return report;
}

// Full detection pass: reconstruct the reference latent from the suspect
// descriptors with the same synthesis rule, then match and classify.
inline VerificationReport verify(const LatentGrid& z_inv, const DescriptorSet& suspect_descriptors,
                                 const PartitionLayout& layout, const SecretKey& key,
                                 const ThresholdSet& th,
                                 const FactorMap<double>& local_ratio_thresholds) {
    LatentGrid reference = synthesize_latent(suspect_descriptors, layout, z_inv.depth(), key);
    MatchMap map = match_map(z_inv, reference, layout, th);
    return classify(match_ratios(map, layout), layout, th, local_ratio_thresholds);
}

namespace detail {

inline double round6(double v) { return std::round(v * 1e6) / 1e6; }

}  // namespace detail

// Report serialization: ratios rounded to 6 decimal places, counts as
// integers, failed factors in factor order.
inline Json report_to_json(const VerificationReport& r) {
    Json j = Json::object();
    j["state"] = std::string(verification_state_name(r.state));
    j["m_global"] = detail::round6(r.m_global);
    Json locals = Json::object();
    Json counts = Json::object();
    Json sizes = Json::object();
    Json tau_local = Json::object();
    Json ratio_th = Json::object();
    for (FactorKey k : kAllFactors) {
        std::string name(factor_name(k));
        locals[name] = detail::round6(r.m_local[k]);
        counts[name] = r.match_counts[k];
        sizes[name] = r.region_sizes[k];
        tau_local[name] = r.thresholds.tau_local[k];
        ratio_th[name] = r.local_ratio_thresholds[k];
    }
    j["m_local"] = locals;
    j["match_counts"] = counts;
    j["region_sizes"] = sizes;
    j["total_matches"] = r.total_matches;
    j["total_positions"] = r.total_positions;
    Json th = Json::object();
    th["tau_global"] = r.thresholds.tau_global;
    th["tau_local"] = tau_local;
    th["local_ratio"] = ratio_th;
    j["thresholds"] = th;
    Json failed = Json::array();
    for (FactorKey k : r.failed_factors) failed.push_back(std::string(factor_name(k)));
    j["failed_factors"] = failed;
    return j;
}

inline VerificationReport report_from_json(const Json& j) {
    VerificationReport r;
    auto state = parse_verification_state(j.at("state").get<std::string>());
    if (!state)
        throw Error("report: unknown state \"" + j.at("state").get<std::string>() + "\"");
    r.state = *state;
    r.m_global = j.at("m_global").get<double>();
    for (FactorKey k : kAllFactors) {
        std::string name(factor_name(k));
        r.m_local[k] = j.at("m_local").at(name).get<double>();
        r.match_counts[k] = j.at("match_counts").at(name).get<std::uint32_t>();
        r.region_sizes[k] = j.at("region_sizes").at(name).get<std::uint32_t>();
        r.thresholds.tau_local[k] = j.at("thresholds").at("tau_local").at(name).get<double>();
        r.local_ratio_thresholds[k] = j.at("thresholds").at("local_ratio").at(name).get<double>();
    }
    r.total_matches = j.at("total_matches").get<std::uint32_t>();
    r.total_positions = j.at("total_positions").get<std::uint32_t>();
    r.thresholds.tau_global = j.at("thresholds").at("tau_global").get<double>();
    for (const auto& f : j.at("failed_factors")) {
        auto k = parse_factor_name(f.get<std::string>());
        if (!k)
            throw Error("report: unknown factor \"" + f.get<std::string>() + "\"");
        r.failed_factors.push_back(*k);
    }
    return r;
}

}  // namespace slice
