// Monte-Carlo validation harness.
//
// simulate_inversion / simulate_reextraction build perturbed latents
// whose outlier-set sizes and error magnitudes satisfy the channel model
// of theory.hpp exactly (set sizes use ceil, so the assumed inequalities
// hold with no slack). Under window-compliant thresholds the match-ratio
// envelopes are then deterministic guarantees, and the localization
// experiment counts violations (expected: zero, every trial).
//
// The forgery experiment samples per-position accidental matches as
// i.i.d. Bernoulli(q) and compares empirical accept rates against the
// Chernoff bounds.
//
// Reproducibility: trial t draws only from StreamRng(master_seed, t),
// so reports are byte-identical at any thread count.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "slice/detection.hpp"
#include "slice/error.hpp"
#include "slice/factor.hpp"
#include "slice/json.hpp"
#include "slice/latent.hpp"
#include "slice/partition.hpp"
#include "slice/rng.hpp"
#include "slice/secret_key.hpp"
#include "slice/synthesis.hpp"
#include "slice/theory.hpp"

namespace slice {

// Placement of the outlier/corrupted sets inside each region.
//   UniformRandom        sets drawn uniformly at random each trial
//   AdversarialDisjoint  inversion outliers occupy the first positions
//                        of each region (row-major) and re-extraction
//                        outliers the following ones, so the two sets
//                        never overlap and the match ratio of an
//                        untampered region is forced to its minimum
enum class PlacementMode { UniformRandom, AdversarialDisjoint };

inline std::string placement_name(PlacementMode m) {
    return m == PlacementMode::UniformRandom ? "random" : "adversarial";
}

struct ExperimentConfig {
    std::uint32_t h = 64, w = 64, d = 4;
    LayoutSpec layout;
    ChannelParams channel;
    ThresholdSet thresholds;
    FactorMap<double> local_ratio_thresholds{0.5};
    std::uint32_t trials = 1;
    std::uint64_t master_seed = 0;
    double gross_lo = 10.0;  // magnitude range for out-of-set errors
    double gross_hi = 20.0;
    PlacementMode placement = PlacementMode::UniformRandom;

    void validate() const {
        if (trials < 1)
            throw std::invalid_argument("experiment needs trials >= 1");
        if (d < 1)
            throw std::invalid_argument("experiment needs d >= 1");
        if (!(gross_lo > 0.0) || !(gross_hi >= gross_lo))
            throw std::invalid_argument("gross error range must satisfy 0 < lo <= hi");
        channel.validate();
        thresholds.validate();
    }
};

struct TrialRecord {
    std::uint32_t trial = 0;
    FactorMap<double> m_local{0.0};
    double m_global = 0.0;
    VerificationState state = VerificationState::UnwatermarkedOrCorrupted;
    FactorMap<bool> factor_violation{false};
    bool global_violation = false;

    bool any_violation() const {
        bool any = global_violation;
        for (FactorKey k : kAllFactors) any = any || factor_violation[k];
        return any;
    }
};

namespace detail {

// ceil() that snaps products like 0.9 * n back to the intended integer
// before rounding up, so mass * region_size never overshoots by one.
inline std::uint32_t ceil_count(double x) {
    double nearest = std::round(x);
    double v = (std::abs(x - nearest) < 1e-9) ? nearest : std::ceil(x);
    return static_cast<std::uint32_t>(v);
}

// Membership flags for a per-region outlier set of the given size.
// Uniform placement samples the set; adversarial packs it at the start
// of the region, offset so consecutive calls yield disjoint sets.
inline std::vector<std::uint8_t> place_set(std::uint32_t region_size, std::uint32_t set_size,
                                           PlacementMode mode, std::uint32_t adversarial_offset,
                                           StreamRng& rng) {
    std::vector<std::uint8_t> member(region_size, 0);
    if (mode == PlacementMode::UniformRandom) {
        for (std::uint32_t idx : rng.sample_indices(region_size, set_size))
            member[idx] = 1;
    } else {
        for (std::uint32_t n = 0; n < set_size; ++n)
            member[(adversarial_offset + n) % region_size] = 1;
    }
    return member;
}

inline void add_error(LatentGrid& grid, Position p, double magnitude, StreamRng& rng,
                      std::vector<double>& direction) {
    rng.unit_vector(direction);
    auto channels = grid.channels(p);
    for (std::uint32_t c = 0; c < grid.depth(); ++c)
        channels[c] += magnitude * direction[c];
}

}  // namespace detail

// Perturbed copy of z_T modeling approximate inversion: per region, at
// least a (1 - inversion_outlier_frac) fraction of positions carries an
// error of norm at most inversion_error_bound; the remainder carries a
// gross error with norm in [gross_lo, gross_hi].
inline LatentGrid simulate_inversion(const LatentGrid& z_T, const ChannelParams& params,
                                     const PartitionLayout& layout, StreamRng& rng,
                                     double gross_lo, double gross_hi,
                                     PlacementMode placement = PlacementMode::UniformRandom) {
    params.validate();
    LatentGrid z_inv = z_T;
    std::vector<double> direction(z_T.depth());
    for (FactorKey k : kAllFactors) {
        auto positions = region_positions(layout, k);
        auto n = static_cast<std::uint32_t>(positions.size());
        auto in_set = detail::ceil_count((1.0 - params.inversion_outlier_frac[k]) * n);
        auto outliers = detail::place_set(n, n - in_set, placement, 0, rng);
        double eps = params.inversion_error_bound[k];
        for (std::uint32_t idx = 0; idx < n; ++idx) {
            double magnitude = outliers[idx] ? rng.uniform(gross_lo, gross_hi)
                                             : rng.uniform_open01() * eps;
            detail::add_error(z_inv, positions[idx], magnitude, rng, direction);
        }
    }
    return z_inv;
}

// Perturbed copy of z_T modeling the reconstructed reference latent
// after re-extraction. Untampered factors drift by at most drift_bound
// on at least a (1 - drift_outlier_frac) fraction (gross outside);
// tampered factors are displaced by at least corruption_margin on at
// least a corrupted_frac fraction (norm uniform in [0, gross_hi]
// outside, unconstrained by the model).
inline LatentGrid simulate_reextraction(const LatentGrid& z_T, const ChannelParams& params,
                                        const PartitionLayout& layout, StreamRng& rng,
                                        double gross_lo, double gross_hi,
                                        PlacementMode placement = PlacementMode::UniformRandom) {
    params.validate();
    LatentGrid z_ref = z_T;
    std::vector<double> direction(z_T.depth());
    for (FactorKey k : kAllFactors) {
        auto positions = region_positions(layout, k);
        auto n = static_cast<std::uint32_t>(positions.size());
        if (!params.tampered.contains(k)) {
            auto in_set = detail::ceil_count((1.0 - params.drift_outlier_frac[k]) * n);
            // Offset keeps the adversarial drift outliers clear of the
            // inversion outliers of the same region.
            auto inversion_outliers =
                n - detail::ceil_count((1.0 - params.inversion_outlier_frac[k]) * n);
            auto outliers = detail::place_set(n, n - in_set, placement, inversion_outliers, rng);
            double delta = params.drift_bound[k];
            for (std::uint32_t idx = 0; idx < n; ++idx) {
                double magnitude = outliers[idx] ? rng.uniform(gross_lo, gross_hi)
                                                 : rng.uniform_open01() * delta;
                detail::add_error(z_ref, positions[idx], magnitude, rng, direction);
            }
        } else {
            auto corrupted_size = detail::ceil_count(params.corrupted_frac[k] * n);
            auto corrupted = detail::place_set(n, corrupted_size, placement, 0, rng);
            double margin = params.corruption_margin[k];
            for (std::uint32_t idx = 0; idx < n; ++idx) {
                double magnitude = corrupted[idx]
                                       ? margin * (1.0 + rng.uniform01())
                                       : rng.uniform01() * gross_hi;
                detail::add_error(z_ref, positions[idx], magnitude, rng, direction);
            }
        }
    }
    return z_ref;
}

struct SummaryStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;

    bool operator==(const SummaryStats&) const = default;
};

struct LocalizationReport {
    ExperimentConfig config;
    FactorMap<FactorBound> factor_bounds{FactorBound{FactorBound::Kind::LowerBound, 0.0}};
    GlobalBounds global_bounds{0.0, 1.0};
    FactorMap<SummaryStats> factor_stats{SummaryStats{}};
    SummaryStats global_stats;
    FactorMap<std::uint32_t> factor_violations{0};
    std::uint32_t global_violations = 0;
    std::uint64_t total_violations = 0;
    std::array<std::uint32_t, 3> state_counts{};  // I, II, III
    std::vector<TrialRecord> trials;
};

namespace detail {

template <typename Fn>
void run_trials(std::uint32_t trials, unsigned threads, Fn&& body) {
    if (threads <= 1) {
        for (std::uint32_t t = 0; t < trials; ++t) body(t);
        return;
    }
    std::atomic<std::uint32_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            std::uint32_t t = next.fetch_add(1);
            if (t >= trials) return;
            try {
                body(t);
            } catch (...) {
                std::scoped_lock lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

inline DescriptorSet random_descriptors(StreamRng& rng) {
    FactorMap<std::string> raw;
    for (FactorKey k : kAllFactors) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "trial-%s-%016llx%016llx", factor_name(k).data(),
                      static_cast<unsigned long long>(rng.next_u64()),
                      static_cast<unsigned long long>(rng.next_u64()));
        raw[k] = buf;
    }
    return DescriptorSet(raw);
}

}  // namespace detail

// Refuses configurations whose thresholds fall outside the feasible
// windows (the envelope guarantees would be vacuous there).
inline void check_localization_preconditions(const ExperimentConfig& config) {
    config.validate();
    double max_tau = 0.0, max_small_error = 0.0;
    for (FactorKey k : kAllFactors) {
        FactorRole role = config.channel.tampered.contains(k) ? FactorRole::Tampered
                                                              : FactorRole::Untampered;
        ThresholdWindow window = threshold_window(config.channel, k, role);
        double tau = config.thresholds.tau_local[k];
        if (!window.contains(tau)) {
            std::string hi = std::isinf(window.hi) ? "inf" : std::to_string(window.hi);
            throw Error("threshold " + std::to_string(tau) + " for factor " +
                        std::string(factor_name(k)) + " lies outside its feasible window [" +
                        std::to_string(window.lo) + ", " + hi +
                        (window.feasible ? ")" : ") (window empty)") +
                        "; the match-ratio envelope would not be guaranteed");
        }
        max_tau = std::max(max_tau, tau);
        max_small_error = std::max({max_small_error, config.channel.inversion_error_bound[k],
                                    config.channel.drift_bound[k]});
    }
    if (!(config.gross_lo > max_tau + max_small_error))
        throw Error("gross_lo must exceed max threshold + max in-set error (" +
                    std::to_string(max_tau + max_small_error) +
                    ") so out-of-set errors cannot match");
}

inline LocalizationReport run_localization_experiment(const ExperimentConfig& config,
                                                      unsigned threads = 1) {
    check_localization_preconditions(config);
    PartitionLayout layout = build_layout(config.h, config.w, config.layout);

    LocalizationReport report;
    report.config = config;
    for (FactorKey k : kAllFactors)
        report.factor_bounds[k] = thm1_factor_bounds(config.channel, k);
    report.global_bounds = thm1_global_bounds(config.channel, layout);
    report.trials.resize(config.trials);

    std::uint64_t key_seed = config.master_seed;
    SecretKey key = SecretKey::from_seed(detail::splitmix64(key_seed));

    detail::run_trials(config.trials, threads, [&](std::uint32_t t) {
        StreamRng rng(config.master_seed, t);
        DescriptorSet descriptors = detail::random_descriptors(rng);
        LatentGrid z_T = synthesize_latent(descriptors, layout, config.d, key);
        LatentGrid z_inv = simulate_inversion(z_T, config.channel, layout, rng, config.gross_lo,
                                              config.gross_hi, config.placement);
        LatentGrid z_ref = simulate_reextraction(z_T, config.channel, layout, rng, config.gross_lo,
                                                 config.gross_hi, config.placement);
        MatchRatios ratios =
            match_ratios(match_map(z_inv, z_ref, layout, config.thresholds), layout);
        VerificationReport verdict =
            classify(ratios, layout, config.thresholds, config.local_ratio_thresholds);

        TrialRecord rec;
        rec.trial = t;
        rec.m_local = ratios.local;
        rec.m_global = ratios.global;
        rec.state = verdict.state;
        constexpr double kSlack = 1e-12;  // floating-point slack on ratio compares
        for (FactorKey k : kAllFactors) {
            const FactorBound& bound = report.factor_bounds[k];
            rec.factor_violation[k] = bound.kind == FactorBound::Kind::LowerBound
                                          ? ratios.local[k] < bound.value - kSlack
                                          : ratios.local[k] > bound.value + kSlack;
        }
        rec.global_violation = ratios.global < report.global_bounds.lower - kSlack ||
                               ratios.global > report.global_bounds.upper + kSlack;
        report.trials[t] = std::move(rec);
    });

    for (FactorKey k : kAllFactors)
        report.factor_stats[k] = {1.0, 0.0, 0.0};
    report.global_stats = {1.0, 0.0, 0.0};
    for (const TrialRecord& rec : report.trials) {
        for (FactorKey k : kAllFactors) {
            SummaryStats& s = report.factor_stats[k];
            s.min = std::min(s.min, rec.m_local[k]);
            s.max = std::max(s.max, rec.m_local[k]);
            s.mean += rec.m_local[k];
            if (rec.factor_violation[k]) report.factor_violations[k] += 1;
        }
        report.global_stats.min = std::min(report.global_stats.min, rec.m_global);
        report.global_stats.max = std::max(report.global_stats.max, rec.m_global);
        report.global_stats.mean += rec.m_global;
        if (rec.global_violation) report.global_violations += 1;
        report.state_counts[static_cast<std::size_t>(rec.state) - 1] += 1;
    }
    for (FactorKey k : kAllFactors) {
        report.factor_stats[k].mean /= config.trials;
        report.total_violations += report.factor_violations[k];
    }
    report.global_stats.mean /= config.trials;
    report.total_violations += report.global_violations;
    return report;
}

struct ForgeryConfig {
    std::uint32_t h = 8, w = 8;
    LayoutSpec layout;
    double q = 0.2;  // per-position accidental-match probability
    double tau_global = 0.3;
    FactorMap<double> tau_local_ratio{0.3};
    std::uint32_t trials = 1;
    std::uint64_t master_seed = 0;
    bool keep_trials = false;  // retain per-trial records (for CSV output)

    void validate() const {
        if (!(q > 0.0 && q < 1.0))
            throw std::invalid_argument("forgery q must lie in (0,1)");
        if (trials < 1)
            throw std::invalid_argument("forgery needs trials >= 1");
        if (!(tau_global > 0.0 && tau_global <= 1.0))
            throw std::invalid_argument("tau_global must lie in (0,1]");
        for (FactorKey k : kAllFactors)
            if (!(tau_local_ratio[k] > 0.0 && tau_local_ratio[k] <= 1.0))
                throw std::invalid_argument("tau_local_ratio must lie in (0,1]");
    }
};

struct ForgeryReport {
    ForgeryConfig config;
    std::uint32_t presence_accepts = 0;  // State I or II
    std::uint32_t state1_accepts = 0;
    double p_presence = 0.0;
    double p_state1 = 0.0;
    ChernoffBound presence_bound;
    State1Bound state1_bound;
    double presence_limit = 0.0;  // bound + statistical slack
    double state1_limit = 0.0;
    bool presence_pass = false;
    bool state1_pass = false;
    std::array<std::uint32_t, 3> state_counts{};
    std::vector<TrialRecord> trials;
};

// Empirical acceptance slack: the bound caps a probability, the
// experiment measures a frequency.
inline double chernoff_test_slack(double bound, std::uint32_t trials) {
    return 3.0 * std::sqrt(bound * (1.0 - bound) / trials) + 1.0 / trials;
}

inline ForgeryReport run_forgery_experiment(const ForgeryConfig& config, unsigned threads = 1) {
    config.validate();
    PartitionLayout layout = build_layout(config.h, config.w, config.layout);

    ForgeryReport report;
    report.config = config;
    report.presence_bound =
        thm2_presence_bound(config.q, config.tau_global, layout.position_count());
    report.state1_bound =
        thm2_state1_bound(config.q, config.tau_local_ratio, layout.region_sizes);

    ThresholdSet thresholds;
    thresholds.tau_global = config.tau_global;
    thresholds.tau_local = FactorMap<double>(0.0);  // distances unused in this model

    std::vector<TrialRecord> records(config.keep_trials ? config.trials : 0);
    std::atomic<std::uint32_t> presence{0}, state1{0};
    std::array<std::atomic<std::uint32_t>, 3> states{};

    detail::run_trials(config.trials, threads, [&](std::uint32_t t) {
        StreamRng rng(config.master_seed, t);
        MatchMap map;
        map.h = layout.h;
        map.w = layout.w;
        map.matched.resize(layout.position_count());
        for (auto& cell : map.matched) cell = rng.uniform01() < config.q ? 1 : 0;
        MatchRatios ratios = match_ratios(map, layout);
        VerificationReport verdict =
            classify(ratios, layout, thresholds, config.tau_local_ratio);
        if (verdict.state != VerificationState::UnwatermarkedOrCorrupted)
            presence.fetch_add(1, std::memory_order_relaxed);
        if (verdict.state == VerificationState::AuthenticIntact)
            state1.fetch_add(1, std::memory_order_relaxed);
        states[static_cast<std::size_t>(verdict.state) - 1].fetch_add(1,
                                                                      std::memory_order_relaxed);
        if (config.keep_trials) {
            TrialRecord rec;
            rec.trial = t;
            rec.m_local = ratios.local;
            rec.m_global = ratios.global;
            rec.state = verdict.state;
            records[t] = std::move(rec);
        }
    });

    report.presence_accepts = presence.load();
    report.state1_accepts = state1.load();
    for (std::size_t s = 0; s < 3; ++s) report.state_counts[s] = states[s].load();
    report.p_presence = static_cast<double>(report.presence_accepts) / config.trials;
    report.p_state1 = static_cast<double>(report.state1_accepts) / config.trials;
    report.presence_limit =
        report.presence_bound.bound + chernoff_test_slack(report.presence_bound.bound, config.trials);
    report.state1_limit =
        report.state1_bound.bound + chernoff_test_slack(report.state1_bound.bound, config.trials);
    report.presence_pass = report.p_presence <= report.presence_limit;
    report.state1_pass = report.p_state1 <= report.state1_limit;
    report.trials = std::move(records);
    return report;
}

}  // namespace slice
