// Closed-form guarantees for the partition-wise detector: match-ratio
// envelopes for channels with bounded inversion error and bounded or
// separated re-extraction drift, threshold feasibility windows, and
// Chernoff false-accept bounds for keyless inputs.
//
// Bounds on large grids underflow binary64, so every bound calculator
// also returns the log-domain value.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>

#include "slice/factor.hpp"
#include "slice/partition.hpp"

namespace slice {

// Per-factor channel model parameters.
//
// Inversion: at least (1 - inversion_outlier_frac) of each region inverts
// with per-position error at most inversion_error_bound. Re-extraction of
// an untampered factor drifts by at most drift_bound except on a
// drift_outlier_frac fraction; a tampered factor is displaced by at least
// corruption_margin on a corrupted_frac fraction.
struct ChannelParams {
    FactorMap<double> inversion_outlier_frac{0.0};  // mass in [0,1]
    FactorMap<double> inversion_error_bound{0.0};   // >= 0
    FactorMap<double> drift_outlier_frac{0.0};      // mass in [0,1]
    FactorMap<double> drift_bound{0.0};             // >= 0
    FactorMap<double> corrupted_frac{0.0};          // mass in [0,1]
    FactorMap<double> corruption_margin{0.0};       // >= 0
    FactorSet tampered;

    void validate() const {
        auto mass = [](double v) { return v >= 0.0 && v <= 1.0; };
        auto bound = [](double v) { return v >= 0.0 && std::isfinite(v); };
        for (FactorKey k : kAllFactors) {
            if (!mass(inversion_outlier_frac[k]) || !mass(drift_outlier_frac[k]) ||
                !mass(corrupted_frac[k]))
                throw std::invalid_argument("channel mass parameters must lie in [0,1]");
            if (!bound(inversion_error_bound[k]) || !bound(drift_bound[k]) ||
                !bound(corruption_margin[k]))
                throw std::invalid_argument("channel bound parameters must be finite and >= 0");
        }
    }
};

// Bernoulli KL divergence D(a||b) = a ln(a/b) + (1-a) ln((1-a)/(1-b)),
// with 0 ln 0 = 0. Returns +infinity when b is degenerate and a != b.
inline double kl_bernoulli(double a, double b) {
    if (!(a >= 0.0 && a <= 1.0))
        throw std::invalid_argument("kl_bernoulli: a must lie in [0,1]");
    if (!(b >= 0.0 && b <= 1.0))
        throw std::invalid_argument("kl_bernoulli: b must lie in [0,1]");
    if (a == b) return 0.0;
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (b == 0.0 || b == 1.0) return inf;
    double t0 = (a == 0.0) ? 0.0 : a * std::log(a / b);
    double t1 = (a == 1.0) ? 0.0 : (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
    return t0 + t1;
}

struct FactorBound {
    enum class Kind { LowerBound, UpperBound };
    Kind kind;
    double value;  // clamped to [0,1]

    bool operator==(const FactorBound&) const = default;
};

// Match-ratio envelope for one factor: untampered factors keep
// m_k >= 1 - inversion_outliers - drift_outliers; tampered factors lose
// at least (corrupted - inversion_outliers)+ of their region.
inline FactorBound thm1_factor_bounds(const ChannelParams& params, FactorKey k) {
    params.validate();
    if (!params.tampered.contains(k)) {
        double lower = 1.0 - params.inversion_outlier_frac[k] - params.drift_outlier_frac[k];
        return {FactorBound::Kind::LowerBound, std::clamp(lower, 0.0, 1.0)};
    }
    double displaced = std::max(params.corrupted_frac[k] - params.inversion_outlier_frac[k], 0.0);
    return {FactorBound::Kind::UpperBound, std::clamp(1.0 - displaced, 0.0, 1.0)};
}

struct GlobalBounds {
    double lower;
    double upper;
};

inline GlobalBounds thm1_global_bounds(const ChannelParams& params, const PartitionLayout& layout) {
    params.validate();
    double lower = 0.0;
    double upper = 0.0;
    double total = static_cast<double>(layout.position_count());
    for (FactorKey k : kAllFactors) {
        double weight = layout.region_sizes[k] / total;
        if (!params.tampered.contains(k)) {
            lower += weight * (1.0 - params.inversion_outlier_frac[k] - params.drift_outlier_frac[k]);
            upper += weight;
        } else {
            double displaced =
                std::max(params.corrupted_frac[k] - params.inversion_outlier_frac[k], 0.0);
            upper += weight * (1.0 - displaced);
        }
    }
    lower = std::clamp(lower, 0.0, 1.0);
    upper = std::clamp(upper, 0.0, 1.0);
    return {std::min(lower, upper), upper};
}

// Feasible local-threshold interval for a factor.
//
// An untampered factor needs tau >= inversion_error + drift_bound; a
// tampered one needs tau < corruption_margin - inversion_error. The
// BothRoles query intersects the two, which is the planning view when a
// single tau must serve whichever role the factor ends up in.
struct ThresholdWindow {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();  // exclusive unless infinite
    bool feasible = true;

    bool contains(double tau) const {
        return feasible && tau >= lo && (std::isinf(hi) || tau < hi);
    }
};

enum class FactorRole { Untampered, Tampered, BothRoles };

inline ThresholdWindow threshold_window(const ChannelParams& params, FactorKey k, FactorRole role) {
    params.validate();
    double eps = params.inversion_error_bound[k];
    ThresholdWindow win;
    if (role == FactorRole::Untampered || role == FactorRole::BothRoles)
        win.lo = eps + params.drift_bound[k];
    if (role == FactorRole::Tampered || role == FactorRole::BothRoles)
        win.hi = params.corruption_margin[k] - eps;
    win.feasible = std::isinf(win.hi) || win.lo < win.hi;
    return win;
}

// Midpoint of the both-roles feasibility window: the natural local
// threshold default when channel parameters are known. Empty when no
// single threshold can serve both roles.
inline std::optional<double> recommended_threshold(const ChannelParams& params, FactorKey k) {
    ThresholdWindow window = threshold_window(params, k, FactorRole::BothRoles);
    if (!window.feasible) return std::nullopt;
    return 0.5 * (window.lo + window.hi);
}

// Chernoff tail bound on a false accept. `applicable` is false when the
// hypothesis q < tau fails; the reported bound is then the vacuous 1.
struct ChernoffBound {
    double bound = 1.0;
    double log_bound = 0.0;
    bool applicable = false;
};

// P(global ratio >= tau_g) <= exp(-hw * D(tau_g || q)) for positionwise
// accidental-match probability at most q < tau_g.
inline ChernoffBound thm2_presence_bound(double q, double tau_g, std::uint64_t hw) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("thm2_presence_bound: q must lie in (0,1)");
    if (!(tau_g > 0.0 && tau_g <= 1.0))
        throw std::invalid_argument("thm2_presence_bound: tau_g must lie in (0,1]");
    if (hw < 1)
        throw std::invalid_argument("thm2_presence_bound: hw must be >= 1");
    ChernoffBound out;
    out.log_bound = -static_cast<double>(hw) * kl_bernoulli(tau_g, q);
    out.applicable = q < tau_g;
    out.bound = out.applicable ? std::clamp(std::exp(out.log_bound), 0.0, 1.0) : 1.0;
    return out;
}

// P(all local ratios pass) <= exp(-sum_k |region_k| * D(tau_k || q)).
// Factors with q >= tau_k contribute nothing to the exponent and are
// flagged; the product bound stays valid with their terms at 1.
struct State1Bound {
    double bound = 1.0;
    double log_bound = 0.0;
    FactorMap<bool> factor_applicable{false};
    bool fully_applicable = false;
};

inline State1Bound thm2_state1_bound(double q, const FactorMap<double>& tau_local_ratio,
                                     const FactorMap<std::uint32_t>& region_sizes) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("thm2_state1_bound: q must lie in (0,1)");
    for (FactorKey k : kAllFactors)
        if (!(tau_local_ratio[k] > 0.0 && tau_local_ratio[k] <= 1.0))
            throw std::invalid_argument("thm2_state1_bound: tau_k must lie in (0,1]");
    State1Bound out;
    out.fully_applicable = true;
    double log_sum = 0.0;
    for (FactorKey k : kAllFactors) {
        bool ok = q < tau_local_ratio[k];
        out.factor_applicable[k] = ok;
        if (ok)
            log_sum -= region_sizes[k] * kl_bernoulli(tau_local_ratio[k], q);
        else
            out.fully_applicable = false;
    }
    out.log_bound = log_sum;
    out.bound = std::clamp(std::exp(log_sum), 0.0, 1.0);
    return out;
}

}  // namespace slice
