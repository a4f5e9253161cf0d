// Semantic factor keys and small fixed-size containers keyed by them.
//
// Every watermark operation decomposes image content into exactly four
// semantic factors: subject, environment, action, detail. The factor
// order is fixed (sub < env < act < det) and is used everywhere a
// deterministic ordering matters: serialization, reports, tie-breaking.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace slice {

enum class FactorKey : std::uint8_t {
    Subject = 0,
    Environment = 1,
    Action = 2,
    Detail = 3,
};

inline constexpr std::size_t kFactorCount = 4;

inline constexpr std::array<FactorKey, kFactorCount> kAllFactors = {
    FactorKey::Subject,
    FactorKey::Environment,
    FactorKey::Action,
    FactorKey::Detail,
};

constexpr std::size_t factor_index(FactorKey k) {
    return static_cast<std::size_t>(k);
}

// Short wire names, used in JSON files and reports.
constexpr std::string_view factor_name(FactorKey k) {
    switch (k) {
    case FactorKey::Subject: return "sub";
    case FactorKey::Environment: return "env";
    case FactorKey::Action: return "act";
    case FactorKey::Detail: return "det";
    }
    return "?";
}

// One-letter codes used by layout mask files.
constexpr char factor_mask_char(FactorKey k) {
    switch (k) {
    case FactorKey::Subject: return 'S';
    case FactorKey::Environment: return 'E';
    case FactorKey::Action: return 'A';
    case FactorKey::Detail: return 'D';
    }
    return '?';
}

inline std::optional<FactorKey> parse_factor_name(std::string_view name) {
    for (FactorKey k : kAllFactors) {
        if (factor_name(k) == name) return k;
    }
    return std::nullopt;
}

inline std::optional<FactorKey> parse_factor_mask_char(char c) {
    for (FactorKey k : kAllFactors) {
        if (factor_mask_char(k) == c) return k;
    }
    return std::nullopt;
}

// Dense map FactorKey -> T. Iteration helpers always run in factor order.
template <typename T>
class FactorMap {
public:
    constexpr FactorMap() = default;

    // Same value for all four factors.
    explicit constexpr FactorMap(const T& fill) { values_.fill(fill); }

    constexpr FactorMap(T sub, T env, T act, T det)
        : values_{std::move(sub), std::move(env), std::move(act), std::move(det)} {}

    constexpr T& operator[](FactorKey k) { return values_[factor_index(k)]; }
    constexpr const T& operator[](FactorKey k) const { return values_[factor_index(k)]; }

    constexpr bool operator==(const FactorMap&) const = default;

    template <typename Fn>
    constexpr void for_each(Fn&& fn) const {
        for (FactorKey k : kAllFactors) fn(k, (*this)[k]);
    }

private:
    std::array<T, kFactorCount> values_{};
};

// Subset of the four factors (e.g. the tampered set in an experiment).
class FactorSet {
public:
    constexpr FactorSet() = default;

    constexpr static FactorSet of(std::initializer_list<FactorKey> ks) {
        FactorSet s;
        for (FactorKey k : ks) s.insert(k);
        return s;
    }

    constexpr void insert(FactorKey k) { bits_ |= mask(k); }
    constexpr void erase(FactorKey k) { bits_ &= static_cast<std::uint8_t>(~mask(k)); }
    constexpr bool contains(FactorKey k) const { return (bits_ & mask(k)) != 0; }
    constexpr bool empty() const { return bits_ == 0; }

    constexpr std::size_t size() const {
        std::size_t n = 0;
        for (FactorKey k : kAllFactors) n += contains(k) ? 1 : 0;
        return n;
    }

    constexpr bool operator==(const FactorSet&) const = default;

private:
    constexpr static std::uint8_t mask(FactorKey k) {
        return static_cast<std::uint8_t>(1u << factor_index(k));
    }
    std::uint8_t bits_ = 0;
};

}  // namespace slice
