// Semantic descriptor sets: one short free-text descriptor per factor,
// normalized so that cosmetically different re-extractions of the same
// text compare equal.
//
// Descriptor file format: a JSON object with exactly the four keys
// "sub", "env", "act", "det", each mapping to a string.

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf16.h>

#include "slice/error.hpp"
#include "slice/factor.hpp"
#include "slice/json.hpp"

namespace slice {

// Unicode NFC, outer whitespace trimmed, inner whitespace runs collapsed
// to a single space. No case folding. Empty results are an error.
inline std::string normalize_descriptor(std::string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status))
        throw Error("ICU NFC normalizer unavailable");

    icu::UnicodeString input =
        icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int>(text.size())));
    icu::UnicodeString composed = nfc->normalize(input, status);
    if (U_FAILURE(status))
        throw Error("NFC normalization failed");

    icu::UnicodeString out;
    bool emitted = false;
    bool pending_space = false;
    for (int32_t idx = 0; idx < composed.length();) {
        UChar32 ch = composed.char32At(idx);
        idx += U16_LENGTH(ch);
        if (u_isUWhiteSpace(ch)) {
            pending_space = emitted;  // leading whitespace drops, runs collapse
            continue;
        }
        if (pending_space) {
            out.append(static_cast<UChar32>(' '));
            pending_space = false;
        }
        out.append(ch);
        emitted = true;
    }

    std::string result;
    out.toUTF8String(result);
    if (result.empty())
        throw Error("empty descriptor");
    return result;
}

class DescriptorSet {
public:
    DescriptorSet() = default;

    // Normalizes every descriptor; throws if any normalizes to empty.
    explicit DescriptorSet(const FactorMap<std::string>& raw) {
        for (FactorKey k : kAllFactors) {
            try {
                texts_[k] = normalize_descriptor(raw[k]);
            } catch (const Error&) {
                throw Error("empty descriptor for factor \"" + std::string(factor_name(k)) + "\"");
            }
        }
    }

    DescriptorSet(std::string sub, std::string env, std::string act, std::string det)
        : DescriptorSet(FactorMap<std::string>(std::move(sub), std::move(env), std::move(act),
                                               std::move(det))) {}

    const std::string& text(FactorKey k) const { return texts_[k]; }

    // Copy with one factor's descriptor replaced (normalized).
    DescriptorSet with(FactorKey k, std::string_view replacement) const {
        DescriptorSet out = *this;
        try {
            out.texts_[k] = normalize_descriptor(replacement);
        } catch (const Error&) {
            throw Error("empty descriptor for factor \"" + std::string(factor_name(k)) + "\"");
        }
        return out;
    }

    bool operator==(const DescriptorSet&) const = default;

    Json to_json() const {
        Json j = Json::object();
        for (FactorKey k : kAllFactors)
            j[std::string(factor_name(k))] = texts_[k];
        return j;
    }

    static DescriptorSet from_json(const Json& j) {
        if (!j.is_object())
            throw Error("descriptor document must be a JSON object");
        FactorMap<std::string> raw;
        for (FactorKey k : kAllFactors) {
            auto it = j.find(factor_name(k));
            if (it == j.end())
                throw Error("descriptor document missing factor \"" +
                            std::string(factor_name(k)) + "\"");
            if (!it->is_string())
                throw Error("descriptor for factor \"" + std::string(factor_name(k)) +
                            "\" must be a string");
            raw[k] = it->get<std::string>();
        }
        if (j.size() != kFactorCount)
            throw Error("descriptor document must hold exactly the four factor keys");
        return DescriptorSet(raw);
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::trunc);
        if (!out)
            throw Error("cannot open for writing: " + path.string());
        out << to_json().dump(2) << "\n";
        if (!out)
            throw Error("write failed: " + path.string());
    }

    static DescriptorSet load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in)
            throw Error("cannot open: " + path.string());
        Json j;
        try {
            in >> j;
        } catch (const Json::parse_error& e) {
            throw Error("descriptor file " + path.string() + ": " + e.what());
        }
        return from_json(j);
    }

private:
    FactorMap<std::string> texts_;
};

}  // namespace slice
