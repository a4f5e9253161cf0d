// Config files, CSV trial dumps, and JSON summaries for the simulation
// experiments. Per-factor parameters accept either one number (applied
// to all four factors) or an object keyed by "sub"/"env"/"act"/"det".

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "slice/error.hpp"
#include "slice/json.hpp"
#include "slice/simulation.hpp"

namespace slice {

inline Json factor_map_to_json(const FactorMap<double>& map) {
    Json j = Json::object();
    for (FactorKey k : kAllFactors) j[std::string(factor_name(k))] = map[k];
    return j;
}

inline FactorMap<double> factor_map_from_json(const Json& j, const std::string& field) {
    if (j.is_number())
        return FactorMap<double>(j.get<double>());
    if (!j.is_object())
        throw Error("config field \"" + field + "\" must be a number or a per-factor object");
    FactorMap<double> out;
    for (FactorKey k : kAllFactors) {
        auto it = j.find(factor_name(k));
        if (it == j.end())
            throw Error("config field \"" + field + "\" missing factor \"" +
                        std::string(factor_name(k)) + "\"");
        out[k] = it->get<double>();
    }
    return out;
}

// Accepts "quadrant", "row-stripes", "block-interleave:<b>"; "mask:<path>"
// loads the mask file and also reports its dims so the caller can check
// them against the configured grid.
struct ResolvedLayoutSpec {
    LayoutSpec spec;
    std::optional<std::pair<std::uint32_t, std::uint32_t>> mask_dims;
};

inline ResolvedLayoutSpec resolve_layout_spec(const std::string& name) {
    if (name == "quadrant") return {LayoutSpec::quadrant(), std::nullopt};
    if (name == "row-stripes") return {LayoutSpec::row_stripes(), std::nullopt};
    if (name.rfind("block-interleave:", 0) == 0) {
        int b = 0;
        try {
            b = std::stoi(name.substr(std::string("block-interleave:").size()));
        } catch (const std::exception&) {
            throw Error("bad block-interleave tile size in \"" + name + "\"");
        }
        if (b < 1)
            throw Error("block-interleave tile size must be >= 1");
        return {LayoutSpec::block_interleave(static_cast<std::uint32_t>(b)), std::nullopt};
    }
    if (name.rfind("mask:", 0) == 0) {
        PartitionLayout layout = load_mask_file(name.substr(5));
        return {LayoutSpec::explicit_mask(layout.assignment), {{layout.h, layout.w}}};
    }
    throw Error("unknown layout spec \"" + name +
                "\" (expected quadrant, row-stripes, block-interleave:<b>, or mask:<path>)");
}

inline FactorSet factor_set_from_json(const Json& j, const std::string& field) {
    if (!j.is_array())
        throw Error("config field \"" + field + "\" must be an array of factor names");
    FactorSet s;
    for (const auto& item : j) {
        auto k = parse_factor_name(item.get<std::string>());
        if (!k)
            throw Error("config field \"" + field + "\": unknown factor \"" +
                        item.get<std::string>() + "\"");
        s.insert(*k);
    }
    return s;
}

inline Json factor_set_to_json(const FactorSet& s) {
    Json j = Json::array();
    for (FactorKey k : kAllFactors)
        if (s.contains(k)) j.push_back(std::string(factor_name(k)));
    return j;
}

inline Json channel_params_to_json(const ChannelParams& c) {
    Json j = Json::object();
    j["inversion_outlier_frac"] = factor_map_to_json(c.inversion_outlier_frac);
    j["inversion_error_bound"] = factor_map_to_json(c.inversion_error_bound);
    j["drift_outlier_frac"] = factor_map_to_json(c.drift_outlier_frac);
    j["drift_bound"] = factor_map_to_json(c.drift_bound);
    j["corrupted_frac"] = factor_map_to_json(c.corrupted_frac);
    j["corruption_margin"] = factor_map_to_json(c.corruption_margin);
    j["tampered"] = factor_set_to_json(c.tampered);
    return j;
}

inline ChannelParams channel_params_from_json(const Json& j) {
    ChannelParams c;
    c.inversion_outlier_frac =
        factor_map_from_json(j.at("inversion_outlier_frac"), "inversion_outlier_frac");
    c.inversion_error_bound =
        factor_map_from_json(j.at("inversion_error_bound"), "inversion_error_bound");
    c.drift_outlier_frac = factor_map_from_json(j.at("drift_outlier_frac"), "drift_outlier_frac");
    c.drift_bound = factor_map_from_json(j.at("drift_bound"), "drift_bound");
    c.corrupted_frac = factor_map_from_json(j.at("corrupted_frac"), "corrupted_frac");
    c.corruption_margin = factor_map_from_json(j.at("corruption_margin"), "corruption_margin");
    c.tampered = factor_set_from_json(j.at("tampered"), "tampered");
    c.validate();
    return c;
}

inline Json experiment_config_to_json(const ExperimentConfig& c) {
    Json j = Json::object();
    j["grid"] = Json{{"h", c.h}, {"w", c.w}, {"d", c.d}};
    j["layout"] = c.layout.name();
    j["channel"] = channel_params_to_json(c.channel);
    j["thresholds"] = Json{{"tau_global", c.thresholds.tau_global},
                           {"tau_local", factor_map_to_json(c.thresholds.tau_local)},
                           {"local_ratio", factor_map_to_json(c.local_ratio_thresholds)}};
    j["trials"] = c.trials;
    j["master_seed"] = c.master_seed;
    j["gross_range"] = Json::array({c.gross_lo, c.gross_hi});
    j["placement"] = placement_name(c.placement);
    return j;
}

inline ExperimentConfig experiment_config_from_json(const Json& j) {
    ExperimentConfig c;
    const Json& grid = j.at("grid");
    c.h = grid.at("h").get<std::uint32_t>();
    c.w = grid.at("w").get<std::uint32_t>();
    c.d = grid.at("d").get<std::uint32_t>();
    ResolvedLayoutSpec layout = resolve_layout_spec(j.at("layout").get<std::string>());
    if (layout.mask_dims && (layout.mask_dims->first != c.h || layout.mask_dims->second != c.w))
        throw Error("mask dims disagree with configured grid dims");
    c.layout = layout.spec;
    c.channel = channel_params_from_json(j.at("channel"));
    const Json& th = j.at("thresholds");
    c.thresholds.tau_global = th.at("tau_global").get<double>();
    c.thresholds.tau_local = factor_map_from_json(th.at("tau_local"), "tau_local");
    c.local_ratio_thresholds = factor_map_from_json(th.at("local_ratio"), "local_ratio");
    c.trials = j.at("trials").get<std::uint32_t>();
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (auto it = j.find("gross_range"); it != j.end()) {
        c.gross_lo = it->at(0).get<double>();
        c.gross_hi = it->at(1).get<double>();
    }
    if (auto it = j.find("placement"); it != j.end()) {
        std::string p = it->get<std::string>();
        if (p == "random")
            c.placement = PlacementMode::UniformRandom;
        else if (p == "adversarial")
            c.placement = PlacementMode::AdversarialDisjoint;
        else
            throw Error("unknown placement \"" + p + "\" (expected random or adversarial)");
    }
    c.validate();
    return c;
}

inline Json forgery_config_to_json(const ForgeryConfig& c) {
    Json j = Json::object();
    j["grid"] = Json{{"h", c.h}, {"w", c.w}};
    j["layout"] = c.layout.name();
    j["q"] = c.q;
    j["tau_global"] = c.tau_global;
    j["tau_local_ratio"] = factor_map_to_json(c.tau_local_ratio);
    j["trials"] = c.trials;
    j["master_seed"] = c.master_seed;
    return j;
}

inline ForgeryConfig forgery_config_from_json(const Json& j) {
    ForgeryConfig c;
    const Json& grid = j.at("grid");
    c.h = grid.at("h").get<std::uint32_t>();
    c.w = grid.at("w").get<std::uint32_t>();
    if (auto it = j.find("layout"); it != j.end()) {
        ResolvedLayoutSpec layout = resolve_layout_spec(it->get<std::string>());
        if (layout.mask_dims && (layout.mask_dims->first != c.h || layout.mask_dims->second != c.w))
            throw Error("mask dims disagree with configured grid dims");
        c.layout = layout.spec;
    }
    c.q = j.at("q").get<double>();
    c.tau_global = j.at("tau_global").get<double>();
    c.tau_local_ratio = factor_map_from_json(j.at("tau_local_ratio"), "tau_local_ratio");
    c.trials = j.at("trials").get<std::uint32_t>();
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    c.validate();
    return c;
}

namespace detail {

inline std::string format_ratio(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace detail

inline std::string trial_csv_header(bool with_violations) {
    std::string header = "trial,m_sub,m_env,m_act,m_det,m_global,state";
    if (with_violations) header += ",viol_sub,viol_env,viol_act,viol_det,viol_global";
    return header + "\n";
}

inline void append_trial_csv_row(std::string& out, const TrialRecord& rec, bool with_violations) {
    out += std::to_string(rec.trial);
    for (FactorKey k : kAllFactors) {
        out += ',';
        out += detail::format_ratio(rec.m_local[k]);
    }
    out += ',';
    out += detail::format_ratio(rec.m_global);
    out += ',';
    out += verification_state_name(rec.state);
    if (with_violations) {
        for (FactorKey k : kAllFactors) out += rec.factor_violation[k] ? ",1" : ",0";
        out += rec.global_violation ? ",1" : ",0";
    }
    out += '\n';
}

inline std::string localization_trials_csv(const LocalizationReport& report) {
    std::string out = trial_csv_header(true);
    for (const TrialRecord& rec : report.trials) append_trial_csv_row(out, rec, true);
    return out;
}

inline std::string forgery_trials_csv(const ForgeryReport& report) {
    std::string out = trial_csv_header(false);
    for (const TrialRecord& rec : report.trials) append_trial_csv_row(out, rec, false);
    return out;
}

inline Json summary_stats_to_json(const SummaryStats& s) {
    return Json{{"min", s.min}, {"max", s.max}, {"mean", s.mean}};
}

inline Json localization_summary_json(const LocalizationReport& report) {
    Json j = Json::object();
    j["experiment"] = "localization";
    j["config"] = experiment_config_to_json(report.config);
    Json bounds = Json::object();
    for (FactorKey k : kAllFactors) {
        const FactorBound& b = report.factor_bounds[k];
        bounds[std::string(factor_name(k))] =
            Json{{"kind", b.kind == FactorBound::Kind::LowerBound ? "lower" : "upper"},
                 {"value", b.value}};
    }
    bounds["global"] =
        Json{{"lower", report.global_bounds.lower}, {"upper", report.global_bounds.upper}};
    j["bounds"] = bounds;
    Json stats = Json::object();
    for (FactorKey k : kAllFactors)
        stats[std::string(factor_name(k))] = summary_stats_to_json(report.factor_stats[k]);
    stats["global"] = summary_stats_to_json(report.global_stats);
    j["match_ratio_stats"] = stats;
    Json violations = Json::object();
    for (FactorKey k : kAllFactors)
        violations[std::string(factor_name(k))] = report.factor_violations[k];
    violations["global"] = report.global_violations;
    violations["total"] = report.total_violations;
    j["bound_violations"] = violations;
    j["state_counts"] = Json{{"I", report.state_counts[0]},
                             {"II", report.state_counts[1]},
                             {"III", report.state_counts[2]}};
    return j;
}

inline Json forgery_summary_json(const ForgeryReport& report) {
    Json j = Json::object();
    j["experiment"] = "forgery";
    j["config"] = forgery_config_to_json(report.config);
    j["empirical"] = Json{{"presence_accepts", report.presence_accepts},
                          {"state1_accepts", report.state1_accepts},
                          {"p_presence", report.p_presence},
                          {"p_state1", report.p_state1},
                          {"state_counts", Json{{"I", report.state_counts[0]},
                                                {"II", report.state_counts[1]},
                                                {"III", report.state_counts[2]}}}};
    j["bounds"] = Json{{"presence",
                        Json{{"bound", report.presence_bound.bound},
                             {"log_bound", report.presence_bound.log_bound},
                             {"applicable", report.presence_bound.applicable}}},
                       {"state1", Json{{"bound", report.state1_bound.bound},
                                       {"log_bound", report.state1_bound.log_bound},
                                       {"fully_applicable", report.state1_bound.fully_applicable}}}};
    j["check"] = Json{{"presence_limit", report.presence_limit},
                      {"state1_limit", report.state1_limit},
                      {"presence_pass", report.presence_pass},
                      {"state1_pass", report.state1_pass}};
    return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot open for writing: " + path.string());
    out << text;
    if (!out)
        throw Error("write failed: " + path.string());
}

inline Json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open: " + path.string());
    try {
        Json j;
        in >> j;
        return j;
    } catch (const Json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

}  // namespace slice
