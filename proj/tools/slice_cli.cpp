// slice: compartmentalized semantic watermark tool.
//
// Subcommands: keygen, layout, embed, verify, simulate, bounds.
// verify exit codes encode the verdict for scripting:
//   0  State I   (authentic and intact)
//   2  State II  (localized semantic tampering)
//   3  State III (unwatermarked or severely corrupted)
//   1  any error

#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "slice/slice.hpp"

namespace {

using namespace slice;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string format_sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        std::string token = text.substr(start, comma == std::string::npos ? comma : comma - start);
        if (token.empty())
            throw Error("empty entry in numeric list \"" + text + "\"");
        out.push_back(std::stod(token));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

std::uint64_t fresh_seed() {
    std::random_device rd;
    return (std::uint64_t(rd()) << 32) ^ rd();
}

struct KeygenArgs {
    std::string out_path;
    std::optional<std::uint64_t> seed;
};

int run_keygen(const KeygenArgs& args) {
    SecretKey key = args.seed ? SecretKey::from_seed(*args.seed) : SecretKey::generate();
    key.save(args.out_path);
    if (args.seed)
        std::printf("wrote deterministic test key (seed %" PRIu64 ") to %s\n", *args.seed,
                    args.out_path.c_str());
    else
        std::printf("wrote key from system entropy to %s\n", args.out_path.c_str());
    return 0;
}

struct LayoutArgs {
    std::string spec = "quadrant";
    std::uint32_t height = 64;
    std::uint32_t width = 64;
    std::string out_path;
    std::string validate_path;
};

int run_layout(const LayoutArgs& args) {
    if (!args.validate_path.empty()) {
        PartitionLayout layout = load_mask_file(args.validate_path);
        auto result = validate_layout(layout);
        if (!result.ok()) {
            for (const auto& v : result.violations)
                std::fprintf(stderr, "violation: %s\n", v.message.c_str());
            return 1;
        }
        std::printf("ok: %ux%u mask", layout.h, layout.w);
        for (FactorKey k : kAllFactors)
            std::printf(" %s=%u", std::string(factor_name(k)).c_str(), layout.region_sizes[k]);
        std::printf("\n");
        return 0;
    }
    ResolvedLayoutSpec resolved = resolve_layout_spec(args.spec);
    std::uint32_t h = args.height, w = args.width;
    if (resolved.mask_dims) {
        h = resolved.mask_dims->first;
        w = resolved.mask_dims->second;
    }
    PartitionLayout layout = build_layout(h, w, resolved.spec);
    if (args.out_path.empty()) {
        std::fputs(encode_layout_mask(layout).c_str(), stdout);
    } else {
        write_mask_file(args.out_path, layout);
        std::printf("wrote %ux%u %s mask to %s\n", h, w, resolved.spec.name().c_str(),
                    args.out_path.c_str());
    }
    return 0;
}

struct EmbedArgs {
    std::string key_path;
    std::string descriptors_path;
    std::string out_dir;
    std::string layout = "quadrant";
    std::uint32_t height = 64;
    std::uint32_t width = 64;
    std::uint32_t depth = 4;
    std::string prompt;
};

int run_embed(const EmbedArgs& args) {
    SecretKey key = SecretKey::load(args.key_path);
    DescriptorSet descriptors = DescriptorSet::load(args.descriptors_path);
    ResolvedLayoutSpec resolved = resolve_layout_spec(args.layout);
    std::uint32_t h = args.height, w = args.width;
    if (resolved.mask_dims) {
        h = resolved.mask_dims->first;
        w = resolved.mask_dims->second;
    }
    PartitionLayout layout = build_layout(h, w, resolved.spec);
    StubDiffusionBackend backend;
    EmbedResult result = embed_pipeline(descriptors, args.prompt, layout, args.depth, key, backend);
    save_bundle(args.out_dir, result.bundle);
    std::printf("embedded %ux%ux%u latent into %s\n", h, w, args.depth, args.out_dir.c_str());
    return 0;
}

struct VerifyArgs {
    std::string key_path;
    std::string bundle_dir;
    std::string layout = "quadrant";
    double tau_global = 0.6;
    std::string tau_local = "1.0";
    std::string local_ratio = "0.5";
    double noise_sigma = 0.0;
    std::optional<std::uint64_t> seed;
    std::string report_path;
};

// One value for every factor, or four comma-separated values in factor
// order (sub,env,act,det).
FactorMap<double> parse_factor_values(const std::string& text, const char* flag) {
    auto values = parse_double_list(text);
    if (values.size() == 1) return FactorMap<double>(values[0]);
    if (values.size() == kFactorCount) {
        FactorMap<double> out;
        for (FactorKey k : kAllFactors) out[k] = values[factor_index(k)];
        return out;
    }
    throw Error(std::string(flag) + " needs one value or four (sub,env,act,det)");
}

int run_verify(const VerifyArgs& args) {
    SecretKey key = SecretKey::load(args.key_path);
    ImageBundle bundle = load_bundle(args.bundle_dir);

    std::uint64_t noise_seed = 0;
    if (args.noise_sigma > 0.0) {
        noise_seed = args.seed ? *args.seed : fresh_seed();
        if (!args.seed)
            std::printf("noise seed: %" PRIu64 "\n", noise_seed);
    }
    StubDiffusionBackend backend(args.noise_sigma, noise_seed);
    SidecarExtractor extractor;

    LatentGrid probe = decode_slce(bundle.payload);  // dims come from the payload header
    ResolvedLayoutSpec resolved = resolve_layout_spec(args.layout);
    if (resolved.mask_dims &&
        (resolved.mask_dims->first != probe.height() || resolved.mask_dims->second != probe.width()))
        throw Error("mask dims disagree with the bundle payload dims");
    PartitionLayout layout = build_layout(probe.height(), probe.width(), resolved.spec);

    ThresholdSet thresholds;
    thresholds.tau_global = args.tau_global;
    thresholds.tau_local = parse_factor_values(args.tau_local, "--tau-local");
    FactorMap<double> ratio_thresholds = parse_factor_values(args.local_ratio, "--local-ratio");

    VerificationReport report = verify_pipeline(bundle, layout, probe.depth(), key, thresholds,
                                                ratio_thresholds, backend, extractor);
    Json j = report_to_json(report);
    std::printf("%s\n", j.dump(2).c_str());
    if (!args.report_path.empty())
        write_text_file(args.report_path, j.dump(2) + "\n");

    switch (report.state) {
    case VerificationState::AuthenticIntact: return 0;
    case VerificationState::LocalizedTampering: return 2;
    case VerificationState::UnwatermarkedOrCorrupted: return 3;
    }
    return 1;
}

struct SimulateArgs {
    std::string config_path;
    std::string out_csv;
    std::string out_summary;
    unsigned threads = 0;
};

int run_simulate_localization(const SimulateArgs& args) {
    ExperimentConfig config = experiment_config_from_json(load_json_file(args.config_path));
    LocalizationReport report = run_localization_experiment(config, resolve_threads(args.threads));
    Json summary = localization_summary_json(report);
    std::printf("%s\n", summary.dump(2).c_str());
    if (!args.out_csv.empty())
        write_text_file(args.out_csv, localization_trials_csv(report));
    if (!args.out_summary.empty())
        write_text_file(args.out_summary, summary.dump(2) + "\n");
    return 0;
}

int run_simulate_forgery(const SimulateArgs& args) {
    ForgeryConfig config = forgery_config_from_json(load_json_file(args.config_path));
    if (!args.out_csv.empty())
        config.keep_trials = true;
    ForgeryReport report = run_forgery_experiment(config, resolve_threads(args.threads));
    Json summary = forgery_summary_json(report);
    std::printf("%s\n", summary.dump(2).c_str());
    if (!args.out_csv.empty())
        write_text_file(args.out_csv, forgery_trials_csv(report));
    if (!args.out_summary.empty())
        write_text_file(args.out_summary, summary.dump(2) + "\n");
    return 0;
}

struct BoundsArgs {
    int theorem = 2;
    std::string q_list = "0.2";
    std::string tau_g_list;
    std::uint64_t hw = 64;
    std::string tau_local_list;
    std::string sizes = "16,16,16,16";
    // channel parameters for the envelope calculator (uniform across factors)
    double beta = 0.05, epsilon = 0.3, gamma = 0.05, delta = 0.3, rho = 0.9, margin = 2.0;
    std::string tampered = "act";
    std::string layout = "quadrant";
    std::uint32_t height = 64, width = 64;
    std::string out_path;
};

int run_bounds(const BoundsArgs& args) {
    std::string csv;
    if (args.theorem == 1) {
        ChannelParams params;
        params.inversion_outlier_frac = FactorMap<double>(args.beta);
        params.inversion_error_bound = FactorMap<double>(args.epsilon);
        params.drift_outlier_frac = FactorMap<double>(args.gamma);
        params.drift_bound = FactorMap<double>(args.delta);
        params.corrupted_frac = FactorMap<double>(args.rho);
        params.corruption_margin = FactorMap<double>(args.margin);
        if (!args.tampered.empty()) {
            std::size_t start = 0;
            while (start <= args.tampered.size()) {
                std::size_t comma = args.tampered.find(',', start);
                std::string token = args.tampered.substr(
                    start, comma == std::string::npos ? comma : comma - start);
                auto k = parse_factor_name(token);
                if (!k)
                    throw Error("unknown factor \"" + token + "\" in --tampered");
                params.tampered.insert(*k);
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        }
        ResolvedLayoutSpec resolved = resolve_layout_spec(args.layout);
        PartitionLayout layout = build_layout(args.height, args.width, resolved.spec);

        csv = "factor,tampered,bound_kind,bound_value,window_lo,window_hi,window_feasible\n";
        for (FactorKey k : kAllFactors) {
            bool tampered = params.tampered.contains(k);
            FactorBound bound = thm1_factor_bounds(params, k);
            ThresholdWindow window = threshold_window(
                params, k, tampered ? FactorRole::Tampered : FactorRole::Untampered);
            csv += std::string(factor_name(k)) + "," + (tampered ? "1" : "0") + "," +
                   (bound.kind == FactorBound::Kind::LowerBound ? "lower" : "upper") + "," +
                   format_double(bound.value) + "," + format_double(window.lo) + "," +
                   (std::isinf(window.hi) ? "inf" : format_double(window.hi)) + "," +
                   (window.feasible ? "1" : "0") + "\n";
        }
        GlobalBounds global = thm1_global_bounds(params, layout);
        csv += "global,,lower," + format_double(global.lower) + ",,,\n";
        csv += "global,,upper," + format_double(global.upper) + ",,,\n";
    } else if (args.theorem == 2) {
        if (!args.tau_local_list.empty()) {
            auto taus = parse_double_list(args.tau_local_list);
            auto sizes = parse_double_list(args.sizes);
            if (sizes.size() != kFactorCount)
                throw Error("--sizes needs exactly four region sizes");
            FactorMap<std::uint32_t> regions;
            for (FactorKey k : kAllFactors)
                regions[k] = static_cast<std::uint32_t>(sizes[factor_index(k)]);
            csv = "q,tau_sub,tau_env,tau_act,tau_det,size_sub,size_env,size_act,size_det,"
                  "bound,log_bound,fully_applicable\n";
            for (double q : parse_double_list(args.q_list)) {
                FactorMap<double> tau_map;
                if (taus.size() == 1)
                    tau_map = FactorMap<double>(taus[0]);
                else if (taus.size() == kFactorCount)
                    for (FactorKey k : kAllFactors) tau_map[k] = taus[factor_index(k)];
                else
                    throw Error("--tau-local needs one value or four");
                State1Bound bound = thm2_state1_bound(q, tau_map, regions);
                csv += format_double(q);
                for (FactorKey k : kAllFactors) csv += "," + format_double(tau_map[k]);
                for (FactorKey k : kAllFactors) csv += "," + std::to_string(regions[k]);
                csv += "," + format_sci(bound.bound) + "," + format_sci(bound.log_bound) + "," +
                       (bound.fully_applicable ? "1" : "0") + "\n";
            }
        } else {
            std::string tau_list = args.tau_g_list.empty() ? "0.3" : args.tau_g_list;
            csv = "q,tau_g,hw,bound,log_bound,applicable\n";
            for (double q : parse_double_list(args.q_list)) {
                for (double tau_g : parse_double_list(tau_list)) {
                    ChernoffBound bound = thm2_presence_bound(q, tau_g, args.hw);
                    csv += format_double(q) + "," + format_double(tau_g) + "," +
                           std::to_string(args.hw) + "," + format_sci(bound.bound) + "," +
                           format_sci(bound.log_bound) + "," + (bound.applicable ? "1" : "0") +
                           "\n";
                }
            }
        }
    } else {
        throw Error("--thm must be 1 or 2");
    }

    if (args.out_path.empty())
        std::fputs(csv.c_str(), stdout);
    else
        write_text_file(args.out_path, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"compartmentalized semantic watermark tool"};
    app.require_subcommand(1);

    KeygenArgs keygen_args;
    auto* keygen = app.add_subcommand("keygen", "generate a 256-bit watermarking key");
    keygen->add_option("--out", keygen_args.out_path, "output key file")->required();
    std::uint64_t keygen_seed = 0;
    auto* keygen_seed_opt =
        keygen->add_option("--seed", keygen_seed, "deterministic key seed (testing only)");

    LayoutArgs layout_args;
    auto* layout = app.add_subcommand("layout", "emit or validate partition mask files");
    layout->add_option("--spec", layout_args.spec,
                       "quadrant | row-stripes | block-interleave:<b> | mask:<path>");
    layout->add_option("--height", layout_args.height, "grid rows");
    layout->add_option("--width", layout_args.width, "grid cols");
    layout->add_option("--out", layout_args.out_path, "mask file to write (default: stdout)");
    layout->add_option("--validate", layout_args.validate_path, "mask file to validate")
        ->check(CLI::ExistingFile);

    EmbedArgs embed_args;
    auto* embed = app.add_subcommand("embed", "synthesize a watermarked latent bundle");
    embed->add_option("--key", embed_args.key_path, "key file")
        ->envname("SLICE_KEY_PATH")
        ->required()
        ->check(CLI::ExistingFile);
    embed->add_option("--descriptors", embed_args.descriptors_path, "descriptor JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    embed->add_option("--out", embed_args.out_dir, "bundle directory to write")->required();
    embed->add_option("--layout", embed_args.layout, "partition layout spec");
    embed->add_option("--height", embed_args.height, "latent rows");
    embed->add_option("--width", embed_args.width, "latent cols");
    embed->add_option("--depth", embed_args.depth, "latent channels");
    embed->add_option("--prompt", embed_args.prompt, "conditioning prompt metadata");

    VerifyArgs verify_args;
    auto* verify = app.add_subcommand("verify", "verify a bundle and classify its state");
    verify->add_option("--key", verify_args.key_path, "key file")
        ->envname("SLICE_KEY_PATH")
        ->required()
        ->check(CLI::ExistingFile);
    verify->add_option("--bundle", verify_args.bundle_dir, "bundle directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    verify->add_option("--layout", verify_args.layout, "partition layout spec");
    verify->add_option("--tau-global", verify_args.tau_global, "global ratio threshold")
        ->check(CLI::Range(0.0, 1.0));
    verify->add_option("--tau-local", verify_args.tau_local,
                       "local distance threshold (one value or sub,env,act,det)");
    verify->add_option("--local-ratio", verify_args.local_ratio,
                       "local ratio threshold (one value or sub,env,act,det)");
    verify->add_option("--noise-sigma", verify_args.noise_sigma,
                       "stub inversion noise scale")
        ->check(CLI::NonNegativeNumber);
    std::uint64_t verify_seed = 0;
    auto* verify_seed_opt = verify->add_option("--seed", verify_seed, "noise stream seed");
    verify->add_option("--report", verify_args.report_path, "write the JSON report here");

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "run Monte-Carlo experiments");
    simulate->require_subcommand(1);
    auto add_sim_options = [&](CLI::App* cmd) {
        cmd->add_option("--config", sim_args.config_path, "experiment config JSON")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out-csv", sim_args.out_csv, "write per-trial CSV here");
        cmd->add_option("--out-summary", sim_args.out_summary, "write summary JSON here");
        cmd->add_option("--threads", sim_args.threads, "worker threads (0 = auto)");
    };
    auto* sim_localization = simulate->add_subcommand(
        "localization", "validate the match-ratio envelopes on compliant channels");
    add_sim_options(sim_localization);
    auto* sim_forgery =
        simulate->add_subcommand("forgery", "measure keyless false-accept rates vs bounds");
    add_sim_options(sim_forgery);

    BoundsArgs bounds_args;
    auto* bounds = app.add_subcommand("bounds", "closed-form bound calculators (CSV)");
    bounds->add_option("--thm", bounds_args.theorem, "1 = envelopes, 2 = false-accept")
        ->check(CLI::Range(1, 2));
    bounds->add_option("--q", bounds_args.q_list, "accidental-match probability (comma list)");
    bounds->add_option("--tau-g", bounds_args.tau_g_list, "global ratio threshold (comma list)");
    bounds->add_option("--hw", bounds_args.hw, "total grid positions");
    bounds->add_option("--tau-local", bounds_args.tau_local_list,
                       "local ratio threshold(s); selects the all-factors bound");
    bounds->add_option("--sizes", bounds_args.sizes, "four region sizes (comma list)");
    bounds->add_option("--beta", bounds_args.beta, "inversion outlier fraction");
    bounds->add_option("--epsilon", bounds_args.epsilon, "inversion error bound");
    bounds->add_option("--gamma", bounds_args.gamma, "drift outlier fraction");
    bounds->add_option("--delta", bounds_args.delta, "drift bound");
    bounds->add_option("--rho", bounds_args.rho, "corrupted fraction");
    bounds->add_option("--margin", bounds_args.margin, "corruption margin");
    bounds->add_option("--tampered", bounds_args.tampered, "tampered factors (comma list)");
    bounds->add_option("--layout", bounds_args.layout, "partition layout spec");
    bounds->add_option("--height", bounds_args.height, "grid rows");
    bounds->add_option("--width", bounds_args.width, "grid cols");
    bounds->add_option("--out", bounds_args.out_path, "CSV file to write (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*keygen) {
            if (keygen_seed_opt->count() > 0) keygen_args.seed = keygen_seed;
            return run_keygen(keygen_args);
        }
        if (*layout) return run_layout(layout_args);
        if (*embed) return run_embed(embed_args);
        if (*verify) {
            if (verify_seed_opt->count() > 0) verify_args.seed = verify_seed;
            return run_verify(verify_args);
        }
        if (*simulate) {
            if (*sim_localization) return run_simulate_localization(sim_args);
            if (*sim_forgery) return run_simulate_forgery(sim_args);
        }
        if (*bounds) return run_bounds(bounds_args);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
