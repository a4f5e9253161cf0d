#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "slice/simulation.hpp"
#include "slice/simulation_io.hpp"

using namespace slice;
using Catch::Matchers::WithinAbs;

namespace {

ChannelParams uniform_channel(double beta, double eps, double gamma, double delta, double rho,
                              double margin, FactorSet tampered) {
    ChannelParams p;
    p.inversion_outlier_frac = FactorMap<double>(beta);
    p.inversion_error_bound = FactorMap<double>(eps);
    p.drift_outlier_frac = FactorMap<double>(gamma);
    p.drift_bound = FactorMap<double>(delta);
    p.corrupted_frac = FactorMap<double>(rho);
    p.corruption_margin = FactorMap<double>(margin);
    p.tampered = tampered;
    return p;
}

LatentGrid test_latent(std::uint32_t h, std::uint32_t w, std::uint32_t d, std::uint64_t seed) {
    LatentGrid g(h, w, d);
    StreamRng rng(seed, 77);
    for (double& v : g.values()) v = rng.normal();
    return g;
}

ExperimentConfig small_localization_config() {
    ExperimentConfig c;
    c.h = 16;
    c.w = 16;
    c.d = 4;
    c.channel = uniform_channel(0.05, 0.3, 0.05, 0.3, 0.9, 2.0, FactorSet::of({FactorKey::Action}));
    c.thresholds.tau_global = 0.6;
    c.thresholds.tau_local = FactorMap<double>(1.0);
    c.local_ratio_thresholds = FactorMap<double>(0.5);
    c.trials = 40;
    c.master_seed = 20240901;
    return c;
}

}  // namespace

TEST_CASE("simulate_inversion honors the channel contract") {
    auto layout = build_layout(16, 16, LayoutSpec::quadrant());
    auto z_T = test_latent(16, 16, 4, 5);

    SECTION("zero outlier mass keeps every error small") {
        auto params = uniform_channel(0.0, 0.3, 0.0, 0.0, 0.0, 0.0, {});
        StreamRng rng(1, 0);
        auto z_inv = simulate_inversion(z_T, params, layout, rng, 10.0, 20.0);
        for (std::uint32_t i = 0; i < 16; ++i)
            for (std::uint32_t j = 0; j < 16; ++j)
                REQUIRE(pointwise_distance(z_inv, z_T, {i, j}) <= 0.3 + 1e-12);
    }

    SECTION("zero channel reproduces the latent exactly") {
        auto params = uniform_channel(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, {});
        StreamRng rng(2, 0);
        auto z_inv = simulate_inversion(z_T, params, layout, rng, 10.0, 20.0);
        CHECK(z_inv == z_T);
    }

    SECTION("fixed stream gives identical bytes") {
        auto params = uniform_channel(0.1, 0.3, 0.0, 0.0, 0.0, 0.0, {});
        StreamRng rng_a(3, 9), rng_b(3, 9);
        auto a = simulate_inversion(z_T, params, layout, rng_a, 10.0, 20.0);
        auto b = simulate_inversion(z_T, params, layout, rng_b, 10.0, 20.0);
        CHECK(encode_slce(a) == encode_slce(b));
    }

    SECTION("outlier set sizes satisfy the assumed inequality post-hoc") {
        auto params = uniform_channel(0.17, 0.25, 0.0, 0.0, 0.0, 0.0, {});
        StreamRng rng(4, 0);
        auto z_inv = simulate_inversion(z_T, params, layout, rng, 10.0, 20.0);
        for (FactorKey k : kAllFactors) {
            auto positions = region_positions(layout, k);
            std::size_t small = 0;
            for (Position p : positions)
                if (pointwise_distance(z_inv, z_T, p) <= 0.25 + 1e-12) ++small;
            double required = std::ceil((1.0 - 0.17) * double(positions.size()));
            REQUIRE(double(small) >= required);
        }
    }
}

TEST_CASE("simulate_reextraction honors the channel contract") {
    auto layout = build_layout(16, 16, LayoutSpec::quadrant());
    auto z_T = test_latent(16, 16, 4, 6);

    SECTION("zero drift reproduces the latent exactly") {
        auto params = uniform_channel(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, {});
        StreamRng rng(5, 0);
        CHECK(simulate_reextraction(z_T, params, layout, rng, 10.0, 20.0) == z_T);
    }

    SECTION("a fully corrupted factor is displaced by at least its margin") {
        auto params =
            uniform_channel(0.0, 0.0, 0.0, 0.0, 1.0, 2.0, FactorSet::of({FactorKey::Action}));
        StreamRng rng(6, 0);
        auto z_ref = simulate_reextraction(z_T, params, layout, rng, 10.0, 20.0);
        for (Position p : region_positions(layout, FactorKey::Action))
            REQUIRE(pointwise_distance(z_ref, z_T, p) >= 2.0 - 1e-12);
        for (Position p : region_positions(layout, FactorKey::Subject))
            REQUIRE(pointwise_distance(z_ref, z_T, p) == 0.0);
    }

    SECTION("fixed stream gives identical bytes") {
        auto params =
            uniform_channel(0.0, 0.0, 0.1, 0.4, 0.8, 2.0, FactorSet::of({FactorKey::Detail}));
        StreamRng rng_a(7, 3), rng_b(7, 3);
        auto a = simulate_reextraction(z_T, params, layout, rng_a, 10.0, 20.0);
        auto b = simulate_reextraction(z_T, params, layout, rng_b, 10.0, 20.0);
        CHECK(encode_slce(a) == encode_slce(b));
    }
}

TEST_CASE("localization experiment: compliant channels never violate the envelopes") {
    auto config = small_localization_config();
    auto report = run_localization_experiment(config, 2);

    CHECK(report.total_violations == 0);
    CHECK(report.global_violations == 0);
    for (FactorKey k : kAllFactors) CHECK(report.factor_violations[k] == 0);

    // Bound values for this config.
    CHECK_THAT(report.factor_bounds[FactorKey::Subject].value, WithinAbs(0.90, 1e-12));
    CHECK_THAT(report.factor_bounds[FactorKey::Action].value, WithinAbs(0.15, 1e-12));
    CHECK_THAT(report.global_bounds.lower, WithinAbs(0.675, 1e-12));
    CHECK_THAT(report.global_bounds.upper, WithinAbs(0.7875, 1e-12));

    // Every trial lands in State II: global evidence survives, the
    // tampered factor fails locally.
    CHECK(report.state_counts[0] == 0);
    CHECK(report.state_counts[1] == config.trials);
    CHECK(report.state_counts[2] == 0);

    // Envelope sanity on the observed ranges.
    for (FactorKey k : {FactorKey::Subject, FactorKey::Environment, FactorKey::Detail})
        CHECK(report.factor_stats[k].min >= 0.90);
    CHECK(report.factor_stats[FactorKey::Action].max <= 0.15);
    CHECK(report.global_stats.min >= 0.675);
    CHECK(report.global_stats.max <= 0.7875);
}

TEST_CASE("localization experiment: zero-noise channel is State I everywhere") {
    auto config = small_localization_config();
    config.channel = uniform_channel(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, {});
    config.trials = 10;
    auto report = run_localization_experiment(config, 1);
    CHECK(report.state_counts[0] == 10);
    CHECK(report.global_stats.min == 1.0);
    CHECK(report.total_violations == 0);
}

TEST_CASE("localization experiment refuses out-of-window thresholds") {
    auto config = small_localization_config();
    config.thresholds.tau_local = FactorMap<double>(0.5);  // below eps + delta = 0.6
    CHECK_THROWS_AS(run_localization_experiment(config, 1), Error);

    config = small_localization_config();
    config.thresholds.tau_local[FactorKey::Action] = 1.8;  // above margin - eps = 1.7
    CHECK_THROWS_AS(run_localization_experiment(config, 1), Error);

    config = small_localization_config();
    config.gross_lo = 1.2;  // cannot separate gross errors from matches
    CHECK_THROWS_AS(run_localization_experiment(config, 1), Error);
}

TEST_CASE("adversarial placement pins untampered ratios to the envelope floor") {
    auto config = small_localization_config();
    config.placement = PlacementMode::AdversarialDisjoint;
    config.trials = 20;
    auto report = run_localization_experiment(config, 2);

    CHECK(report.total_violations == 0);
    // Quadrant regions hold 64 positions; the outlier sets have floor(0.05*64) = 3
    // positions each and are disjoint, so every untampered trial ratio is
    // exactly 1 - 6/64.
    for (FactorKey k : {FactorKey::Subject, FactorKey::Environment, FactorKey::Detail}) {
        CHECK_THAT(report.factor_stats[k].min, WithinAbs(1.0 - 6.0 / 64.0, 1e-12));
        CHECK_THAT(report.factor_stats[k].max, WithinAbs(1.0 - 6.0 / 64.0, 1e-12));
        CHECK(report.factor_stats[k].min - 0.90 <= 1.0 / 64.0);
        CHECK(report.factor_stats[k].min >= 0.90);
    }
}

TEST_CASE("experiment reports are independent of thread count") {
    auto config = small_localization_config();
    config.trials = 12;
    auto serial = run_localization_experiment(config, 1);
    auto parallel = run_localization_experiment(config, 4);
    CHECK(localization_trials_csv(serial) == localization_trials_csv(parallel));
    CHECK(localization_summary_json(serial).dump(2) == localization_summary_json(parallel).dump(2));
}

TEST_CASE("forgery experiment respects the Chernoff limits") {
    ForgeryConfig config;
    config.h = 8;
    config.w = 8;
    config.q = 0.2;
    config.tau_global = 0.3;
    config.tau_local_ratio = FactorMap<double>(0.3);
    config.trials = 20000;
    config.master_seed = 11;
    auto report = run_forgery_experiment(config, 2);

    CHECK(report.presence_bound.applicable);
    CHECK_THAT(report.presence_bound.bound, WithinAbs(0.16490, 1e-4));
    CHECK(report.presence_pass);
    CHECK(report.state1_pass);
    CHECK(report.p_presence <= report.presence_limit);
    // The true binomial tail is far below the Chernoff envelope.
    CHECK(report.p_presence < 0.06);
    CHECK(report.p_state1 <= report.p_presence);
}

TEST_CASE("forgery experiment handles an inapplicable hypothesis") {
    ForgeryConfig config;
    config.q = 0.999;
    config.tau_global = 0.3;
    config.tau_local_ratio = FactorMap<double>(0.3);
    config.trials = 500;
    config.master_seed = 3;
    auto report = run_forgery_experiment(config, 1);
    CHECK_FALSE(report.presence_bound.applicable);
    CHECK(report.presence_bound.bound == 1.0);
    CHECK(report.p_presence > 0.99);
    CHECK(report.presence_pass);  // a vacuous bound cannot be exceeded
}

TEST_CASE("forgery on a large grid never accepts under a deep bound") {
    // exp(-4096 * D(0.3||0.1)) is ~1e-274; no trial can clear the
    // global threshold.
    ForgeryConfig config;
    config.h = 64;
    config.w = 64;
    config.q = 0.1;
    config.tau_global = 0.3;
    config.tau_local_ratio = FactorMap<double>(0.3);
    config.trials = 100000;
    config.master_seed = 5;
    auto report = run_forgery_experiment(config, 2);
    CHECK(report.presence_accepts == 0);
    CHECK(report.state1_accepts == 0);
    CHECK(report.presence_bound.log_bound < -600.0);
    CHECK(report.presence_pass);
}

TEST_CASE("emitted trial CSV re-parses into the records that produced it") {
    auto config = small_localization_config();
    config.trials = 25;
    auto report = run_localization_experiment(config, 2);
    auto csv = localization_trials_csv(report);

    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t nl = csv.find('\n', pos);
        lines.push_back(csv.substr(pos, nl - pos));
        pos = nl + 1;
    }
    REQUIRE(lines.size() == config.trials + 1);

    for (std::size_t row = 1; row < lines.size(); ++row) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        const std::string& line = lines[row];
        while (true) {
            std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        REQUIRE(cells.size() == 12);
        const TrialRecord& rec = report.trials[row - 1];
        CHECK(std::stoul(cells[0]) == rec.trial);
        for (FactorKey k : kAllFactors)
            CHECK_THAT(std::stod(cells[1 + factor_index(k)]),
                       WithinAbs(rec.m_local[k], 5e-7));
        CHECK_THAT(std::stod(cells[5]), WithinAbs(rec.m_global, 5e-7));
        CHECK(parse_verification_state(cells[6]) == rec.state);
        for (FactorKey k : kAllFactors)
            CHECK((cells[7 + factor_index(k)] == "1") == rec.factor_violation[k]);
        CHECK((cells[11] == "1") == rec.global_violation);
    }
}

TEST_CASE("forgery experiment is reproducible across thread counts") {
    ForgeryConfig config;
    config.trials = 4000;
    config.master_seed = 17;
    config.keep_trials = true;
    auto a = run_forgery_experiment(config, 1);
    auto b = run_forgery_experiment(config, 4);
    CHECK(a.presence_accepts == b.presence_accepts);
    CHECK(a.state1_accepts == b.state1_accepts);
    CHECK(forgery_trials_csv(a) == forgery_trials_csv(b));
    CHECK(forgery_summary_json(a).dump() == forgery_summary_json(b).dump());
}

TEST_CASE("experiment configs round-trip through JSON") {
    auto config = small_localization_config();
    config.placement = PlacementMode::AdversarialDisjoint;
    config.channel.inversion_outlier_frac[FactorKey::Detail] = 0.11;
    auto j = experiment_config_to_json(config);
    auto parsed = experiment_config_from_json(j);
    CHECK(experiment_config_to_json(parsed).dump(2) == j.dump(2));

    ForgeryConfig forgery;
    forgery.q = 0.25;
    forgery.trials = 123;
    forgery.master_seed = 99;
    auto fj = forgery_config_to_json(forgery);
    auto fparsed = forgery_config_from_json(fj);
    CHECK(forgery_config_to_json(fparsed).dump(2) == fj.dump(2));
}

TEST_CASE("config parsing accepts scalars and per-factor objects") {
    Json scalar = 0.25;
    auto from_scalar = factor_map_from_json(scalar, "x");
    for (FactorKey k : kAllFactors) CHECK(from_scalar[k] == 0.25);

    Json per_factor = {{"sub", 0.1}, {"env", 0.2}, {"act", 0.3}, {"det", 0.4}};
    auto from_object = factor_map_from_json(per_factor, "x");
    CHECK(from_object[FactorKey::Subject] == 0.1);
    CHECK(from_object[FactorKey::Detail] == 0.4);

    Json missing = {{"sub", 0.1}};
    CHECK_THROWS_AS(factor_map_from_json(missing, "x"), Error);

    Json bad_placement = experiment_config_to_json(small_localization_config());
    bad_placement["placement"] = "sideways";
    CHECK_THROWS_AS(experiment_config_from_json(bad_placement), Error);
}

TEST_CASE("trial CSV layout") {
    auto config = small_localization_config();
    config.trials = 3;
    auto report = run_localization_experiment(config, 1);
    auto csv = localization_trials_csv(report);
    CHECK(csv.rfind("trial,m_sub,m_env,m_act,m_det,m_global,state,"
                    "viol_sub,viol_env,viol_act,viol_det,viol_global\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rows
}
