#pragma once

// Run configuration files.
//
//   subject_id: computer_science
//   ontology: ../data/ontologies/computer_science.yaml   # relative to this file
//   familiar_words: ../data/familiar_words.txt
//   bundles: [../data/bundles/computer_science.yaml]     # or a synthesis block
//   synthesis: {refutation_emphasis: 1.0, vocabulary_levels: 3}
//   lo_ids: [cs_lo07_1, cs_lo07_2]
//   cycles: 3
//   items_per_cycle: 3
//   cohort: {size: 50, misconception_prevalence: 0.6, readability_ability: {mean: 9, sd: 1.5}}
//   policy: {tier_cuts: [0.25, 0.5, 0.75], review_threshold: 0.6}
//   control: {support_tier: 0.5, target_readability: 11}
//   comprehension: {alpha: -1.2, beta: [0.5, 0.45, 0.35, 0.5], gain_base: 0.35}
//   assessment: {interior: [0.02, 0.98], difficulty_offsets: {easy: -0.4, medium: 0, hard: 0.6}}
//   bkt: {p_init: 0.25, p_learn: 0.2, p_guess: 0.2, p_slip: 0.1}
//
// Every block is optional except ontology, lo_ids and one content source.

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "readloop/content.hpp"
#include "readloop/errors.hpp"
#include "readloop/experiment.hpp"

namespace readloop {

struct RunConfig {
    ExperimentConfig experiment;
    std::filesystem::path ontology;
    std::filesystem::path familiar_words;
    std::vector<std::filesystem::path> bundles;
    std::optional<SynthesisSpec> synthesis;
    std::optional<std::uint64_t> synthesis_seed;
};

namespace detail {

inline void known_keys(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> keys) {
    if (!n.IsMap()) throw SchemaError(path, "expected a mapping");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.contains(key)) throw SchemaError(path.empty() ? key : path + "." + key, "unknown setting");
    }
}

template <typename T>
void read(const YAML::Node& n, const char* key, const std::string& path, T& out) {
    const YAML::Node v = n[key];
    if (!v || v.IsNull()) return;
    try {
        out = v.as<T>();
    } catch (const YAML::BadConversion&) {
        throw SchemaError(path.empty() ? key : path + "." + key, "has the wrong type");
    }
}

inline void read_dist(const YAML::Node& n, const char* key, const std::string& path, FieldDistribution& d) {
    const YAML::Node v = n[key];
    if (!v || v.IsNull()) return;
    const std::string p = path + "." + key;
    known_keys(v, p, {"mean", "sd"});
    read(v, "mean", p, d.mean);
    read(v, "sd", p, d.sd);
}

inline void read_pair(const YAML::Node& n, const char* key, const std::string& path, double& a, double& b) {
    const YAML::Node v = n[key];
    if (!v || v.IsNull()) return;
    if (!v.IsSequence() || v.size() != 2) throw SchemaError(path + "." + key, "expected a two-element list");
    try {
        a = v[0].as<double>();
        b = v[1].as<double>();
    } catch (const YAML::BadConversion&) {
        throw SchemaError(path + "." + key, "expected numbers");
    }
}

}  // namespace detail

inline SynthesisSpec parse_synthesis_spec(const YAML::Node& n, const std::string& path) {
    using namespace detail;
    known_keys(n, path,
               {"lo_ids", "kc_ids", "cycles", "items_per_cycle", "depth", "example_density", "refutation_emphasis", "difficulty", "support_tiers",
                "vocabulary_levels", "review_snippets", "seed"});
    SynthesisSpec s;
    read(n, "lo_ids", path, s.lo_ids);
    read(n, "kc_ids", path, s.kc_ids);
    read(n, "cycles", path, s.cycles);
    read(n, "items_per_cycle", path, s.items_per_cycle);
    read(n, "depth", path, s.depth);
    read(n, "example_density", path, s.example_density);
    read(n, "refutation_emphasis", path, s.refutation_emphasis);
    read(n, "difficulty", path, s.difficulty);
    read(n, "support_tiers", path, s.support_tiers);
    read(n, "vocabulary_levels", path, s.vocabulary_levels);
    read(n, "review_snippets", path, s.review_snippets);
    return s;
}

inline RunConfig parse_run_config(std::string_view document, const std::filesystem::path& base_dir) {
    using namespace detail;
    const YAML::Node root = load_yaml(document);
    known_keys(root, "",
               {"subject_id", "ontology", "familiar_words", "bundles", "synthesis", "lo_ids", "cycles", "items_per_cycle", "cohort", "policy", "control",
                "comprehension", "assessment", "bkt", "bootstrap_resamples", "retain_hidden_trajectories", "threads"});
    RunConfig rc;
    auto& e = rc.experiment;
    auto resolve = [&](const std::string& p) { return std::filesystem::path(p).is_absolute() ? std::filesystem::path(p) : base_dir / p; };

    read(root, "subject_id", "", e.subject_id);
    rc.ontology = resolve(scalar(root, "ontology", ""));
    std::string words = "familiar_words.txt";
    read(root, "familiar_words", "", words);
    rc.familiar_words = resolve(words);
    std::vector<std::string> bundles;
    read(root, "bundles", "", bundles);
    for (const auto& b : bundles) rc.bundles.push_back(resolve(b));
    if (const YAML::Node s = root["synthesis"]; s && !s.IsNull()) {
        rc.synthesis = parse_synthesis_spec(s, "synthesis");
        if (s["seed"]) rc.synthesis_seed = s["seed"].as<std::uint64_t>();
    }
    if (rc.bundles.empty() && !rc.synthesis) throw SchemaError("bundles", "either bundles or synthesis is required");

    e.lo_ids = string_list(root, "lo_ids", "");
    read(root, "cycles", "", e.cycles);
    read(root, "items_per_cycle", "", e.items_per_cycle);
    read(root, "bootstrap_resamples", "", e.bootstrap_resamples);
    read(root, "retain_hidden_trajectories", "", e.retain_hidden_trajectories);
    read(root, "threads", "", e.threads);

    if (const YAML::Node c = root["cohort"]; c && !c.IsNull()) {
        const std::string p = "cohort";
        known_keys(c, p,
                   {"size", "background_knowledge", "vocabulary", "inferencing", "strategy_use", "skepticism", "revision_willingness", "detail_preference",
                    "attention", "guess_bias", "readability_ability", "ability_range", "noise_scale", "initial_mastery_range", "misconception_prevalence",
                    "misconception_weight_range"});
        auto& s = e.cohort;
        read(c, "size", p, s.size);
        for (auto [key, field] : std::initializer_list<std::pair<const char*, FieldDistribution*>>{
                 {"background_knowledge", &s.background_knowledge}, {"vocabulary", &s.vocabulary}, {"inferencing", &s.inferencing},
                 {"strategy_use", &s.strategy_use}, {"skepticism", &s.skepticism}, {"revision_willingness", &s.revision_willingness},
                 {"detail_preference", &s.detail_preference}, {"attention", &s.attention}, {"guess_bias", &s.guess_bias},
                 {"readability_ability", &s.readability_ability}})
            read_dist(c, key, p, *field);
        read_pair(c, "ability_range", p, s.ability_min, s.ability_max);
        read(c, "noise_scale", p, s.noise_scale);
        read_pair(c, "initial_mastery_range", p, s.initial_mastery_min, s.initial_mastery_max);
        read(c, "misconception_prevalence", p, s.misconception_prevalence);
        read_pair(c, "misconception_weight_range", p, s.misconception_weight_min, s.misconception_weight_max);
    }
    if (const YAML::Node n = root["policy"]; n && !n.IsNull()) {
        known_keys(n, "policy", {"tier_cuts", "review_threshold"});
        std::vector<double> cuts;
        read(n, "tier_cuts", "policy", cuts);
        if (!cuts.empty()) {
            if (cuts.size() != 3 || !std::ranges::is_sorted(cuts)) throw SchemaError("policy.tier_cuts", "expected three increasing cut points");
            std::copy(cuts.begin(), cuts.end(), e.thresholds.tier_cuts.begin());
        }
        read(n, "review_threshold", "policy", e.thresholds.review);
    }
    if (const YAML::Node n = root["control"]; n && !n.IsNull()) {
        known_keys(n, "control", {"support_tier", "target_readability"});
        double tier = e.control.depth;
        read(n, "support_tier", "control", tier);
        e.control.depth = e.control.example_density = e.control.refutation_emphasis = tier;
        read(n, "target_readability", "control", e.control.target_readability);
    }
    if (const YAML::Node n = root["comprehension"]; n && !n.IsNull()) {
        const std::string p = "comprehension";
        known_keys(n, p, {"alpha", "beta", "gain_base", "refresh_multiplier", "distortion_rate"});
        auto& c = e.comprehension;
        read(n, "alpha", p, c.alpha);
        std::vector<double> beta;
        read(n, "beta", p, beta);
        if (!beta.empty()) {
            if (beta.size() != 4) throw SchemaError("comprehension.beta", "expected four values");
            std::copy(beta.begin(), beta.end(), c.beta.begin());
        }
        read(n, "gain_base", p, c.gain_base);
        read(n, "refresh_multiplier", p, c.refresh_multiplier);
        read(n, "distortion_rate", p, c.distortion_rate);
    }
    if (const YAML::Node n = root["assessment"]; n && !n.IsNull()) {
        const std::string p = "assessment";
        known_keys(n, p, {"interior", "difficulty_offsets", "recency_decay", "activation_floor", "misconception_bonus", "guess_noise"});
        auto& a = e.assessment;
        read_pair(n, "interior", p, a.interior_lo, a.interior_hi);
        if (const YAML::Node d = n["difficulty_offsets"]; d && !d.IsNull()) {
            known_keys(d, p + ".difficulty_offsets", {"easy", "medium", "hard"});
            read(d, "easy", p, a.offsets.easy);
            read(d, "medium", p, a.offsets.medium);
            read(d, "hard", p, a.offsets.hard);
        }
        read(n, "recency_decay", p, a.recency_decay);
        read(n, "activation_floor", p, a.activation_floor);
        read(n, "misconception_bonus", p, a.misconception_bonus);
        read(n, "guess_noise", p, a.guess_noise);
    }
    if (const YAML::Node n = root["bkt"]; n && !n.IsNull()) {
        known_keys(n, "bkt", {"p_init", "p_learn", "p_guess", "p_slip"});
        read(n, "p_init", "bkt", e.bkt.p_init);
        read(n, "p_learn", "bkt", e.bkt.p_learn);
        read(n, "p_guess", "bkt", e.bkt.p_guess);
        read(n, "p_slip", "bkt", e.bkt.p_slip);
    }
    if (rc.synthesis) {
        if (rc.synthesis->lo_ids.empty()) rc.synthesis->lo_ids = e.lo_ids;
        rc.synthesis->cycles = std::max(rc.synthesis->cycles, e.cycles);
        rc.synthesis->items_per_cycle = std::max(rc.synthesis->items_per_cycle, e.items_per_cycle);
    }
    return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(read_text_file(path), path.parent_path());
}

struct LoadedRun {
    RunConfig config;
    Ontology ontology;
    FamiliarWordList words;
    ContentBundle bundle;
};

/// Loads the ontology and content a config points at. The master seed is
/// applied before synthesis so synthesized content follows it by default.
inline LoadedRun load_run(RunConfig rc, std::uint64_t master_seed) {
    rc.experiment.master_seed = master_seed;
    LoadedRun run;
    run.ontology = parse_ontology(read_text_file(rc.ontology));
    run.words = FamiliarWordList::load(rc.familiar_words);
    if (!rc.bundles.empty()) {
        run.bundle = ingest_bundle(rc.bundles, run.ontology, run.words);
    } else {
        run.bundle = synthesize_bundle(run.ontology, *rc.synthesis, rc.synthesis_seed.value_or(master_seed), run.words);
    }
    if (rc.experiment.subject_id.empty()) rc.experiment.subject_id = run.ontology.subject_id;
    run.config = std::move(rc);
    return run;
}

}  // namespace readloop
