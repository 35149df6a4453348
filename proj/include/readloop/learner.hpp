#pragma once

// Hidden learner state and matched cohort sampling.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "readloop/errors.hpp"
#include "readloop/ontology.hpp"
#include "readloop/rng.hpp"

namespace readloop {

struct ReaderProfile {
    double background_knowledge = 0.55;
    double vocabulary = 0.55;
    double inferencing = 0.55;
    double strategy_use = 0.55;
    double readability_ability = 9.0;  // Dale-Chall grade units
    friend bool operator==(const ReaderProfile&, const ReaderProfile&) = default;
};

struct ResponseProfile {
    double skepticism = 0.55;
    double revision_willingness = 0.55;
    double detail_preference = 0.55;
    double attention = 0.55;
    double guess_bias = 0.55;
    double noise_scale = 0.0;  // recorded only
    friend bool operator==(const ResponseProfile&, const ResponseProfile&) = default;
};

struct EpisodicTrace {
    std::string trace_id;
    std::string event_text;
    std::vector<std::string> kc_ids;
    double clarity = 0.0;
    double refutation_strength = 0.0;
    double readability = 0.0;
    int created_cycle = 0;
    int rehearsal_count = 0;
    double distortion = 0.0;
    friend bool operator==(const EpisodicTrace&, const EpisodicTrace&) = default;
};

/// Misconception weights keyed by KC, then misconception id.
using MisconceptionWeights = std::map<std::string, std::map<std::string, double>>;

struct HiddenLearnerState {
    std::string learner_id;
    std::map<std::string, double> correct_knowledge;  // m*
    MisconceptionWeights misconceptions;              // w
    ReaderProfile reader;
    ResponseProfile response;
    std::vector<EpisodicTrace> traces;
    std::uint64_t rng_seed = 0;
    Rng rng;  // the learner's own stream for reading and answering

    double mastery(const std::string& kc) const {
        auto it = correct_knowledge.find(kc);
        return it == correct_knowledge.end() ? 0.0 : it->second;
    }

    /// Strongest held misconception weight for a KC, 0 when none.
    double max_misconception(const std::string& kc) const {
        auto it = misconceptions.find(kc);
        if (it == misconceptions.end()) return 0.0;
        double w = 0.0;
        for (const auto& [id, weight] : it->second) w = std::max(w, weight);
        return w;
    }

    friend bool operator==(const HiddenLearnerState&, const HiddenLearnerState&) = default;
};

struct FieldDistribution {
    double mean = 0.55;
    double sd = 0.15;
    friend bool operator==(const FieldDistribution&, const FieldDistribution&) = default;
};

struct CohortSpec {
    int size = 50;
    std::uint64_t seed = 0;
    FieldDistribution background_knowledge, vocabulary, inferencing, strategy_use;
    FieldDistribution skepticism, revision_willingness, detail_preference, attention, guess_bias;
    FieldDistribution readability_ability{9.0, 1.5};
    double ability_min = 1.0;
    double ability_max = 16.0;
    double noise_scale = 0.0;
    double initial_mastery_min = 0.05;
    double initial_mastery_max = 0.3;
    double misconception_prevalence = 0.5;
    double misconception_weight_min = 0.4;
    double misconception_weight_max = 0.8;
    std::vector<std::string> kc_ids;  // empty: every ontology KC

    void validate() const {
        if (size <= 0) throw Error("cohort size must be positive");
        if (misconception_prevalence < 0.0 || misconception_prevalence > 1.0) throw Error("misconception prevalence must lie in [0, 1]");
        if (initial_mastery_min > initial_mastery_max || misconception_weight_min > misconception_weight_max || ability_min > ability_max)
            throw Error("cohort ranges must have min <= max");
        if (noise_scale < 0.0) throw Error("noise_scale must be non-negative");
    }
    friend bool operator==(const CohortSpec&, const CohortSpec&) = default;
};

struct Cohort {
    std::string condition;
    std::vector<HiddenLearnerState> learners;
    friend bool operator==(const Cohort&, const Cohort&) = default;
};

inline HiddenLearnerState sample_learner(const CohortSpec& spec, const Ontology& o, std::size_t index) {
    HiddenLearnerState s;
    s.learner_id = "L" + std::to_string(index + 1);
    s.rng_seed = derive_seed(spec.seed, index);
    Rng draw(derive_seed(s.rng_seed, 0));
    auto unit = [&](const FieldDistribution& d) { return draw.truncated_normal(d.mean, d.sd, 0.0, 1.0); };
    s.reader.background_knowledge = unit(spec.background_knowledge);
    s.reader.vocabulary = unit(spec.vocabulary);
    s.reader.inferencing = unit(spec.inferencing);
    s.reader.strategy_use = unit(spec.strategy_use);
    s.reader.readability_ability = draw.truncated_normal(spec.readability_ability.mean, spec.readability_ability.sd, spec.ability_min, spec.ability_max);
    s.response.skepticism = unit(spec.skepticism);
    s.response.revision_willingness = unit(spec.revision_willingness);
    s.response.detail_preference = unit(spec.detail_preference);
    s.response.attention = unit(spec.attention);
    s.response.guess_bias = unit(spec.guess_bias);
    s.response.noise_scale = spec.noise_scale;

    auto seed_kc = [&](const KnowledgeComponent& k) {
        s.correct_knowledge[k.id] = draw.uniform(spec.initial_mastery_min, spec.initial_mastery_max);
        if (k.misconceptions.empty()) return;
        if (!draw.bernoulli(spec.misconception_prevalence)) return;
        const auto& m = k.misconceptions[draw.below(k.misconceptions.size())];
        s.misconceptions[k.id][m.id] = draw.uniform(spec.misconception_weight_min, spec.misconception_weight_max);
    };
    if (spec.kc_ids.empty()) {
        for (const auto& k : o.knowledge_components) seed_kc(k);
    } else {
        for (const auto& id : spec.kc_ids) {
            const auto* k = o.find_kc(id);
            if (!k) throw Error("cohort spec references unknown knowledge component " + id);
            seed_kc(*k);
        }
    }
    s.rng = Rng(derive_seed(s.rng_seed, 1));
    return s;
}

/// Each learner draws from a stream derived from (seed, index) alone.
inline Cohort sample_cohort(const CohortSpec& spec, const Ontology& o) {
    spec.validate();
    Cohort c;
    c.condition = "base";
    c.learners.reserve(static_cast<std::size_t>(spec.size));
    for (std::size_t i = 0; i < static_cast<std::size_t>(spec.size); ++i) c.learners.push_back(sample_learner(spec, o, i));
    return c;
}

inline Cohort clone_for_condition(const Cohort& cohort, std::string condition) {
    Cohort copy = cohort;
    copy.condition = std::move(condition);
    return copy;
}

inline nlohmann::ordered_json to_json(const EpisodicTrace& t) {
    return {{"trace_id", t.trace_id},       {"event_text", t.event_text},
            {"kc_ids", t.kc_ids},           {"clarity", t.clarity},
            {"refutation_strength", t.refutation_strength}, {"readability", t.readability},
            {"created_cycle", t.created_cycle}, {"rehearsal_count", t.rehearsal_count},
            {"distortion", t.distortion}};
}

/// Audit snapshot of a learner; the RNG position is not included.
inline nlohmann::ordered_json to_json(const HiddenLearnerState& s) {
    nlohmann::ordered_json j;
    j["learner_id"] = s.learner_id;
    j["rng_seed"] = s.rng_seed;
    j["reader"] = {{"background_knowledge", s.reader.background_knowledge}, {"vocabulary", s.reader.vocabulary},
                   {"inferencing", s.reader.inferencing},                   {"strategy_use", s.reader.strategy_use},
                   {"readability_ability", s.reader.readability_ability}};
    j["response"] = {{"skepticism", s.response.skepticism}, {"revision_willingness", s.response.revision_willingness},
                     {"detail_preference", s.response.detail_preference}, {"attention", s.response.attention},
                     {"guess_bias", s.response.guess_bias}, {"noise_scale", s.response.noise_scale}};
    j["correct_knowledge"] = s.correct_knowledge;
    j["misconceptions"] = s.misconceptions;
    j["traces"] = nlohmann::ordered_json::array();
    for (const auto& t : s.traces) j["traces"].push_back(to_json(t));
    return j;
}

}  // namespace readloop
