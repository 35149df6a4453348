#pragma once

// Two-stage reading update: textbase encoding, then integration into the
// learner's knowledge and misconception weights.

#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "readloop/content.hpp"
#include "readloop/errors.hpp"
#include "readloop/learner.hpp"
#include "readloop/readability.hpp"

namespace readloop {

struct ComprehensionParams {
    double alpha = -1.2;
    // vocabulary, inferencing, strategy_use, background_knowledge
    std::array<double, 4> beta{0.5, 0.45, 0.35, 0.5};
    double clarity_coeff = 1.1;
    double match_coeff = 0.55;
    double novelty_coeff = 0.3;
    double attention_coeff = 0.35;
    double gain_base = 0.35;
    double refresh_multiplier = 0.4;
    double distortion_rate = 0.05;

    void validate() const {
        if (!(refresh_multiplier > 0.0 && refresh_multiplier < 1.0)) throw Error("refresh_multiplier must lie in (0, 1)");
        if (distortion_rate < 0.0) throw Error("distortion_rate must be non-negative");
        if (gain_base < 0.0 || gain_base > 1.0) throw Error("gain_base must lie in [0, 1]");
    }
    friend bool operator==(const ComprehensionParams&, const ComprehensionParams&) = default;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double mean_mastery(const HiddenLearnerState& learner, std::span<const std::string> kc_ids) {
    if (kc_ids.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& kc : kc_ids) sum += learner.mastery(kc);
    return sum / static_cast<double>(kc_ids.size());
}

/// Logit of the encoding probability.
inline double encoding_logit(const HiddenLearnerState& learner, const TeachingEvent& event, double match, const ComprehensionParams& params) {
    if (event.kc_ids.empty()) throw Error("teaching event " + event.proposition_id + " has no KC links");
    const auto& r = learner.reader;
    const double reader_term = params.beta[0] * r.vocabulary + params.beta[1] * r.inferencing + params.beta[2] * r.strategy_use +
                               params.beta[3] * r.background_knowledge;
    const double m_bar = mean_mastery(learner, event.kc_ids);
    return params.alpha + params.clarity_coeff * event.clarity + params.match_coeff * match + reader_term +
           params.novelty_coeff * (1.0 - m_bar) + params.attention_coeff * learner.response.attention;
}

inline double encoding_probability(const HiddenLearnerState& learner, const TeachingEvent& event, double match, const ComprehensionParams& params) {
    return sigmoid(encoding_logit(learner, event, match, params));
}

/// Integration gain for one encoded event.
inline double integration_gain(const HiddenLearnerState& learner, const TeachingEvent& event, double match, const ComprehensionParams& params) {
    double gain = params.gain_base * event.clarity * (0.5 + 0.5 * std::max(match, 0.0)) *
                  (0.5 + 0.25 * learner.response.revision_willingness + 0.25 * learner.response.detail_preference);
    if (event.is_refresh) gain *= params.refresh_multiplier;
    return gain;
}

struct ReadingOutcome {
    int events_encoded = 0;
    std::vector<std::string> traces_created;
    std::map<std::string, double> mastery_deltas;   // >= 0
    MisconceptionWeights misconception_deltas;      // <= 0
    friend bool operator==(const ReadingOutcome&, const ReadingOutcome&) = default;
};

/// Reads the events of one passage. Each event costs one uniform draw from
/// the learner's stream, plus two normals' worth when it is encoded.
inline ReadingOutcome read_passage(HiddenLearnerState& learner, const ReadingPassage& passage, const std::vector<TeachingEvent>& events,
                                   const ComprehensionParams& params, int cycle) {
    if (cycle < 0) throw Error("cycle must be non-negative");
    params.validate();
    const double match = match_score(learner.reader.readability_ability, passage.readability.value);
    ReadingOutcome out;
    for (const auto& e : events) {
        const double p = encoding_probability(learner, e, match, params);
        if (!learner.rng.bernoulli(p)) continue;
        ++out.events_encoded;

        EpisodicTrace t;
        t.trace_id = learner.learner_id + ".t" + std::to_string(learner.traces.size() + 1);
        t.event_text = e.text;
        t.kc_ids = e.kc_ids;
        t.clarity = e.clarity;
        t.refutation_strength = e.refutation_strength;
        t.readability = passage.readability.value;
        t.created_cycle = cycle;
        t.distortion = std::abs(learner.rng.normal(0.0, params.distortion_rate));
        out.traces_created.push_back(t.trace_id);

        const double gain = integration_gain(learner, e, match, params);
        for (const auto& kc : e.kc_ids) {
            double& m = learner.correct_knowledge[kc];
            const double before = m;
            m = std::clamp(m + gain * (1.0 - m), 0.0, 1.0);
            out.mastery_deltas[kc] += m - before;
        }
        const double reduction = e.refutation_strength * gain * (1.0 - learner.response.skepticism / 2.0);
        if (reduction > 0.0) {
            for (const auto& kc : e.kc_ids) {
                auto it = learner.misconceptions.find(kc);
                if (it == learner.misconceptions.end()) continue;
                for (auto& [id, w] : it->second) {
                    const double before = w;
                    w = std::clamp(w * (1.0 - reduction), 0.0, 1.0);
                    out.misconception_deltas[kc][id] += w - before;
                }
            }
        }
        learner.traces.push_back(std::move(t));
    }
    return out;
}

}  // namespace readloop
