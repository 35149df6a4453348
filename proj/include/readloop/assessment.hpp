#pragma once

// Answering items from memory: trace retrieval, response utility, correctness
// probability and distractor choice.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "readloop/comprehension.hpp"
#include "readloop/content.hpp"
#include "readloop/errors.hpp"
#include "readloop/learner.hpp"
#include "readloop/text.hpp"

namespace readloop {

struct DifficultyOffsets {
    double easy = -0.4;
    double medium = 0.0;
    double hard = 0.6;

    double at(DifficultyBand b) const {
        switch (b) {
            case DifficultyBand::easy: return easy;
            case DifficultyBand::medium: return medium;
            case DifficultyBand::hard: return hard;
        }
        return medium;
    }
    void validate() const {
        if (!(easy <= medium && medium <= hard)) throw Error("difficulty offsets must satisfy easy <= medium <= hard");
    }
    friend bool operator==(const DifficultyOffsets&, const DifficultyOffsets&) = default;
};

struct AssessmentParams {
    double interior_lo = 0.02;
    double interior_hi = 0.98;
    DifficultyOffsets offsets;
    double recency_decay = 0.7;
    double recency_weight = 0.35;
    double rehearsal_weight = 0.25;
    int rehearsal_cap = 3;
    double overlap_weight = 0.4;
    double activation_floor = 0.05;
    double misconception_bonus = 0.5;
    double guess_noise = 0.2;

    void validate() const {
        if (!(interior_lo > 0.0 && interior_lo < interior_hi && interior_hi < 1.0)) throw Error("interior interval must satisfy 0 < lo < hi < 1");
        offsets.validate();
    }
    friend bool operator==(const AssessmentParams&, const AssessmentParams&) = default;
};

struct RetrievedTrace {
    std::string trace_id;
    double activation = 0.0;
    friend bool operator==(const RetrievedTrace&, const RetrievedTrace&) = default;
};

struct RetrievalResult {
    std::vector<RetrievedTrace> traces;
    double mean_activation = 0.0;
    std::set<std::string> content_words;  // union over retrieved trace texts
    friend bool operator==(const RetrievalResult&, const RetrievalResult&) = default;
};

inline double trace_activation(const EpisodicTrace& t, const std::set<std::string>& stem_words, int current_cycle, const AssessmentParams& params) {
    const double recency = std::pow(params.recency_decay, std::max(0, current_cycle - t.created_cycle));
    const double rehearsal = static_cast<double>(std::min(t.rehearsal_count, params.rehearsal_cap)) / static_cast<double>(params.rehearsal_cap);
    const double ov = text::overlap(text::content_words(t.event_text), stem_words);
    return std::clamp(params.recency_weight * recency + params.rehearsal_weight * rehearsal + params.overlap_weight * ov - t.distortion, 0.0, 1.0);
}

/// Traces sharing a KC with the item, scored and filtered. Retained traces
/// count one rehearsal.
inline RetrievalResult retrieve_traces(HiddenLearnerState& learner, const AssessmentItem& item, int current_cycle, const AssessmentParams& params = {}) {
    if (item.kc_ids.empty()) throw Error("item " + item.item_id + " targets no knowledge components");
    const auto stem_words = text::content_words(item.stem);
    RetrievalResult r;
    double sum = 0.0;
    for (auto& t : learner.traces) {
        const bool shares = std::ranges::any_of(t.kc_ids, [&](const auto& kc) { return std::ranges::find(item.kc_ids, kc) != item.kc_ids.end(); });
        if (!shares) continue;
        const double a = trace_activation(t, stem_words, current_cycle, params);
        if (a < params.activation_floor) continue;
        r.traces.push_back({t.trace_id, a});
        sum += a;
        const auto words = text::content_words(t.event_text);
        r.content_words.insert(words.begin(), words.end());
        ++t.rehearsal_count;
    }
    if (!r.traces.empty()) r.mean_activation = sum / static_cast<double>(r.traces.size());
    return r;
}

inline double answer_utility(double m_bar, double tau, double w_bar, double attention, double guess, double b_q) {
    return -b_q + 2.2 * m_bar + 0.38 * tau - 1.25 * w_bar + 0.35 * attention - 0.25 * guess;
}

inline double answer_probability(double utility, double lo = 0.02, double hi = 0.98) {
    if (!(lo > 0.0 && lo < hi && hi < 1.0)) throw Error("interior interval must satisfy 0 < lo < hi < 1");
    return std::clamp(sigmoid(utility), lo, hi);
}

struct EpistemicSummary {
    std::vector<std::string> target_kc_ids;
    double correct_support = 0.0;        // mean m* over target KCs
    double misconception_support = 0.0;  // mean over target KCs of the strongest held w
    std::vector<std::string> retrieved_trace_ids;
    friend bool operator==(const EpistemicSummary&, const EpistemicSummary&) = default;
};

inline EpistemicSummary epistemic_summary(const HiddenLearnerState& learner, const AssessmentItem& item, const RetrievalResult& retrieval) {
    EpistemicSummary s;
    s.target_kc_ids = item.kc_ids;
    s.correct_support = mean_mastery(learner, item.kc_ids);
    double w = 0.0;
    for (const auto& kc : item.kc_ids) w += learner.max_misconception(kc);
    s.misconception_support = item.kc_ids.empty() ? 0.0 : w / static_cast<double>(item.kc_ids.size());
    for (const auto& t : retrieval.traces) s.retrieved_trace_ids.push_back(t.trace_id);
    return s;
}

struct ResponseRecord {
    std::string learner_id;
    std::string item_id;
    std::string chosen_option_id;
    bool correct = false;
    double p_correct = 0.0;
    double utility = 0.0;
    EpistemicSummary epistemic;
    friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

namespace detail {

inline double held_weight(const HiddenLearnerState& learner, const AssessmentItem& item, const std::string& misconception_id) {
    double w = 0.0;
    for (const auto& kc : item.kc_ids) {
        auto it = learner.misconceptions.find(kc);
        if (it == learner.misconceptions.end()) continue;
        if (auto m = it->second.find(misconception_id); m != it->second.end()) w = std::max(w, m->second);
    }
    return w;
}

}  // namespace detail

/// Correctness is drawn first; an incorrect answer picks the distractor with
/// the best overlap + misconception + guessing score. The learner's knowledge
/// is read but never changed.
inline ResponseRecord select_response(const HiddenLearnerState& learner, const AssessmentItem& item, const RetrievalResult& retrieval,
                                      const AssessmentParams& params, Rng& rng) {
    params.validate();
    ResponseRecord r;
    r.learner_id = learner.learner_id;
    r.item_id = item.item_id;
    r.epistemic = epistemic_summary(learner, item, retrieval);
    r.utility = answer_utility(r.epistemic.correct_support, retrieval.mean_activation, r.epistemic.misconception_support, learner.response.attention,
                               learner.response.guess_bias, params.offsets.at(item.difficulty_band));
    r.p_correct = answer_probability(r.utility, params.interior_lo, params.interior_hi);
    r.correct = rng.bernoulli(r.p_correct);

    if (r.correct) {
        auto it = std::ranges::find_if(item.options, [](const Option& o) { return o.correct; });
        if (it == item.options.end()) throw Error("item " + item.item_id + " has no correct option");
        r.chosen_option_id = it->option_id;
        return r;
    }
    const Option* best = nullptr;
    double best_score = -1.0;
    for (const auto& op : item.options) {
        if (op.correct) continue;
        double score = text::overlap(retrieval.content_words, text::content_words(op.text + " " + op.rationale));
        if (op.misconception_id) score += params.misconception_bonus * detail::held_weight(learner, item, *op.misconception_id);
        score += learner.response.guess_bias * rng.uniform(0.0, params.guess_noise);
        if (score > best_score) {
            best_score = score;
            best = &op;
        }
    }
    if (!best) throw Error("item " + item.item_id + " has no distractors");
    r.chosen_option_id = best->option_id;
    return r;
}

inline nlohmann::ordered_json to_json(const EpistemicSummary& s) {
    return {{"target_kc_ids", s.target_kc_ids},
            {"correct_support", s.correct_support},
            {"misconception_support", s.misconception_support},
            {"retrieved_trace_ids", s.retrieved_trace_ids}};
}

inline nlohmann::ordered_json to_json(const ResponseRecord& r) {
    return {{"learner_id", r.learner_id}, {"item_id", r.item_id},   {"chosen_option_id", r.chosen_option_id},
            {"correct", r.correct},       {"p_correct", r.p_correct}, {"utility", r.utility},
            {"epistemic", to_json(r.epistemic)}};
}

}  // namespace readloop
