#pragma once

// Matched adaptive-versus-control runs over reading/assessment cycles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "readloop/assessment.hpp"
#include "readloop/comprehension.hpp"
#include "readloop/content.hpp"
#include "readloop/errors.hpp"
#include "readloop/learner.hpp"
#include "readloop/ontology.hpp"
#include "readloop/stats.hpp"
#include "readloop/tracing.hpp"

namespace readloop {

using json = nlohmann::ordered_json;

enum class Condition { adaptive, control };

inline std::string_view to_string(Condition c) { return c == Condition::adaptive ? "adaptive" : "control"; }

struct ExperimentConfig {
    std::string subject_id;
    std::vector<std::string> lo_ids;
    int cycles = 3;
    int items_per_cycle = 3;
    CohortSpec cohort;
    PolicyThresholds thresholds;
    ComprehensionParams comprehension;
    AssessmentParams assessment;
    BktParams bkt;
    ReadingConfig control{0.5, 0.5, 0.5, {}, 10.0};
    std::uint64_t master_seed = 0;
    int bootstrap_resamples = stats::kDefaultResamples;
    bool retain_hidden_trajectories = false;
    int threads = 0;  // 0: hardware concurrency

    void validate() const {
        if (lo_ids.empty()) throw Error("experiment needs at least one learning objective");
        if (cycles < 1) throw Error("cycles must be at least 1");
        if (items_per_cycle < 1) throw Error("items_per_cycle must be at least 1");
        if (bootstrap_resamples < 1) throw Error("bootstrap_resamples must be at least 1");
        cohort.validate();
        comprehension.validate();
        assessment.validate();
        bkt.validate();
        control.validate();
    }

    std::size_t responses_per_condition() const {
        return lo_ids.size() * static_cast<std::size_t>(cycles) * static_cast<std::size_t>(items_per_cycle) * static_cast<std::size_t>(cohort.size);
    }
};

/// KCs of the configured LOs, in first-seen order.
inline std::vector<std::string> target_kcs(const ExperimentConfig& cfg, const Ontology& o) {
    std::vector<std::string> out;
    for (const auto& lo_id : cfg.lo_ids) {
        const auto* lo = o.find_lo(lo_id);
        if (!lo) throw Error("unknown learning objective " + lo_id);
        for (const auto& kc : lo->kc_ids)
            if (std::ranges::find(out, kc) == out.end()) out.push_back(kc);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Content lookup

/// `c` is the 0-based simulation cycle; bundle cycles are 1-based.
inline bool usable_in(const std::optional<int>& cycle, int c) { return !cycle || *cycle == c + 1; }

/// Main passage whose support tier is nearest the requested depth, then whose
/// readability is nearest the target; ties go to the earlier passage.
inline const ReadingPassage* select_main_passage(const ContentBundle& b, const std::string& lo_id, int cycle, const ReadingConfig& cfg) {
    const ReadingPassage* best = nullptr;
    double best_tier = 0.0, best_read = 0.0;
    for (const auto& p : b.passages) {
        if (p.lo_id != lo_id || p.review_kc || !usable_in(p.cycle, cycle)) continue;
        const double dt = std::abs(p.config.depth - cfg.depth);
        const double dr = std::abs(p.readability.value - cfg.target_readability);
        if (!best || dt < best_tier - 1e-12 || (std::abs(dt - best_tier) <= 1e-12 && dr < best_read - 1e-12)) {
            best = &p;
            best_tier = dt;
            best_read = dr;
        }
    }
    return best;
}

inline const ReadingPassage* select_review_snippet(const ContentBundle& b, const std::string& kc, int cycle, double target_readability) {
    const ReadingPassage* best = nullptr;
    double best_read = 0.0;
    for (const auto& p : b.passages) {
        if (!p.review_kc || *p.review_kc != kc || !usable_in(p.cycle, cycle)) continue;
        const double dr = std::abs(p.readability.value - target_readability);
        if (!best || dr < best_read - 1e-12) {
            best = &p;
            best_read = dr;
        }
    }
    return best;
}

/// The reading a learner receives for one LO in one cycle: the selected main
/// passage followed by a review snippet for each review KC of this LO.
inline ReadingPassage compose_reading(const ContentBundle& b, const Ontology& o, const std::string& lo_id, int cycle, const ReadingConfig& cfg) {
    const ReadingPassage* main = select_main_passage(b, lo_id, cycle, cfg);
    if (!main) throw Error("bundle coverage gap: no passage for " + lo_id + " in cycle " + std::to_string(cycle + 1));
    ReadingPassage p = *main;
    p.config = cfg;
    p.review_offset = std::string::npos;
    const auto* lo = o.find_lo(lo_id);
    for (const auto& kc : lo->kc_ids) {
        if (!cfg.review_kcs.contains(kc)) continue;
        const ReadingPassage* snippet = select_review_snippet(b, kc, cycle, cfg.target_readability);
        if (!snippet) continue;
        if (p.review_offset == std::string::npos) p.review_offset = p.text.size() + 1;
        p.text += " " + snippet->text;
        p.passage_id += "+" + snippet->passage_id;
    }
    return p;
}

inline std::vector<const AssessmentItem*> items_for(const ContentBundle& b, const std::string& lo_id, int cycle, int count) {
    std::vector<const AssessmentItem*> out;
    for (const auto& item : b.items) {
        if (static_cast<int>(out.size()) == count) break;
        if (item.lo_id == lo_id && usable_in(item.cycle, cycle)) out.push_back(&item);
    }
    return out;
}

inline void check_coverage(const ExperimentConfig& cfg, const Ontology& o, const ContentBundle& b) {
    if (b.subject_id != o.subject_id) throw Error("bundle subject " + b.subject_id + " does not match ontology subject " + o.subject_id);
    if (!cfg.subject_id.empty() && cfg.subject_id != o.subject_id)
        throw Error("config subject " + cfg.subject_id + " does not match ontology subject " + o.subject_id);
    for (const auto& lo_id : cfg.lo_ids) {
        if (!o.find_lo(lo_id)) throw Error("unknown learning objective " + lo_id);
        for (int c = 0; c < cfg.cycles; ++c) {
            if (!select_main_passage(b, lo_id, c, cfg.control))
                throw Error("bundle coverage gap: no passage for " + lo_id + " in cycle " + std::to_string(c + 1));
            const auto n = items_for(b, lo_id, c, cfg.items_per_cycle).size();
            if (static_cast<int>(n) < cfg.items_per_cycle)
                throw Error("bundle coverage gap: " + lo_id + " has " + std::to_string(n) + " items for cycle " + std::to_string(c + 1) + ", needs " +
                            std::to_string(cfg.items_per_cycle));
        }
    }
}

// ---------------------------------------------------------------------------
// Simulation

struct LogRecord {
    std::string condition;
    int cycle = 0;  // 1-based
    std::string lo_id;
    std::string passage_id;
    double support_tier = 0.0;
    ResponseRecord response;
    std::map<std::string, double> bkt_prior;
    std::map<std::string, double> bkt_posterior;
};

inline json to_json(const LogRecord& r) {
    json j;
    j["condition"] = r.condition;
    j["cycle"] = r.cycle;
    j["lo_id"] = r.lo_id;
    j["passage_id"] = r.passage_id;
    j["support_tier"] = r.support_tier;
    const json response = to_json(r.response);
    for (auto it = response.begin(); it != response.end(); ++it) j[it.key()] = it.value();
    j["bkt_prior"] = r.bkt_prior;
    j["bkt_posterior"] = r.bkt_posterior;
    return j;
}

struct HiddenSnapshot {
    double mean_mastery = 0.0;
    double mean_misconception = 0.0;
};

struct LearnerRun {
    std::string learner_id;
    std::vector<LogRecord> responses;
    double accuracy = 0.0;
    double bkt_gain = 0.0;
    std::vector<double> cycle_accuracy;
    std::vector<double> cycle_bkt_gain;
    std::vector<HiddenSnapshot> hidden_by_cycle;  // after each cycle
    HiddenLearnerState initial;
    HiddenLearnerState final_state;
};

namespace detail {

inline double mean_over(const BktState& s, const std::vector<std::string>& kcs, const BktParams& p) {
    double sum = 0.0;
    for (const auto& kc : kcs) sum += s.get(kc, p);
    return kcs.empty() ? 0.0 : sum / static_cast<double>(kcs.size());
}

inline HiddenSnapshot snapshot(const HiddenLearnerState& l, const std::vector<std::string>& kcs) {
    HiddenSnapshot s;
    double w = 0.0;
    std::size_t n = 0;
    for (const auto& kc : kcs) {
        s.mean_mastery += l.mastery(kc);
        if (auto it = l.misconceptions.find(kc); it != l.misconceptions.end())
            for (const auto& [id, weight] : it->second) {
                w += weight;
                ++n;
            }
    }
    if (!kcs.empty()) s.mean_mastery /= static_cast<double>(kcs.size());
    s.mean_misconception = n ? w / static_cast<double>(n) : 0.0;
    return s;
}

}  // namespace detail

/// One learner through every cycle. Cycles run in order; within a cycle each
/// LO is read and then assessed.
inline LearnerRun simulate_learner(HiddenLearnerState learner, Condition condition, const ExperimentConfig& cfg, const Ontology& o,
                                   const ContentBundle& bundle, const std::vector<std::string>& kcs) {
    LearnerRun run;
    run.learner_id = learner.learner_id;
    run.initial = learner;
    BktState bkt = initial_bkt_state(kcs, cfg.bkt);
    const double bkt_start = detail::mean_over(bkt, kcs, cfg.bkt);
    std::size_t correct_total = 0;

    for (int c = 0; c < cfg.cycles; ++c) {
        const double cycle_start = detail::mean_over(bkt, kcs, cfg.bkt);
        std::size_t correct = 0, answered = 0;
        for (const auto& lo_id : cfg.lo_ids) {
            const auto& lo_kcs = o.find_lo(lo_id)->kc_ids;
            const ReadingConfig rc = condition == Condition::adaptive
                                         ? adaptive_config(bkt, lo_kcs, learner.reader.readability_ability, cfg.thresholds, cfg.bkt)
                                         : control_config(cfg.control);
            const ReadingPassage passage = compose_reading(bundle, o, lo_id, c, rc);
            const auto events = segment_passage(passage, o);
            read_passage(learner, passage, events, cfg.comprehension, c);

            for (const auto* item : items_for(bundle, lo_id, c, cfg.items_per_cycle)) {
                const auto retrieval = retrieve_traces(learner, *item, c, cfg.assessment);
                LogRecord rec;
                rec.condition = std::string(to_string(condition));
                rec.cycle = c + 1;
                rec.lo_id = lo_id;
                rec.passage_id = passage.passage_id;
                rec.support_tier = rc.depth;
                rec.response = select_response(learner, *item, retrieval, cfg.assessment, learner.rng);
                for (const auto& kc : item->kc_ids) rec.bkt_prior[kc] = bkt.get(kc, cfg.bkt);
                bkt = update_from_item(std::move(bkt), item->kc_ids, rec.response.correct, cfg.bkt);
                for (const auto& kc : item->kc_ids) rec.bkt_posterior[kc] = bkt.get(kc, cfg.bkt);
                correct += rec.response.correct ? 1 : 0;
                ++answered;
                run.responses.push_back(std::move(rec));
            }
        }
        correct_total += correct;
        run.cycle_accuracy.push_back(answered ? static_cast<double>(correct) / static_cast<double>(answered) : 0.0);
        run.cycle_bkt_gain.push_back(detail::mean_over(bkt, kcs, cfg.bkt) - cycle_start);
        run.hidden_by_cycle.push_back(detail::snapshot(learner, kcs));
    }
    run.accuracy = run.responses.empty() ? 0.0 : static_cast<double>(correct_total) / static_cast<double>(run.responses.size());
    run.bkt_gain = detail::mean_over(bkt, kcs, cfg.bkt) - bkt_start;
    run.final_state = std::move(learner);
    return run;
}

struct ConditionResult {
    Condition condition = Condition::adaptive;
    std::vector<LearnerRun> learners;
    std::vector<double> cycle_accuracy;
    std::vector<double> cycle_bkt_gain;
    double accuracy = 0.0;
    double hidden_mastery_gain = 0.0;
    double misconception_reduction = 0.0;
    std::size_t response_count = 0;

    std::vector<double> learner_accuracy() const {
        std::vector<double> v;
        for (const auto& l : learners) v.push_back(l.accuracy);
        return v;
    }
    std::vector<double> learner_bkt_gain() const {
        std::vector<double> v;
        for (const auto& l : learners) v.push_back(l.bkt_gain);
        return v;
    }
};

/// Condition-level summaries from finished learner runs.
inline void compute_metrics(ConditionResult& r, const std::vector<std::string>& kcs, int cycles) {
    r.cycle_accuracy.assign(static_cast<std::size_t>(cycles), 0.0);
    r.cycle_bkt_gain.assign(static_cast<std::size_t>(cycles), 0.0);
    std::vector<std::size_t> answered(static_cast<std::size_t>(cycles), 0), correct(static_cast<std::size_t>(cycles), 0);
    std::size_t all_correct = 0;
    r.response_count = 0;
    double mastery_gain = 0.0, w_initial = 0.0, w_final = 0.0;
    std::size_t w_count = 0;
    for (const auto& l : r.learners) {
        for (const auto& rec : l.responses) {
            const auto c = static_cast<std::size_t>(rec.cycle - 1);
            ++answered[c];
            correct[c] += rec.response.correct ? 1 : 0;
            all_correct += rec.response.correct ? 1 : 0;
            ++r.response_count;
        }
        for (std::size_t c = 0; c < l.cycle_bkt_gain.size() && c < r.cycle_bkt_gain.size(); ++c) r.cycle_bkt_gain[c] += l.cycle_bkt_gain[c];
        for (const auto& kc : kcs) {
            mastery_gain += l.final_state.mastery(kc) - l.initial.mastery(kc);
            auto it = l.initial.misconceptions.find(kc);
            if (it == l.initial.misconceptions.end()) continue;
            for (const auto& [id, w0] : it->second) {
                w_initial += w0;
                w_final += l.final_state.misconceptions.at(kc).at(id);
                ++w_count;
            }
        }
    }
    const double n = static_cast<double>(r.learners.size());
    for (std::size_t c = 0; c < answered.size(); ++c) {
        r.cycle_accuracy[c] = answered[c] ? static_cast<double>(correct[c]) / static_cast<double>(answered[c]) : 0.0;
        if (n > 0) r.cycle_bkt_gain[c] /= n;
    }
    r.accuracy = r.response_count ? static_cast<double>(all_correct) / static_cast<double>(r.response_count) : 0.0;
    r.hidden_mastery_gain = (n > 0 && !kcs.empty()) ? mastery_gain / (n * static_cast<double>(kcs.size())) : 0.0;
    r.misconception_reduction = w_count ? (w_initial - w_final) / static_cast<double>(w_count) : 0.0;
}

inline ConditionResult run_condition(const Cohort& cohort, Condition condition, const ExperimentConfig& cfg, const Ontology& o, const ContentBundle& bundle,
                                     const std::vector<std::string>& kcs) {
    ConditionResult r;
    r.condition = condition;
    r.learners.resize(cohort.learners.size());
    unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(cohort.learners.size()));
    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](unsigned w) {
        try {
            for (std::size_t i = w; i < cohort.learners.size(); i += workers)
                r.learners[i] = simulate_learner(cohort.learners[i], condition, cfg, o, bundle, kcs);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    compute_metrics(r, kcs, cfg.cycles);
    return r;
}

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<std::string> target_kcs;
    Cohort cohort;  // initial states shared by both conditions
    ConditionResult adaptive;
    ConditionResult control;
    std::vector<stats::PairedComparison> comparisons;
};

inline std::vector<stats::PairedComparison> compare_conditions(const ConditionResult& adaptive, const ConditionResult& control, const ExperimentConfig& cfg) {
    std::vector<stats::PairedComparison> out;
    if (adaptive.learners.size() < 2) return out;
    out.push_back(stats::paired_stats("accuracy", adaptive.learner_accuracy(), control.learner_accuracy(),
                                      derive_seed(cfg.master_seed, hash_label("bootstrap/accuracy")), cfg.bootstrap_resamples));
    out.push_back(stats::paired_stats("bkt_gain", adaptive.learner_bkt_gain(), control.learner_bkt_gain(),
                                      derive_seed(cfg.master_seed, hash_label("bootstrap/bkt_gain")), cfg.bootstrap_resamples));
    return out;
}

/// Samples the cohort once, clones it for both arms, and runs them.
inline ExperimentResult run_experiment(ExperimentConfig cfg, const Ontology& o, const ContentBundle& bundle) {
    cfg.validate();
    check_coverage(cfg, o, bundle);
    if (cfg.subject_id.empty()) cfg.subject_id = o.subject_id;
    ExperimentResult res;
    res.target_kcs = target_kcs(cfg, o);
    CohortSpec spec = cfg.cohort;
    spec.seed = cfg.master_seed;
    if (spec.kc_ids.empty()) spec.kc_ids = res.target_kcs;
    res.cohort = sample_cohort(spec, o);
    const Cohort adaptive = clone_for_condition(res.cohort, "adaptive");
    const Cohort control = clone_for_condition(res.cohort, "control");
    res.adaptive = run_condition(adaptive, Condition::adaptive, cfg, o, bundle, res.target_kcs);
    res.control = run_condition(control, Condition::control, cfg, o, bundle, res.target_kcs);
    res.comparisons = compare_conditions(res.adaptive, res.control, cfg);
    res.config = std::move(cfg);
    return res;
}

// ---------------------------------------------------------------------------
// Results files

inline json config_to_json(const ExperimentConfig& c) {
    auto dist = [](const FieldDistribution& d) { return json{{"mean", d.mean}, {"sd", d.sd}}; };
    json j;
    j["subject_id"] = c.subject_id;
    j["master_seed"] = c.master_seed;
    j["lo_ids"] = c.lo_ids;
    j["cycles"] = c.cycles;
    j["items_per_cycle"] = c.items_per_cycle;
    const auto& s = c.cohort;
    j["cohort"] = {{"size", s.size},
                   {"background_knowledge", dist(s.background_knowledge)},
                   {"vocabulary", dist(s.vocabulary)},
                   {"inferencing", dist(s.inferencing)},
                   {"strategy_use", dist(s.strategy_use)},
                   {"skepticism", dist(s.skepticism)},
                   {"revision_willingness", dist(s.revision_willingness)},
                   {"detail_preference", dist(s.detail_preference)},
                   {"attention", dist(s.attention)},
                   {"guess_bias", dist(s.guess_bias)},
                   {"readability_ability", dist(s.readability_ability)},
                   {"ability_range", {s.ability_min, s.ability_max}},
                   {"noise_scale", s.noise_scale},
                   {"initial_mastery_range", {s.initial_mastery_min, s.initial_mastery_max}},
                   {"misconception_prevalence", s.misconception_prevalence},
                   {"misconception_weight_range", {s.misconception_weight_min, s.misconception_weight_max}}};
    j["policy"] = {{"tier_cuts", c.thresholds.tier_cuts}, {"review_threshold", c.thresholds.review}};
    j["control"] = {{"support_tier", c.control.depth}, {"target_readability", c.control.target_readability}};
    const auto& p = c.comprehension;
    j["comprehension"] = {{"alpha", p.alpha},
                          {"beta", p.beta},
                          {"clarity_coeff", p.clarity_coeff},
                          {"match_coeff", p.match_coeff},
                          {"novelty_coeff", p.novelty_coeff},
                          {"attention_coeff", p.attention_coeff},
                          {"gain_base", p.gain_base},
                          {"refresh_multiplier", p.refresh_multiplier},
                          {"distortion_rate", p.distortion_rate}};
    const auto& a = c.assessment;
    j["assessment"] = {{"interior", {a.interior_lo, a.interior_hi}},
                       {"difficulty_offsets", {{"easy", a.offsets.easy}, {"medium", a.offsets.medium}, {"hard", a.offsets.hard}}},
                       {"recency_decay", a.recency_decay},
                       {"activation_floor", a.activation_floor},
                       {"misconception_bonus", a.misconception_bonus},
                       {"guess_noise", a.guess_noise}};
    j["bkt"] = {{"p_init", c.bkt.p_init}, {"p_learn", c.bkt.p_learn}, {"p_guess", c.bkt.p_guess}, {"p_slip", c.bkt.p_slip}};
    j["bootstrap_resamples"] = c.bootstrap_resamples;
    j["retain_hidden_trajectories"] = c.retain_hidden_trajectories;
    return j;
}

inline json comparison_to_json(const stats::PairedComparison& c) {
    json j{{"metric", c.metric},   {"n", c.n},         {"adaptive_mean", c.adaptive_mean}, {"control_mean", c.control_mean},
           {"delta", c.delta},     {"ci95", {c.ci_lo, c.ci_hi}}, {"t", c.t},                {"p_value", c.p_value}};
    if (c.wilcoxon_p) j["wilcoxon_p"] = *c.wilcoxon_p;
    return j;
}

inline std::string response_log_name(Condition c) { return "responses_" + std::string(to_string(c)) + ".jsonl"; }

inline json condition_to_json(const ConditionResult& r, bool hidden_trajectories) {
    json j;
    j["condition"] = std::string(to_string(r.condition));
    j["response_count"] = r.response_count;
    j["accuracy"] = r.accuracy;
    j["bkt_gain"] = stats::mean(r.learner_bkt_gain());
    j["hidden_mastery_gain"] = r.hidden_mastery_gain;
    j["misconception_reduction"] = r.misconception_reduction;
    j["response_log"] = response_log_name(r.condition);
    j["learners"] = json::array();
    for (const auto& l : r.learners) {
        json lj{{"learner_id", l.learner_id},
                {"accuracy", l.accuracy},
                {"bkt_gain", l.bkt_gain},
                {"cycle_accuracy", l.cycle_accuracy},
                {"cycle_bkt_gain", l.cycle_bkt_gain}};
        if (hidden_trajectories) {
            json h = json::array();
            for (const auto& s : l.hidden_by_cycle) h.push_back({{"mean_mastery", s.mean_mastery}, {"mean_misconception", s.mean_misconception}});
            lj["hidden_by_cycle"] = std::move(h);
        }
        j["learners"].push_back(std::move(lj));
    }
    return j;
}

inline json results_to_json(const ExperimentResult& r) {
    json j;
    j["subject_id"] = r.config.subject_id;
    j["config"] = config_to_json(r.config);
    j["target_kcs"] = r.target_kcs;
    j["per_cycle"] = json::array();
    for (const ConditionResult* c : {&r.adaptive, &r.control})
        for (std::size_t i = 0; i < c->cycle_accuracy.size(); ++i)
            j["per_cycle"].push_back(
                {{"condition", std::string(to_string(c->condition))}, {"cycle", i + 1}, {"accuracy", c->cycle_accuracy[i]}, {"bkt_gain", c->cycle_bkt_gain[i]}});
    j["conditions"] = {{"adaptive", condition_to_json(r.adaptive, r.config.retain_hidden_trajectories)},
                       {"control", condition_to_json(r.control, r.config.retain_hidden_trajectories)}};
    j["comparisons"] = json::array();
    for (const auto& c : r.comparisons) j["comparisons"].push_back(comparison_to_json(c));
    return j;
}

inline std::string response_log(const ConditionResult& r) {
    std::string out;
    for (const auto& l : r.learners)
        for (const auto& rec : l.responses) out += to_json(rec).dump() + "\n";
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    out.close();
    if (!out) throw Error("cannot write " + path.string());
}

/// Learner-level metrics recomputed from a response log alone.
struct LogMetrics {
    std::map<std::string, double> learner_accuracy;
    std::map<std::string, double> learner_bkt_gain;
    std::vector<double> cycle_accuracy;
    std::vector<double> cycle_bkt_gain;
};

inline LogMetrics metrics_from_log(std::string_view jsonl, const std::vector<std::string>& kcs, const BktParams& bkt, int cycles) {
    struct Acc {
        std::size_t n = 0, correct = 0;
        std::map<std::string, double> current;
        std::vector<double> cycle_start_mean;
    };
    std::map<std::string, Acc> learners;
    std::vector<std::size_t> answered(static_cast<std::size_t>(cycles), 0), correct(static_cast<std::size_t>(cycles), 0);
    auto mean_of = [&](const std::map<std::string, double>& m) {
        double s = 0.0;
        for (const auto& kc : kcs) {
            auto it = m.find(kc);
            s += it == m.end() ? bkt.p_init : it->second;
        }
        return kcs.empty() ? 0.0 : s / static_cast<double>(kcs.size());
    };
    std::istringstream in{std::string(jsonl)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = json::parse(line);
        auto& a = learners[j.at("learner_id").get<std::string>()];
        const int c = j.at("cycle").get<int>();
        while (static_cast<int>(a.cycle_start_mean.size()) < c) a.cycle_start_mean.push_back(mean_of(a.current));
        const bool ok = j.at("correct").get<bool>();
        ++a.n;
        a.correct += ok ? 1 : 0;
        ++answered[static_cast<std::size_t>(c - 1)];
        correct[static_cast<std::size_t>(c - 1)] += ok ? 1 : 0;
        for (auto& [kc, v] : j.at("bkt_posterior").items()) a.current[kc] = v.get<double>();
    }
    LogMetrics m;
    m.cycle_accuracy.assign(static_cast<std::size_t>(cycles), 0.0);
    m.cycle_bkt_gain.assign(static_cast<std::size_t>(cycles), 0.0);
    for (std::size_t c = 0; c < answered.size(); ++c)
        m.cycle_accuracy[c] = answered[c] ? static_cast<double>(correct[c]) / static_cast<double>(answered[c]) : 0.0;
    for (auto& [id, a] : learners) {
        const double final_mean = mean_of(a.current);
        while (static_cast<int>(a.cycle_start_mean.size()) < cycles + 1) a.cycle_start_mean.push_back(final_mean);
        m.learner_accuracy[id] = a.n ? static_cast<double>(a.correct) / static_cast<double>(a.n) : 0.0;
        m.learner_bkt_gain[id] = final_mean - bkt.p_init;
        for (std::size_t c = 0; c < static_cast<std::size_t>(cycles); ++c) m.cycle_bkt_gain[c] += a.cycle_start_mean[c + 1] - a.cycle_start_mean[c];
    }
    if (!learners.empty())
        for (auto& g : m.cycle_bkt_gain) g /= static_cast<double>(learners.size());
    return m;
}

}  // namespace readloop
