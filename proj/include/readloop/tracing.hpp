#pragma once

// Tutor-side knowledge tracing and the reading-configuration policy.

#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "readloop/errors.hpp"

namespace readloop {

struct BktParams {
    double p_init = 0.25;
    double p_learn = 0.2;
    double p_guess = 0.2;
    double p_slip = 0.1;

    void validate() const {
        auto open_unit = [](double p) { return p > 0.0 && p < 1.0; };
        if (!open_unit(p_init) || !open_unit(p_learn) || !open_unit(p_guess) || !open_unit(p_slip))
            throw Error("BKT parameters must lie in (0, 1)");
        if (p_guess + p_slip >= 1.0) throw Error("BKT parameters need p_guess + p_slip < 1");
    }
    friend bool operator==(const BktParams&, const BktParams&) = default;
};

inline constexpr double kBktFloor = 1e-6;

/// Posterior after one observation, followed by the learning transition.
inline double bkt_update(double p_mastery, bool correct, const BktParams& params) {
    params.validate();
    const double p = p_mastery;
    double posterior;
    if (correct) {
        const double known = p * (1.0 - params.p_slip);
        posterior = known / (known + (1.0 - p) * params.p_guess);
    } else {
        const double known = p * params.p_slip;
        posterior = known / (known + (1.0 - p) * (1.0 - params.p_guess));
    }
    const double next = posterior + (1.0 - posterior) * params.p_learn;
    return std::clamp(next, kBktFloor, 1.0 - kBktFloor);
}

/// Per-KC mastery estimates visible to the tutor.
struct BktState {
    std::map<std::string, double> mastery;

    double get(const std::string& kc, const BktParams& params) const {
        auto it = mastery.find(kc);
        return it == mastery.end() ? params.p_init : it->second;
    }
    friend bool operator==(const BktState&, const BktState&) = default;
};

template <typename Range>
BktState initial_bkt_state(const Range& kc_ids, const BktParams& params) {
    BktState s;
    for (const auto& kc : kc_ids) s.mastery[kc] = params.p_init;
    return s;
}

/// Updates every KC the item targets with the same observation.
template <typename Range>
BktState update_from_item(BktState state, const Range& item_kc_ids, bool correct, const BktParams& params) {
    for (const auto& kc : item_kc_ids) state.mastery[kc] = bkt_update(state.get(kc, params), correct, params);
    return state;
}

struct ReadingConfig {
    double depth = 0.5;
    double example_density = 0.5;
    double refutation_emphasis = 0.5;
    std::set<std::string> review_kcs;
    double target_readability = 10.0;

    void validate() const {
        auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
        if (!unit(depth) || !unit(example_density) || !unit(refutation_emphasis))
            throw Error("reading configuration knobs must lie in [0, 1]");
    }
    friend bool operator==(const ReadingConfig&, const ReadingConfig&) = default;
};

struct PolicyThresholds {
    /// Support s = 1 - min mastery maps to 0.25 / 0.5 / 0.75 / 1.0 at these cut points.
    std::array<double, 3> tier_cuts{0.25, 0.5, 0.75};
    double review = 0.6;
    friend bool operator==(const PolicyThresholds&, const PolicyThresholds&) = default;
};

inline constexpr std::array<double, 4> kSupportTiers{0.25, 0.5, 0.75, 1.0};

inline double support_tier(double need, const PolicyThresholds& t) {
    const double s = std::clamp(need, 0.0, 1.0);
    for (std::size_t i = 0; i < t.tier_cuts.size(); ++i)
        if (s <= t.tier_cuts[i]) return kSupportTiers[i];
    return kSupportTiers.back();
}

/// Low estimated mastery yields more supportive readings; review KCs are the
/// targets still under the review threshold.
inline ReadingConfig adaptive_config(const BktState& state, std::span<const std::string> target_kcs, double learner_ability,
                                     const PolicyThresholds& thresholds, const BktParams& params = {}) {
    if (target_kcs.empty()) throw Error("adaptive_config needs at least one target KC");
    double p_min = 1.0;
    for (const auto& kc : target_kcs) p_min = std::min(p_min, state.get(kc, params));
    const double tier = support_tier(1.0 - p_min, thresholds);
    ReadingConfig cfg;
    cfg.depth = cfg.example_density = cfg.refutation_emphasis = tier;
    for (const auto& kc : target_kcs)
        if (state.get(kc, params) < thresholds.review) cfg.review_kcs.insert(kc);
    cfg.target_readability = learner_ability;
    return cfg;
}

/// The control arm ignores tutor state entirely.
inline const ReadingConfig& control_config(const ReadingConfig& fixed) { return fixed; }

}  // namespace readloop
