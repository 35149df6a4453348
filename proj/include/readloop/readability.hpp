#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>

#include "readloop/errors.hpp"
#include "readloop/text.hpp"

namespace readloop {

/// Words treated as familiar by the Dale-Chall formula. Entries are stored
/// lowercased and trimmed; lookups are case-insensitive.
class FamiliarWordList {
public:
    FamiliarWordList() = default;

    template <typename Range>
    explicit FamiliarWordList(const Range& words) {
        for (const auto& w : words) add(w);
        if (words_.empty()) throw Error("familiar word list is empty");
    }

    FamiliarWordList(std::initializer_list<std::string_view> words) {
        for (auto w : words) add(w);
        if (words_.empty()) throw Error("familiar word list is empty");
    }

    /// One word per line; `#` starts a comment.
    static FamiliarWordList parse(std::string_view content) {
        FamiliarWordList list;
        std::istringstream in{std::string(content)};
        std::string line;
        while (std::getline(in, line)) {
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            list.add(line);
        }
        if (list.words_.empty()) throw Error("familiar word list is empty");
        return list;
    }

    static FamiliarWordList load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot read familiar word list: " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    bool contains(std::string_view word) const { return words_.contains(text::to_lower(text::trim(word))); }
    std::size_t size() const noexcept { return words_.size(); }

private:
    void add(std::string_view raw) {
        auto w = text::to_lower(text::trim(raw));
        if (!w.empty()) words_.insert(std::move(w));
    }

    std::unordered_set<std::string> words_;
};

struct ReadabilityScore {
    double value = 0.0;                    // New Dale-Chall grade-level score
    double difficult_word_fraction = 0.0;  // in [0, 1]
    double avg_sentence_length = 0.0;      // words per sentence
    std::size_t word_count = 0;
    std::size_t sentence_count = 0;
    friend bool operator==(const ReadabilityScore&, const ReadabilityScore&) = default;
};

inline constexpr double kDaleChallPercentWeight = 0.1579;
inline constexpr double kDaleChallSentenceWeight = 0.0496;
inline constexpr double kDaleChallAdjustment = 3.6365;
inline constexpr double kDaleChallAdjustmentThreshold = 0.05;

/// New Dale-Chall score. Numbers count as familiar words; sentences without
/// any word are ignored.
inline ReadabilityScore dale_chall_score(std::string_view passage, const FamiliarWordList& familiar) {
    std::size_t words = 0, difficult = 0, sentences = 0;
    for (const auto& span : text::sentence_spans(passage)) {
        const auto tokens = text::tokenize(passage.substr(span.begin, span.size()));
        if (tokens.empty()) continue;
        ++sentences;
        for (const auto& t : tokens) {
            ++words;
            if (!t.numeric && !familiar.contains(t.word)) ++difficult;
        }
    }
    if (words == 0) throw Error("no scorable content");

    ReadabilityScore s;
    s.word_count = words;
    s.sentence_count = sentences;
    s.difficult_word_fraction = static_cast<double>(difficult) / static_cast<double>(words);
    s.avg_sentence_length = static_cast<double>(words) / static_cast<double>(sentences);
    s.value = kDaleChallPercentWeight * (100.0 * s.difficult_word_fraction) + kDaleChallSentenceWeight * s.avg_sentence_length;
    if (s.difficult_word_fraction > kDaleChallAdjustmentThreshold) s.value += kDaleChallAdjustment;
    return s;
}

inline constexpr double kMatchScale = 6.0;

/// Reader-text fit: 1 - |ability - difficulty| / 6, clipped to [-1, 1].
inline double match_score(double ability, double difficulty) {
    return std::clamp(1.0 - std::abs(ability - difficulty) / kMatchScale, -1.0, 1.0);
}

}  // namespace readloop
