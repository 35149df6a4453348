#pragma once

// Tokenization shared by readability scoring, segmentation and retrieval.
//
// Sentences end at '.', '!' or '?' when followed by whitespace or end of
// text. Words are maximal runs of letters (an apostrophe between two letters
// stays inside the word) or maximal runs of digits. Bytes >= 0x80 count as
// letters so UTF-8 words are not split.

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace readloop::text {

struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;  // one past the last byte

    std::size_t size() const noexcept { return end - begin; }
    friend bool operator==(const Span&, const Span&) = default;
};

struct Token {
    std::string word;  // lowercased
    bool numeric = false;
};

inline bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_letter(char c) noexcept {
    const auto u = static_cast<unsigned char>(c);
    return (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || u >= 0x80;
}

inline bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

inline char lower(char c) noexcept { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), lower);
    return out;
}

inline std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

/// Sentence spans, trimmed of surrounding whitespace. Empty pieces are skipped.
inline std::vector<Span> sentence_spans(std::string_view text) {
    std::vector<Span> spans;
    std::size_t start = 0;
    auto push = [&](std::size_t b, std::size_t e) {
        while (b < e && is_space(text[b])) ++b;
        while (e > b && is_space(text[e - 1])) --e;
        if (e > b) spans.push_back({b, e});
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if ((c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || is_space(text[i + 1]))) {
            push(start, i + 1);
            start = i + 1;
        }
    }
    push(start, text.size());
    return spans;
}

inline std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_letter(text[i])) {
            std::string word;
            while (i < text.size()) {
                if (is_letter(text[i])) {
                    word.push_back(lower(text[i]));
                    ++i;
                } else if (text[i] == '\'' && i + 1 < text.size() && is_letter(text[i + 1]) && !word.empty()) {
                    word.push_back('\'');
                    ++i;
                } else {
                    break;
                }
            }
            tokens.push_back({std::move(word), false});
        } else if (is_digit(text[i])) {
            std::string number;
            while (i < text.size() && is_digit(text[i])) number.push_back(text[i++]);
            tokens.push_back({std::move(number), true});
        } else {
            ++i;
        }
    }
    return tokens;
}

inline std::size_t word_count(std::string_view text) { return tokenize(text).size(); }

inline const std::unordered_set<std::string>& stop_words() {
    static const std::unordered_set<std::string> words = {
        "a", "about", "above", "after", "again", "all", "also", "am", "an", "and", "any", "are", "as",
        "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by",
        "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from",
        "further", "had", "has", "have", "having", "he", "her", "here", "hers", "him", "his", "how",
        "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me", "more", "most", "my",
        "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other", "our", "ours",
        "out", "over", "own", "same", "she", "should", "so", "some", "such", "than", "that", "the",
        "their", "theirs", "them", "then", "there", "these", "they", "this", "those", "through",
        "to", "too", "under", "until", "up", "very", "was", "we", "were", "what", "when", "where",
        "which", "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours"};
    return words;
}

/// Lowercased non-stop-word tokens, deduplicated.
inline std::set<std::string> content_words(std::string_view text) {
    std::set<std::string> out;
    for (auto& t : tokenize(text)) {
        if (!stop_words().contains(t.word)) out.insert(std::move(t.word));
    }
    return out;
}

/// Containment overlap |cw(a) & cw(b)| / |cw(b)|; 0 when b has no content words.
inline double overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (b.empty()) return 0.0;
    std::size_t shared = 0;
    for (const auto& w : b) shared += a.contains(w) ? 1 : 0;
    return static_cast<double>(shared) / static_cast<double>(b.size());
}

inline double overlap(std::string_view a, std::string_view b) { return overlap(content_words(a), content_words(b)); }

}  // namespace readloop::text
