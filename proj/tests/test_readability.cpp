#include "catch_amalgamated.hpp"

#include "support.hpp"

using namespace readloop;
using Catch::Matchers::WithinAbs;

TEST_CASE("familiar word list parsing ignores comments, blanks and case") {
    const auto list = FamiliarWordList::parse("# header\nCat\n\n  dog  # pet\n");
    CHECK(list.size() == 2);
    CHECK(list.contains("cat"));
    CHECK(list.contains("DOG"));
    CHECK_FALSE(list.contains("header"));
    CHECK_THROWS_AS(FamiliarWordList::parse("# nothing\n"), Error);
    CHECK(support::words().size() > 2000);
}

TEST_CASE("all-familiar sentence scores only the sentence-length term") {
    const FamiliarWordList list{"the", "cat", "sat", "on", "a", "mat", "and", "was", "very", "happy"};
    const auto s = dale_chall_score("The cat sat on a mat and was very happy.", list);
    CHECK(s.word_count == 10);
    CHECK(s.sentence_count == 1);
    CHECK(s.difficult_word_fraction == 0.0);
    CHECK_THAT(s.value, WithinAbs(0.496, 1e-12));
}

TEST_CASE("unfamiliar text adds the percent term and the adjustment") {
    const FamiliarWordList list{"zzz"};
    const auto s = dale_chall_score("Alpha beta gamma delta epsilon zeta eta theta iota kappa.", list);
    CHECK(s.difficult_word_fraction == 1.0);
    CHECK_THAT(s.value, WithinAbs(15.79 + 0.496 + 3.6365, 1e-12));
}

TEST_CASE("adjustment applies only above five percent difficult words") {
    // 1 difficult in 20 words is exactly 5%: no adjustment
    const FamiliarWordList list{"a"};
    std::string text;
    for (int i = 0; i < 19; ++i) text += "a ";
    text += "zebra.";
    const auto s = dale_chall_score(text, list);
    CHECK_THAT(s.difficult_word_fraction, WithinAbs(0.05, 1e-15));
    CHECK_THAT(s.value, WithinAbs(0.1579 * 5.0 + 0.0496 * 20.0, 1e-12));

    const auto t = dale_chall_score("a a a a a a a a a a a a a a a a a a zebra zebra.", list);
    CHECK_THAT(t.value, WithinAbs(0.1579 * 10.0 + 0.0496 * 20.0 + 3.6365, 1e-12));
}

TEST_CASE("numbers count as familiar and sentence length averages") {
    const FamiliarWordList list{"we", "have"};
    const auto s = dale_chall_score("We have 42. We have 7 and.", list);
    CHECK(s.sentence_count == 2);
    CHECK(s.word_count == 7);
    CHECK_THAT(s.difficult_word_fraction, WithinAbs(1.0 / 7.0, 1e-15));
    CHECK_THAT(s.avg_sentence_length, WithinAbs(3.5, 1e-15));
}

TEST_CASE("text with no words is an error") { CHECK_THROWS_AS(dale_chall_score(" ... ", support::words()), Error); }

TEST_CASE("match score") {
    CHECK(match_score(9, 9) == 1.0);
    CHECK_THAT(match_score(9, 12), WithinAbs(0.5, 1e-15));
    CHECK_THAT(match_score(12, 9), WithinAbs(0.5, 1e-15));
    CHECK(match_score(9, 15) == 0.0);
    CHECK(match_score(1, 16) == -1.0);
    CHECK(match_score(0, 100) == -1.0);
}
