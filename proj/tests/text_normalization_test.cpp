// Copyright 2026 The ctcseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <fstream>
#include <string>
#include <vector>

#include "ctcseg/errors.hpp"
#include "ctcseg/prng.hpp"
#include "ctcseg/text_normalization.hpp"
#include "ctcseg/utf8.hpp"
#include "test_support.hpp"

using ctcseg_test::ScratchDir;

namespace {

ctcseg::NormalizationRules make_rules(
    const std::string& charset,
    const std::vector<std::pair<std::string, std::string>>& replacements = {},
    bool lowercase = true,
    ctcseg::DropPolicy policy = ctcseg::DropPolicy::kDropUtterance) {
  ctcseg::NormalizationRules rules;
  for (char32_t c : ctcseg::utf8_to_utf32(charset)) rules.allowed.insert(c);
  for (const auto& [source, target] : replacements) {
    rules.replacements.emplace_back(ctcseg::utf8_to_utf32(source),
                                    ctcseg::utf8_to_utf32(target));
  }
  rules.lowercase = lowercase;
  rules.drop_policy = policy;
  ctcseg::validate(rules);
  return rules;
}

ctcseg::TokenTable letters_table() {
  ctcseg::TokenTable table;
  table.tokens = {"<blank>", " ", "a", "b", "c", "d", "e", "h",
                  "l",       "n", "o", "r", "s", "t", "w", "z"};
  table.blank_index = 0;
  return table;
}

}  // namespace

TEST_CASE("number replacement expands before lowercasing and filtering") {
  const auto rules = make_rules(
      "abcdefghijklmnopqrstuvwxyz",
      {{"1800", "achtzehnhundert"}, {".", ""}});
  const auto result = ctcseg::normalize("Es war 1800.", rules);
  CHECK_FALSE(result.dropped);
  CHECK(result.text == "es war achtzehnhundert");
}

TEST_CASE("empty input normalizes to empty output") {
  const auto rules = make_rules("abc");
  const auto result = ctcseg::normalize("", rules);
  CHECK_FALSE(result.dropped);
  CHECK(result.text.empty());
}

TEST_CASE("drop policy yields a drop marker naming the offending character") {
  const auto rules = make_rules("abcdefghijklmnopqrstuvwxyz", {},
                                /*lowercase=*/true,
                                ctcseg::DropPolicy::kDropUtterance);
  const auto result = ctcseg::normalize("naïve", rules);  // naïve
  CHECK(result.dropped);
  CHECK(result.offending == "ï");

  SUBCASE("strip policy removes the character instead") {
    const auto strip = make_rules("abcdefghijklmnopqrstuvwxyz", {},
                                  /*lowercase=*/true,
                                  ctcseg::DropPolicy::kStripChars);
    const auto stripped = ctcseg::normalize("naïve", strip);
    CHECK_FALSE(stripped.dropped);
    CHECK(stripped.text == "nave");
  }
}

TEST_CASE("replacements are longest-match-first and single-pass") {
  SUBCASE("the longer source wins at the same position") {
    const auto rules =
        make_rules("xyab", {{"a", "x"}, {"ab", "y"}});
    CHECK(ctcseg::normalize("ab", rules).text == "y");
    CHECK(ctcseg::normalize("aab", rules).text == "xy");
  }
  SUBCASE("scan resumes after the inserted target, no overlap") {
    const auto rules = make_rules("ab", {{"aa", "b"}});
    CHECK(ctcseg::normalize("aaa", rules).text == "ba");
    CHECK(ctcseg::normalize("aaaa", rules).text == "bb");
  }
  SUBCASE("tables whose targets re-trigger a source are rejected at load") {
    ctcseg::NormalizationRules rules;
    rules.allowed = {U'a', U'b', U'c', U'd'};
    rules.replacements.emplace_back(std::u32string(U"a"),
                                    std::u32string(U"bc"));
    rules.replacements.emplace_back(std::u32string(U"b"),
                                    std::u32string(U"dd"));
    CHECK_THROWS_AS(ctcseg::validate(rules), ctcseg::InvalidInputError);
  }
  SUBCASE("empty sources are rejected") {
    ctcseg::NormalizationRules rules;
    rules.allowed = {U'a'};
    rules.replacements.emplace_back(std::u32string(), std::u32string(U"a"));
    CHECK_THROWS_AS(ctcseg::validate(rules), ctcseg::InvalidInputError);
  }
  SUBCASE("targets with characters outside the charset are rejected") {
    ctcseg::NormalizationRules rules;
    rules.allowed = {U'a'};
    rules.replacements.emplace_back(std::u32string(U"3"),
                                    std::u32string(U"zz"));
    CHECK_THROWS_AS(ctcseg::validate(rules), ctcseg::InvalidInputError);
  }
}

TEST_CASE("lowercasing covers ASCII, Latin-1 letters, and uppercase sharp s") {
  const auto rules = make_rules("abcdefghijklmnopqrstuvwxyzäöüß");
  CHECK(ctcseg::normalize("ÄRGER", rules).text == "ärger");
  CHECK(ctcseg::normalize("GROẞ", rules).text == "groß");
  CHECK(ctcseg::normalize("ABC xyz", rules).text == "abc xyz");

  SUBCASE("the multiplication sign is not a letter and is not lowercased") {
    const auto strip = make_rules("ab", {}, true,
                                  ctcseg::DropPolicy::kStripChars);
    // U+00D7 sits inside the Latin-1 uppercase range but is excluded.
    CHECK(ctcseg::normalize("a×b", strip).text == "ab");
  }
}

TEST_CASE("whitespace is collapsed and trimmed after filtering") {
  const auto rules = make_rules("ab");
  CHECK(ctcseg::normalize("  a   b  ", rules).text == "a b");
  CHECK(ctcseg::normalize("a\tb", make_rules("ab", {{"\t", " "}})).text ==
        "a b");

  SUBCASE("the space character survives filtering without being listed") {
    // charset "ab" does not name the space; stage four owns whitespace.
    const auto result = ctcseg::normalize("a b", rules);
    CHECK(result.text == "a b");
  }
  SUBCASE("strip policy plus collapse never leaves doubled spaces") {
    const auto strip =
        make_rules("ab", {}, true, ctcseg::DropPolicy::kStripChars);
    CHECK(ctcseg::normalize("a ,, b", strip).text == "a b");
  }
}

TEST_CASE("normalize is idempotent across random inputs") {
  const auto rules = make_rules(
      "abcdefghijklmnopqrstuvwxyzäöüß",
      {{"1800", "achtzehnhundert"}, {"3", "drei"}, {"&", "und"}},
      /*lowercase=*/true, ctcseg::DropPolicy::kStripChars);
  const std::u32string pool =
      U"abcXYZ Ääßẞ&3.,;!18000  qq×";
  ctcseg::Prng rng(77);
  for (int seed = 0; seed < 100; ++seed) {
    std::u32string raw;
    const std::size_t length = rng.below(40);
    for (std::size_t i = 0; i < length; ++i) {
      raw.push_back(pool[static_cast<std::size_t>(rng.below(pool.size()))]);
    }
    const std::string input = ctcseg::utf32_to_utf8(raw);
    const auto once = ctcseg::normalize(input, rules);
    REQUIRE_FALSE(once.dropped);
    const auto twice = ctcseg::normalize(once.text, rules);
    REQUIRE_FALSE(twice.dropped);
    CHECK(once.text == twice.text);
  }
}

TEST_CASE("rules files parse sections, options, and validate on load") {
  ScratchDir dir("rules");
  const auto path = dir.file("rules.txt");
  {
    std::ofstream out(path, std::ios::binary);
    out << "[charset]\n"
        << "abcdefghijklmnopqrstuvwxyzäöüß \n"
        << "[replace]\n"
        << "1800\tachtzehnhundert\n"
        << ".\t\n"
        << "[options]\n"
        << "lowercase=true\n"
        << "drop_policy=strip_chars\n";
  }
  const auto rules = ctcseg::read_rules(path);
  CHECK(rules.lowercase);
  CHECK(rules.drop_policy == ctcseg::DropPolicy::kStripChars);
  CHECK(ctcseg::normalize("Es war 1800.", rules).text ==
        "es war achtzehnhundert");

  SUBCASE("a target outside the charset fails at load") {
    const auto bad = dir.file("bad.txt");
    std::ofstream out(bad, std::ios::binary);
    out << "[charset]\nab\n[replace]\n3\tdrei\n";
    out.close();
    CHECK_THROWS_AS(ctcseg::read_rules(bad), ctcseg::InvalidInputError);
  }
  SUBCASE("unknown option values fail at load") {
    const auto bad = dir.file("bad2.txt");
    std::ofstream out(bad, std::ios::binary);
    out << "[charset]\nab\n[options]\ndrop_policy=maybe\n";
    out.close();
    CHECK_THROWS_AS(ctcseg::read_rules(bad), ctcseg::Error);
  }
}

TEST_CASE("encode maps utterances to token indices with one separator") {
  ctcseg::TokenTable table;
  table.tokens = {"<blank>", "a", "b", " "};
  table.blank_index = 0;
  const auto rules = ctcseg::rules_from_token_table(table);
  ctcseg::TranscriptSet transcripts{"rec", {{"u1", "ab"}, {"u2", "ba"}}};

  const auto encoded = ctcseg::encode(transcripts, table, rules);
  CHECK(encoded.recording_id == "rec");
  CHECK(encoded.indices == std::vector<std::uint32_t>{1, 2, 3, 2, 1});
  REQUIRE(encoded.spans.size() == 2);
  CHECK(encoded.spans[0].begin == 0);
  CHECK(encoded.spans[0].end == 2);
  CHECK(encoded.spans[1].begin == 3);
  CHECK(encoded.spans[1].end == 5);  // index 2, the separator, is unclaimed
  CHECK(encoded.skipped.empty());

  SUBCASE("a single utterance has no separator") {
    ctcseg::TranscriptSet one{"rec", {{"u1", "a"}}};
    const auto enc = ctcseg::encode(one, table, rules);
    CHECK(enc.indices == std::vector<std::uint32_t>{1});
    CHECK(enc.spans[0].begin == 0);
    CHECK(enc.spans[0].end == 1);
  }
  SUBCASE("no encoded index is ever the blank") {
    for (std::uint32_t index : encoded.indices) {
      CHECK(index != table.blank_index);
    }
  }
}

TEST_CASE("characters without a token follow the drop policy at encode time") {
  const auto table = letters_table();
  ctcseg::TranscriptSet transcripts{"rec", {{"u1", "quartz"}}};

  SUBCASE("strip policy removes the unmapped characters") {
    const auto rules = ctcseg::rules_from_token_table(
        table, true, ctcseg::DropPolicy::kStripChars);
    // 'q' and 'u' have no tokens in the table.
    const auto enc = ctcseg::encode(transcripts, table, rules);
    REQUIRE(enc.spans.size() == 1);
    CHECK(enc.spans[0].text == "artz");
    CHECK(ctcseg::decode(enc.indices, table) == "artz");
  }
  SUBCASE("drop policy drops the whole utterance, recording the reason") {
    const auto rules = ctcseg::rules_from_token_table(
        table, true, ctcseg::DropPolicy::kDropUtterance);
    ctcseg::TranscriptSet two{"rec", {{"u1", "quartz"}, {"u2", "salz"}}};
    const auto enc = ctcseg::encode(two, table, rules);
    REQUIRE(enc.spans.size() == 1);
    CHECK(enc.spans[0].utterance_id == "u2");
    REQUIRE(enc.skipped.size() == 1);
    CHECK(enc.skipped[0].utterance_id == "u1");
    CHECK(enc.skipped[0].reason.find("q") != std::string::npos);
  }
  SUBCASE("every utterance dropped is an error") {
    const auto rules = ctcseg::rules_from_token_table(
        table, true, ctcseg::DropPolicy::kDropUtterance);
    CHECK_THROWS_AS(ctcseg::encode(transcripts, table, rules),
                    ctcseg::EncodeError);
  }
}

TEST_CASE("decode of encode reproduces the normalized texts joined by spaces") {
  const auto table = letters_table();
  const auto rules = ctcseg::rules_from_token_table(
      table, true, ctcseg::DropPolicy::kStripChars);
  ctcseg::TranscriptSet transcripts{
      "rec", {{"u1", "Hello  World"}, {"u2", "RED cat"}, {"u3", "zone"}}};
  const auto enc = ctcseg::encode(transcripts, table, rules);
  CHECK(ctcseg::decode(enc.indices, table) == "hello world red cat zone");
}

TEST_CASE("utterances that normalize to nothing are skipped with a reason") {
  const auto table = letters_table();
  const auto rules = ctcseg::rules_from_token_table(
      table, true, ctcseg::DropPolicy::kStripChars);
  ctcseg::TranscriptSet transcripts{"rec", {{"u1", "?!"}, {"u2", "echt"}}};
  const auto enc = ctcseg::encode(transcripts, table, rules);
  REQUIRE(enc.spans.size() == 1);
  CHECK(enc.spans[0].utterance_id == "u2");
  REQUIRE(enc.skipped.size() == 1);
  CHECK(enc.skipped[0].utterance_id == "u1");
}
