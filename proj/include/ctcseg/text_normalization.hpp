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

#ifndef CTCSEG_TEXT_NORMALIZATION_HPP_
#define CTCSEG_TEXT_NORMALIZATION_HPP_

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctcseg/types.hpp"

namespace ctcseg {

// What to do with a character outside the allowed set.
enum class DropPolicy {
  kDropUtterance,  // discard the whole utterance, keep a skip record
  kStripChars,     // silently delete the character
};

// Normalization pipeline, applied in this order:
//   1. replacements — single left-to-right pass; at each position the
//      longest matching source wins and its target is emitted without being
//      rescanned (so the table cannot loop),
//   2. lowercasing (when enabled),
//   3. charset filter under drop_policy — the space character is exempt
//      because stage 4 owns whitespace,
//   4. whitespace cleanup: runs of spaces collapse to one, edges trimmed.
struct NormalizationRules {
  std::set<char32_t> allowed;
  // Source -> target pairs; matching always prefers the longest source.
  std::vector<std::pair<std::u32string, std::u32string>> replacements;
  bool lowercase = true;
  DropPolicy drop_policy = DropPolicy::kDropUtterance;
};

// Throws InvalidInputError on: an empty replacement source, a target that
// contains a disallowed character (after lowercasing, when enabled), or a
// target that the table would rewrite again — the last two guarantee
// normalize(normalize(x)) == normalize(x).
void validate(const NormalizationRules& rules);

// Rule file format, UTF-8, by section:
//
//   [charset]
//   <one line: every allowed character, verbatim, e.g. "abc... ">
//   [replace]
//   <source>\t<target>       (one per line; target may be empty)
//   [options]
//   lowercase=true|false
//   drop_policy=drop_utterance|strip_chars
//
// Blank lines are ignored; sections may appear in any order; [replace] and
// [options] are optional. The result is validated. Throws IoError /
// InvalidInputError.
NormalizationRules read_rules(const std::filesystem::path& path);

// Rules accepting exactly the single-character tokens of `table` (the blank
// excluded), plus the space character when the table has a space token.
// No replacements.
NormalizationRules rules_from_token_table(const TokenTable& table,
                                          bool lowercase = true,
                                          DropPolicy policy = DropPolicy::kStripChars);

struct NormalizeResult {
  bool dropped = false;
  std::string text;       // normalized text; meaningful when !dropped
  std::string offending;  // character that caused the drop, UTF-8
};

NormalizeResult normalize(std::string_view text,
                          const NormalizationRules& rules);

// Where one utterance sits inside EncodedText::indices.
struct UtteranceSpan {
  std::string utterance_id;
  std::string text;         // normalized utterance text, as encoded
  std::uint32_t begin = 0;  // half-open [begin, end) into indices
  std::uint32_t end = 0;
};

struct SkippedUtterance {
  std::string utterance_id;
  std::string reason;
};

// A whole transcript rendered as one token-index sequence. Consecutive
// utterances are joined by a single space token that belongs to neither
// span; indices never contain the blank.
struct EncodedText {
  std::string recording_id;
  std::vector<std::uint32_t> indices;  // length M
  std::vector<UtteranceSpan> spans;    // in transcript order
  std::vector<SkippedUtterance> skipped;
};

// Normalizes every utterance and maps it to token indices. Utterances that
// are dropped by the rules, or are empty after normalization, are recorded
// in `skipped` instead of encoded. Throws EncodeError when an allowed
// character has no token under DropPolicy::kDropUtterance (the message
// names the character and the utterance id; under kStripChars the character
// is stripped), when utterances must be joined but the table has no space
// token, or when every utterance was skipped.
EncodedText encode(const TranscriptSet& transcripts, const TokenTable& table,
                   const NormalizationRules& rules);

// Maps token indices back to text through the table.
std::string decode(std::span<const std::uint32_t> indices,
                   const TokenTable& table);

}  // namespace ctcseg

#endif  // CTCSEG_TEXT_NORMALIZATION_HPP_
