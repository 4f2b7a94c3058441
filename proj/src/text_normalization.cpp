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

#include "ctcseg/text_normalization.hpp"

#include <algorithm>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctcseg/errors.hpp"
#include "ctcseg/utf8.hpp"

namespace ctcseg {

namespace {

// ASCII plus the Latin-1 uppercase range (except the multiplication sign)
// plus the capital sharp s. Covers the European-language material this
// toolkit targets without pulling in a Unicode library.
char32_t lower_char(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if (c == 0x1E9E) return 0xDF;  // uppercase ß
  return c;
}

std::u32string lower(std::u32string s) {
  for (char32_t& c : s) c = lower_char(c);
  return s;
}

// Replacement pass: one sweep, longest matching source wins, targets are
// emitted without rescanning.
std::u32string apply_replacements(const std::u32string& text,
                                  const NormalizationRules& rules) {
  if (rules.replacements.empty()) return text;
  std::u32string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::pair<std::u32string, std::u32string>* best = nullptr;
    for (const auto& rule : rules.replacements) {
      const std::u32string& src = rule.first;
      if (best != nullptr && src.size() <= best->first.size()) continue;
      if (src.size() <= text.size() - pos &&
          text.compare(pos, src.size(), src) == 0) {
        best = &rule;
      }
    }
    if (best != nullptr) {
      out += best->second;
      pos += best->first.size();
    } else {
      out += text[pos++];
    }
  }
  return out;
}

std::string reason_for_offender(const std::string& offending) {
  return "disallowed character '" + offending + "'";
}

}  // namespace

void validate(const NormalizationRules& rules) {
  for (const auto& [source, target] : rules.replacements) {
    if (source.empty()) {
      throw InvalidInputError("replacement with empty source");
    }
    // The target as it will appear in normalize() output.
    const std::u32string settled = rules.lowercase ? lower(target) : target;
    for (char32_t c : settled) {
      if (c != U' ' && rules.allowed.find(c) == rules.allowed.end()) {
        throw InvalidInputError("replacement '" + utf32_to_utf8(source) +
                                "' -> '" + utf32_to_utf8(target) +
                                "' produces disallowed character '" +
                                utf8_of(c) + "'");
      }
    }
    // Idempotence: a second normalization pass must find nothing to
    // rewrite inside any settled target.
    for (const auto& other : rules.replacements) {
      if (!other.first.empty() &&
          settled.find(other.first) != std::u32string::npos) {
        throw InvalidInputError(
            "replacement target '" + utf32_to_utf8(target) +
            "' still matches source '" + utf32_to_utf8(other.first) +
            "'; normalization would not be idempotent");
      }
    }
  }
}

NormalizationRules read_rules(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  NormalizationRules rules;
  enum class Section { kNone, kCharset, kReplace, kOptions };
  Section section = Section::kNone;
  bool charset_line_pending = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    const std::string location =
        path.string() + ":" + std::to_string(line_no);

    if (line == "[charset]") {
      section = Section::kCharset;
      charset_line_pending = true;
      continue;
    }
    if (line == "[replace]") {
      section = Section::kReplace;
      continue;
    }
    if (line == "[options]") {
      section = Section::kOptions;
      continue;
    }
    if (line.empty()) continue;

    switch (section) {
      case Section::kNone:
        throw IoError(location + ": content before any section header");
      case Section::kCharset: {
        if (!charset_line_pending) {
          throw IoError(location + ": [charset] takes a single line");
        }
        for (char32_t c : utf8_to_utf32(line)) rules.allowed.insert(c);
        charset_line_pending = false;
        break;
      }
      case Section::kReplace: {
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
          throw IoError(location + ": expected '<source>\\t<target>'");
        }
        rules.replacements.emplace_back(
            utf8_to_utf32(std::string_view(line).substr(0, tab)),
            utf8_to_utf32(std::string_view(line).substr(tab + 1)));
        break;
      }
      case Section::kOptions: {
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
          throw IoError(location + ": expected 'key=value'");
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "lowercase") {
          if (value == "true") {
            rules.lowercase = true;
          } else if (value == "false") {
            rules.lowercase = false;
          } else {
            throw IoError(location + ": lowercase must be true or false");
          }
        } else if (key == "drop_policy") {
          if (value == "drop_utterance") {
            rules.drop_policy = DropPolicy::kDropUtterance;
          } else if (value == "strip_chars") {
            rules.drop_policy = DropPolicy::kStripChars;
          } else {
            throw IoError(location +
                          ": drop_policy must be drop_utterance or "
                          "strip_chars");
          }
        } else {
          throw IoError(location + ": unknown option '" + key + "'");
        }
        break;
      }
    }
  }
  if (in.bad()) {
    throw IoError("read failure on " + path.string());
  }
  // Longest source first; scanning prefers longest anyway, this keeps the
  // stored form canonical.
  std::stable_sort(rules.replacements.begin(), rules.replacements.end(),
                   [](const auto& a, const auto& b) {
                     return a.first.size() > b.first.size();
                   });
  validate(rules);
  return rules;
}

NormalizationRules rules_from_token_table(const TokenTable& table,
                                          bool lowercase, DropPolicy policy) {
  validate(table);
  NormalizationRules rules;
  rules.lowercase = lowercase;
  rules.drop_policy = policy;
  for (std::size_t i = 0; i < table.tokens.size(); ++i) {
    if (i == table.blank_index) continue;
    const std::u32string cps = utf8_to_utf32(table.tokens[i]);
    if (cps.size() == 1) rules.allowed.insert(cps[0]);
  }
  return rules;
}

NormalizeResult normalize(std::string_view text,
                          const NormalizationRules& rules) {
  std::u32string work = apply_replacements(utf8_to_utf32(text), rules);
  if (rules.lowercase) work = lower(std::move(work));

  std::u32string kept;
  kept.reserve(work.size());
  for (char32_t c : work) {
    if (c == U' ' || rules.allowed.count(c) != 0) {
      kept.push_back(c);
    } else if (rules.drop_policy == DropPolicy::kDropUtterance) {
      NormalizeResult result;
      result.dropped = true;
      result.offending = utf8_of(c);
      return result;
    }
    // kStripChars: drop the character, keep going.
  }

  // Collapse space runs, trim the edges.
  std::u32string out;
  out.reserve(kept.size());
  for (char32_t c : kept) {
    if (c == U' ' && (out.empty() || out.back() == U' ')) continue;
    out.push_back(c);
  }
  while (!out.empty() && out.back() == U' ') out.pop_back();

  NormalizeResult result;
  result.text = utf32_to_utf8(out);
  return result;
}

EncodedText encode(const TranscriptSet& transcripts, const TokenTable& table,
                   const NormalizationRules& rules) {
  validate(transcripts);
  validate(table);
  validate(rules);

  std::unordered_map<char32_t, std::uint32_t> token_of;
  for (std::size_t i = 0; i < table.tokens.size(); ++i) {
    if (i == table.blank_index) continue;
    const std::u32string cps = utf8_to_utf32(table.tokens[i]);
    if (cps.size() == 1) {
      token_of.emplace(cps[0], static_cast<std::uint32_t>(i));
    }
  }
  const auto space_it = token_of.find(U' ');

  EncodedText out;
  out.recording_id = transcripts.recording_id;
  for (const Utterance& utt : transcripts.utterances) {
    NormalizeResult norm = normalize(utt.text, rules);
    if (norm.dropped) {
      out.skipped.push_back({utt.id, reason_for_offender(norm.offending)});
      continue;
    }
    if (norm.text.empty()) {
      out.skipped.push_back({utt.id, "empty after normalization"});
      continue;
    }

    std::vector<std::uint32_t> utt_indices;
    std::u32string encoded_text;
    for (char32_t c : utf8_to_utf32(norm.text)) {
      const auto it = token_of.find(c);
      if (it == token_of.end()) {
        if (rules.drop_policy == DropPolicy::kStripChars) continue;
        throw EncodeError("no token for character '" + utf8_of(c) +
                          "' in utterance '" + utt.id + "'");
      }
      utt_indices.push_back(it->second);
      encoded_text.push_back(c);
    }
    if (utt_indices.empty()) {
      out.skipped.push_back({utt.id, "no encodable characters"});
      continue;
    }

    if (!out.spans.empty()) {
      if (space_it == token_of.end()) {
        throw EncodeError(
            "token table has no space token to separate utterances");
      }
      out.indices.push_back(space_it->second);
    }
    UtteranceSpan span;
    span.utterance_id = utt.id;
    span.text = utf32_to_utf8(encoded_text);
    span.begin = static_cast<std::uint32_t>(out.indices.size());
    out.indices.insert(out.indices.end(), utt_indices.begin(),
                       utt_indices.end());
    span.end = static_cast<std::uint32_t>(out.indices.size());
    out.spans.push_back(std::move(span));
  }

  if (out.spans.empty()) {
    throw EncodeError("every utterance was dropped; nothing to align");
  }
  return out;
}

std::string decode(std::span<const std::uint32_t> indices,
                   const TokenTable& table) {
  std::string out;
  for (std::uint32_t idx : indices) {
    if (idx >= table.tokens.size()) {
      throw InvalidInputError("token index " + std::to_string(idx) +
                              " out of range");
    }
    out += table.tokens[idx];
  }
  return out;
}

}  // namespace ctcseg
