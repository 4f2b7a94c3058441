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

#include "ctcseg/types.hpp"

#include <cmath>
#include <span>
#include <string>
#include <unordered_set>

#include "ctcseg/errors.hpp"
#include "ctcseg/logmath.hpp"

namespace ctcseg {

namespace {

// Log probabilities may poke slightly above 0 from float rounding or from
// generators that renormalize in double and store in float. Anything larger
// is not a log probability.
constexpr double kLogProbSlack = 1e-3;

}  // namespace

void validate(const PosteriorMatrix& matrix) {
  if (matrix.frames < 1) {
    throw InvalidInputError("posterior matrix has no frames");
  }
  if (matrix.tokens < 2) {
    throw InvalidInputError(
        "posterior matrix needs at least two tokens (blank plus one label), "
        "got " +
        std::to_string(matrix.tokens));
  }
  if (matrix.blank_index >= matrix.tokens) {
    throw InvalidInputError("blank index " +
                            std::to_string(matrix.blank_index) +
                            " out of range for " +
                            std::to_string(matrix.tokens) + " tokens");
  }
  if (!(matrix.index_duration > 0.0f) || !std::isfinite(matrix.index_duration)) {
    throw InvalidInputError("index_duration must be a positive finite number");
  }
  const std::size_t expected =
      static_cast<std::size_t>(matrix.frames) * matrix.tokens;
  if (matrix.data.size() != expected) {
    throw InvalidInputError(
        "posterior data holds " + std::to_string(matrix.data.size()) +
        " values, expected frames*tokens = " + std::to_string(expected));
  }
  for (std::size_t i = 0; i < matrix.data.size(); ++i) {
    const float v = matrix.data[i];
    if (std::isnan(v) || (std::isinf(v) && v > 0)) {
      throw InvalidInputError("non-finite log probability at flat index " +
                              std::to_string(i));
    }
    if (v > kLogProbSlack) {
      throw InvalidInputError(
          "entry at flat index " + std::to_string(i) + " is " +
          std::to_string(v) + ", not a log probability");
    }
    // -inf is accepted on read paths that bypass the sentinel, but the
    // stored convention is the finite sentinel.
  }
}

bool check_normalization(const PosteriorMatrix& matrix, double tolerance,
                         std::vector<std::uint32_t>* rows) {
  bool ok = true;
  for (std::uint32_t r = 0; r < matrix.frames; ++r) {
    std::span<const float> row(
        matrix.data.data() + static_cast<std::size_t>(r) * matrix.tokens,
        matrix.tokens);
    const double lse = log_sum_exp(row);
    if (!(std::fabs(lse) <= tolerance)) {
      ok = false;
      if (rows != nullptr) rows->push_back(r);
    }
  }
  return ok;
}

void validate(const TokenTable& table) {
  if (table.tokens.size() < 2) {
    throw InvalidInputError("token table needs at least two tokens, got " +
                            std::to_string(table.tokens.size()));
  }
  if (table.blank_index >= table.tokens.size()) {
    throw InvalidInputError("blank index " + std::to_string(table.blank_index) +
                            " out of range for " +
                            std::to_string(table.tokens.size()) + " tokens");
  }
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < table.tokens.size(); ++i) {
    if (table.tokens[i].empty()) {
      throw InvalidInputError("token " + std::to_string(i) + " is empty");
    }
    if (!seen.insert(table.tokens[i]).second) {
      throw InvalidInputError("duplicate token '" + table.tokens[i] + "'");
    }
  }
}

void validate(const TranscriptSet& transcripts) {
  if (transcripts.utterances.empty()) {
    throw InvalidInputError("transcript has no utterances");
  }
  std::unordered_set<std::string> seen;
  for (const Utterance& utt : transcripts.utterances) {
    if (utt.id.empty()) {
      throw InvalidInputError("utterance with empty id");
    }
    if (!seen.insert(utt.id).second) {
      throw InvalidInputError("duplicate utterance id '" + utt.id + "'");
    }
  }
}

}  // namespace ctcseg
