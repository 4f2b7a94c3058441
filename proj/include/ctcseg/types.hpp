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

#ifndef CTCSEG_TYPES_HPP_
#define CTCSEG_TYPES_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ctcseg/logmath.hpp"

namespace ctcseg {

// Frame-wise token log posteriors for one recording.
//
// `data` is row-major with `frames` rows and `tokens` columns; entries are
// natural-log probabilities, each <= 0 up to small numeric jitter, with
// log(0) stored as kLogZeroSentinel. Alignment equations index frames
// 1-based: frame t reads row t-1.
struct PosteriorMatrix {
  std::uint32_t frames = 0;       // T
  std::uint32_t tokens = 0;       // C, blank included
  std::uint32_t blank_index = 0;  // column of the blank token
  float index_duration = 0.0f;    // seconds of audio covered by one frame
  std::vector<float> data;        // frames x tokens, row-major

  // Rows whose probabilities do not sum to one within tolerance; filled by
  // read_posteriors() for diagnostics, not serialized.
  std::vector<std::uint32_t> unnormalized_rows;

  float& at(std::uint32_t row, std::uint32_t col) {
    return data[static_cast<std::size_t>(row) * tokens + col];
  }
  float at(std::uint32_t row, std::uint32_t col) const {
    return data[static_cast<std::size_t>(row) * tokens + col];
  }

  // Log probability of `token` at 1-based `frame`, with the stored log(0)
  // sentinel mapped to -infinity.
  double log_prob(std::uint32_t frame, std::uint32_t token) const {
    return to_working_log(at(frame - 1, token));
  }

  double duration() const {
    return static_cast<double>(frames) * static_cast<double>(index_duration);
  }
};

// Throws InvalidInputError unless every invariant holds: frames >= 1,
// tokens >= 2, blank_index < tokens, index_duration > 0 and finite,
// data sized frames*tokens, every entry finite and <= 1e-3 (small positive
// jitter from rounding is tolerated, real positives are not).
void validate(const PosteriorMatrix& matrix);

// True when every row's log-sum-exp is within `tolerance` of 0. Rows that
// deviate are appended to `rows` when non-null.
bool check_normalization(const PosteriorMatrix& matrix, double tolerance,
                         std::vector<std::uint32_t>* rows = nullptr);

// Output alphabet of the posterior model. Index i names the token of
// posterior column i.
struct TokenTable {
  std::vector<std::string> tokens;
  std::uint32_t blank_index = 0;
};

// Throws InvalidInputError on: fewer than two tokens, an empty token,
// duplicate tokens, blank_index out of range.
void validate(const TokenTable& table);

struct Utterance {
  std::string id;
  std::string text;
};

// Ordered transcript of one recording.
struct TranscriptSet {
  std::string recording_id;
  std::vector<Utterance> utterances;
};

// Throws InvalidInputError on: no utterances, an empty or duplicate
// utterance id.
void validate(const TranscriptSet& transcripts);

// One aligned utterance. `start` is the leading edge of the first frame the
// utterance occupies, `end` the trailing edge of the last one, both in
// seconds from the start of the recording.
struct Segment {
  std::string utterance_id;
  double start = 0.0;
  double end = 0.0;
  double score_log = 0.0;   // confidence, log domain, <= 0
  std::string text;         // normalized utterance text
  bool filtered = false;    // score fell below the configured threshold
  bool degenerate = false;  // no frames were aligned; score_log is log(0)
};

struct SegmentManifest {
  std::string recording_id;
  std::vector<Segment> segments;  // ordered by start time
};

}  // namespace ctcseg

#endif  // CTCSEG_TYPES_HPP_
