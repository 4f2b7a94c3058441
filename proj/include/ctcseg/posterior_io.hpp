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

#ifndef CTCSEG_POSTERIOR_IO_HPP_
#define CTCSEG_POSTERIOR_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "ctcseg/types.hpp"

namespace ctcseg {

// Binary posterior file, little-endian throughout:
//
//   bytes 0..3   magic "CTCP"
//   bytes 4..7   u32 format version, currently 1
//   bytes 8..11  u32 frame count T
//   bytes 12..15 u32 token count C (blank included)
//   bytes 16..19 u32 blank token index
//   bytes 20..23 f32 index_duration, seconds per frame
//   bytes 24..   T*C f32 natural-log probabilities, row-major by frame
//
// log(0) is stored as -1e30; see logmath.hpp. The payload size must equal
// T*C*4 exactly.
inline constexpr char kPosteriorMagic[4] = {'C', 'T', 'C', 'P'};
inline constexpr std::uint32_t kPosteriorFormatVersion = 1;

// Tolerance on |log sum_c p(c)| per frame before a row is reported as
// unnormalized (a diagnostic, not an error: float rounding and lightly
// smoothed model outputs land within it, genuinely broken data does not).
inline constexpr double kRowNormalizationTolerance = 1e-3;

// Reads and fully validates a posterior file. Rows failing the
// normalization check are recorded in the result's unnormalized_rows.
// Throws IoError on malformed or truncated files and on header/payload
// inconsistencies; throws InvalidInputError when the decoded matrix
// violates a PosteriorMatrix invariant (e.g. non-finite entries).
PosteriorMatrix read_posteriors(const std::filesystem::path& path);

// Writes `matrix` in the format above. Throws InvalidInputError when the
// matrix is invalid, IoError when the file cannot be written.
void write_posteriors(const PosteriorMatrix& matrix,
                      const std::filesystem::path& path);

// Reads a token table: one token per line, the line number (0-based) is the
// token index. Lines are taken verbatim except for a trailing CR, so a line
// holding a single space is the space token. `blank_index` is recorded in
// the returned table; callers typically pass the value from the posterior
// header. Throws IoError / InvalidInputError.
TokenTable read_token_table(const std::filesystem::path& path,
                            std::uint32_t blank_index = 0);

// Reads a transcript: one utterance per line, "<utterance_id>\t<text>".
// The recording id is supplied by the caller (it is not part of the file).
// Throws IoError on unreadable files or lines without a tab;
// InvalidInputError on duplicate or empty utterance ids.
TranscriptSet read_transcripts(const std::filesystem::path& path,
                               const std::string& recording_id);

// Segment manifest serializations.
//   kKaldi: "<utterance_id> <recording_id> <start> <end>" per line, times in
//           seconds with two decimals. Flags and scores are not
//           representable and are dropped.
//   kJson:  one object {"recording_id", "segments":[{"utterance_id",
//           "start", "end", "score_log", "text", "filtered",
//           "degenerate"}, ...]} carrying everything.
// Times are rounded to 10 ms in both formats so the two stay consistent.
enum class SegmentFormat { kKaldi, kJson };

void write_segments(const SegmentManifest& manifest, SegmentFormat format,
                    const std::filesystem::path& path);

// Reads either format back; JSON is detected by a leading '{'. Fields absent
// from the Kaldi format default (score_log 0, text empty, flags false).
// Segments are returned ordered by start time.
SegmentManifest read_segments(const std::filesystem::path& path);

}  // namespace ctcseg

#endif  // CTCSEG_POSTERIOR_IO_HPP_
