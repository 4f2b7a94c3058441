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

#ifndef CTCSEG_SYNTHESIS_HPP_
#define CTCSEG_SYNTHESIS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ctcseg/types.hpp"

namespace ctcseg {

// One utterance to plant in a synthetic recording.
struct PlantedUtterance {
  std::string id;
  std::string text;
  // Seconds; < 0 places the utterance at the running layout position
  // (previous end + blank_gap_frames). Explicit starts must respect layout
  // order and may only add space, never overlap.
  double start_sec = -1.0;
  // When false the utterance appears in the transcript but not in the
  // audio, for exercising mismatched-text handling. It occupies no frames.
  bool in_audio = true;
};

// Recipe for a synthetic posterior matrix with known segment boundaries.
//
// Frames covered by an utterance put probability peak_prob on the
// character's token (each character lasting frames_per_char frames) and
// spread the remainder uniformly; all other frames peak the blank the same
// way. After each planted utterance that is followed by another transcript
// entry, the frame right after its last character peaks the space token
// that separates utterances, which anchors the separator and makes the
// planted boundaries the unique optimum. Optional uniform noise of
// amplitude noise_amplitude is added to every probability before
// renormalizing, seeded by noise_seed.
struct SynthSpec {
  TokenTable token_table;
  std::vector<PlantedUtterance> utterances;
  std::string recording_id = "synth";
  std::uint32_t frames_per_char = 1;
  std::uint32_t blank_gap_frames = 10;  // between utterances
  std::uint32_t prologue_frames = 0;    // leading non-speech
  std::uint32_t epilogue_frames = 0;    // trailing non-speech
  double peak_prob = 0.98;
  double noise_amplitude = 0.0;
  std::uint64_t noise_seed = 0;
  float index_duration = 0.01f;
};

// Throws InvalidInputError on: invalid token table, no utterances,
// duplicate or empty utterance ids, a text character without a token,
// frames_per_char == 0, peak_prob outside (1/C, 1], negative
// noise_amplitude, non-positive index_duration, explicit starts that break
// layout order.
void validate(const SynthSpec& spec);

// JSON spec file: {"tokens": [...], "blank_index": 0, "utterances":
// [{"id", "text", "start_sec"?, "in_audio"?}, ...], plus any of the scalar
// fields by name}. Missing fields keep their defaults. Throws IoError /
// InvalidInputError.
SynthSpec read_synth_spec(const std::filesystem::path& path);

// The transcript the spec implies: every utterance, in order, including
// the ones not planted in the audio.
TranscriptSet transcript_of(const SynthSpec& spec);

struct SynthResult {
  PosteriorMatrix posteriors;
  // Ground-truth segments of the utterances that are in the audio, with
  // score_log 0 (scores are not part of the ground truth).
  SegmentManifest truth;
};

SynthResult generate(const SynthSpec& spec);

// Exhaustive reference for the trellis recurrence and backtracking: the
// best monotone frame-to-character assignment found by enumerating every
// path. Intended for tiny instances; throws InvalidInputError when
// frames > 14 or chars > 5 (the walk is exponential by design — it must
// not reuse the dynamic program it checks).
struct BrutePath {
  bool feasible = false;  // false: every complete path has probability 0
  double log_prob = kNegInf;
  std::uint32_t end_frame = 0;  // earliest frame attaining the optimum
  // Same convention as FrameAlignment::chars (frames after end_frame get
  // chars-count, frames before the text starts get 0).
  std::vector<std::uint32_t> chars;
  // True when exactly one optimal (end_frame, assignment) exists within a
  // tolerance of 1e-9 on the log probability.
  bool unique = false;
};

BrutePath brute_force_best_path(const PosteriorMatrix& posteriors,
                                std::span<const std::uint32_t> char_tokens);

}  // namespace ctcseg

#endif  // CTCSEG_SYNTHESIS_HPP_
