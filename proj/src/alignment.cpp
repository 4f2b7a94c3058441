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

#include "ctcseg/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctcseg/errors.hpp"

namespace ctcseg {

namespace {

void check_alignment_inputs(const PosteriorMatrix& posteriors,
                            const EncodedText& text) {
  validate(posteriors);
  if (text.indices.empty()) {
    throw InvalidInputError("encoded text is empty");
  }
  for (std::uint32_t idx : text.indices) {
    if (idx >= posteriors.tokens) {
      throw InvalidInputError("text token index " + std::to_string(idx) +
                              " out of range for " +
                              std::to_string(posteriors.tokens) +
                              " posterior columns");
    }
    if (idx == posteriors.blank_index) {
      throw InvalidInputError("encoded text contains the blank token");
    }
  }
  if (text.indices.size() > posteriors.frames) {
    throw InfeasibleTextError(
        "text has " + std::to_string(text.indices.size()) +
        " characters but the recording has only " +
        std::to_string(posteriors.frames) +
        " frames; every character needs at least one frame");
  }
}

std::string infeasible_window_message(std::uint32_t window, std::uint32_t T,
                                      std::uint32_t M) {
  const double per_char = static_cast<double>(T) / static_cast<double>(M);
  const std::uint32_t needed =
      2 * static_cast<std::uint32_t>(std::ceil(per_char));
  return "window of " + std::to_string(window) +
         " frames is too narrow: with " + std::to_string(T) + " frames for " +
         std::to_string(M) +
         " characters, bands of consecutive characters do not overlap; "
         "increase the window to at least " +
         std::to_string(needed) + " or enable auto widening";
}

}  // namespace

void validate(const AlignConfig& config) {
  if (config.window_frames != 0 && config.window_frames < 16) {
    throw InvalidInputError(
        "window_frames must be 0 (full computation) or at least 16, got " +
        std::to_string(config.window_frames));
  }
  if (config.score_chunk_frames < 1) {
    throw InvalidInputError("score_chunk_frames must be at least 1");
  }
  if (std::isnan(config.min_score_log)) {
    throw InvalidInputError("min_score_log must not be NaN");
  }
}

// Shared fill for the full and banded variants; window == 0 means full.
// Defined at namespace scope to match the friend declaration in Trellis.
Trellis fill_trellis(const PosteriorMatrix& posteriors,
                     const EncodedText& text, std::uint32_t window,
                     bool stay_includes_char) {
  const std::uint32_t T = posteriors.frames;
  const std::uint32_t M = static_cast<std::uint32_t>(text.indices.size());

  Trellis trellis;
  trellis.frames_ = T;
  trellis.chars_ = M;
  trellis.window_ = window;
  trellis.stay_includes_char_ = stay_includes_char;
  trellis.bands_.resize(M + 1);
  trellis.offsets_.resize(M + 1, 0);

  if (window == 0) {
    for (std::uint32_t j = 1; j <= M; ++j) trellis.bands_[j] = {1, T};
  } else {
    const std::int64_t half = window / 2;
    for (std::uint32_t j = 1; j <= M; ++j) {
      // Expected position of character j assuming audio and text advance
      // proportionally.
      const std::int64_t center = std::llround(
          static_cast<double>(j) * static_cast<double>(T) / M);
      const std::int64_t lo = std::max<std::int64_t>(1, center - half);
      const std::int64_t hi = std::min<std::int64_t>(T, center + half);
      trellis.bands_[j] = {static_cast<std::uint32_t>(lo),
                           static_cast<std::uint32_t>(hi)};
    }
  }

  std::size_t total = 0;
  for (std::uint32_t j = 1; j <= M; ++j) {
    trellis.offsets_[j] = total;
    total += trellis.bands_[j].hi - trellis.bands_[j].lo + 1;
  }
  trellis.cells_.assign(total, kNegInf);

  const std::uint32_t blank = posteriors.blank_index;
  for (std::uint32_t j = 1; j <= M; ++j) {
    const std::uint32_t token = text.indices[j - 1];
    const Trellis::Band band = trellis.bands_[j];
    double* col = trellis.cells_.data() + trellis.offsets_[j];

    const Trellis::Band prev_band =
        j >= 2 ? trellis.bands_[j - 1] : Trellis::Band{1, 0};
    const double* prev_col =
        j >= 2 ? trellis.cells_.data() + trellis.offsets_[j - 1] : nullptr;

    double above = kNegInf;  // value at (t-1, j); frame band.lo-1 is outside
    for (std::uint32_t t = band.lo; t <= band.hi; ++t) {
      double stay_lp = posteriors.log_prob(t, blank);
      const double char_lp = posteriors.log_prob(t, token);
      if (stay_includes_char && char_lp > stay_lp) stay_lp = char_lp;

      double diag;  // value at (t-1, j-1)
      if (j == 1) {
        diag = 0.0;
      } else if (t - 1 >= prev_band.lo && t - 1 <= prev_band.hi) {
        diag = prev_col[(t - 1) - prev_band.lo];
      } else {
        diag = kNegInf;
      }

      const double stay = above + stay_lp;
      const double step = diag + char_lp;
      // Ties go to the stay transition.
      const double value = stay >= step ? stay : step;
      col[t - band.lo] = value;
      above = value;
    }
  }
  return trellis;
}

Trellis compute_trellis(const PosteriorMatrix& posteriors,
                        const EncodedText& text, const AlignConfig& config) {
  validate(config);
  check_alignment_inputs(posteriors, text);
  return fill_trellis(posteriors, text, 0, config.blank_stay_includes_char);
}

Trellis compute_trellis_windowed(const PosteriorMatrix& posteriors,
                                 const EncodedText& text,
                                 const AlignConfig& config) {
  check_alignment_inputs(posteriors, text);
  const std::uint32_t W = config.window_frames;
  if (W != 0) {
    const std::uint32_t T = posteriors.frames;
    const std::uint32_t M = static_cast<std::uint32_t>(text.indices.size());
    // Consecutive band centers are T/M frames apart; a half-window below
    // that leaves gaps no path can cross. Diagnosed before general config
    // validation so an unusable width is always reported as such.
    if (static_cast<double>(W / 2) < static_cast<double>(T) / M) {
      throw WindowError(WindowError::Kind::kInfeasible, 0,
                        infeasible_window_message(W, T, M));
    }
  }
  validate(config);
  return fill_trellis(posteriors, text, W, config.blank_stay_includes_char);
}

FrameAlignment backtrack(const Trellis& trellis,
                         const PosteriorMatrix& posteriors,
                         const EncodedText& text) {
  const std::uint32_t T = trellis.frames();
  const std::uint32_t M = trellis.chars();
  if (posteriors.frames != T ||
      text.indices.size() != static_cast<std::size_t>(M)) {
    throw InvalidInputError(
        "trellis shape does not match the posteriors/text it is walked "
        "with");
  }
  check_alignment_inputs(posteriors, text);
  const bool banded = trellis.window() != 0;
  const std::uint32_t blank = posteriors.blank_index;

  // Most probable completion frame; earliest wins ties.
  const Trellis::Band last_band = trellis.band(M);
  double best = kNegInf;
  std::uint32_t end_frame = 0;
  for (std::uint32_t t = last_band.lo; t <= last_band.hi; ++t) {
    const double v = trellis.at(t, M);
    if (v > best) {
      best = v;
      end_frame = t;
    }
  }
  if (!(best > kNegInf)) {
    if (banded) {
      throw WindowError(WindowError::Kind::kEscape, M,
                        "no complete path fits inside the band; widen the "
                        "window");
    }
    throw NoPathError("every complete alignment has probability zero");
  }

  FrameAlignment out;
  out.end_frame = end_frame;
  out.path_log_prob = best;
  out.chars.assign(T, 0);
  out.log_transition.assign(T, 0.0);
  for (std::uint32_t t = end_frame + 1; t <= T; ++t) {
    out.chars[t - 1] = M;
    out.log_transition[t - 1] = posteriors.log_prob(t, blank);
  }

  std::uint32_t t = end_frame;
  std::uint32_t j = M;
  while (t >= 1 && j >= 1) {
    out.chars[t - 1] = j;
    const std::uint32_t token = text.indices[j - 1];

    // Walking on a banded trellis is only sound while the compared
    // predecessor cells were actually computed; a path that reaches the
    // band boundary must be rejected rather than silently diverge from the
    // full computation.
    if (banded && t >= 2 &&
        (!trellis.materialized(t - 1, j) ||
         !trellis.materialized(t - 1, j - 1))) {
      throw WindowError(
          WindowError::Kind::kEscape, j,
          "backtracking reached the band boundary at character " +
              std::to_string(j) + " (frame " + std::to_string(t) +
              "); widen the window");
    }

    double stay_lp = posteriors.log_prob(t, blank);
    if (trellis.blank_stay_includes_char()) {
      const double char_lp = posteriors.log_prob(t, token);
      if (char_lp > stay_lp) stay_lp = char_lp;
    }
    const double stay = trellis.at(t - 1, j) + stay_lp;
    const double step = trellis.at(t - 1, j - 1) + posteriors.log_prob(t, token);
    if (!(stay > kNegInf) && !(step > kNegInf)) {
      // Unreachable when the trellis came from fill_trellis: a finite cell
      // always has a finite predecessor through one of the two transitions.
      throw NoPathError("backtracking dead-ended at frame " +
                        std::to_string(t));
    }
    if (stay > step) {
      out.log_transition[t - 1] = stay_lp;
      --t;
    } else {
      out.log_transition[t - 1] = posteriors.log_prob(t, token);
      --t;
      --j;
    }
  }
  return out;
}

SegmentManifest extract_segments(const FrameAlignment& alignment,
                                 const EncodedText& text,
                                 const PosteriorMatrix& posteriors,
                                 const AlignConfig& config) {
  validate(config);
  const std::uint32_t T = posteriors.frames;
  const std::uint32_t M = static_cast<std::uint32_t>(text.indices.size());
  if (alignment.chars.size() != T) {
    throw InvalidInputError("alignment does not match the posterior length");
  }
  if (alignment.end_frame < 1 || alignment.end_frame > T) {
    throw InvalidInputError("alignment end frame out of range");
  }
  const double delta = static_cast<double>(posteriors.index_duration);
  const std::uint32_t L = config.score_chunk_frames;

  // First and last frame assigned to each character, ignoring the flat
  // tail after end_frame (those frames carry no evidence).
  std::vector<std::uint32_t> first_frame(M + 1, 0);
  std::vector<std::uint32_t> last_frame(M + 1, 0);
  for (std::uint32_t t = 1; t <= alignment.end_frame; ++t) {
    const std::uint32_t j = alignment.chars[t - 1];
    if (j == 0) continue;
    if (j > M) {
      throw InvalidInputError("alignment references character " +
                              std::to_string(j) + " beyond the text");
    }
    if (first_frame[j] == 0) first_frame[j] = t;
    last_frame[j] = t;
  }

  SegmentManifest manifest;
  manifest.recording_id = text.recording_id;
  double previous_end = 0.0;
  for (const UtteranceSpan& span : text.spans) {
    Segment seg;
    seg.utterance_id = span.utterance_id;
    seg.text = span.text;

    const bool empty_span = span.begin >= span.end;
    const std::uint32_t jb = span.begin + 1;  // first character, 1-based
    const std::uint32_t je = span.end;        // last character, 1-based
    if (empty_span || first_frame[jb] == 0 || last_frame[je] == 0 ||
        last_frame[je] < first_frame[jb]) {
      seg.degenerate = true;
      seg.filtered = true;
      seg.start = previous_end;
      seg.end = previous_end;
      seg.score_log = kLogZeroSentinel;
      manifest.segments.push_back(std::move(seg));
      continue;
    }

    const std::uint32_t s = first_frame[jb];
    const std::uint32_t e = last_frame[je];
    seg.start = static_cast<double>(s - 1) * delta;
    seg.end = static_cast<double>(e) * delta;

    // Minimum over chunk means of the per-frame log transition
    // probabilities: one weak stretch marks the whole segment.
    double score = kNegInf;
    bool first_chunk = true;
    for (std::uint32_t chunk_lo = s; chunk_lo <= e; chunk_lo += L) {
      const std::uint32_t chunk_hi = std::min(e, chunk_lo + L - 1);
      double sum = 0.0;
      for (std::uint32_t t = chunk_lo; t <= chunk_hi; ++t) {
        sum += alignment.log_transition[t - 1];
      }
      const double mean = sum / (chunk_hi - chunk_lo + 1);
      if (first_chunk || mean < score) score = mean;
      first_chunk = false;
    }
    if (score <= kLogZeroThreshold) score = kLogZeroSentinel;
    seg.score_log = score;
    seg.filtered = score < config.min_score_log;
    previous_end = seg.end;
    manifest.segments.push_back(std::move(seg));
  }
  return manifest;
}

SegmentManifest align(const PosteriorMatrix& posteriors,
                      const TranscriptSet& transcripts,
                      const TokenTable& table,
                      const NormalizationRules& rules,
                      const AlignConfig& config) {
  validate(config);
  validate(posteriors);
  validate(table);
  if (table.tokens.size() != posteriors.tokens) {
    throw InvalidInputError(
        "token table has " + std::to_string(table.tokens.size()) +
        " entries but the posteriors have " +
        std::to_string(posteriors.tokens) + " columns");
  }
  if (table.blank_index != posteriors.blank_index) {
    throw InvalidInputError(
        "token table blank index " + std::to_string(table.blank_index) +
        " disagrees with the posterior header's " +
        std::to_string(posteriors.blank_index));
  }

  const EncodedText encoded = encode(transcripts, table, rules);

  AlignConfig effective = config;
  std::uint32_t widenings = 0;
  for (;;) {
    try {
      const Trellis trellis =
          effective.window_frames == 0
              ? compute_trellis(posteriors, encoded, effective)
              : compute_trellis_windowed(posteriors, encoded, effective);
      const FrameAlignment alignment =
          backtrack(trellis, posteriors, encoded);
      return extract_segments(alignment, encoded, posteriors, effective);
    } catch (const WindowError&) {
      if (!config.auto_widen || effective.window_frames == 0 ||
          widenings >= config.max_widen_doublings) {
        throw;
      }
      ++widenings;
      const std::uint64_t doubled =
          static_cast<std::uint64_t>(effective.window_frames) * 2;
      if (doubled >= 2 * static_cast<std::uint64_t>(posteriors.frames)) {
        // The band would cover every frame anyway; the full computation is
        // the same result without the banding bookkeeping.
        effective.window_frames = 0;
      } else {
        effective.window_frames = static_cast<std::uint32_t>(doubled);
      }
    }
  }
}

}  // namespace ctcseg
