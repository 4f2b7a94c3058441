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

#ifndef CTCSEG_ALIGNMENT_HPP_
#define CTCSEG_ALIGNMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ctcseg/logmath.hpp"
#include "ctcseg/text_normalization.hpp"
#include "ctcseg/types.hpp"

namespace ctcseg {

struct AlignConfig {
  // Band width W in frames for the windowed trellis; 0 selects the full
  // (unbanded) computation. With banding, column j only covers frames
  // within W/2 of the expected position t = round(j*T/M), cutting cost from
  // O(T*M) to O(M*W).
  std::uint32_t window_frames = 8000;

  // When the best path runs against the band boundary, double the window
  // and retry instead of failing, at most max_widen_doublings times.
  bool auto_widen = false;
  std::uint32_t max_widen_doublings = 4;

  // Chunk length L in frames for confidence scoring: a segment's score is
  // the minimum over consecutive length-L chunks of the mean per-frame log
  // transition probability, so one bad stretch cannot hide behind a long
  // good segment. The last chunk may be shorter and is averaged over its
  // actual length.
  std::uint32_t score_chunk_frames = 30;

  // Segments scoring strictly below this natural-log threshold are flagged
  // as filtered (they are still reported). The default corresponds to a
  // per-frame probability of about 0.22.
  double min_score_log = -1.5;

  // When true, the stay transition may also use the probability of the
  // character itself, max(p(blank|t), p(c_j|t)), which tolerates models
  // that stretch a character over many frames without emitting blanks.
  // Off by default: the plain rule keeps scores honest about blanks.
  bool blank_stay_includes_char = false;
};

// Throws InvalidInputError on: score_chunk_frames == 0, min_score_log > 0
// or non-finite.
void validate(const AlignConfig& config);

// Alignment lattice. Cell (t, j) holds the maximal joint log probability of
// consuming the first j characters of the text within the first t frames,
// maximized over all monotone paths; the text may start at any frame
// (column 0 is 0 everywhere = free start) and characters may be separated
// by any number of blank frames.
//
// Recurrence over 1-based t and j, in the log domain:
//   cell(t, j) = max( cell(t-1, j)   + log p(blank|t),      // stay
//                     cell(t-1, j-1) + log p(c_j|t) )       // advance
//   cell(t, 0) = 0,  cell(0, j>0) = log 0
// Ties resolve to the stay transition.
//
// Storage is per-column: column j materializes only frames in
// [band(j).lo, band(j).hi]; reads outside return log 0. The full trellis is
// the special case band(j) = [1, T].
class Trellis {
 public:
  struct Band {
    std::uint32_t lo = 1;  // inclusive, 1-based frames
    std::uint32_t hi = 0;  // inclusive; hi < lo means empty
  };

  std::uint32_t frames() const { return frames_; }  // T
  std::uint32_t chars() const { return chars_; }    // M
  // Band width this trellis was built with; 0 means full.
  std::uint32_t window() const { return window_; }
  bool blank_stay_includes_char() const { return stay_includes_char_; }

  Band band(std::uint32_t j) const { return bands_[j]; }

  // Logical cell value: 0 for j == 0, log 0 for t == 0 (j >= 1) and for
  // frames outside column j's band.
  double at(std::uint32_t t, std::uint32_t j) const {
    if (j == 0) return 0.0;
    const Band& b = bands_[j];
    if (t < b.lo || t > b.hi) return kNegInf;
    return cells_[offsets_[j] + (t - b.lo)];
  }

  // True when (t, j) is a boundary cell or lies inside column j's band.
  bool materialized(std::uint32_t t, std::uint32_t j) const {
    if (j == 0 || t == 0) return true;
    const Band& b = bands_[j];
    return t >= b.lo && t <= b.hi;
  }

  // Number of stored cells, i.e. the work the fill performed.
  std::size_t cell_count() const { return cells_.size(); }

 private:
  friend Trellis fill_trellis(const PosteriorMatrix&, const EncodedText&,
                              std::uint32_t, bool);

  std::uint32_t frames_ = 0;
  std::uint32_t chars_ = 0;
  std::uint32_t window_ = 0;
  bool stay_includes_char_ = false;
  std::vector<Band> bands_;          // indexed 0..chars_, band(0) unused
  std::vector<std::size_t> offsets_; // start of column j in cells_
  std::vector<double> cells_;
};

// Computes the full T x M trellis. Throws InvalidInputError (empty text,
// token index out of range, matrix/text mismatch) and InfeasibleTextError
// (more characters than frames).
Trellis compute_trellis(const PosteriorMatrix& posteriors,
                        const EncodedText& text,
                        const AlignConfig& config = {});

// Banded variant: column j covers [t*-W/2, t*+W/2] clipped to [1, T], with
// t* = round(j*T/M) and W = config.window_frames. Fills at most M*(W+1)
// cells. Throws WindowError(kInfeasible) when W/2 < T/M, i.e. consecutive
// bands could fail to overlap and no path can fit. A too-narrow-but-
// feasible window surfaces later, as WindowError(kEscape) from backtrack().
Trellis compute_trellis_windowed(const PosteriorMatrix& posteriors,
                                 const EncodedText& text,
                                 const AlignConfig& config);

// Most probable frame-to-character assignment, recovered from the trellis.
struct FrameAlignment {
  // chars[t-1] is the 1-based index of the last character consumed at or
  // before frame t; 0 before the text starts. Frames after end_frame are
  // assigned chars() (the text is complete there).
  std::vector<std::uint32_t> chars;

  // log_transition[t-1] is the log probability of the transition the path
  // took at frame t: log p(c_j|t) where the path advanced, log p(blank|t)
  // where it stayed, 0 before the text starts.
  std::vector<double> log_transition;

  std::uint32_t end_frame = 0;  // 1-based frame where the text completes
  double path_log_prob = 0.0;   // trellis value at (end_frame, chars())
};

// Picks end_frame = argmax_t at(t, M) (ties take the earliest frame) and
// walks the recurrence backwards: at each frame the stay transition is
// taken when it is strictly better, otherwise the path advances. Throws
// NoPathError when no complete path has probability > 0;
// WindowError(kEscape) when that happens on a banded trellis or the
// backward walk dead-ends against a band boundary.
FrameAlignment backtrack(const Trellis& trellis,
                         const PosteriorMatrix& posteriors,
                         const EncodedText& text);

// Converts a frame alignment into per-utterance segments with confidence
// scores. For an utterance spanning characters jb..je (1-based), start is
// (first frame assigned jb - 1) * index_duration and end is (last frame
// assigned je, not counting frames after end_frame) * index_duration.
// Scores follow AlignConfig::score_chunk_frames / min_score_log. An
// utterance that received no frames comes back degenerate: zero-length at
// the previous segment's end, score log 0, filtered.
SegmentManifest extract_segments(const FrameAlignment& alignment,
                                 const EncodedText& text,
                                 const PosteriorMatrix& posteriors,
                                 const AlignConfig& config = {});

// End-to-end pipeline: encode -> trellis (banded when window_frames > 0,
// with auto-widening when configured) -> backtrack -> extract_segments.
// Skipped utterances are absent from the result. Throws the union of the
// component errors, plus InvalidInputError when the token table disagrees
// with the posterior header (size or blank index).
SegmentManifest align(const PosteriorMatrix& posteriors,
                      const TranscriptSet& transcripts,
                      const TokenTable& table,
                      const NormalizationRules& rules,
                      const AlignConfig& config = {});

}  // namespace ctcseg

#endif  // CTCSEG_ALIGNMENT_HPP_
