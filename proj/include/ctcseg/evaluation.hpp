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

#ifndef CTCSEG_EVALUATION_HPP_
#define CTCSEG_EVALUATION_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "ctcseg/types.hpp"

namespace ctcseg {

struct BoundaryStats {
  double mean = 0.0;          // mean absolute deviation, seconds
  double stddev = 0.0;        // population standard deviation
  double within_ratio = 0.0;  // fraction of deviations <= threshold
  std::size_t count = 0;
};

// Boundary accuracy of predicted segments against a reference. Segments are
// matched by utterance_id; each matched pair contributes two absolute
// deviations, |start - start_ref| and |end - end_ref|, to one pooled
// sample over which the headline statistics are computed.
struct EvalReport {
  double mean_dev = 0.0;
  double std_dev = 0.0;          // population standard deviation
  double within_ratio = 0.0;     // deviations <= threshold, inclusive
  double threshold = 0.5;        // seconds
  std::size_t n_boundaries = 0;  // pooled sample size (2 per matched pair)

  BoundaryStats starts;  // supplementary per-boundary-kind breakdown
  BoundaryStats ends;

  std::vector<std::string> unmatched_predicted;  // ids without a reference
  std::vector<std::string> unmatched_reference;  // ids without a prediction
};

// Throws InvalidInputError when no utterance id matches between the two
// manifests (each manifest may otherwise be a superset of the other;
// unmatched ids are reported, not errors) or when a manifest repeats an id.
EvalReport evaluate(const SegmentManifest& predicted,
                    const SegmentManifest& reference,
                    double threshold_sec = 0.5);

// JSON serialization of a report. Throws IoError.
void write_report(const EvalReport& report,
                  const std::filesystem::path& path);

// Signed boundary deviations (predicted - reference) bucketed into
// equal-width bins spanning [lo, hi] = [min, max] over starts and ends
// together; a degenerate range widens to +-0.5 s around the single value.
// Start and end boundaries are counted separately per bin.
struct DeviationHistogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> bin_left;
  std::vector<double> bin_right;
  std::vector<std::size_t> count_start;
  std::vector<std::size_t> count_end;
};

DeviationHistogram deviation_histogram(const SegmentManifest& predicted,
                                       const SegmentManifest& reference,
                                       std::size_t bins = 60);

// CSV with header "bin_left,bin_right,count_start,count_end", one row per
// bin. Throws IoError.
void write_histogram_csv(const DeviationHistogram& histogram,
                         const std::filesystem::path& path);

// Robustness fixture: prepends the recording's last prepend_sec seconds of
// frames and appends its first append_sec seconds, so the text no longer
// matches the start and end of the audio. Frame counts are floor(sec /
// index_duration); reference segment times shift by exactly the prepended
// duration. Throws InvalidInputError when a duration is negative, not
// finite, or exceeds the recording length.
struct AugmentResult {
  PosteriorMatrix posteriors;
  SegmentManifest reference;  // input reference, shifted
  double prepended_sec = 0.0; // actual durations, multiples of a frame
  double appended_sec = 0.0;
};

AugmentResult augment(const PosteriorMatrix& posteriors, double prepend_sec,
                      double append_sec, const SegmentManifest& reference);

}  // namespace ctcseg

#endif  // CTCSEG_EVALUATION_HPP_
