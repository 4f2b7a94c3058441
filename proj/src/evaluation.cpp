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

#include "ctcseg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>
#include <utility>

#include <nlohmann/json.hpp>

#include "ctcseg/errors.hpp"

namespace ctcseg {

namespace {

struct MatchedPair {
  double start_dev = 0.0;  // signed, predicted - reference
  double end_dev = 0.0;
};

// Pairs up segments by utterance id and returns signed deviations in
// predicted order; unmatched ids land in the report lists.
std::vector<MatchedPair> match(const SegmentManifest& predicted,
                               const SegmentManifest& reference,
                               std::vector<std::string>* unmatched_predicted,
                               std::vector<std::string>* unmatched_reference) {
  std::unordered_map<std::string, const Segment*> by_id;
  for (const Segment& seg : reference.segments) {
    if (!by_id.emplace(seg.utterance_id, &seg).second) {
      throw InvalidInputError("reference repeats utterance id '" +
                              seg.utterance_id + "'");
    }
  }
  std::unordered_map<std::string, bool> seen_predicted;
  std::vector<MatchedPair> pairs;
  for (const Segment& seg : predicted.segments) {
    if (!seen_predicted.emplace(seg.utterance_id, true).second) {
      throw InvalidInputError("prediction repeats utterance id '" +
                              seg.utterance_id + "'");
    }
    const auto it = by_id.find(seg.utterance_id);
    if (it == by_id.end()) {
      if (unmatched_predicted != nullptr) {
        unmatched_predicted->push_back(seg.utterance_id);
      }
      continue;
    }
    pairs.push_back({seg.start - it->second->start, seg.end - it->second->end});
    by_id.erase(it);
  }
  if (unmatched_reference != nullptr) {
    for (const Segment& seg : reference.segments) {
      if (by_id.count(seg.utterance_id) != 0) {
        unmatched_reference->push_back(seg.utterance_id);
      }
    }
  }
  if (pairs.empty()) {
    throw InvalidInputError(
        "no utterance id matches between prediction and reference");
  }
  return pairs;
}

BoundaryStats stats_of(const std::vector<double>& abs_devs,
                       double threshold) {
  BoundaryStats stats;
  stats.count = abs_devs.size();
  if (abs_devs.empty()) return stats;
  double sum = 0.0;
  std::size_t within = 0;
  for (double d : abs_devs) {
    sum += d;
    if (d <= threshold) ++within;
  }
  stats.mean = sum / static_cast<double>(abs_devs.size());
  double var = 0.0;
  for (double d : abs_devs) {
    var += (d - stats.mean) * (d - stats.mean);
  }
  stats.stddev = std::sqrt(var / static_cast<double>(abs_devs.size()));
  stats.within_ratio =
      static_cast<double>(within) / static_cast<double>(abs_devs.size());
  return stats;
}

}  // namespace

EvalReport evaluate(const SegmentManifest& predicted,
                    const SegmentManifest& reference, double threshold_sec) {
  if (!(threshold_sec >= 0.0) || !std::isfinite(threshold_sec)) {
    throw InvalidInputError("threshold must be non-negative and finite");
  }
  EvalReport report;
  report.threshold = threshold_sec;
  const std::vector<MatchedPair> pairs =
      match(predicted, reference, &report.unmatched_predicted,
            &report.unmatched_reference);

  std::vector<double> start_devs, end_devs, pooled;
  start_devs.reserve(pairs.size());
  end_devs.reserve(pairs.size());
  pooled.reserve(pairs.size() * 2);
  for (const MatchedPair& p : pairs) {
    start_devs.push_back(std::fabs(p.start_dev));
    end_devs.push_back(std::fabs(p.end_dev));
    pooled.push_back(std::fabs(p.start_dev));
    pooled.push_back(std::fabs(p.end_dev));
  }

  const BoundaryStats all = stats_of(pooled, threshold_sec);
  report.mean_dev = all.mean;
  report.std_dev = all.stddev;
  report.within_ratio = all.within_ratio;
  report.n_boundaries = all.count;
  report.starts = stats_of(start_devs, threshold_sec);
  report.ends = stats_of(end_devs, threshold_sec);
  return report;
}

void write_report(const EvalReport& report,
                  const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["mean_dev"] = report.mean_dev;
  doc["std_dev"] = report.std_dev;
  doc["within_ratio"] = report.within_ratio;
  doc["threshold"] = report.threshold;
  doc["n_boundaries"] = report.n_boundaries;
  auto boundary = [](const BoundaryStats& stats) {
    nlohmann::json j;
    j["mean"] = stats.mean;
    j["stddev"] = stats.stddev;
    j["within_ratio"] = stats.within_ratio;
    j["count"] = stats.count;
    return j;
  };
  doc["starts"] = boundary(report.starts);
  doc["ends"] = boundary(report.ends);
  doc["unmatched_predicted"] = report.unmatched_predicted;
  doc["unmatched_reference"] = report.unmatched_reference;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << doc.dump(2) << '\n';
  out.flush();
  if (!out) {
    throw IoError("write failure on " + path.string());
  }
}

DeviationHistogram deviation_histogram(const SegmentManifest& predicted,
                                       const SegmentManifest& reference,
                                       std::size_t bins) {
  if (bins == 0) {
    throw InvalidInputError("histogram needs at least one bin");
  }
  const std::vector<MatchedPair> pairs =
      match(predicted, reference, nullptr, nullptr);

  DeviationHistogram hist;
  hist.lo = pairs.front().start_dev;
  hist.hi = hist.lo;
  for (const MatchedPair& p : pairs) {
    hist.lo = std::min({hist.lo, p.start_dev, p.end_dev});
    hist.hi = std::max({hist.hi, p.start_dev, p.end_dev});
  }
  if (hist.lo == hist.hi) {
    hist.lo -= 0.5;
    hist.hi += 0.5;
  }
  const double width = (hist.hi - hist.lo) / static_cast<double>(bins);

  hist.bin_left.resize(bins);
  hist.bin_right.resize(bins);
  hist.count_start.assign(bins, 0);
  hist.count_end.assign(bins, 0);
  for (std::size_t b = 0; b < bins; ++b) {
    hist.bin_left[b] = hist.lo + width * static_cast<double>(b);
    hist.bin_right[b] = (b + 1 == bins)
                            ? hist.hi
                            : hist.lo + width * static_cast<double>(b + 1);
  }
  auto bin_of = [&](double v) {
    const double pos = (v - hist.lo) / width;
    std::size_t b = pos < 0.0 ? 0 : static_cast<std::size_t>(pos);
    return std::min(b, bins - 1);  // the top edge belongs to the last bin
  };
  for (const MatchedPair& p : pairs) {
    ++hist.count_start[bin_of(p.start_dev)];
    ++hist.count_end[bin_of(p.end_dev)];
  }
  return hist;
}

void write_histogram_csv(const DeviationHistogram& histogram,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << "bin_left,bin_right,count_start,count_end\n";
  out << std::setprecision(9);
  for (std::size_t b = 0; b < histogram.bin_left.size(); ++b) {
    out << histogram.bin_left[b] << ',' << histogram.bin_right[b] << ','
        << histogram.count_start[b] << ',' << histogram.count_end[b] << '\n';
  }
  out.flush();
  if (!out) {
    throw IoError("write failure on " + path.string());
  }
}

AugmentResult augment(const PosteriorMatrix& posteriors, double prepend_sec,
                      double append_sec, const SegmentManifest& reference) {
  validate(posteriors);
  const double delta = static_cast<double>(posteriors.index_duration);
  for (double sec : {prepend_sec, append_sec}) {
    if (!(sec >= 0.0) || !std::isfinite(sec)) {
      throw InvalidInputError("augment durations must be non-negative and "
                              "finite");
    }
    if (sec > posteriors.duration()) {
      throw InvalidInputError(
          "augment duration " + std::to_string(sec) +
          " s exceeds the recording length of " +
          std::to_string(posteriors.duration()) + " s");
    }
  }
  const std::uint32_t T = posteriors.frames;
  const std::uint32_t prepend_frames =
      static_cast<std::uint32_t>(std::floor(prepend_sec / delta));
  const std::uint32_t append_frames =
      static_cast<std::uint32_t>(std::floor(append_sec / delta));

  AugmentResult result;
  result.prepended_sec = static_cast<double>(prepend_frames) * delta;
  result.appended_sec = static_cast<double>(append_frames) * delta;

  PosteriorMatrix& out = result.posteriors;
  out.frames = T + prepend_frames + append_frames;
  out.tokens = posteriors.tokens;
  out.blank_index = posteriors.blank_index;
  out.index_duration = posteriors.index_duration;
  out.data.reserve(static_cast<std::size_t>(out.frames) * out.tokens);
  const std::size_t row = posteriors.tokens;
  // Last prepend_frames of the original, the original, then its first
  // append_frames.
  out.data.insert(out.data.end(),
                  posteriors.data.end() -
                      static_cast<std::ptrdiff_t>(prepend_frames * row),
                  posteriors.data.end());
  out.data.insert(out.data.end(), posteriors.data.begin(),
                  posteriors.data.end());
  out.data.insert(out.data.end(), posteriors.data.begin(),
                  posteriors.data.begin() +
                      static_cast<std::ptrdiff_t>(append_frames * row));

  result.reference = reference;
  for (Segment& seg : result.reference.segments) {
    seg.start += result.prepended_sec;
    seg.end += result.prepended_sec;
  }
  return result;
}

}  // namespace ctcseg
