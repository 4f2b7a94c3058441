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

#include "ctcseg/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <utility>

#include <nlohmann/json.hpp>

#include "ctcseg/errors.hpp"
#include "ctcseg/prng.hpp"
#include "ctcseg/text_normalization.hpp"

namespace ctcseg {

namespace {

struct Placement {
  std::size_t utterance_index = 0;  // into spec.utterances / encoded.spans
  std::uint32_t start_frame = 0;    // 1-based, inclusive
  std::uint32_t end_frame = 0;      // 1-based, inclusive
};

struct Layout {
  EncodedText encoded;
  std::vector<Placement> placements;
  std::uint32_t total_frames = 0;
};

// Resolves the spec into concrete frame positions, running every validity
// check on the way. Shared by validate() and generate() so the two can
// never disagree about what is well-formed.
Layout plan_layout(const SynthSpec& spec) {
  validate(spec.token_table);
  if (spec.utterances.empty()) {
    throw InvalidInputError("synthesis spec has no utterances");
  }
  if (spec.frames_per_char == 0) {
    throw InvalidInputError("frames_per_char must be at least 1");
  }
  const double C = static_cast<double>(spec.token_table.tokens.size());
  if (!(spec.peak_prob > 1.0 / C) || !(spec.peak_prob <= 1.0)) {
    throw InvalidInputError(
        "peak_prob must lie in (1/token_count, 1], got " +
        std::to_string(spec.peak_prob));
  }
  if (!(spec.noise_amplitude >= 0.0) ||
      !std::isfinite(spec.noise_amplitude)) {
    throw InvalidInputError("noise_amplitude must be non-negative and finite");
  }
  if (!(spec.index_duration > 0.0f) || !std::isfinite(spec.index_duration)) {
    throw InvalidInputError("index_duration must be positive and finite");
  }

  const TranscriptSet transcripts = transcript_of(spec);
  validate(transcripts);

  // The generator takes texts verbatim: an unrepresentable character is a
  // spec bug, not something to clean up silently.
  const NormalizationRules rules = rules_from_token_table(
      spec.token_table, /*lowercase=*/false, DropPolicy::kDropUtterance);
  Layout layout;
  try {
    layout.encoded = encode(transcripts, spec.token_table, rules);
  } catch (const EncodeError& e) {
    throw InvalidInputError(std::string("unusable utterance text: ") +
                            e.what());
  }
  if (!layout.encoded.skipped.empty()) {
    const SkippedUtterance& s = layout.encoded.skipped.front();
    throw InvalidInputError("utterance '" + s.utterance_id +
                            "' cannot be planted: " + s.reason);
  }

  const double delta = static_cast<double>(spec.index_duration);
  std::uint64_t cursor = static_cast<std::uint64_t>(spec.prologue_frames) + 1;
  std::uint64_t last_end = 0;
  for (std::size_t i = 0; i < spec.utterances.size(); ++i) {
    const PlantedUtterance& utt = spec.utterances[i];
    if (!utt.in_audio) continue;
    const UtteranceSpan& span = layout.encoded.spans[i];
    const std::uint64_t speech_frames =
        static_cast<std::uint64_t>(span.end - span.begin) *
        spec.frames_per_char;

    std::uint64_t start = cursor;
    if (utt.start_sec >= 0.0) {
      if (!std::isfinite(utt.start_sec)) {
        throw InvalidInputError("utterance '" + utt.id +
                                "' has a non-finite start time");
      }
      start = static_cast<std::uint64_t>(
                  std::llround(utt.start_sec / delta)) + 1;
      if (start < cursor) {
        throw InvalidInputError(
            "utterance '" + utt.id + "' starts at " +
            std::to_string(utt.start_sec) +
            " s, overlapping the previous utterance or its gap");
      }
    }
    const std::uint64_t end = start + speech_frames - 1;
    layout.placements.push_back({i, static_cast<std::uint32_t>(start),
                                 static_cast<std::uint32_t>(end)});
    last_end = end;
    cursor = end + 1 + spec.blank_gap_frames;
  }

  const std::uint64_t total =
      (last_end == 0 ? static_cast<std::uint64_t>(spec.prologue_frames)
                     : last_end) +
      spec.epilogue_frames;
  if (total == 0) {
    throw InvalidInputError("synthetic recording would be empty");
  }
  if (total > std::numeric_limits<std::int32_t>::max()) {
    throw InvalidInputError("synthetic recording would need " +
                            std::to_string(total) + " frames");
  }
  layout.total_frames = static_cast<std::uint32_t>(total);
  return layout;
}

}  // namespace

void validate(const SynthSpec& spec) { plan_layout(spec); }

TranscriptSet transcript_of(const SynthSpec& spec) {
  TranscriptSet transcripts;
  transcripts.recording_id = spec.recording_id;
  for (const PlantedUtterance& utt : spec.utterances) {
    transcripts.utterances.push_back({utt.id, utt.text});
  }
  return transcripts;
}

SynthSpec read_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
  SynthSpec spec;
  try {
    spec.token_table.tokens =
        doc.at("tokens").get<std::vector<std::string>>();
    spec.token_table.blank_index = doc.value("blank_index", 0u);
    for (const auto& item : doc.at("utterances")) {
      PlantedUtterance utt;
      utt.id = item.at("id").get<std::string>();
      utt.text = item.at("text").get<std::string>();
      utt.start_sec = item.value("start_sec", -1.0);
      utt.in_audio = item.value("in_audio", true);
      spec.utterances.push_back(std::move(utt));
    }
    spec.recording_id = doc.value("recording_id", spec.recording_id);
    spec.frames_per_char = doc.value("frames_per_char", spec.frames_per_char);
    spec.blank_gap_frames =
        doc.value("blank_gap_frames", spec.blank_gap_frames);
    spec.prologue_frames = doc.value("prologue_frames", spec.prologue_frames);
    spec.epilogue_frames = doc.value("epilogue_frames", spec.epilogue_frames);
    spec.peak_prob = doc.value("peak_prob", spec.peak_prob);
    spec.noise_amplitude = doc.value("noise_amplitude", spec.noise_amplitude);
    spec.noise_seed = doc.value("noise_seed", spec.noise_seed);
    spec.index_duration = doc.value("index_duration", spec.index_duration);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("unexpected synthesis spec structure in " + path.string() +
                  ": " + e.what());
  }
  validate(spec);
  return spec;
}

SynthResult generate(const SynthSpec& spec) {
  const Layout layout = plan_layout(spec);
  const std::uint32_t T = layout.total_frames;
  const std::uint32_t C =
      static_cast<std::uint32_t>(spec.token_table.tokens.size());
  const double delta = static_cast<double>(spec.index_duration);

  // Which token each frame peaks; default is the blank.
  std::vector<std::uint32_t> peak_token(T, spec.token_table.blank_index);
  for (const Placement& p : layout.placements) {
    const UtteranceSpan& span = layout.encoded.spans[p.utterance_index];
    std::uint32_t frame = p.start_frame;
    for (std::uint32_t pos = span.begin; pos < span.end; ++pos) {
      for (std::uint32_t k = 0; k < spec.frames_per_char; ++k) {
        peak_token[frame - 1] = layout.encoded.indices[pos];
        ++frame;
      }
    }
    // Anchor the separator that follows this utterance in the encoded text
    // on the first gap frame, so the optimal path has exactly one place to
    // consume it and the planted end stays the unique optimum.
    if (span.end < layout.encoded.indices.size() && p.end_frame + 1 <= T &&
        peak_token[p.end_frame] == spec.token_table.blank_index) {
      peak_token[p.end_frame] = layout.encoded.indices[span.end];
    }
  }

  SynthResult result;
  result.posteriors.frames = T;
  result.posteriors.tokens = C;
  result.posteriors.blank_index = spec.token_table.blank_index;
  result.posteriors.index_duration = spec.index_duration;
  result.posteriors.data.resize(static_cast<std::size_t>(T) * C);

  Prng rng(spec.noise_seed);
  const double off_share = (1.0 - spec.peak_prob) / (C - 1);
  std::vector<double> probs(C);
  for (std::uint32_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (std::uint32_t c = 0; c < C; ++c) {
      double p = (c == peak_token[t]) ? spec.peak_prob : off_share;
      if (spec.noise_amplitude > 0.0) {
        p += spec.noise_amplitude * rng.uniform();
      }
      probs[c] = p;
      sum += p;
    }
    float* row = result.posteriors.data.data() +
                 static_cast<std::size_t>(t) * C;
    for (std::uint32_t c = 0; c < C; ++c) {
      const double p = probs[c] / sum;
      row[c] = p > 0.0 ? to_stored_log(std::log(p)) : kLogZeroSentinel;
    }
  }

  result.truth.recording_id = spec.recording_id;
  for (const Placement& p : layout.placements) {
    const UtteranceSpan& span = layout.encoded.spans[p.utterance_index];
    Segment seg;
    seg.utterance_id = span.utterance_id;
    seg.text = span.text;
    seg.start = static_cast<double>(p.start_frame - 1) * delta;
    seg.end = static_cast<double>(p.end_frame) * delta;
    seg.score_log = 0.0;
    result.truth.segments.push_back(std::move(seg));
  }
  return result;
}

BrutePath brute_force_best_path(const PosteriorMatrix& posteriors,
                                std::span<const std::uint32_t> char_tokens) {
  validate(posteriors);
  const std::uint32_t T = posteriors.frames;
  const std::uint32_t M = static_cast<std::uint32_t>(char_tokens.size());
  if (T > 14) {
    throw InvalidInputError(
        "exhaustive enumeration is limited to 14 frames, got " +
        std::to_string(T));
  }
  if (M > 5) {
    throw InvalidInputError(
        "exhaustive enumeration is limited to 5 characters, got " +
        std::to_string(M));
  }
  if (M == 0) {
    throw InvalidInputError("empty text");
  }
  for (std::uint32_t idx : char_tokens) {
    if (idx >= posteriors.tokens) {
      throw InvalidInputError("token index " + std::to_string(idx) +
                              " out of range");
    }
    if (idx == posteriors.blank_index) {
      throw InvalidInputError("text contains the blank token");
    }
  }

  constexpr double kTieTolerance = 1e-9;
  constexpr std::size_t kMaxTracked = 16;

  struct Candidate {
    double log_prob;
    std::uint32_t end;
    std::vector<std::uint32_t> chars;
  };
  // Near-optimal candidates, kept only to decide uniqueness; the winner is
  // tracked separately so a full list can never displace it. Capacity
  // drops are safe for the uniqueness verdict: a dropped candidate that
  // would have survived the final eviction implies its within-tolerance
  // contemporaries survive too, so the list stays at >= 2 entries.
  std::vector<Candidate> top;
  double best = kNegInf;
  std::uint32_t winner_end = 0;
  std::vector<std::uint32_t> winner_chars;
  bool have_winner = false;
  std::vector<std::uint32_t> assignment(T, 0);

  auto record = [&](std::uint32_t end, double log_prob) {
    if (log_prob < best - kTieTolerance) return;
    const bool strictly_better = log_prob > best + kTieTolerance;
    if (log_prob > best) best = log_prob;

    std::vector<std::uint32_t> snapshot = assignment;
    // Frames after the completion point sit on the finished text.
    for (std::uint32_t t = end; t < T; ++t) snapshot[t] = M;

    if (strictly_better || !have_winner) {
      winner_end = end;
      winner_chars = snapshot;
      have_winner = true;
    } else if (end < winner_end) {  // tie: earliest completion wins
      winner_end = end;
      winner_chars = snapshot;
    }

    std::erase_if(top, [&](const Candidate& c) {
      return c.log_prob < best - kTieTolerance;
    });
    if (top.size() < kMaxTracked) {
      top.push_back({log_prob, end, std::move(snapshot)});
    }
  };

  // Depth-first over every monotone assignment: at each frame the path
  // either idles (before the text or on a blank) or consumes the next
  // character. Zero-probability branches cannot recover and are pruned.
  auto walk = [&](auto&& self, std::uint32_t t, std::uint32_t consumed,
                  double log_prob) -> void {
    if (consumed == M) record(t, log_prob);
    if (t == T) return;
    const std::uint32_t next = t + 1;
    if (consumed == 0) {
      // Still before the text; idling costs nothing.
      assignment[next - 1] = 0;
      self(self, next, 0, log_prob);
    } else {
      const double blank_lp =
          posteriors.log_prob(next, posteriors.blank_index);
      if (blank_lp != kNegInf) {
        assignment[next - 1] = consumed;
        self(self, next, consumed, log_prob + blank_lp);
      }
    }
    if (consumed < M) {
      const double char_lp = posteriors.log_prob(next, char_tokens[consumed]);
      if (char_lp != kNegInf) {
        assignment[next - 1] = consumed + 1;
        self(self, next, consumed + 1, log_prob + char_lp);
      }
    }
  };
  walk(walk, 0, 0, 0.0);

  BrutePath out;
  if (!have_winner) {
    return out;  // infeasible: log_prob = log 0, no path
  }
  out.feasible = true;
  out.log_prob = best;
  out.end_frame = winner_end;
  out.chars = std::move(winner_chars);
  out.unique = top.size() == 1;
  return out;
}

}  // namespace ctcseg
