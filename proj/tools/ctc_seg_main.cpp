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
//
// ctc-seg: command-line front end. Subcommands:
//   align      posteriors + transcript -> segment files (single or batch)
//   eval       predicted vs reference manifests -> accuracy metrics
//   synth      synthesis spec -> posterior file + ground-truth manifest
//   augment    wrap a recording with copies of its own tail/head
//   normalize  run the text normalizer over lines of text
//
// Exit codes: 0 success; 1 any error; 2 align succeeded but at least one
// segment scored below the confidence threshold. Diagnostics go to stderr
// prefixed "ctc-seg:"; CTC_SEG_LOG=1|2 raises verbosity.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ctcseg/alignment.hpp"
#include "ctcseg/errors.hpp"
#include "ctcseg/evaluation.hpp"
#include "ctcseg/posterior_io.hpp"
#include "ctcseg/prng.hpp"
#include "ctcseg/synthesis.hpp"
#include "ctcseg/text_normalization.hpp"

namespace fs = std::filesystem;

namespace {

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("CTC_SEG_LOG");
    if (env == nullptr) return 0;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || v < 0) return 0;
    return static_cast<int>(std::min(v, 2L));
  }();
  return level;
}

std::mutex stderr_mutex;

void diag(const std::string& message) {
  std::lock_guard<std::mutex> lock(stderr_mutex);
  std::cerr << "ctc-seg: " << message << std::endl;
}

void info(const std::string& message) {
  if (log_level() >= 1) diag(message);
}

void debug(const std::string& message) {
  if (log_level() >= 2) diag(message);
}

struct AlignFlags {
  std::string posteriors;
  std::string tokens;
  std::string transcript;
  std::string recording_id;
  std::string rules;
  std::string out;      // output stem (single-recording mode)
  std::string out_dir;  // output directory (batch mode)
  std::string format = "both";
  unsigned jobs = 1;
  ctcseg::AlignConfig config;
};

std::string format_score(double score) {
  std::ostringstream out;
  out << std::setprecision(6) << score;
  return out.str();
}

std::string format_seconds(double seconds) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << seconds;
  return out.str();
}

ctcseg::NormalizationRules rules_for(const AlignFlags& flags,
                                     const ctcseg::TokenTable& table) {
  if (!flags.rules.empty()) {
    return ctcseg::read_rules(flags.rules);
  }
  return ctcseg::rules_from_token_table(table, /*lowercase=*/true,
                                        ctcseg::DropPolicy::kStripChars);
}

// Aligns one recording and writes its segment files. Returns the score
// table block for stdout and whether any segment was filtered.
struct RecordingResult {
  std::string table;
  bool any_filtered = false;
};

RecordingResult align_one(const fs::path& posteriors_path,
                          const fs::path& transcript_path,
                          const std::string& recording_id,
                          const std::string& out_stem,
                          const ctcseg::TokenTable& table,
                          const ctcseg::NormalizationRules& rules,
                          const AlignFlags& flags) {
  debug("reading posteriors from " + posteriors_path.string());
  const ctcseg::PosteriorMatrix posteriors =
      ctcseg::read_posteriors(posteriors_path);
  if (!posteriors.unnormalized_rows.empty()) {
    diag("warning: " + std::to_string(posteriors.unnormalized_rows.size()) +
         " of " + std::to_string(posteriors.frames) + " frames in " +
         posteriors_path.string() + " are not normalized within tolerance");
  }
  const ctcseg::TranscriptSet transcripts =
      ctcseg::read_transcripts(transcript_path, recording_id);

  // Surface what the aligner will skip; align() re-derives this internally.
  const ctcseg::EncodedText encoded =
      ctcseg::encode(transcripts, table, rules);
  for (const ctcseg::SkippedUtterance& skip : encoded.skipped) {
    diag("skipping utterance '" + skip.utterance_id + "' in " + recording_id +
         ": " + skip.reason);
  }

  const ctcseg::SegmentManifest manifest = ctcseg::align(
      posteriors, transcripts, table, rules, flags.config);

  if (flags.format == "kaldi" || flags.format == "both") {
    ctcseg::write_segments(manifest, ctcseg::SegmentFormat::kKaldi,
                           out_stem + ".segments");
  }
  if (flags.format == "json" || flags.format == "both") {
    ctcseg::write_segments(manifest, ctcseg::SegmentFormat::kJson,
                           out_stem + ".json");
  }

  RecordingResult result;
  std::ostringstream table_out;
  table_out << "# recording " << recording_id << '\n';
  table_out << "# utterance_id start end score_log status\n";
  for (const ctcseg::Segment& seg : manifest.segments) {
    const char* status = seg.degenerate   ? "degenerate"
                         : seg.filtered   ? "filtered"
                                          : "ok";
    if (seg.filtered) result.any_filtered = true;
    table_out << seg.utterance_id << ' ' << format_seconds(seg.start) << ' '
              << format_seconds(seg.end) << ' ' << format_score(seg.score_log)
              << ' ' << status << '\n';
  }
  result.table = table_out.str();
  return result;
}

int cmd_align(const AlignFlags& flags) {
  const ctcseg::TokenTable base_table = ctcseg::read_token_table(flags.tokens);

  if (fs::is_directory(flags.posteriors)) {
    // Batch mode: every *.ctcp in the directory, transcript looked up by
    // stem in the transcript directory, outputs under --out-dir.
    if (!fs::is_directory(flags.transcript)) {
      throw ctcseg::IoError(
          "--posteriors is a directory, so --transcript must be one too");
    }
    if (flags.out_dir.empty()) {
      throw ctcseg::IoError("batch mode requires --out-dir");
    }
    if (!flags.recording_id.empty()) {
      throw ctcseg::IoError(
          "--recording-id cannot be used in batch mode (ids come from file "
          "stems)");
    }
    fs::create_directories(flags.out_dir);

    std::vector<fs::path> inputs;
    for (const fs::directory_entry& entry :
         fs::directory_iterator(flags.posteriors)) {
      if (entry.is_regular_file() && entry.path().extension() == ".ctcp") {
        inputs.push_back(entry.path());
      }
    }
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty()) {
      throw ctcseg::IoError("no .ctcp files in " + flags.posteriors);
    }

    std::vector<RecordingResult> results(inputs.size());
    std::vector<std::string> failures(inputs.size());
    std::atomic<std::size_t> next{0};
    const unsigned jobs =
        std::max(1u, std::min<unsigned>(flags.jobs,
                                        static_cast<unsigned>(inputs.size())));
    auto worker = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= inputs.size()) return;
        const std::string stem = inputs[i].stem().string();
        try {
          fs::path transcript = fs::path(flags.transcript) / (stem + ".tsv");
          if (!fs::exists(transcript)) {
            transcript = fs::path(flags.transcript) / (stem + ".txt");
          }
          if (!fs::exists(transcript)) {
            throw ctcseg::IoError("no transcript (" + stem + ".tsv or " +
                                  stem + ".txt) in " + flags.transcript);
          }
          const std::string out_stem =
              (fs::path(flags.out_dir) / stem).string();
          // The token table and rules are shared read-only across jobs.
          ctcseg::NormalizationRules rules = rules_for(flags, base_table);
          results[i] = align_one(inputs[i], transcript, stem, out_stem,
                                 base_table, rules, flags);
          info("aligned " + stem);
        } catch (const ctcseg::Error& e) {
          failures[i] = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < jobs; ++w) pool.emplace_back(worker);
    worker();
    for (std::thread& thread : pool) thread.join();

    bool any_failed = false;
    bool any_filtered = false;
    // Buffered output in input order keeps runs byte-identical no matter
    // how the jobs interleaved.
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (!failures[i].empty()) {
        any_failed = true;
        diag(inputs[i].stem().string() + ": " + failures[i]);
        continue;
      }
      std::cout << results[i].table;
      any_filtered = any_filtered || results[i].any_filtered;
    }
    std::cout.flush();
    if (any_failed) return 1;
    return any_filtered ? 2 : 0;
  }

  // Single-recording mode.
  if (flags.recording_id.empty()) {
    throw ctcseg::IoError("--recording-id is required (or point "
                          "--posteriors at a directory for batch mode)");
  }
  std::string out_stem = flags.out;
  if (out_stem.empty()) {
    fs::path p = flags.posteriors;
    p.replace_extension();
    out_stem = p.string();
  }
  const ctcseg::NormalizationRules rules = rules_for(flags, base_table);
  const RecordingResult result =
      align_one(flags.posteriors, flags.transcript, flags.recording_id,
                out_stem, base_table, rules, flags);
  std::cout << result.table;
  std::cout.flush();
  return result.any_filtered ? 2 : 0;
}

struct EvalFlags {
  std::string pred;
  std::string ref;
  double threshold = 0.5;
  std::string report;
  std::string histogram;
  unsigned bins = 60;
};

int cmd_eval(const EvalFlags& flags) {
  const ctcseg::SegmentManifest predicted = ctcseg::read_segments(flags.pred);
  const ctcseg::SegmentManifest reference = ctcseg::read_segments(flags.ref);
  const ctcseg::EvalReport report =
      ctcseg::evaluate(predicted, reference, flags.threshold);

  // One row in the style of the accuracy tables this tool is judged by.
  std::ostringstream line;
  line << "Mean " << std::fixed << std::setprecision(2) << report.mean_dev
       << "s Std " << std::setprecision(2) << report.std_dev << " <"
       << std::defaultfloat << flags.threshold << "s " << std::fixed
       << std::setprecision(1) << report.within_ratio * 100.0 << "%";
  std::cout << line.str() << std::endl;

  for (const std::string& id : report.unmatched_predicted) {
    diag("predicted utterance '" + id + "' has no reference");
  }
  for (const std::string& id : report.unmatched_reference) {
    diag("reference utterance '" + id + "' has no prediction");
  }
  if (!flags.report.empty()) {
    ctcseg::write_report(report, flags.report);
  }
  if (!flags.histogram.empty()) {
    ctcseg::write_histogram_csv(
        ctcseg::deviation_histogram(predicted, reference, flags.bins),
        flags.histogram);
  }
  return 0;
}

struct SynthFlags {
  std::string spec;
  std::string out_posteriors;
  std::string out_manifest;
  std::string out_transcript;
  std::string out_tokens;
};

int cmd_synth(const SynthFlags& flags) {
  const ctcseg::SynthSpec spec = ctcseg::read_synth_spec(flags.spec);
  const ctcseg::SynthResult result = ctcseg::generate(spec);
  ctcseg::write_posteriors(result.posteriors, flags.out_posteriors);
  const bool json = fs::path(flags.out_manifest).extension() == ".json";
  ctcseg::write_segments(result.truth,
                         json ? ctcseg::SegmentFormat::kJson
                              : ctcseg::SegmentFormat::kKaldi,
                         flags.out_manifest);
  if (!flags.out_transcript.empty()) {
    std::ofstream out(flags.out_transcript,
                      std::ios::binary | std::ios::trunc);
    if (!out) {
      throw ctcseg::IoError("cannot open " + flags.out_transcript +
                            " for writing");
    }
    for (const ctcseg::PlantedUtterance& utt : spec.utterances) {
      out << utt.id << '\t' << utt.text << '\n';
    }
    out.flush();
    if (!out) {
      throw ctcseg::IoError("write failure on " + flags.out_transcript);
    }
  }
  if (!flags.out_tokens.empty()) {
    std::ofstream out(flags.out_tokens, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw ctcseg::IoError("cannot open " + flags.out_tokens +
                            " for writing");
    }
    for (const std::string& token : spec.token_table.tokens) {
      out << token << '\n';
    }
    out.flush();
    if (!out) {
      throw ctcseg::IoError("write failure on " + flags.out_tokens);
    }
  }
  info("synthesized " + std::to_string(result.posteriors.frames) +
       " frames, " + std::to_string(result.truth.segments.size()) +
       " planted segments");
  return 0;
}

struct AugmentFlags {
  std::string posteriors;
  std::string ref;
  std::string out_posteriors;
  std::string out_ref;
  double n = -1.0;  // prepend seconds; < 0 means sample
  double m = -1.0;  // append seconds; < 0 means sample
  std::uint64_t seed = 0;
};

int cmd_augment(const AugmentFlags& flags) {
  const ctcseg::PosteriorMatrix posteriors =
      ctcseg::read_posteriors(flags.posteriors);
  const ctcseg::SegmentManifest reference =
      ctcseg::read_segments(flags.ref);

  // Durations not given explicitly are sampled from [10, 30] seconds, the
  // range used by the robustness experiments this subcommand exists for.
  ctcseg::Prng rng(flags.seed);
  const double n = flags.n >= 0.0 ? flags.n : rng.uniform(10.0, 30.0);
  const double m = flags.m >= 0.0 ? flags.m : rng.uniform(10.0, 30.0);
  info("prepending " + std::to_string(n) + " s, appending " +
       std::to_string(m) + " s");

  const ctcseg::AugmentResult result =
      ctcseg::augment(posteriors, n, m, reference);
  ctcseg::write_posteriors(result.posteriors, flags.out_posteriors);
  const bool json = fs::path(flags.out_ref).extension() == ".json";
  ctcseg::write_segments(result.reference,
                         json ? ctcseg::SegmentFormat::kJson
                              : ctcseg::SegmentFormat::kKaldi,
                         flags.out_ref);
  return 0;
}

struct NormalizeFlags {
  std::string rules;
  std::string input;
  std::string out;
};

int cmd_normalize(const NormalizeFlags& flags) {
  const ctcseg::NormalizationRules rules = ctcseg::read_rules(flags.rules);

  std::istream* in = &std::cin;
  std::ifstream file;
  if (!flags.input.empty()) {
    file.open(flags.input, std::ios::binary);
    if (!file) {
      throw ctcseg::IoError("cannot open " + flags.input);
    }
    in = &file;
  }
  std::ostream* out = &std::cout;
  std::ofstream out_file;
  if (!flags.out.empty()) {
    out_file.open(flags.out, std::ios::binary | std::ios::trunc);
    if (!out_file) {
      throw ctcseg::IoError("cannot open " + flags.out + " for writing");
    }
    out = &out_file;
  }

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(*in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const ctcseg::NormalizeResult result = ctcseg::normalize(line, rules);
    if (result.dropped) {
      diag("line " + std::to_string(line_no) +
           " dropped: disallowed character '" + result.offending + "'");
      continue;
    }
    *out << result.text << '\n';
  }
  out->flush();
  if (!*out) {
    throw ctcseg::IoError("write failure");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CTC posterior segmentation toolkit"};
  app.require_subcommand(1);

  AlignFlags align_flags;
  CLI::App* align = app.add_subcommand(
      "align", "Align a transcript to CTC posteriors and emit segments");
  align->add_option("--posteriors", align_flags.posteriors,
                    "Posterior file (.ctcp), or a directory of them for "
                    "batch mode")
      ->required();
  align->add_option("--tokens", align_flags.tokens,
                    "Token table, one token per line")
      ->required();
  align->add_option("--transcript", align_flags.transcript,
                    "Transcript file 'utterance_id<TAB>text' (directory in "
                    "batch mode)")
      ->required();
  align->add_option("--recording-id", align_flags.recording_id,
                    "Recording id for the output manifest (single mode)");
  align->add_option("--rules", align_flags.rules,
                    "Normalization rule file; default accepts exactly the "
                    "single-character tokens, lowercased, stripping the rest");
  align->add_option("--out", align_flags.out,
                    "Output stem (single mode); default: posterior path "
                    "without extension");
  align->add_option("--out-dir", align_flags.out_dir,
                    "Output directory (batch mode)");
  align->add_option("--format", align_flags.format,
                    "Segment format: kaldi, json, or both [both]")
      ->check(CLI::IsMember({"kaldi", "json", "both"}));
  align->add_option("--window", align_flags.config.window_frames,
                    "Band width in frames; 0 = full dynamic program [8000]");
  align->add_option("--chunk-len", align_flags.config.score_chunk_frames,
                    "Scoring chunk length in frames [30]");
  align->add_option("--min-score", align_flags.config.min_score_log,
                    "Log-domain confidence threshold [-1.5]");
  align->add_flag("--auto-widen", align_flags.config.auto_widen,
                  "Double the window and retry when it proves too narrow");
  align->add_option("--max-widen", align_flags.config.max_widen_doublings,
                    "Maximum window doublings with --auto-widen [4]");
  align->add_flag("--blank-stay-includes-char",
                  align_flags.config.blank_stay_includes_char,
                  "Let the stay transition use max(blank, character)");
  align->add_option("--jobs", align_flags.jobs,
                    "Concurrent recordings in batch mode [1]")
      ->check(CLI::PositiveNumber);

  EvalFlags eval_flags;
  CLI::App* eval = app.add_subcommand(
      "eval", "Compare a predicted manifest against a reference");
  eval->add_option("--pred", eval_flags.pred, "Predicted segment manifest")
      ->required();
  eval->add_option("--ref", eval_flags.ref, "Reference segment manifest")
      ->required();
  eval->add_option("--threshold", eval_flags.threshold,
                   "Within-threshold in seconds [0.5]");
  eval->add_option("--report", eval_flags.report, "Write a JSON report here");
  eval->add_option("--histogram", eval_flags.histogram,
                   "Write a deviation histogram CSV here");
  eval->add_option("--bins", eval_flags.bins, "Histogram bin count [60]")
      ->check(CLI::PositiveNumber);

  SynthFlags synth_flags;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate synthetic posteriors with known alignment");
  synth->add_option("--spec", synth_flags.spec, "Synthesis spec (JSON)")
      ->required();
  synth->add_option("--out-posteriors", synth_flags.out_posteriors,
                    "Output posterior file")
      ->required();
  synth->add_option("--out-manifest", synth_flags.out_manifest,
                    "Output ground-truth manifest (.json for JSON, anything "
                    "else for the kaldi format)")
      ->required();
  synth->add_option("--out-transcript", synth_flags.out_transcript,
                    "Also write the transcript file");
  synth->add_option("--out-tokens", synth_flags.out_tokens,
                    "Also write the token table");

  AugmentFlags augment_flags;
  CLI::App* augment = app.add_subcommand(
      "augment", "Prepend a recording's tail and append its head");
  augment->add_option("--posteriors", augment_flags.posteriors,
                      "Input posterior file")
      ->required();
  augment->add_option("--ref", augment_flags.ref,
                      "Reference manifest to shift along")
      ->required();
  augment->add_option("--out-posteriors", augment_flags.out_posteriors,
                      "Output posterior file")
      ->required();
  augment->add_option("--out-ref", augment_flags.out_ref,
                      "Output shifted reference manifest")
      ->required();
  augment->add_option("--n", augment_flags.n,
                      "Seconds to prepend; omitted: sampled from [10,30]");
  augment->add_option("--m", augment_flags.m,
                      "Seconds to append; omitted: sampled from [10,30]");
  augment->add_option("--seed", augment_flags.seed,
                      "Seed for sampled durations [0]");

  NormalizeFlags normalize_flags;
  CLI::App* normalize = app.add_subcommand(
      "normalize", "Normalize lines of text with a rule file");
  normalize->add_option("--rules", normalize_flags.rules, "Rule file")
      ->required();
  normalize->add_option("input", normalize_flags.input,
                        "Input text file; standard input when omitted");
  normalize->add_option("--out", normalize_flags.out,
                        "Output file; standard output when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::ParseError& e) {
    std::cerr << "ctc-seg: " << e.what() << std::endl;
    return 1;
  }

  try {
    if (align->parsed()) return cmd_align(align_flags);
    if (eval->parsed()) return cmd_eval(eval_flags);
    if (synth->parsed()) return cmd_synth(synth_flags);
    if (augment->parsed()) return cmd_augment(augment_flags);
    if (normalize->parsed()) return cmd_normalize(normalize_flags);
  } catch (const ctcseg::Error& e) {
    diag(e.what());
    return 1;
  } catch (const std::exception& e) {
    diag(std::string("internal error: ") + e.what());
    return 1;
  }
  return 0;
}
