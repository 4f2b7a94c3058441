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
// Python bindings for the segmentation core. Posterior matrices cross the
// boundary as numpy float32 arrays of shape (frames, tokens).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <stdexcept>

#include "ctcseg/alignment.hpp"
#include "ctcseg/errors.hpp"
#include "ctcseg/evaluation.hpp"
#include "ctcseg/posterior_io.hpp"
#include "ctcseg/synthesis.hpp"
#include "ctcseg/text_normalization.hpp"

namespace py = pybind11;

namespace {

ctcseg::PosteriorMatrix matrix_from_numpy(
    const py::array_t<float, py::array::c_style | py::array::forcecast>& array,
    std::uint32_t blank_index, float index_duration) {
  if (array.ndim() != 2) {
    throw ctcseg::InvalidInputError("posterior array must be 2-D");
  }
  ctcseg::PosteriorMatrix matrix;
  matrix.frames = static_cast<std::uint32_t>(array.shape(0));
  matrix.tokens = static_cast<std::uint32_t>(array.shape(1));
  matrix.blank_index = blank_index;
  matrix.index_duration = index_duration;
  matrix.data.resize(static_cast<std::size_t>(array.size()));
  std::memcpy(matrix.data.data(), array.data(),
              matrix.data.size() * sizeof(float));
  ctcseg::validate(matrix);
  ctcseg::check_normalization(matrix, ctcseg::kRowNormalizationTolerance,
                              &matrix.unnormalized_rows);
  return matrix;
}

py::array_t<float> matrix_to_numpy(const ctcseg::PosteriorMatrix& matrix) {
  py::array_t<float> array({static_cast<py::ssize_t>(matrix.frames),
                            static_cast<py::ssize_t>(matrix.tokens)});
  std::memcpy(array.mutable_data(), matrix.data.data(),
              matrix.data.size() * sizeof(float));
  return array;
}

}  // namespace

PYBIND11_MODULE(_ctcseg, m) {
  m.doc() = "CTC posterior segmentation core";

  py::register_exception<ctcseg::IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<ctcseg::InvalidInputError>(m, "InvalidInputError",
                                                    PyExc_ValueError);
  py::register_exception<ctcseg::InfeasibleTextError>(
      m, "InfeasibleTextError", PyExc_ValueError);
  py::register_exception<ctcseg::EncodeError>(m, "EncodeError",
                                              PyExc_ValueError);
  py::register_exception<ctcseg::NoPathError>(m, "NoPathError",
                                              PyExc_RuntimeError);
  py::register_exception<ctcseg::WindowError>(m, "WindowError",
                                              PyExc_RuntimeError);

  py::class_<ctcseg::PosteriorMatrix>(m, "PosteriorMatrix")
      .def(py::init(&matrix_from_numpy), py::arg("log_probs"),
           py::arg("blank_index") = 0, py::arg("index_duration") = 0.01f)
      .def_readonly("frames", &ctcseg::PosteriorMatrix::frames)
      .def_readonly("tokens", &ctcseg::PosteriorMatrix::tokens)
      .def_readonly("blank_index", &ctcseg::PosteriorMatrix::blank_index)
      .def_readonly("index_duration",
                    &ctcseg::PosteriorMatrix::index_duration)
      .def_readonly("unnormalized_rows",
                    &ctcseg::PosteriorMatrix::unnormalized_rows)
      .def("duration", &ctcseg::PosteriorMatrix::duration)
      .def("numpy", &matrix_to_numpy);

  py::class_<ctcseg::TokenTable>(m, "TokenTable")
      .def(py::init([](std::vector<std::string> tokens,
                       std::uint32_t blank_index) {
             ctcseg::TokenTable table{std::move(tokens), blank_index};
             ctcseg::validate(table);
             return table;
           }),
           py::arg("tokens"), py::arg("blank_index") = 0)
      .def_readonly("tokens", &ctcseg::TokenTable::tokens)
      .def_readonly("blank_index", &ctcseg::TokenTable::blank_index);

  py::class_<ctcseg::Utterance>(m, "Utterance")
      .def(py::init([](std::string id, std::string text) {
             return ctcseg::Utterance{std::move(id), std::move(text)};
           }),
           py::arg("id"), py::arg("text"))
      .def_readwrite("id", &ctcseg::Utterance::id)
      .def_readwrite("text", &ctcseg::Utterance::text);

  py::class_<ctcseg::TranscriptSet>(m, "TranscriptSet")
      .def(py::init([](std::string recording_id,
                       std::vector<ctcseg::Utterance> utterances) {
             ctcseg::TranscriptSet set{std::move(recording_id),
                                       std::move(utterances)};
             ctcseg::validate(set);
             return set;
           }),
           py::arg("recording_id"), py::arg("utterances"))
      .def_readwrite("recording_id", &ctcseg::TranscriptSet::recording_id)
      .def_readwrite("utterances", &ctcseg::TranscriptSet::utterances);

  py::enum_<ctcseg::DropPolicy>(m, "DropPolicy")
      .value("DROP_UTTERANCE", ctcseg::DropPolicy::kDropUtterance)
      .value("STRIP_CHARS", ctcseg::DropPolicy::kStripChars);

  py::class_<ctcseg::NormalizationRules>(m, "NormalizationRules")
      .def_readonly("lowercase", &ctcseg::NormalizationRules::lowercase)
      .def_readonly("drop_policy", &ctcseg::NormalizationRules::drop_policy);

  py::class_<ctcseg::NormalizeResult>(m, "NormalizeResult")
      .def_readonly("dropped", &ctcseg::NormalizeResult::dropped)
      .def_readonly("text", &ctcseg::NormalizeResult::text)
      .def_readonly("offending", &ctcseg::NormalizeResult::offending);

  py::class_<ctcseg::UtteranceSpan>(m, "UtteranceSpan")
      .def_readonly("utterance_id", &ctcseg::UtteranceSpan::utterance_id)
      .def_readonly("text", &ctcseg::UtteranceSpan::text)
      .def_readonly("begin", &ctcseg::UtteranceSpan::begin)
      .def_readonly("end", &ctcseg::UtteranceSpan::end);

  py::class_<ctcseg::SkippedUtterance>(m, "SkippedUtterance")
      .def_readonly("utterance_id", &ctcseg::SkippedUtterance::utterance_id)
      .def_readonly("reason", &ctcseg::SkippedUtterance::reason);

  py::class_<ctcseg::EncodedText>(m, "EncodedText")
      .def_readonly("recording_id", &ctcseg::EncodedText::recording_id)
      .def_readonly("indices", &ctcseg::EncodedText::indices)
      .def_readonly("spans", &ctcseg::EncodedText::spans)
      .def_readonly("skipped", &ctcseg::EncodedText::skipped);

  py::class_<ctcseg::AlignConfig>(m, "AlignConfig")
      .def(py::init([](std::uint32_t window_frames, bool auto_widen,
                       std::uint32_t max_widen_doublings,
                       std::uint32_t score_chunk_frames, double min_score_log,
                       bool blank_stay_includes_char) {
             ctcseg::AlignConfig config;
             config.window_frames = window_frames;
             config.auto_widen = auto_widen;
             config.max_widen_doublings = max_widen_doublings;
             config.score_chunk_frames = score_chunk_frames;
             config.min_score_log = min_score_log;
             config.blank_stay_includes_char = blank_stay_includes_char;
             ctcseg::validate(config);
             return config;
           }),
           py::arg("window_frames") = 8000, py::arg("auto_widen") = false,
           py::arg("max_widen_doublings") = 4,
           py::arg("score_chunk_frames") = 30,
           py::arg("min_score_log") = -1.5,
           py::arg("blank_stay_includes_char") = false)
      .def_readwrite("window_frames", &ctcseg::AlignConfig::window_frames)
      .def_readwrite("auto_widen", &ctcseg::AlignConfig::auto_widen)
      .def_readwrite("max_widen_doublings",
                     &ctcseg::AlignConfig::max_widen_doublings)
      .def_readwrite("score_chunk_frames",
                     &ctcseg::AlignConfig::score_chunk_frames)
      .def_readwrite("min_score_log", &ctcseg::AlignConfig::min_score_log)
      .def_readwrite("blank_stay_includes_char",
                     &ctcseg::AlignConfig::blank_stay_includes_char);

  py::class_<ctcseg::Segment>(m, "Segment")
      .def(py::init([](std::string utterance_id, double start, double end,
                       double score_log, std::string text, bool filtered,
                       bool degenerate) {
             return ctcseg::Segment{std::move(utterance_id), start,     end,
                                    score_log, std::move(text), filtered,
                                    degenerate};
           }),
           py::arg("utterance_id"), py::arg("start"), py::arg("end"),
           py::arg("score_log") = 0.0, py::arg("text") = "",
           py::arg("filtered") = false, py::arg("degenerate") = false)
      .def_readwrite("utterance_id", &ctcseg::Segment::utterance_id)
      .def_readwrite("start", &ctcseg::Segment::start)
      .def_readwrite("end", &ctcseg::Segment::end)
      .def_readwrite("score_log", &ctcseg::Segment::score_log)
      .def_readwrite("text", &ctcseg::Segment::text)
      .def_readwrite("filtered", &ctcseg::Segment::filtered)
      .def_readwrite("degenerate", &ctcseg::Segment::degenerate)
      .def("__repr__", [](const ctcseg::Segment& s) {
        return "Segment(" + s.utterance_id + ", " + std::to_string(s.start) +
               ", " + std::to_string(s.end) + ")";
      });

  py::class_<ctcseg::SegmentManifest>(m, "SegmentManifest")
      .def(py::init([](std::string recording_id,
                       std::vector<ctcseg::Segment> segments) {
             return ctcseg::SegmentManifest{std::move(recording_id),
                                            std::move(segments)};
           }),
           py::arg("recording_id"), py::arg("segments"))
      .def_readwrite("recording_id", &ctcseg::SegmentManifest::recording_id)
      .def_readwrite("segments", &ctcseg::SegmentManifest::segments);

  py::class_<ctcseg::Trellis>(m, "Trellis")
      .def_property_readonly("frames", &ctcseg::Trellis::frames)
      .def_property_readonly("chars", &ctcseg::Trellis::chars)
      .def_property_readonly("window", &ctcseg::Trellis::window)
      .def("cell_count", &ctcseg::Trellis::cell_count)
      .def("at", &ctcseg::Trellis::at, py::arg("frame"), py::arg("char_index"))
      .def("materialized", &ctcseg::Trellis::materialized, py::arg("frame"),
           py::arg("char_index"));

  py::class_<ctcseg::FrameAlignment>(m, "FrameAlignment")
      .def_readonly("chars", &ctcseg::FrameAlignment::chars)
      .def_readonly("log_transition", &ctcseg::FrameAlignment::log_transition)
      .def_readonly("end_frame", &ctcseg::FrameAlignment::end_frame)
      .def_readonly("path_log_prob", &ctcseg::FrameAlignment::path_log_prob);

  py::class_<ctcseg::EvalReport>(m, "EvalReport")
      .def_readonly("mean_dev", &ctcseg::EvalReport::mean_dev)
      .def_readonly("std_dev", &ctcseg::EvalReport::std_dev)
      .def_readonly("within_ratio", &ctcseg::EvalReport::within_ratio)
      .def_readonly("threshold", &ctcseg::EvalReport::threshold)
      .def_readonly("n_boundaries", &ctcseg::EvalReport::n_boundaries)
      .def_readonly("unmatched_predicted",
                    &ctcseg::EvalReport::unmatched_predicted)
      .def_readonly("unmatched_reference",
                    &ctcseg::EvalReport::unmatched_reference);

  py::class_<ctcseg::PlantedUtterance>(m, "PlantedUtterance")
      .def(py::init([](std::string id, std::string text, double start_sec,
                       bool in_audio) {
             return ctcseg::PlantedUtterance{std::move(id), std::move(text),
                                             start_sec, in_audio};
           }),
           py::arg("id"), py::arg("text"), py::arg("start_sec") = -1.0,
           py::arg("in_audio") = true)
      .def_readwrite("id", &ctcseg::PlantedUtterance::id)
      .def_readwrite("text", &ctcseg::PlantedUtterance::text)
      .def_readwrite("start_sec", &ctcseg::PlantedUtterance::start_sec)
      .def_readwrite("in_audio", &ctcseg::PlantedUtterance::in_audio);

  py::class_<ctcseg::SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("token_table", &ctcseg::SynthSpec::token_table)
      .def_readwrite("utterances", &ctcseg::SynthSpec::utterances)
      .def_readwrite("recording_id", &ctcseg::SynthSpec::recording_id)
      .def_readwrite("frames_per_char", &ctcseg::SynthSpec::frames_per_char)
      .def_readwrite("blank_gap_frames", &ctcseg::SynthSpec::blank_gap_frames)
      .def_readwrite("prologue_frames", &ctcseg::SynthSpec::prologue_frames)
      .def_readwrite("epilogue_frames", &ctcseg::SynthSpec::epilogue_frames)
      .def_readwrite("peak_prob", &ctcseg::SynthSpec::peak_prob)
      .def_readwrite("noise_amplitude", &ctcseg::SynthSpec::noise_amplitude)
      .def_readwrite("noise_seed", &ctcseg::SynthSpec::noise_seed)
      .def_readwrite("index_duration", &ctcseg::SynthSpec::index_duration);

  py::class_<ctcseg::SynthResult>(m, "SynthResult")
      .def_readonly("posteriors", &ctcseg::SynthResult::posteriors)
      .def_readonly("truth", &ctcseg::SynthResult::truth);

  py::class_<ctcseg::BrutePath>(m, "BrutePath")
      .def_readonly("feasible", &ctcseg::BrutePath::feasible)
      .def_readonly("log_prob", &ctcseg::BrutePath::log_prob)
      .def_readonly("end_frame", &ctcseg::BrutePath::end_frame)
      .def_readonly("chars", &ctcseg::BrutePath::chars)
      .def_readonly("unique", &ctcseg::BrutePath::unique);

  py::class_<ctcseg::AugmentResult>(m, "AugmentResult")
      .def_readonly("posteriors", &ctcseg::AugmentResult::posteriors)
      .def_readonly("reference", &ctcseg::AugmentResult::reference)
      .def_readonly("prepended_sec", &ctcseg::AugmentResult::prepended_sec)
      .def_readonly("appended_sec", &ctcseg::AugmentResult::appended_sec);

  m.def("read_rules", &ctcseg::read_rules, py::arg("path"));
  m.def("rules_from_token_table", &ctcseg::rules_from_token_table,
        py::arg("table"), py::arg("lowercase") = true,
        py::arg("drop_policy") = ctcseg::DropPolicy::kStripChars);
  m.def("normalize", &ctcseg::normalize, py::arg("text"), py::arg("rules"));
  m.def("encode", &ctcseg::encode, py::arg("transcripts"), py::arg("table"),
        py::arg("rules"));
  m.def("decode", &ctcseg::decode, py::arg("indices"), py::arg("table"));

  m.def("compute_trellis", &ctcseg::compute_trellis, py::arg("posteriors"),
        py::arg("text"), py::arg("config") = ctcseg::AlignConfig{},
        py::call_guard<py::gil_scoped_release>());
  m.def("compute_trellis_windowed", &ctcseg::compute_trellis_windowed,
        py::arg("posteriors"), py::arg("text"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("backtrack", &ctcseg::backtrack, py::arg("trellis"),
        py::arg("posteriors"), py::arg("text"),
        py::call_guard<py::gil_scoped_release>());
  m.def("extract_segments", &ctcseg::extract_segments, py::arg("alignment"),
        py::arg("text"), py::arg("posteriors"), py::arg("config"));
  m.def("align", &ctcseg::align, py::arg("posteriors"), py::arg("transcripts"),
        py::arg("table"), py::arg("rules"),
        py::arg("config") = ctcseg::AlignConfig{},
        py::call_guard<py::gil_scoped_release>());

  m.def("evaluate", &ctcseg::evaluate, py::arg("predicted"),
        py::arg("reference"), py::arg("threshold") = 0.5);
  m.def("augment", &ctcseg::augment, py::arg("posteriors"),
        py::arg("prepend_sec"), py::arg("append_sec"), py::arg("reference"));

  m.def("generate", &ctcseg::generate, py::arg("spec"),
        py::call_guard<py::gil_scoped_release>());
  m.def("read_synth_spec", &ctcseg::read_synth_spec, py::arg("path"));
  m.def("transcript_of", &ctcseg::transcript_of, py::arg("spec"));
  m.def(
      "brute_force_best_path",
      [](const ctcseg::PosteriorMatrix& posteriors,
         const std::vector<std::uint32_t>& text) {
        return ctcseg::brute_force_best_path(
            posteriors, std::span<const std::uint32_t>(text));
      },
      py::arg("posteriors"), py::arg("text"));

  m.def("read_posteriors", &ctcseg::read_posteriors, py::arg("path"));
  m.def("write_posteriors", &ctcseg::write_posteriors, py::arg("matrix"),
        py::arg("path"));
  m.def("read_token_table", &ctcseg::read_token_table, py::arg("path"),
        py::arg("blank_index") = 0);
  m.def("read_transcripts", &ctcseg::read_transcripts, py::arg("path"),
        py::arg("recording_id"));
  m.def(
      "read_segments",
      [](const std::string& path) { return ctcseg::read_segments(path); },
      py::arg("path"));
  m.def(
      "write_segments",
      [](const ctcseg::SegmentManifest& manifest, const std::string& format,
         const std::string& path) {
        ctcseg::SegmentFormat f;
        if (format == "kaldi") {
          f = ctcseg::SegmentFormat::kKaldi;
        } else if (format == "json") {
          f = ctcseg::SegmentFormat::kJson;
        } else {
          throw ctcseg::InvalidInputError("format must be 'kaldi' or 'json'");
        }
        ctcseg::write_segments(manifest, f, path);
      },
      py::arg("manifest"), py::arg("format"), py::arg("path"));
}
