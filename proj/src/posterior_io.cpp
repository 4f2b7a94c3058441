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

#include "ctcseg/posterior_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctcseg/errors.hpp"

namespace ctcseg {

namespace {

static_assert(sizeof(float) == 4, "requires 32-bit IEEE floats");

constexpr std::size_t kHeaderBytes = 24;

std::uint32_t load_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32_le(std::uint32_t v, unsigned char* p) {
  p[0] = static_cast<unsigned char>(v);
  p[1] = static_cast<unsigned char>(v >> 8);
  p[2] = static_cast<unsigned char>(v >> 16);
  p[3] = static_cast<unsigned char>(v >> 24);
}

float load_f32_le(const unsigned char* p) {
  return std::bit_cast<float>(load_u32_le(p));
}

void store_f32_le(float v, unsigned char* p) {
  store_u32_le(std::bit_cast<std::uint32_t>(v), p);
}

// Reads a whole text file into lines. Strips one trailing CR per line and a
// UTF-8 BOM from the first line; a final line without a newline counts.
std::vector<std::string> read_text_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (in.bad()) {
    throw IoError("read failure on " + path.string());
  }
  if (!lines.empty() && lines.front().rfind("\xEF\xBB\xBF", 0) == 0) {
    lines.front().erase(0, 3);
  }
  return lines;
}

// 10 ms rounding shared by both manifest formats so their times agree.
double round_time(double seconds) {
  return std::round(seconds * 100.0) / 100.0;
}

std::string format_time(double seconds) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << round_time(seconds);
  return out.str();
}

void sort_by_start(SegmentManifest& manifest) {
  std::stable_sort(manifest.segments.begin(), manifest.segments.end(),
                   [](const Segment& a, const Segment& b) {
                     return a.start < b.start;
                   });
}

SegmentManifest read_segments_json(const std::string& content,
                                   const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
  SegmentManifest manifest;
  try {
    manifest.recording_id = doc.at("recording_id").get<std::string>();
    for (const auto& item : doc.at("segments")) {
      Segment seg;
      seg.utterance_id = item.at("utterance_id").get<std::string>();
      seg.start = item.at("start").get<double>();
      seg.end = item.at("end").get<double>();
      seg.score_log = item.value("score_log", 0.0);
      seg.text = item.value("text", std::string());
      seg.filtered = item.value("filtered", false);
      seg.degenerate = item.value("degenerate", false);
      manifest.segments.push_back(std::move(seg));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("unexpected manifest structure in " + path.string() + ": " +
                  e.what());
  }
  return manifest;
}

SegmentManifest read_segments_kaldi(const std::string& content,
                                    const std::filesystem::path& path) {
  SegmentManifest manifest;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    Segment seg;
    std::string recording, start_str, end_str, extra;
    if (!(fields >> seg.utterance_id >> recording >> start_str >> end_str) ||
        (fields >> extra)) {
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": expected 'utterance_id recording_id start end'");
    }
    std::size_t used = 0;
    try {
      seg.start = std::stod(start_str, &used);
      if (used != start_str.size()) throw std::invalid_argument(start_str);
      seg.end = std::stod(end_str, &used);
      if (used != end_str.size()) throw std::invalid_argument(end_str);
    } catch (const std::exception&) {
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": unparsable time value");
    }
    if (manifest.segments.empty()) {
      manifest.recording_id = recording;
    } else if (recording != manifest.recording_id) {
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": manifest mixes recordings '" + manifest.recording_id +
                    "' and '" + recording + "'");
    }
    manifest.segments.push_back(std::move(seg));
  }
  return manifest;
}

}  // namespace

PosteriorMatrix read_posteriors(const std::filesystem::path& path) {
  std::error_code ec;
  const std::uintmax_t file_size = std::filesystem::file_size(path, ec);
  if (ec) {
    throw IoError("cannot stat " + path.string() + ": " + ec.message());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  if (file_size < kHeaderBytes) {
    throw IoError("truncated header in " + path.string() + ": expected " +
                  std::to_string(kHeaderBytes) + " bytes, got " +
                  std::to_string(file_size));
  }
  unsigned char header[kHeaderBytes];
  in.read(reinterpret_cast<char*>(header), kHeaderBytes);
  if (!in) {
    throw IoError("read failure on " + path.string());
  }
  if (std::memcmp(header, kPosteriorMagic, 4) != 0) {
    throw IoError(path.string() + " is not a posterior file (bad magic)");
  }
  const std::uint32_t version = load_u32_le(header + 4);
  if (version != kPosteriorFormatVersion) {
    throw IoError("unsupported posterior format version " +
                  std::to_string(version) + " in " + path.string());
  }

  PosteriorMatrix matrix;
  matrix.frames = load_u32_le(header + 8);
  matrix.tokens = load_u32_le(header + 12);
  matrix.blank_index = load_u32_le(header + 16);
  matrix.index_duration = load_f32_le(header + 20);

  if (matrix.frames < 1 || matrix.tokens < 2) {
    throw IoError("malformed header in " + path.string() + ": frames=" +
                  std::to_string(matrix.frames) + " tokens=" +
                  std::to_string(matrix.tokens));
  }
  if (matrix.blank_index >= matrix.tokens) {
    throw IoError("malformed header in " + path.string() + ": blank index " +
                  std::to_string(matrix.blank_index) +
                  " out of range for " + std::to_string(matrix.tokens) +
                  " tokens");
  }
  if (!(matrix.index_duration > 0.0f) ||
      !std::isfinite(matrix.index_duration)) {
    throw IoError("malformed header in " + path.string() +
                  ": index_duration must be positive and finite");
  }

  const std::uint64_t count =
      static_cast<std::uint64_t>(matrix.frames) * matrix.tokens;
  const std::uint64_t expected_size = kHeaderBytes + count * 4;
  if (file_size != expected_size) {
    throw IoError((file_size < expected_size ? "truncated payload in "
                                             : "trailing data in ") +
                  path.string() + ": expected " +
                  std::to_string(expected_size) + " bytes, got " +
                  std::to_string(file_size));
  }

  matrix.data.resize(count);
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(matrix.data.data()),
            static_cast<std::streamsize>(count * 4));
    if (!in) {
      throw IoError("read failure on " + path.string());
    }
  } else {
    std::vector<unsigned char> raw(count * 4);
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
    if (!in) {
      throw IoError("read failure on " + path.string());
    }
    for (std::uint64_t i = 0; i < count; ++i) {
      matrix.data[i] = load_f32_le(raw.data() + i * 4);
    }
  }

  validate(matrix);
  check_normalization(matrix, kRowNormalizationTolerance,
                      &matrix.unnormalized_rows);
  return matrix;
}

void write_posteriors(const PosteriorMatrix& matrix,
                      const std::filesystem::path& path) {
  validate(matrix);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  unsigned char header[kHeaderBytes];
  std::memcpy(header, kPosteriorMagic, 4);
  store_u32_le(kPosteriorFormatVersion, header + 4);
  store_u32_le(matrix.frames, header + 8);
  store_u32_le(matrix.tokens, header + 12);
  store_u32_le(matrix.blank_index, header + 16);
  store_f32_le(matrix.index_duration, header + 20);
  out.write(reinterpret_cast<const char*>(header), kHeaderBytes);

  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(matrix.data.data()),
              static_cast<std::streamsize>(matrix.data.size() * 4));
  } else {
    std::vector<unsigned char> raw(matrix.data.size() * 4);
    for (std::size_t i = 0; i < matrix.data.size(); ++i) {
      store_f32_le(matrix.data[i], raw.data() + i * 4);
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
  }
  out.flush();
  if (!out) {
    throw IoError("write failure on " + path.string());
  }
}

TokenTable read_token_table(const std::filesystem::path& path,
                            std::uint32_t blank_index) {
  TokenTable table;
  table.tokens = read_text_lines(path);
  // A trailing newline produces no extra token because getline never yields
  // a final empty line for it; an empty line anywhere else is a real token
  // slot that validate() rejects as empty.
  table.blank_index = blank_index;
  validate(table);
  return table;
}

TranscriptSet read_transcripts(const std::filesystem::path& path,
                               const std::string& recording_id) {
  TranscriptSet transcripts;
  transcripts.recording_id = recording_id;
  const std::vector<std::string> lines = read_text_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t tab = lines[i].find('\t');
    if (tab == std::string::npos) {
      throw IoError(path.string() + ":" + std::to_string(i + 1) +
                    ": expected '<utterance_id>\\t<text>'");
    }
    transcripts.utterances.push_back(
        {lines[i].substr(0, tab), lines[i].substr(tab + 1)});
  }
  validate(transcripts);
  return transcripts;
}

void write_segments(const SegmentManifest& manifest, SegmentFormat format,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  if (format == SegmentFormat::kKaldi) {
    for (const Segment& seg : manifest.segments) {
      out << seg.utterance_id << ' ' << manifest.recording_id << ' '
          << format_time(seg.start) << ' ' << format_time(seg.end) << '\n';
    }
  } else {
    nlohmann::json doc;
    doc["recording_id"] = manifest.recording_id;
    nlohmann::json segments = nlohmann::json::array();
    for (const Segment& seg : manifest.segments) {
      nlohmann::json item;
      item["utterance_id"] = seg.utterance_id;
      item["start"] = round_time(seg.start);
      item["end"] = round_time(seg.end);
      item["score_log"] = seg.score_log;
      item["text"] = seg.text;
      item["filtered"] = seg.filtered;
      item["degenerate"] = seg.degenerate;
      segments.push_back(std::move(item));
    }
    doc["segments"] = std::move(segments);
    out << doc.dump(2) << '\n';
  }
  out.flush();
  if (!out) {
    throw IoError("write failure on " + path.string());
  }
}

SegmentManifest read_segments(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw IoError("read failure on " + path.string());
  }
  const std::string content = buffer.str();
  const std::size_t first =
      content.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
  SegmentManifest manifest =
      (first != std::string::npos && content[first] == '{')
          ? read_segments_json(content, path)
          : read_segments_kaldi(content, path);

  std::unordered_set<std::string> seen;
  for (const Segment& seg : manifest.segments) {
    if (seg.utterance_id.empty()) {
      throw IoError(path.string() + ": segment with empty utterance id");
    }
    if (!seen.insert(seg.utterance_id).second) {
      throw IoError(path.string() + ": duplicate utterance id '" +
                    seg.utterance_id + "'");
    }
  }
  sort_by_start(manifest);
  return manifest;
}

}  // namespace ctcseg
