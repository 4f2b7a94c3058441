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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctcseg/errors.hpp"
#include "ctcseg/evaluation.hpp"
#include "ctcseg/prng.hpp"
#include "test_support.hpp"

using ctcseg::SegmentManifest;
using ctcseg_test::random_matrix;
using ctcseg_test::ScratchDir;

namespace {

SegmentManifest manifest_of(
    const std::vector<std::tuple<std::string, double, double>>& rows) {
  SegmentManifest m;
  m.recording_id = "rec";
  for (const auto& [id, start, end] : rows) {
    ctcseg::Segment seg;
    seg.utterance_id = id;
    seg.start = start;
    seg.end = end;
    m.segments.push_back(seg);
  }
  return m;
}

}  // namespace

TEST_CASE("boundary deviations pool starts and ends into one sample") {
  const auto pred = manifest_of({{"u", 0.0, 1.0}});
  const auto ref = manifest_of({{"u", 0.2, 1.0}});
  const auto report = ctcseg::evaluate(pred, ref, 0.5);
  // Deviations 0.2 and 0.0: mean 0.1, population stddev 0.1, all within.
  CHECK(report.n_boundaries == 2);
  CHECK(report.mean_dev == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(report.std_dev == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(report.within_ratio == doctest::Approx(1.0));
  CHECK(report.threshold == doctest::Approx(0.5));
  CHECK(report.starts.count == 1);
  CHECK(report.starts.mean == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(report.ends.mean == doctest::Approx(0.0));
  CHECK(report.unmatched_predicted.empty());
  CHECK(report.unmatched_reference.empty());
}

TEST_CASE("identical manifests evaluate to zero error") {
  const auto m = manifest_of({{"a", 0.0, 1.0}, {"b", 1.5, 2.25}});
  const auto report = ctcseg::evaluate(m, m);
  CHECK(report.mean_dev == 0.0);
  CHECK(report.std_dev == 0.0);
  CHECK(report.within_ratio == doctest::Approx(1.0));
  CHECK(report.n_boundaries == 4);
}

TEST_CASE("a constant start offset splits the within ratio in half") {
  std::vector<std::tuple<std::string, double, double>> pred_rows;
  std::vector<std::tuple<std::string, double, double>> ref_rows;
  for (int i = 0; i < 10; ++i) {
    const std::string id = "u" + std::to_string(i);
    const double base = 2.0 * i;
    ref_rows.push_back({id, base, base + 1.0});
    pred_rows.push_back({id, base + 0.6, base + 1.0});
  }
  const auto report =
      ctcseg::evaluate(manifest_of(pred_rows), manifest_of(ref_rows), 0.5);
  // Twenty pooled deviations: ten of 0.6 (starts) and ten of 0 (ends).
  CHECK(report.n_boundaries == 20);
  CHECK(report.mean_dev == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(report.std_dev == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(report.within_ratio == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(report.starts.within_ratio == doctest::Approx(0.0));
  CHECK(report.ends.within_ratio == doctest::Approx(1.0));
}

TEST_CASE("a deviation exactly at the threshold still counts as within") {
  const auto pred = manifest_of({{"u", 0.0, 1.0}});
  const auto ref = manifest_of({{"u", 0.5, 1.0}});
  const auto report = ctcseg::evaluate(pred, ref, 0.5);
  CHECK(report.within_ratio == doctest::Approx(1.0));
}

TEST_CASE("swapping prediction and reference leaves the statistics fixed") {
  for (int seed = 0; seed < 50; ++seed) {
    ctcseg::Prng rng(7000 + seed);
    std::vector<std::tuple<std::string, double, double>> a_rows;
    std::vector<std::tuple<std::string, double, double>> b_rows;
    const int n = 1 + static_cast<int>(rng.below(20));
    for (int i = 0; i < n; ++i) {
      const std::string id = "u" + std::to_string(i);
      const double s1 = rng.uniform(0.0, 100.0);
      const double s2 = rng.uniform(0.0, 100.0);
      a_rows.push_back({id, s1, s1 + rng.uniform(0.1, 5.0)});
      b_rows.push_back({id, s2, s2 + rng.uniform(0.1, 5.0)});
    }
    const auto ab =
        ctcseg::evaluate(manifest_of(a_rows), manifest_of(b_rows), 0.5);
    const auto ba =
        ctcseg::evaluate(manifest_of(b_rows), manifest_of(a_rows), 0.5);
    CAPTURE(seed);
    REQUIRE(ab.mean_dev == doctest::Approx(ba.mean_dev).epsilon(1e-12));
    REQUIRE(ab.std_dev == doctest::Approx(ba.std_dev).epsilon(1e-12));
    REQUIRE(ab.within_ratio ==
            doctest::Approx(ba.within_ratio).epsilon(1e-12));
    REQUIRE(ab.n_boundaries == ba.n_boundaries);
  }
}

TEST_CASE("unmatched utterances are reported and excluded from the stats") {
  const auto pred =
      manifest_of({{"a", 0.0, 1.0}, {"b", 2.0, 3.0}, {"only_pred", 4.0, 5.0}});
  const auto ref =
      manifest_of({{"a", 0.0, 1.0}, {"b", 2.0, 3.0}, {"only_ref", 6.0, 7.0}});
  const auto report = ctcseg::evaluate(pred, ref);
  CHECK(report.n_boundaries == 4);
  CHECK(report.mean_dev == 0.0);
  REQUIRE(report.unmatched_predicted ==
          std::vector<std::string>{"only_pred"});
  REQUIRE(report.unmatched_reference == std::vector<std::string>{"only_ref"});

  SUBCASE("no overlap at all is an error") {
    const auto other = manifest_of({{"z", 0.0, 1.0}});
    CHECK_THROWS_AS(ctcseg::evaluate(pred, other), ctcseg::InvalidInputError);
  }
  SUBCASE("duplicate ids are an error") {
    const auto dup = manifest_of({{"a", 0.0, 1.0}, {"a", 2.0, 3.0}});
    CHECK_THROWS_AS(ctcseg::evaluate(dup, ref), ctcseg::InvalidInputError);
    CHECK_THROWS_AS(ctcseg::evaluate(pred, dup), ctcseg::InvalidInputError);
  }
  SUBCASE("a negative threshold is an error") {
    CHECK_THROWS_AS(ctcseg::evaluate(pred, ref, -0.1),
                    ctcseg::InvalidInputError);
  }
}

TEST_CASE("report JSON carries every headline figure") {
  ScratchDir dir;
  const auto pred = manifest_of({{"u", 0.0, 1.0}, {"extra", 5.0, 6.0}});
  const auto ref = manifest_of({{"u", 0.2, 1.0}});
  const auto report = ctcseg::evaluate(pred, ref, 0.5);
  const auto path = dir.file("report.json");
  ctcseg::write_report(report, path);

  std::ifstream in(path);
  REQUIRE(in.good());
  const auto doc = nlohmann::json::parse(in);
  CHECK(doc.at("mean_dev").get<double>() == doctest::Approx(0.1));
  CHECK(doc.at("std_dev").get<double>() == doctest::Approx(0.1));
  CHECK(doc.at("within_ratio").get<double>() == doctest::Approx(1.0));
  CHECK(doc.at("threshold").get<double>() == doctest::Approx(0.5));
  CHECK(doc.at("n_boundaries").get<std::size_t>() == 2);
  CHECK(doc.at("starts").at("count").get<std::size_t>() == 1);
  CHECK(doc.at("unmatched_predicted").get<std::vector<std::string>>() ==
        std::vector<std::string>{"extra"});
}

TEST_CASE("deviation histogram bins signed deviations with edge clamping") {
  const auto pred = manifest_of({{"u", 0.0, 1.0}});
  const auto ref = manifest_of({{"u", 0.2, 1.0}});
  const auto hist = ctcseg::deviation_histogram(pred, ref, 4);
  // Signed deviations: start -0.2, end 0.0.
  CHECK(hist.lo == doctest::Approx(-0.2));
  CHECK(hist.hi == doctest::Approx(0.0));
  REQUIRE(hist.bin_left.size() == 4);
  CHECK(hist.bin_left[0] == doctest::Approx(-0.2));
  CHECK(hist.bin_right[3] == doctest::Approx(0.0));
  CHECK(hist.count_start == std::vector<std::size_t>{1, 0, 0, 0});
  // The top edge belongs to the last bin.
  CHECK(hist.count_end == std::vector<std::size_t>{0, 0, 0, 1});

  SUBCASE("identical deviations widen to a half-second span") {
    const auto same = ctcseg::deviation_histogram(ref, ref, 3);
    CHECK(same.lo == doctest::Approx(-0.5));
    CHECK(same.hi == doctest::Approx(0.5));
  }
  SUBCASE("zero bins are rejected") {
    CHECK_THROWS_AS(ctcseg::deviation_histogram(pred, ref, 0),
                    ctcseg::InvalidInputError);
  }
  SUBCASE("the CSV lists one row per bin under a fixed header") {
    ScratchDir dir;
    const auto path = dir.file("hist.csv");
    ctcseg::write_histogram_csv(hist, path);
    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "bin_left,bin_right,count_start,count_end");
    int rows = 0;
    int total_start = 0;
    int total_end = 0;
    while (std::getline(in, line)) {
      ++rows;
      std::stringstream ss(line);
      std::string field;
      std::getline(ss, field, ',');
      std::getline(ss, field, ',');
      std::getline(ss, field, ',');
      total_start += std::stoi(field);
      std::getline(ss, field, ',');
      total_end += std::stoi(field);
    }
    CHECK(rows == 4);
    CHECK(total_start == 1);
    CHECK(total_end == 1);
  }
}

TEST_CASE("histogram counts re-derive from the deviations themselves") {
  for (int seed = 0; seed < 50; ++seed) {
    ctcseg::Prng rng(8000 + seed);
    std::vector<std::tuple<std::string, double, double>> pred_rows;
    std::vector<std::tuple<std::string, double, double>> ref_rows;
    std::vector<double> start_devs;
    std::vector<double> end_devs;
    const int n = 1 + static_cast<int>(rng.below(30));
    for (int i = 0; i < n; ++i) {
      const std::string id = "u" + std::to_string(i);
      const double rs = rng.uniform(0.0, 50.0);
      const double re = rs + rng.uniform(0.1, 4.0);
      const double ds = rng.uniform(-2.0, 2.0);
      const double de = rng.uniform(-2.0, 2.0);
      ref_rows.push_back({id, rs, re});
      pred_rows.push_back({id, rs + ds, re + de});
      start_devs.push_back((rs + ds) - rs);
      end_devs.push_back((re + de) - re);
    }
    const std::size_t bins = 60;
    const auto hist = ctcseg::deviation_histogram(manifest_of(pred_rows),
                                                  manifest_of(ref_rows),
                                                  bins);
    REQUIRE(hist.count_start.size() == bins);

    std::vector<std::size_t> expect_start(bins, 0);
    std::vector<std::size_t> expect_end(bins, 0);
    const double width =
        (hist.hi - hist.lo) / static_cast<double>(bins);
    const auto bin_of = [&](double v) {
      const double pos = (v - hist.lo) / width;
      std::size_t b = pos < 0.0 ? 0 : static_cast<std::size_t>(pos);
      return std::min(b, bins - 1);
    };
    double lo = start_devs[0];
    double hi = start_devs[0];
    for (double v : start_devs) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    for (double v : end_devs) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CAPTURE(seed);
    if (lo == hi) continue;  // widened-range case covered elsewhere
    REQUIRE(hist.lo == doctest::Approx(lo).epsilon(1e-12));
    REQUIRE(hist.hi == doctest::Approx(hi).epsilon(1e-12));
    for (double v : start_devs) ++expect_start[bin_of(v)];
    for (double v : end_devs) ++expect_end[bin_of(v)];
    REQUIRE(hist.count_start == expect_start);
    REQUIRE(hist.count_end == expect_end);

    std::size_t total = 0;
    for (std::size_t c : hist.count_start) total += c;
    for (std::size_t c : hist.count_end) total += c;
    REQUIRE(total == 2 * static_cast<std::size_t>(n));
  }
}

TEST_CASE("augmenting with zero seconds changes nothing") {
  ctcseg::Prng rng(31);
  const auto m = random_matrix(rng, 50, 4);
  const auto ref = manifest_of({{"u", 0.1, 0.3}});
  const auto result = ctcseg::augment(m, 0.0, 0.0, ref);
  CHECK(result.posteriors.frames == 50);
  CHECK(result.posteriors.data == m.data);
  CHECK(result.prepended_sec == 0.0);
  CHECK(result.appended_sec == 0.0);
  REQUIRE(result.reference.segments.size() == 1);
  CHECK(result.reference.segments[0].start == doctest::Approx(0.1));
  CHECK(result.reference.segments[0].end == doctest::Approx(0.3));
}

TEST_CASE("augmentation wraps the recording's own edges around it") {
  ctcseg::Prng rng(32);
  const auto m = random_matrix(rng, 1000, 5);
  const auto ref = manifest_of({{"u1", 0.5, 1.0}, {"u2", 4.0, 7.5}});
  const auto result = ctcseg::augment(m, 2.0, 1.5, ref);

  // floor(2.0 / 0.01) = 200 prepended, floor(1.5 / 0.01) = 150 appended.
  CHECK(result.posteriors.frames == 1350);
  CHECK(result.prepended_sec == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(result.appended_sec == doctest::Approx(1.5).epsilon(1e-6));

  // Prefix = last 200 original rows.
  for (std::uint32_t row = 0; row < 200; ++row) {
    for (std::uint32_t c = 0; c < 5; ++c) {
      REQUIRE(result.posteriors.at(row, c) == m.at(800 + row, c));
    }
  }
  // Body = the original, unchanged.
  for (std::uint32_t row = 0; row < 1000; row += 97) {
    for (std::uint32_t c = 0; c < 5; ++c) {
      REQUIRE(result.posteriors.at(200 + row, c) == m.at(row, c));
    }
  }
  // Suffix = first 150 original rows.
  for (std::uint32_t row = 0; row < 150; ++row) {
    for (std::uint32_t c = 0; c < 5; ++c) {
      REQUIRE(result.posteriors.at(1200 + row, c) == m.at(row, c));
    }
  }
  // Reference times shift by exactly the prepended duration.
  CHECK(result.reference.segments[0].start ==
        doctest::Approx(0.5 + result.prepended_sec).epsilon(1e-12));
  CHECK(result.reference.segments[1].end ==
        doctest::Approx(7.5 + result.prepended_sec).epsilon(1e-12));

  SUBCASE("the same call is bit-for-bit reproducible") {
    const auto again = ctcseg::augment(m, 2.0, 1.5, ref);
    CHECK(again.posteriors.data == result.posteriors.data);
  }
}

TEST_CASE("augment durations floor to whole frames") {
  ctcseg::Prng rng(33);
  const auto m = random_matrix(rng, 100, 3);
  const auto ref = manifest_of({{"u", 0.0, 0.5}});
  const auto result = ctcseg::augment(m, 0.015, 0.0, ref);
  CHECK(result.posteriors.frames == 101);
  CHECK(result.prepended_sec == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("augment validates its durations") {
  ctcseg::Prng rng(34);
  const auto m = random_matrix(rng, 100, 3);  // 1 second long
  const auto ref = manifest_of({{"u", 0.0, 0.5}});
  CHECK_THROWS_AS(ctcseg::augment(m, -0.1, 0.0, ref),
                  ctcseg::InvalidInputError);
  CHECK_THROWS_AS(ctcseg::augment(m, 0.0, 1.5, ref),
                  ctcseg::InvalidInputError);
  CHECK_THROWS_AS(
      ctcseg::augment(m, std::numeric_limits<double>::infinity(), 0.0, ref),
      ctcseg::InvalidInputError);
}
