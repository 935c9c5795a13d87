// Copyright 2026 The crfner Authors. All Rights Reserved.
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

#include <random>
#include <stdexcept>
#include <vector>

#include "crfner/windowing.hpp"
#include "doctest.h"

using namespace crfner;

namespace {

std::vector<std::pair<std::size_t, std::size_t>> bounds(const std::vector<Span>& spans) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& s : spans) out.emplace_back(s.start, s.end);
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> contexts(const std::vector<Span>& spans) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& s : spans) out.emplace_back(s.context_start, s.context_end);
  return out;
}

// Per-token reference: score every span directly, earliest wins ties.
std::vector<std::size_t> owner_oracle(const std::vector<Span>& spans, std::size_t doc_len) {
  std::vector<std::size_t> owner(doc_len);
  for (std::size_t i = 0; i < doc_len; ++i) {
    long best = -1;
    for (std::size_t k = 0; k < spans.size(); ++k) {
      if (i < spans[k].start || i >= spans[k].end) continue;
      const long score = static_cast<long>(std::min(i - spans[k].start, spans[k].end - 1 - i));
      if (score > best) {
        best = score;
        owner[i] = k;
      }
    }
  }
  return owner;
}

using Bounds = std::vector<std::pair<std::size_t, std::size_t>>;

}  // namespace

TEST_CASE("split_spans examples") {
  CHECK(bounds(split_spans(10, {6, 3})) == Bounds{{0, 6}, {3, 9}, {6, 10}});
  CHECK(bounds(split_spans(4, {6, 3})) == Bounds{{0, 4}});
  CHECK(bounds(split_spans(512, {512, 128})) == Bounds{{0, 512}});
  CHECK(split_spans(0, {6, 3}).empty());
  CHECK(bounds(split_spans(7, {6, 3})) == Bounds{{0, 6}, {3, 7}});
}

TEST_CASE("span config validation") {
  CHECK_THROWS_AS(split_spans(10, {4, 5}), std::invalid_argument);
  CHECK_THROWS_AS(split_spans(10, {4, 0}), std::invalid_argument);
  CHECK(SpanConfig{512, 128}.max_overlap() == 4);
  CHECK(SpanConfig{10, 3}.max_overlap() == 4);
}

TEST_CASE("assign_max_context examples") {
  CHECK(contexts(make_spans(10, {6, 3})) == Bounds{{0, 5}, {5, 8}, {8, 10}});
  CHECK(contexts(make_spans(7, {10, 3})) == Bounds{{0, 7}});
  std::vector<Span> two = {{0, 4}, {2, 6}};
  CHECK(contexts(assign_max_context(two, 6)) == Bounds{{0, 3}, {3, 6}});
}

TEST_CASE("merge_predictions") {
  const auto spans = make_spans(10, {6, 3});
  const std::vector<std::vector<int>> tags = {std::vector<int>(6, 1), std::vector<int>(6, 2),
                                              std::vector<int>(4, 3)};
  CHECK(merge_predictions(spans, tags) == std::vector<int>{1, 1, 1, 1, 1, 2, 2, 2, 3, 3});

  const auto single = make_spans(5, {8, 4});
  CHECK(merge_predictions(single, {{4, 0, 1, 2, 3}}) == std::vector<int>{4, 0, 1, 2, 3});

  CHECK_THROWS_AS(merge_predictions(spans, {std::vector<int>(6, 1), std::vector<int>(5, 2),
                                            std::vector<int>(4, 3)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(merge_predictions(spans, {std::vector<int>(6, 1)}), std::invalid_argument);
}

TEST_CASE("max-context partition and owner agreement under fuzzing") {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<std::size_t> len(1, 300), s_dist(1, 64);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t doc_len = len(rng);
    const std::size_t s = s_dist(rng);
    const std::size_t d = std::uniform_int_distribution<std::size_t>(1, s)(rng);
    const auto spans = make_spans(doc_len, {s, d});
    const auto owner = owner_oracle(spans, doc_len);
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < spans.size(); ++k) {
      const auto& sp = spans[k];
      CHECK(sp.start == k * d);
      CHECK(sp.size() == std::min(s, doc_len - sp.start));
      CHECK(sp.context_start == cursor);
      CHECK(sp.context_start >= sp.start);
      CHECK(sp.context_end <= sp.end);
      for (std::size_t i = sp.context_start; i < sp.context_end; ++i) CHECK(owner[i] == k);
      cursor = sp.context_end;
    }
    CHECK(cursor == doc_len);
    CHECK(spans.back().end == doc_len);
  }
}

TEST_CASE("merge is independent of assignment when spans agree") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> tag(0, 6);
  std::vector<int> truth(97);
  for (auto& t : truth) t = tag(rng);
  const auto spans = make_spans(truth.size(), {20, 7});
  std::vector<std::vector<int>> per_span;
  for (const auto& s : spans) per_span.emplace_back(truth.begin() + s.start, truth.begin() + s.end);
  CHECK(merge_predictions(spans, per_span) == truth);
}

TEST_CASE("default window configuration covers each token at most four times") {
  for (std::size_t doc_len : {1u, 511u, 512u, 513u, 1000u, 2000u}) {
    const auto spans = make_spans(doc_len, {512, 128});
    std::vector<int> cover(doc_len, 0);
    for (const auto& s : spans)
      for (std::size_t i = s.start; i < s.end; ++i) ++cover[i];
    for (int c : cover) CHECK(c <= 4);
  }
}
