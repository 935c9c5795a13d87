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

#include "crfner/error.hpp"
#include "crfner/tagscheme.hpp"
#include "doctest.h"

using namespace crfner;

namespace {

TagSequence tags(const TagSet& ts, std::initializer_list<const char*> names) {
  TagSequence out;
  for (auto n : names) out.push_back(ts.tag_index(n));
  return out;
}

}  // namespace

TEST_CASE("TagSet layout and names") {
  TagSet ts({"PER", "LOC"});
  CHECK(ts.size() == 5);
  CHECK(ts.tag_names() == std::vector<std::string>{"O", "B-PER", "I-PER", "B-LOC", "I-LOC"});
  CHECK(ts.tag_index("I-LOC") == 4);
  CHECK_THROWS_AS(ts.tag_index("B-ORG"), DataError);
  CHECK_THROWS_AS(TagSet({"PER", "PER"}), DataError);
  CHECK_THROWS_AS(TagSet({""}), DataError);
  CHECK(TagSet::from_tag_names({"O", "B-LOC", "I-PER", "B-PER"}).classes() ==
        std::vector<std::string>{"LOC", "PER"});
  CHECK_THROWS_AS(TagSet::from_tag_names({"X-PER"}), DataError);
}

TEST_CASE("encode") {
  TagSet ts({"PER", "LOC"});
  CHECK(encode({{0, 2, "PER"}, {3, 4, "LOC"}}, 4, ts) == tags(ts, {"B-PER", "I-PER", "O", "B-LOC"}));
  CHECK(encode({}, 3, ts) == tags(ts, {"O", "O", "O"}));
  CHECK(encode({{0, 1, "PER"}, {1, 2, "PER"}}, 2, ts) == tags(ts, {"B-PER", "B-PER"}));
  CHECK_THROWS_AS(encode({{0, 2, "PER"}, {1, 3, "LOC"}}, 4, ts), std::invalid_argument);
  CHECK_THROWS_AS(encode({{2, 5, "PER"}}, 4, ts), std::invalid_argument);
}

TEST_CASE("decode") {
  TagSet ts({"PER", "LOC"});
  CHECK(decode(tags(ts, {"B-PER", "I-PER", "O", "B-LOC"}), ts) ==
        std::vector<Entity>{{0, 2, "PER"}, {3, 4, "LOC"}});
  CHECK(decode(tags(ts, {"O", "O"}), ts).empty());
  CHECK_THROWS_AS(decode(tags(ts, {"O", "I-PER"}), ts), std::invalid_argument);
}

TEST_CASE("filter_invalid examples") {
  TagSet ts({"PER", "LOC"});
  CHECK(filter_invalid(tags(ts, {"O", "I-PER", "I-PER"}), ts) == tags(ts, {"O", "O", "O"}));
  CHECK(filter_invalid(tags(ts, {"B-PER", "I-LOC"}), ts) == tags(ts, {"B-PER", "O"}));
  CHECK(filter_invalid(tags(ts, {"B-PER", "I-PER"}), ts) == tags(ts, {"B-PER", "I-PER"}));
  CHECK(filter_invalid(tags(ts, {"I-LOC", "B-LOC", "I-LOC", "I-PER", "I-PER"}), ts) ==
        tags(ts, {"O", "B-LOC", "I-LOC", "O", "O"}));
}

TEST_CASE("filter properties on random sequences") {
  std::mt19937_64 rng(31);
  TagSet ts({"A", "B", "C", "D"});
  std::uniform_int_distribution<int> tag(0, static_cast<int>(ts.size()) - 1);
  for (int trial = 0; trial < 2000; ++trial) {
    TagSequence x(static_cast<std::size_t>(trial % 25));
    for (auto& t : x) t = tag(rng);
    const auto f = filter_invalid(x, ts);
    CHECK(is_valid_iob2(f, ts));
    CHECK(filter_invalid(f, ts) == f);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == TagSet::kOutside) CHECK(f[i] == TagSet::kOutside);
      if (f[i] != x[i]) CHECK(f[i] == TagSet::kOutside);
    }
    if (is_valid_iob2(x, ts)) CHECK(f == x);
  }
}

TEST_CASE("encode and decode are inverse on valid sequences") {
  std::mt19937_64 rng(77);
  TagSet ts({"A", "B", "C"});
  std::uniform_int_distribution<int> tag(0, static_cast<int>(ts.size()) - 1);
  for (int trial = 0; trial < 1000; ++trial) {
    TagSequence x(static_cast<std::size_t>(trial % 30));
    for (auto& t : x) t = tag(rng);
    x = filter_invalid(x, ts);
    CHECK(encode(decode(x, ts), x.size(), ts) == x);
  }
}
