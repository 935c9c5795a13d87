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

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crfner {

// Tag indices into a TagSet. Raw model output may be ill-formed IOB2; use
// is_valid_iob2 / filter_invalid before decoding.
using TagSequence = std::vector<int>;

// IOB2 tag inventory: index 0 is "O", class c (0-based) owns B-c at 1 + 2c
// and I-c at 2 + 2c.
class TagSet {
 public:
  static constexpr int kOutside = 0;

  explicit TagSet(std::vector<std::string> classes);

  // Builds a TagSet from literal tag names; the classes are taken in order of
  // first appearance. Throws DataError on names that are not O/B-x/I-x.
  static TagSet from_tag_names(const std::vector<std::string>& tags);

  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t num_classes() const { return classes_.size(); }
  std::size_t size() const { return 2 * classes_.size() + 1; }

  int begin_tag(std::size_t cls) const { return static_cast<int>(1 + 2 * cls); }
  int inside_tag(std::size_t cls) const { return static_cast<int>(2 + 2 * cls); }
  static bool is_begin(int tag) { return tag > 0 && tag % 2 == 1; }
  static bool is_inside(int tag) { return tag > 0 && tag % 2 == 0; }
  // Class index of a B or I tag.
  static std::size_t class_of(int tag) { return static_cast<std::size_t>((tag - 1) / 2); }

  std::optional<std::size_t> class_index(std::string_view name) const;
  std::string tag_name(int tag) const;
  // Throws DataError for unknown names.
  int tag_index(std::string_view name) const;
  std::vector<std::string> tag_names() const;

  bool operator==(const TagSet&) const = default;

 private:
  std::vector<std::string> classes_;
};

// Word-level entity, half-open [start, end).
struct Entity {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string class_name;

  auto operator<=>(const Entity&) const = default;
};

// Throws std::invalid_argument on overlapping or out-of-range entities and
// DataError on classes missing from the tag set.
TagSequence encode(const std::vector<Entity>& entities, std::size_t length, const TagSet& ts);

// Throws std::invalid_argument when the sequence is not valid IOB2.
std::vector<Entity> decode(const TagSequence& tags, const TagSet& ts);

bool is_valid_iob2(const TagSequence& tags, const TagSet& ts);

// Left to right: an I-X whose (already rewritten) predecessor is neither B-X
// nor I-X becomes O.
TagSequence filter_invalid(TagSequence tags, const TagSet& ts);

}  // namespace crfner
