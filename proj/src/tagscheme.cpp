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

#include "crfner/tagscheme.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "crfner/error.hpp"

namespace crfner {

TagSet::TagSet(std::vector<std::string> classes) : classes_(std::move(classes)) {
  std::unordered_set<std::string> seen;
  for (const auto& c : classes_) {
    if (c.empty() || c.front() == '-' ||
        c.find_first_of(" \t\r\n") != std::string::npos) {
      throw DataError("tag set: invalid class name '" + c + "'");
    }
    if (!seen.insert(c).second) throw DataError("tag set: duplicate class '" + c + "'");
  }
}

TagSet TagSet::from_tag_names(const std::vector<std::string>& tags) {
  std::vector<std::string> classes;
  for (const auto& t : tags) {
    if (t == "O") continue;
    if (t.size() < 3 || (t[0] != 'B' && t[0] != 'I') || t[1] != '-') {
      throw DataError("not an IOB2 tag: '" + t + "'");
    }
    auto cls = t.substr(2);
    if (std::find(classes.begin(), classes.end(), cls) == classes.end()) classes.push_back(cls);
  }
  return TagSet(std::move(classes));
}

std::optional<std::size_t> TagSet::class_index(std::string_view name) const {
  auto it = std::find(classes_.begin(), classes_.end(), name);
  if (it == classes_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - classes_.begin());
}

std::string TagSet::tag_name(int tag) const {
  if (tag < 0 || static_cast<std::size_t>(tag) >= size()) {
    throw std::out_of_range("tag index " + std::to_string(tag) + " out of range");
  }
  if (tag == kOutside) return "O";
  return (is_begin(tag) ? "B-" : "I-") + classes_[class_of(tag)];
}

int TagSet::tag_index(std::string_view name) const {
  if (name == "O") return kOutside;
  if (name.size() >= 3 && name[1] == '-' && (name[0] == 'B' || name[0] == 'I')) {
    if (auto c = class_index(name.substr(2))) {
      return name[0] == 'B' ? begin_tag(*c) : inside_tag(*c);
    }
  }
  throw DataError("unknown tag '" + std::string(name) + "'");
}

std::vector<std::string> TagSet::tag_names() const {
  std::vector<std::string> out;
  for (std::size_t t = 0; t < size(); ++t) out.push_back(tag_name(static_cast<int>(t)));
  return out;
}

TagSequence encode(const std::vector<Entity>& entities, std::size_t length, const TagSet& ts) {
  TagSequence tags(length, TagSet::kOutside);
  std::vector<bool> used(length, false);
  for (const auto& e : entities) {
    if (e.start >= e.end || e.end > length) {
      throw std::invalid_argument("entity [" + std::to_string(e.start) + ", " +
                                  std::to_string(e.end) + ") out of range");
    }
    const auto cls = ts.class_index(e.class_name);
    if (!cls) throw DataError("entity class '" + e.class_name + "' not in tag set");
    for (std::size_t i = e.start; i < e.end; ++i) {
      if (used[i]) throw std::invalid_argument("overlapping entities at position " + std::to_string(i));
      used[i] = true;
      tags[i] = i == e.start ? ts.begin_tag(*cls) : ts.inside_tag(*cls);
    }
  }
  return tags;
}

bool is_valid_iob2(const TagSequence& tags, const TagSet& ts) {
  int prev = TagSet::kOutside;
  for (int t : tags) {
    if (t < 0 || static_cast<std::size_t>(t) >= ts.size()) return false;
    if (TagSet::is_inside(t) &&
        (prev == TagSet::kOutside || TagSet::class_of(prev) != TagSet::class_of(t))) {
      return false;
    }
    prev = t;
  }
  return true;
}

std::vector<Entity> decode(const TagSequence& tags, const TagSet& ts) {
  if (!is_valid_iob2(tags, ts)) throw std::invalid_argument("decode: tag sequence is not valid IOB2");
  std::vector<Entity> out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (TagSet::is_begin(tags[i])) {
      out.push_back({i, i + 1, ts.classes()[TagSet::class_of(tags[i])]});
    } else if (TagSet::is_inside(tags[i])) {
      out.back().end = i + 1;
    }
  }
  return out;
}

TagSequence filter_invalid(TagSequence tags, const TagSet& ts) {
  int prev = TagSet::kOutside;
  for (auto& t : tags) {
    if (t < 0 || static_cast<std::size_t>(t) >= ts.size()) {
      throw std::out_of_range("tag index " + std::to_string(t) + " out of range");
    }
    if (TagSet::is_inside(t) &&
        (prev == TagSet::kOutside || TagSet::class_of(prev) != TagSet::class_of(t))) {
      t = TagSet::kOutside;
    }
    prev = t;
  }
  return tags;
}

}  // namespace crfner
