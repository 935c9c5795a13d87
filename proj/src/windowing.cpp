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

#include "crfner/windowing.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace crfner {

void SpanConfig::validate() const {
  if (stride == 0 || max_len == 0 || stride > max_len) {
    throw std::invalid_argument("span config requires 0 < stride <= max_len (got max_len=" +
                                std::to_string(max_len) + ", stride=" + std::to_string(stride) + ")");
  }
}

std::vector<Span> split_spans(std::size_t doc_len, const SpanConfig& cfg) {
  cfg.validate();
  std::vector<Span> spans;
  for (std::size_t start = 0; start < doc_len; start += cfg.stride) {
    const std::size_t end = std::min(start + cfg.max_len, doc_len);
    spans.push_back({start, end, start, start});
    if (end == doc_len) break;
  }
  return spans;
}

std::vector<Span> assign_max_context(std::vector<Span> spans, std::size_t doc_len) {
  if (doc_len == 0) return spans;
  if (spans.empty() || spans.front().start != 0 || spans.back().end != doc_len) {
    throw std::invalid_argument("assign_max_context: spans do not cover the document");
  }
  std::vector<std::size_t> owner(doc_len);
  std::size_t first = 0;  // earliest span that may still cover i
  for (std::size_t i = 0; i < doc_len; ++i) {
    while (spans[first].end <= i) ++first;
    std::size_t best = first;
    std::size_t best_score = 0;
    bool found = false;
    for (std::size_t k = first; k < spans.size() && spans[k].start <= i; ++k) {
      if (spans[k].end <= i) continue;
      const std::size_t score = std::min(i - spans[k].start, spans[k].end - 1 - i);
      if (!found || score > best_score) {
        best = k;
        best_score = score;
        found = true;
      }
    }
    if (!found) throw std::invalid_argument("assign_max_context: position not covered");
    owner[i] = best;
  }
  for (auto& s : spans) s.context_start = s.context_end = s.start;
  std::size_t prev_owner = 0;
  for (std::size_t i = 0; i < doc_len; ++i) {
    const std::size_t k = owner[i];
    if (k < prev_owner) throw std::logic_error("assign_max_context: non-monotone assignment");
    if (spans[k].context_end == spans[k].context_start) spans[k].context_start = i;
    spans[k].context_end = i + 1;
    prev_owner = k;
  }
  // Spans that own nothing get an empty range at the boundary they sit on.
  std::size_t cursor = 0;
  for (auto& s : spans) {
    if (s.context_start == s.context_end) {
      s.context_start = s.context_end = std::clamp(cursor, s.start, s.end);
    } else {
      cursor = s.context_end;
    }
  }
  return spans;
}

std::vector<int> merge_predictions(const std::vector<Span>& spans,
                                   const std::vector<std::vector<int>>& per_span_tags) {
  if (spans.size() != per_span_tags.size()) {
    throw std::invalid_argument("merge_predictions: " + std::to_string(per_span_tags.size()) +
                                " tag sequences for " + std::to_string(spans.size()) + " spans");
  }
  const std::size_t doc_len = spans.empty() ? 0 : spans.back().end;
  std::vector<int> merged(doc_len, 0);
  std::vector<bool> filled(doc_len, false);
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const auto& s = spans[k];
    if (per_span_tags[k].size() != s.size()) {
      throw std::invalid_argument("merge_predictions: span " + std::to_string(k) + " has length " +
                                  std::to_string(s.size()) + " but " +
                                  std::to_string(per_span_tags[k].size()) + " tags");
    }
    for (std::size_t i = s.context_start; i < s.context_end; ++i) {
      merged[i] = per_span_tags[k][i - s.start];
      filled[i] = true;
    }
  }
  if (std::find(filled.begin(), filled.end(), false) != filled.end()) {
    throw std::invalid_argument("merge_predictions: max-context ranges leave positions unset");
  }
  return merged;
}

}  // namespace crfner
