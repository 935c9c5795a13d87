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
#include <vector>

namespace crfner {

// Window length S and stride D, both counted in content sub-tokens (framing
// tokens such as [CLS]/[SEP] are not part of the arithmetic).
struct SpanConfig {
  std::size_t max_len = 512;
  std::size_t stride = 128;

  // Throws std::invalid_argument unless 0 < stride <= max_len.
  void validate() const;
  // Upper bound on the number of spans covering one position: ceil(S / D).
  std::size_t max_overlap() const { return (max_len + stride - 1) / stride; }
};

// Half-open window [start, end) over a document's sub-tokens, plus the
// sub-range whose final predictions come from this span.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t context_start = 0;
  std::size_t context_end = 0;

  std::size_t size() const { return end - start; }
  bool operator==(const Span&) const = default;
};

std::vector<Span> split_spans(std::size_t doc_len, const SpanConfig& cfg);

// Token i goes to the span maximizing min(i - start, end - 1 - i); the
// earliest span wins ties.
std::vector<Span> assign_max_context(std::vector<Span> spans, std::size_t doc_len);

// Convenience: split_spans followed by assign_max_context.
inline std::vector<Span> make_spans(std::size_t doc_len, const SpanConfig& cfg) {
  return assign_max_context(split_spans(doc_len, cfg), doc_len);
}

// Stitches per-span tag sequences into one document sequence by taking each
// position from its max-context span. Throws std::invalid_argument on any
// length mismatch.
std::vector<int> merge_predictions(const std::vector<Span>& spans,
                                   const std::vector<std::vector<int>>& per_span_tags);

}  // namespace crfner
