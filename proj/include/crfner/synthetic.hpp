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

#include <cstdint>
#include <string>
#include <vector>

#include "crfner/conll.hpp"
#include "crfner/tagscheme.hpp"

namespace crfner {

// Copy-task corpus for smoke tests: every word stem carries a fixed tag, so
// the gold labeling is a function of token identity. Entity phrases are a
// B-stem followed by up to two I-stems of the same class; some words get a
// suffix that WordPiece splits off as a "##" piece.
struct SyntheticCorpus {
  std::vector<std::string> vocab_tokens;  // a valid WordPiece vocabulary
  TagSet tags;
  std::vector<ConllDocument> train;  // token<TAB>gold
  std::vector<ConllDocument> test;
};

struct SyntheticOptions {
  std::size_t sentences = 500;
  std::size_t sentences_per_document = 5;
  double test_fraction = 0.2;
  std::uint64_t seed = 13;
};

SyntheticCorpus make_copy_task_corpus(const SyntheticOptions& opts);

}  // namespace crfner
