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

#include "crfner/synthetic.hpp"

#include <random>
#include <set>

namespace crfner {

namespace {

constexpr const char* kConsonants = "bcdfgklmnprstvz";
constexpr const char* kVowels = "aeiou";
const std::vector<std::string> kSuffixes = {"s", "es", "inho"};
const std::vector<std::string> kClasses = {"PESSOA", "LOCAL", "ORGANIZACAO"};

constexpr std::size_t kOutsideStems = 60;
constexpr std::size_t kStemsPerRole = 10;

}  // namespace

SyntheticCorpus make_copy_task_corpus(const SyntheticOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> consonant(0, 14), vowel(0, 4);
  std::set<std::string> used;
  // Three-syllable stems: all six characters long, so no stem equals another
  // stem plus a suffix and greedy matching always recovers the stem.
  auto fresh_stem = [&] {
    while (true) {
      std::string s;
      for (int i = 0; i < 3; ++i) {
        s += kConsonants[consonant(rng)];
        s += kVowels[vowel(rng)];
      }
      if (used.insert(s).second) return s;
    }
  };

  std::vector<std::string> outside(kOutsideStems);
  for (auto& s : outside) s = fresh_stem();
  std::vector<std::vector<std::string>> begin(kClasses.size()), inside(kClasses.size());
  for (std::size_t c = 0; c < kClasses.size(); ++c) {
    begin[c].resize(kStemsPerRole);
    inside[c].resize(kStemsPerRole);
    for (auto& s : begin[c]) s = fresh_stem();
    for (auto& s : inside[c]) s = fresh_stem();
  }

  SyntheticCorpus corpus{{"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "."}, TagSet(kClasses), {}, {}};
  for (const auto& s : used) corpus.vocab_tokens.push_back(s);
  for (const auto& suf : kSuffixes) corpus.vocab_tokens.push_back("##" + suf);

  auto pick = [&](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  std::bernoulli_distribution suffixed(0.3), entity_here(0.25);
  std::uniform_int_distribution<int> length(5, 14), extra(0, 2);
  std::uniform_int_distribution<std::size_t> cls(0, kClasses.size() - 1);
  auto word = [&](const std::string& stem) { return suffixed(rng) ? stem + pick(kSuffixes) : stem; };

  std::vector<ConllDocument> docs;
  for (std::size_t s = 0; s < opts.sentences; ++s) {
    if (s % opts.sentences_per_document == 0) docs.emplace_back();
    auto& rows = docs.back().rows;
    const int len = length(rng);
    for (int i = 0; i < len;) {
      if (entity_here(rng)) {
        const auto c = cls(rng);
        rows.push_back({word(pick(begin[c])), "B-" + kClasses[c]});
        const int n_inside = extra(rng);
        for (int k = 0; k < n_inside; ++k) rows.push_back({word(pick(inside[c])), "I-" + kClasses[c]});
        i += 1 + n_inside;
      } else {
        rows.push_back({word(pick(outside)), "O"});
        ++i;
      }
    }
    rows.push_back({".", "O"});
  }

  const auto n_test = static_cast<std::size_t>(opts.test_fraction * static_cast<double>(docs.size()));
  corpus.train.assign(docs.begin(), docs.end() - static_cast<std::ptrdiff_t>(n_test));
  corpus.test.assign(docs.end() - static_cast<std::ptrdiff_t>(n_test), docs.end());
  return corpus;
}

}  // namespace crfner
