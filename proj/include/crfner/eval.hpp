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
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "crfner/conll.hpp"
#include "crfner/tagscheme.hpp"

namespace crfner {

using EntitySet = std::vector<Entity>;

struct Counts {
  std::size_t correct = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  Counts& operator+=(const Counts& o) {
    correct += o.correct;
    predicted += o.predicted;
    gold += o.gold;
    return *this;
  }
  // A zero denominator yields 0.
  double precision() const;
  double recall() const;
  double f1() const;
};

struct EvalResult {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  Counts counts;
  std::map<std::string, Counts> per_class;  // support = per_class[c].gold
};

// Exact (start, end, class) matching, micro-averaged over all documents.
// Throws DataError when the document counts differ.
EvalResult evaluate(const std::vector<EntitySet>& gold, const std::vector<EntitySet>& pred);

struct ConllEvaluation {
  EvalResult entities;
  std::size_t tokens = 0;
  std::size_t correct_tags = 0;

  double accuracy() const;
};

// Documents whose second-to-last column is gold and last column is the
// prediction. Gold must be valid IOB2; the prediction is passed through
// filter_invalid first.
ConllEvaluation evaluate_conll(const std::vector<ConllDocument>& docs);
ConllEvaluation evaluate_conll(std::istream& in);
ConllEvaluation evaluate_conll_file(const std::string& path);
// Separate gold and prediction files; tokens must agree row by row.
ConllEvaluation evaluate_conll_pair(const std::vector<ConllDocument>& gold,
                                    const std::vector<ConllDocument>& pred);

// conlleval-style report: the "processed" line, the overall line and, when
// per_class is set, one line per class.
std::string format_conlleval(const ConllEvaluation& eval, bool per_class = true);

struct BootstrapReport {
  double f1_a = 0;
  double f1_b = 0;
  double f1_delta = 0;  // f1_a - f1_b on the full set
  double ci_low = 0;
  double ci_high = 0;
  std::size_t resamples = 0;
  std::uint64_t seed = 0;
  std::size_t documents = 0;
};

// Document indices of resample r; depends only on (seed, r, n).
std::vector<std::size_t> bootstrap_sample(std::uint64_t seed, std::size_t r, std::size_t n);

// F1(A) - F1(B) on each resample, in resample order.
std::vector<double> bootstrap_deltas(const std::vector<EntitySet>& gold,
                                     const std::vector<EntitySet>& pred_a,
                                     const std::vector<EntitySet>& pred_b, std::size_t resamples,
                                     std::uint64_t seed, std::size_t threads = 1);

// Percentile interval (2.5, 97.5) over document-level resamples. Throws
// DataError for fewer than 2 documents or misaligned inputs, UsageError for
// fewer than 1000 resamples.
BootstrapReport bootstrap_compare(const std::vector<EntitySet>& gold,
                                  const std::vector<EntitySet>& pred_a,
                                  const std::vector<EntitySet>& pred_b, std::size_t resamples,
                                  std::uint64_t seed, std::size_t threads = 1);

// Linear interpolation between closest ranks; q in [0, 1].
double percentile(std::vector<double> values, double q);

// Entities from the last column of each document. With `filter` the tags go
// through filter_invalid; otherwise they must already be valid IOB2.
std::vector<EntitySet> conll_entities(const std::vector<ConllDocument>& docs, bool filter);

std::string format_bootstrap(const BootstrapReport& report);

}  // namespace crfner
