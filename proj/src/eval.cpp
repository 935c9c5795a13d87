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

#include "crfner/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "crfner/error.hpp"

namespace crfner {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

Counts count_document(const EntitySet& gold, const EntitySet& pred) {
  Counts c{0, pred.size(), gold.size()};
  const std::set<Entity> g(gold.begin(), gold.end());
  for (const auto& e : pred) c.correct += g.count(e);
  return c;
}

std::vector<Counts> document_counts(const std::vector<EntitySet>& gold,
                                    const std::vector<EntitySet>& pred) {
  if (gold.size() != pred.size()) {
    throw DataError("gold has " + std::to_string(gold.size()) + " documents, prediction has " +
                    std::to_string(pred.size()));
  }
  std::vector<Counts> out;
  out.reserve(gold.size());
  for (std::size_t d = 0; d < gold.size(); ++d) out.push_back(count_document(gold[d], pred[d]));
  return out;
}

std::string column_name(std::size_t from_end) { return from_end == 1 ? "last" : "gold"; }

TagSet tag_set_of(const std::vector<ConllDocument>& docs, std::size_t columns_from_end) {
  std::vector<std::string> names;
  for (const auto& d : docs) {
    for (const auto& row : d.rows) {
      for (std::size_t k = 1; k <= columns_from_end; ++k) {
        if (row.size() < k) throw DataError("CoNLL row has too few columns");
        names.push_back(row[row.size() - k]);
      }
    }
  }
  return TagSet::from_tag_names(names);
}

TagSequence column_tags(const ConllDocument& doc, const TagSet& ts, std::size_t from_end) {
  TagSequence out;
  out.reserve(doc.rows.size());
  for (const auto& row : doc.rows) out.push_back(ts.tag_index(row[row.size() - from_end]));
  return out;
}

TagSequence checked_gold(const ConllDocument& doc, const TagSet& ts, std::size_t from_end,
                         std::size_t index) {
  auto tags = column_tags(doc, ts, from_end);
  if (!is_valid_iob2(tags, ts)) {
    throw DataError("document " + std::to_string(index) + ": " + column_name(from_end) +
                    " column is not valid IOB2");
  }
  return tags;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%6.2f", 100.0 * v);
  return buf;
}

std::mt19937_64 resample_stream(std::uint64_t seed, std::size_t r) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

double Counts::precision() const { return ratio(correct, predicted); }
double Counts::recall() const { return ratio(correct, gold); }
double Counts::f1() const {
  const double p = precision(), r = recall();
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

EvalResult evaluate(const std::vector<EntitySet>& gold, const std::vector<EntitySet>& pred) {
  document_counts(gold, pred);  // validates alignment
  EvalResult out;
  for (std::size_t d = 0; d < gold.size(); ++d) {
    for (const auto& e : gold[d]) ++out.per_class[e.class_name].gold;
    for (const auto& e : pred[d]) ++out.per_class[e.class_name].predicted;
    const std::set<Entity> g(gold[d].begin(), gold[d].end());
    for (const auto& e : pred[d]) {
      if (g.count(e)) ++out.per_class[e.class_name].correct;
    }
  }
  for (const auto& [name, c] : out.per_class) out.counts += c;
  out.precision = out.counts.precision();
  out.recall = out.counts.recall();
  out.f1 = out.counts.f1();
  return out;
}

double ConllEvaluation::accuracy() const { return ratio(correct_tags, tokens); }

ConllEvaluation evaluate_conll(const std::vector<ConllDocument>& docs) {
  const TagSet ts = tag_set_of(docs, 2);
  std::vector<EntitySet> gold, pred;
  ConllEvaluation out;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto g = checked_gold(docs[d], ts, 2, d);
    const auto p = filter_invalid(column_tags(docs[d], ts, 1), ts);
    out.tokens += g.size();
    for (std::size_t i = 0; i < g.size(); ++i) out.correct_tags += g[i] == p[i];
    gold.push_back(decode(g, ts));
    pred.push_back(decode(p, ts));
  }
  out.entities = evaluate(gold, pred);
  return out;
}

ConllEvaluation evaluate_conll(std::istream& in) { return evaluate_conll(read_conll(in, 3)); }

ConllEvaluation evaluate_conll_file(const std::string& path) {
  return evaluate_conll(read_conll_file(path, 3));
}

ConllEvaluation evaluate_conll_pair(const std::vector<ConllDocument>& gold,
                                    const std::vector<ConllDocument>& pred) {
  if (gold.size() != pred.size()) {
    throw DataError("gold has " + std::to_string(gold.size()) + " documents, prediction has " +
                    std::to_string(pred.size()));
  }
  std::vector<ConllDocument> merged(gold.size());
  for (std::size_t d = 0; d < gold.size(); ++d) {
    if (gold[d].rows.size() != pred[d].rows.size()) {
      throw DataError("document " + std::to_string(d) + ": " + std::to_string(gold[d].rows.size()) +
                      " gold rows vs " + std::to_string(pred[d].rows.size()) + " predicted");
    }
    for (std::size_t i = 0; i < gold[d].rows.size(); ++i) {
      const auto& g = gold[d].rows[i];
      const auto& p = pred[d].rows[i];
      if (g.size() < 2 || p.size() < 2) throw DataError("gold and prediction need a tag column");
      if (g.front() != p.front()) {
        throw DataError("document " + std::to_string(d) + " row " + std::to_string(i + 1) +
                        ": token '" + g.front() + "' vs '" + p.front() + "'");
      }
      merged[d].rows.push_back({g.front(), g.back(), p.back()});
    }
  }
  return evaluate_conll(merged);
}

std::string format_conlleval(const ConllEvaluation& eval, bool per_class) {
  const auto& e = eval.entities;
  std::ostringstream out;
  out << "processed " << eval.tokens << " tokens with " << e.counts.gold << " phrases; found: "
      << e.counts.predicted << " phrases; correct: " << e.counts.correct << ".\n";
  if (eval.tokens > 0) {
    out << "accuracy: " << pct(eval.accuracy()) << "%; precision: " << pct(e.precision)
        << "%; recall: " << pct(e.recall) << "%; FB1: " << pct(e.f1) << "\n";
  }
  if (per_class) {
    for (const auto& [name, c] : e.per_class) {
      char label[64];
      std::snprintf(label, sizeof label, "%17s", name.c_str());
      out << label << ": precision: " << pct(c.precision()) << "%; recall: " << pct(c.recall())
          << "%; FB1: " << pct(c.f1()) << "  " << c.predicted << "\n";
    }
  }
  return out.str();
}

std::vector<EntitySet> conll_entities(const std::vector<ConllDocument>& docs, bool filter) {
  const TagSet ts = tag_set_of(docs, 1);
  std::vector<EntitySet> out;
  out.reserve(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto tags = filter ? filter_invalid(column_tags(docs[d], ts, 1), ts)
                             : checked_gold(docs[d], ts, 1, d);
    out.push_back(decode(tags, ts));
  }
  return out;
}

std::vector<std::size_t> bootstrap_sample(std::uint64_t seed, std::size_t r, std::size_t n) {
  auto rng = resample_stream(seed, r);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = pick(rng);
  return out;
}

std::vector<double> bootstrap_deltas(const std::vector<EntitySet>& gold,
                                     const std::vector<EntitySet>& pred_a,
                                     const std::vector<EntitySet>& pred_b, std::size_t resamples,
                                     std::uint64_t seed, std::size_t threads) {
  const auto a = document_counts(gold, pred_a);
  const auto b = document_counts(gold, pred_b);
  if (gold.size() < 2) throw DataError("bootstrap needs at least 2 documents");
  std::vector<double> out(resamples);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < resamples; r = next++) {
      Counts ca, cb;
      for (auto d : bootstrap_sample(seed, r, gold.size())) {
        ca += a[d];
        cb += b[d];
      }
      out[r] = ca.f1() - cb.f1();
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(threads, resamples));
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  return out;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BootstrapReport bootstrap_compare(const std::vector<EntitySet>& gold,
                                  const std::vector<EntitySet>& pred_a,
                                  const std::vector<EntitySet>& pred_b, std::size_t resamples,
                                  std::uint64_t seed, std::size_t threads) {
  if (resamples < 1000) throw UsageError("bootstrap needs at least 1000 resamples");
  const auto deltas = bootstrap_deltas(gold, pred_a, pred_b, resamples, seed, threads);
  BootstrapReport out;
  out.f1_a = evaluate(gold, pred_a).f1;
  out.f1_b = evaluate(gold, pred_b).f1;
  out.f1_delta = out.f1_a - out.f1_b;
  out.ci_low = percentile(deltas, 0.025);
  out.ci_high = percentile(deltas, 0.975);
  out.resamples = resamples;
  out.seed = seed;
  out.documents = gold.size();
  return out;
}

std::string format_bootstrap(const BootstrapReport& r) {
  std::ostringstream out;
  out << "bootstrap: documents=" << r.documents << " resamples=" << r.resamples
      << " seed=" << r.seed << " unit=document interval=percentile\n"
      << "FB1(A): " << pct(r.f1_a) << "; FB1(B): " << pct(r.f1_b) << "; delta: " << pct(r.f1_delta)
      << "; 95% CI: [" << pct(r.ci_low) << ", " << pct(r.ci_high) << "]\n";
  return out.str();
}

}  // namespace crfner
