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

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "crfner/conll.hpp"
#include "crfner/tagscheme.hpp"
#include "crfner/vocab.hpp"
#include "crfner/windowing.hpp"

namespace crfner {

enum class HeadKind { kCrf, kSoftmax };
enum class OptimizerKind { kSgd, kAdamW };

std::string to_string(HeadKind head);
std::string to_string(OptimizerKind opt);
// Throw UsageError on unknown names.
HeadKind parse_head(const std::string& name);
OptimizerKind parse_optimizer(const std::string& name);

// Embedding lookup followed by a linear projection to tag space; stands in for
// the transformer encoder plus token classifier.
struct TrainableEncoder {
  Eigen::MatrixXd embeddings;  // V x H, row = sub-token id
  Eigen::MatrixXd projection;  // H x K
  Eigen::RowVectorXd bias;     // K
};

// Precomputed word-level scores keyed by document id, one n x K matrix per
// document (n = pre-token count).
struct ExternalEmissions {
  std::unordered_map<std::string, Eigen::MatrixXd> by_document;
};

using EmissionModel = std::variant<TrainableEncoder, ExternalEmissions>;

struct TaggerModel {
  std::shared_ptr<const Vocabulary> vocab;
  TagSet tags;
  SpanConfig spans;
  HeadKind head = HeadKind::kCrf;
  EmissionModel emissions;
  // (K+2) x (K+2); present iff head == kCrf.
  std::optional<Eigen::MatrixXd> transitions;

  bool is_trainable() const { return std::holds_alternative<TrainableEncoder>(emissions); }
  // Throws std::invalid_argument when component shapes disagree.
  void check_consistency() const;
};

struct TrainConfig {
  int epochs = 15;
  std::size_t batch_size = 16;
  double lr_encoder = 5e-5;
  double lr_head = 1e-3;
  double warmup_fraction = 0.1;
  double weight_decay = 0.01;
  double o_tag_bias_init = 6.0;
  double o_tag_loss_weight = 0.01;  // SOFTMAX head only
  HeadKind head = HeadKind::kCrf;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  std::size_t embedding_dim = 32;
  std::uint64_t seed = 13;

  // Throws UsageError on out-of-range values.
  void validate() const;
};

// Fresh model: N(0, 1) embeddings, N(0, 0.02) projection, zero bias except the
// O tag at cfg.o_tag_bias_init, zero transitions.
TaggerModel init_tagger(std::shared_ptr<const Vocabulary> vocab, TagSet tags, SpanConfig spans,
                        const TrainConfig& cfg);

// Words whose first sub-token lies inside the span, in order.
std::vector<std::size_t> span_words(const TokenizedDocument& doc, const Span& span);

// Word-level emission rows for the span: continuation sub-tokens produce no
// row. Throws DataError for a span with no word starts, or when an external
// source lacks the document.
Eigen::MatrixXd emissions_for_span(const TaggerModel& model, const TokenizedDocument& doc,
                                   const Span& span, const std::string& doc_id = {});

// Linear warmup from 0 to base_lr over the first warmup_fraction of steps,
// then linear decay to 0 at total_steps.
double lr_schedule(std::size_t step, std::size_t total_steps, double base_lr,
                   double warmup_fraction);

struct TrainingDocument {
  std::string id;
  TokenizedDocument doc;
  TagSequence gold;  // one tag per pre-token
};

// Tokens from the first column, gold tags from the last. Throws DataError on
// unknown tag names or invalid IOB2.
TrainingDocument training_document(const Vocabulary& vocab, const TagSet& tags,
                                   const ConllDocument& doc, std::string id);

struct TrainResult {
  TaggerModel model;
  std::vector<double> step_losses;
  std::vector<double> epoch_losses;
};

// Called after each epoch with the 1-based epoch number.
using EpochCallback = std::function<void(int epoch, const TaggerModel&)>;

// Every span of every document is one example. The CRF head maximizes the
// sequence log-likelihood; the SOFTMAX head minimizes O-weighted cross entropy
// (sum of weighted losses over the sum of weights). Embeddings use lr_encoder;
// projection, bias and transitions use lr_head. Deterministic for a fixed
// seed. Throws DataError naming the document on tag/word misalignment.
TrainResult train(TaggerModel model, const std::vector<TrainingDocument>& data,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

// Batch loss used by train(), exposed for tests: the mean CRF negative
// log-likelihood or weighted cross entropy over the given examples.
double batch_loss(const TaggerModel& model, const std::vector<TrainingDocument>& data,
                  double o_tag_loss_weight);

struct Prediction {
  TagSequence tags;  // filtered, one per pre-token
  std::vector<Entity> entities;
};

struct PredictOptions {
  // Adds iob2_transition_penalty to the transitions before Viterbi.
  bool constrain_transitions = false;
};

// Tokenized pipeline up to the merged per-word tags, before IOB2 filtering.
TagSequence predict_raw(const TaggerModel& model, const TokenizedDocument& doc,
                        const std::string& doc_id = {}, const PredictOptions& opts = {});

Prediction predict(const TaggerModel& model, const TokenizedDocument& doc,
                   const std::string& doc_id = {}, const PredictOptions& opts = {});
Prediction predict_text(const TaggerModel& model, std::string_view text,
                        const PredictOptions& opts = {});

// Predicts many documents on `threads` workers; output order and content do
// not depend on the thread count.
std::vector<Prediction> predict_all(const TaggerModel& model,
                                    const std::vector<TokenizedDocument>& docs,
                                    const std::vector<std::string>& doc_ids,
                                    std::size_t threads = 1, const PredictOptions& opts = {});

// (K+2) x (K+2) matrix with `penalty` on every transition IOB2 forbids:
// start -> I-x, O -> I-x, B-x/I-x -> I-y for y != x.
Eigen::MatrixXd iob2_transition_penalty(const TagSet& tags, double penalty = -1e4);

// Checkpoint container, see docs/formats.md. Numbers are written with 17
// significant digits so a save/load cycle is exact.
void save_checkpoint(std::ostream& out, const TaggerModel& model);
TaggerModel load_checkpoint(std::istream& in);
void save_checkpoint_file(const std::string& path, const TaggerModel& model);
TaggerModel load_checkpoint_file(const std::string& path);

// External emissions file: a header "#emissions<TAB>K<TAB>tag_1 ... tag_K"
// then one record per document "id<TAB>n<TAB>s_11 s_12 ... s_nK" (row-major,
// space separated).
struct ExternalEmissionsFile {
  std::vector<std::string> tag_names;
  ExternalEmissions emissions;
};
ExternalEmissionsFile read_external_emissions(std::istream& in);
// Reorders the file's columns into `tags` order. Throws DataError unless the
// file lists exactly the tags of the set.
ExternalEmissions align_external_emissions(const ExternalEmissionsFile& file, const TagSet& tags);
void write_external_emissions(std::ostream& out, const std::vector<std::string>& tag_names,
                              const std::vector<std::pair<std::string, Eigen::MatrixXd>>& docs);

}  // namespace crfner
