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

#include "crfner/tagger.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "crfner/crf.hpp"
#include "crfner/error.hpp"

namespace crfner {

namespace {

// Independent random streams derived from one seed.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

void check_external_shape(const TaggerModel& model, const std::string& doc_id,
                          std::size_t num_words) {
  const auto* ext = std::get_if<ExternalEmissions>(&model.emissions);
  if (!ext) return;
  auto it = ext->by_document.find(doc_id);
  if (it == ext->by_document.end()) {
    throw DataError("no external emissions for document '" + doc_id + "'");
  }
  if (it->second.rows() != static_cast<Eigen::Index>(num_words) ||
      it->second.cols() != static_cast<Eigen::Index>(model.tags.size())) {
    throw DataError("external emissions for document '" + doc_id + "' have shape " +
                    std::to_string(it->second.rows()) + "x" + std::to_string(it->second.cols()) +
                    ", expected " + std::to_string(num_words) + "x" +
                    std::to_string(model.tags.size()));
  }
}

struct Example {
  const TrainingDocument* source;
  std::vector<TokenId> ids;  // first sub-token id of each word in the span
  std::vector<std::size_t> words;
  TagSequence gold;
};

std::vector<Example> build_examples(const TaggerModel& model,
                                    const std::vector<TrainingDocument>& data) {
  std::vector<Example> out;
  for (const auto& d : data) {
    if (d.gold.size() != d.doc.pre_tokens.size()) {
      throw DataError("document '" + d.id + "': " + std::to_string(d.gold.size()) +
                      " gold tags for " + std::to_string(d.doc.pre_tokens.size()) + " words");
    }
    for (int t : d.gold) {
      if (t < 0 || static_cast<std::size_t>(t) >= model.tags.size()) {
        throw DataError("document '" + d.id + "': gold tag index out of range");
      }
    }
    check_external_shape(model, d.id, d.doc.pre_tokens.size());
    const auto first = d.doc.first_sub_token_positions();
    for (const auto& span : make_spans(d.doc.sub_tokens.size(), model.spans)) {
      Example ex{&d, {}, span_words(d.doc, span), {}};
      if (ex.words.empty()) continue;
      for (auto w : ex.words) {
        ex.ids.push_back(d.doc.sub_tokens[first[w]].id);
        ex.gold.push_back(d.gold[w]);
      }
      out.push_back(std::move(ex));
    }
  }
  return out;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& table, const std::vector<TokenId>& ids) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) throw DataError("sub-token id outside embedding table");
    out.row(static_cast<Eigen::Index>(i)) = table.row(ids[i]);
  }
  return out;
}

Eigen::MatrixXd example_emissions(const TaggerModel& model, const Example& ex) {
  if (const auto* enc = std::get_if<TrainableEncoder>(&model.emissions)) {
    Eigen::MatrixXd p = gather_rows(enc->embeddings, ex.ids) * enc->projection;
    p.rowwise() += enc->bias;
    return p;
  }
  const auto& ext = std::get<ExternalEmissions>(model.emissions);
  auto it = ext.by_document.find(ex.source->id);
  if (it == ext.by_document.end()) {
    throw DataError("no external emissions for document '" + ex.source->id + "'");
  }
  Eigen::MatrixXd p(static_cast<Eigen::Index>(ex.words.size()), it->second.cols());
  for (std::size_t i = 0; i < ex.words.size(); ++i) {
    p.row(static_cast<Eigen::Index>(i)) = it->second.row(static_cast<Eigen::Index>(ex.words[i]));
  }
  return p;
}

// Row-wise softmax.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out = logits;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double m = out.row(i).maxCoeff();
    out.row(i) = (out.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

struct Gradients {
  Eigen::MatrixXd embeddings;
  Eigen::MatrixXd projection;
  Eigen::RowVectorXd bias;
  Eigen::MatrixXd transitions;
};

Gradients zero_gradients(const TaggerModel& model) {
  Gradients g;
  if (const auto* enc = std::get_if<TrainableEncoder>(&model.emissions)) {
    g.embeddings = Eigen::MatrixXd::Zero(enc->embeddings.rows(), enc->embeddings.cols());
    g.projection = Eigen::MatrixXd::Zero(enc->projection.rows(), enc->projection.cols());
    g.bias = Eigen::RowVectorXd::Zero(enc->bias.size());
  }
  if (model.transitions) {
    g.transitions = Eigen::MatrixXd::Zero(model.transitions->rows(), model.transitions->cols());
  }
  return g;
}

// Adds the gradient of the batch loss for `batch` to `grads`; returns the loss.
double accumulate(const TaggerModel& model, const std::vector<const Example*>& batch,
                  double o_tag_loss_weight, Gradients* grads) {
  const auto* enc = std::get_if<TrainableEncoder>(&model.emissions);
  auto backprop = [&](const Example& ex, const Eigen::MatrixXd& d_emissions) {
    if (!enc || !grads) return;
    const Eigen::MatrixXd hidden = gather_rows(enc->embeddings, ex.ids);
    grads->projection.noalias() += hidden.transpose() * d_emissions;
    grads->bias += d_emissions.colwise().sum();
    const Eigen::MatrixXd d_hidden = d_emissions * enc->projection.transpose();
    for (std::size_t i = 0; i < ex.ids.size(); ++i) {
      grads->embeddings.row(ex.ids[i]) += d_hidden.row(static_cast<Eigen::Index>(i));
    }
  };

  double loss = 0;
  if (model.head == HeadKind::kCrf) {
    const double scale = 1.0 / static_cast<double>(batch.size());
    for (const auto* ex : batch) {
      const Eigen::MatrixXd p = example_emissions(model, *ex);
      const auto ll = crf::log_likelihood(*model.transitions, p, ex->gold);
      loss -= scale * ll.value;
      if (grads) {
        grads->transitions -= scale * ll.d_transitions;
        backprop(*ex, -scale * ll.d_emissions);
      }
    }
    return loss;
  }

  double total_weight = 0;
  for (const auto* ex : batch) {
    for (int t : ex->gold) total_weight += t == TagSet::kOutside ? o_tag_loss_weight : 1.0;
  }
  if (total_weight <= 0) return 0;
  for (const auto* ex : batch) {
    const Eigen::MatrixXd p = example_emissions(model, *ex);
    Eigen::MatrixXd d = softmax_rows(p);
    for (std::size_t i = 0; i < ex->gold.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const int y = ex->gold[i];
      const double w = (y == TagSet::kOutside ? o_tag_loss_weight : 1.0) / total_weight;
      loss -= w * std::log(std::max(d(row, y), std::numeric_limits<double>::min()));
      d(row, y) -= 1.0;
      d.row(row) *= w;
    }
    backprop(*ex, d);
  }
  return loss;
}

struct AdamState {
  Eigen::MatrixXd m, v;
};

class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg) : cfg_(cfg) {}

  void step(Eigen::Ref<Eigen::MatrixXd> param, const Eigen::MatrixXd& grad, double lr,
            bool decay, AdamState& state) {
    if (cfg_.optimizer == OptimizerKind::kSgd) {
      param -= lr * grad;
    } else {
      if (state.m.size() == 0) {
        state.m = Eigen::MatrixXd::Zero(grad.rows(), grad.cols());
        state.v = Eigen::MatrixXd::Zero(grad.rows(), grad.cols());
      }
      state.m = kBeta1 * state.m + (1 - kBeta1) * grad;
      state.v = kBeta2 * state.v + (1 - kBeta2) * grad.cwiseAbs2();
      const double c1 = 1 - std::pow(kBeta1, static_cast<double>(t_));
      const double c2 = 1 - std::pow(kBeta2, static_cast<double>(t_));
      param.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + kEps);
    }
    if (decay && cfg_.weight_decay > 0) param *= 1.0 - lr * cfg_.weight_decay;
  }

  void tick() { ++t_; }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-6;
  TrainConfig cfg_;
  std::size_t t_ = 0;
};

}  // namespace

std::string to_string(HeadKind head) { return head == HeadKind::kCrf ? "crf" : "softmax"; }
std::string to_string(OptimizerKind opt) { return opt == OptimizerKind::kSgd ? "sgd" : "adamw"; }

HeadKind parse_head(const std::string& name) {
  if (name == "crf") return HeadKind::kCrf;
  if (name == "softmax") return HeadKind::kSoftmax;
  throw UsageError("unknown head '" + name + "' (expected crf or softmax)");
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adamw" || name == "adam") return OptimizerKind::kAdamW;
  throw UsageError("unknown optimizer '" + name + "' (expected sgd or adamw)");
}

void TaggerModel::check_consistency() const {
  const auto k = static_cast<Eigen::Index>(tags.size());
  spans.validate();
  if (!vocab) throw std::invalid_argument("tagger model has no vocabulary");
  if (head == HeadKind::kCrf) {
    if (!transitions || transitions->rows() != k + 2 || transitions->cols() != k + 2) {
      throw std::invalid_argument("CRF head needs a (K+2)x(K+2) transition matrix");
    }
  } else if (transitions) {
    throw std::invalid_argument("SOFTMAX head carries no transition matrix");
  }
  if (const auto* enc = std::get_if<TrainableEncoder>(&emissions)) {
    if (enc->embeddings.rows() != static_cast<Eigen::Index>(vocab->size()) ||
        enc->projection.rows() != enc->embeddings.cols() || enc->projection.cols() != k ||
        enc->bias.size() != k) {
      throw std::invalid_argument("encoder shapes disagree with vocabulary or tag set");
    }
  }
}

void TrainConfig::validate() const {
  if (epochs < 0) throw UsageError("epochs must be non-negative");
  if (batch_size == 0) throw UsageError("batch_size must be positive");
  if (!(lr_encoder > 0) || !(lr_head > 0)) throw UsageError("learning rates must be positive");
  if (!(warmup_fraction >= 0 && warmup_fraction <= 1)) {
    throw UsageError("warmup_fraction must lie in [0, 1]");
  }
  if (weight_decay < 0) throw UsageError("weight_decay must be non-negative");
  if (o_tag_loss_weight < 0) throw UsageError("o_tag_loss_weight must be non-negative");
  if (embedding_dim == 0) throw UsageError("embedding_dim must be positive");
}

TaggerModel init_tagger(std::shared_ptr<const Vocabulary> vocab, TagSet tags, SpanConfig spans,
                        const TrainConfig& cfg) {
  cfg.validate();
  auto rng = make_stream(cfg.seed, kInitStream);
  std::normal_distribution<double> unit(0.0, 1.0);
  const auto v = static_cast<Eigen::Index>(vocab->size());
  const auto h = static_cast<Eigen::Index>(cfg.embedding_dim);
  const auto k = static_cast<Eigen::Index>(tags.size());
  TrainableEncoder enc{Eigen::MatrixXd(v, h), Eigen::MatrixXd(h, k), Eigen::RowVectorXd::Zero(k)};
  for (Eigen::Index i = 0; i < v; ++i)
    for (Eigen::Index j = 0; j < h; ++j) enc.embeddings(i, j) = unit(rng);
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < k; ++j) enc.projection(i, j) = 0.02 * unit(rng);
  enc.bias(TagSet::kOutside) = cfg.o_tag_bias_init;

  TaggerModel model{std::move(vocab), std::move(tags), spans, cfg.head, std::move(enc),
                    std::nullopt};
  if (cfg.head == HeadKind::kCrf) model.transitions = Eigen::MatrixXd::Zero(k + 2, k + 2);
  model.check_consistency();
  return model;
}

std::vector<std::size_t> span_words(const TokenizedDocument& doc, const Span& span) {
  std::vector<std::size_t> out;
  for (std::size_t i = span.start; i < span.end && i < doc.sub_tokens.size(); ++i) {
    if (doc.sub_tokens[i].is_first) out.push_back(doc.sub_tokens[i].word);
  }
  return out;
}

Eigen::MatrixXd emissions_for_span(const TaggerModel& model, const TokenizedDocument& doc,
                                   const Span& span, const std::string& doc_id) {
  TrainingDocument holder{doc_id, {}, {}};
  Example ex{&holder, {}, span_words(doc, span), {}};
  if (ex.words.empty()) {
    throw DataError("span [" + std::to_string(span.start) + ", " + std::to_string(span.end) +
                    ") contains no word starts");
  }
  check_external_shape(model, doc_id, doc.pre_tokens.size());
  const auto first = doc.first_sub_token_positions();
  for (auto w : ex.words) ex.ids.push_back(doc.sub_tokens[first[w]].id);
  return example_emissions(model, ex);
}

double lr_schedule(std::size_t step, std::size_t total_steps, double base_lr,
                   double warmup_fraction) {
  const double total = static_cast<double>(total_steps);
  const double s = static_cast<double>(step);
  const double warmup = warmup_fraction * total;
  if (s < warmup) return base_lr * s / warmup;
  if (total <= warmup) return base_lr;
  return base_lr * std::max(0.0, (total - s) / (total - warmup));
}

TrainingDocument training_document(const Vocabulary& vocab, const TagSet& tags,
                                   const ConllDocument& doc, std::string id) {
  TrainingDocument out{std::move(id), wordpiece_tokenize(vocab, pre_tokens_from_words(doc.tokens())),
                       {}};
  for (const auto& name : doc.last_column()) out.gold.push_back(tags.tag_index(name));
  if (!is_valid_iob2(out.gold, tags)) {
    throw DataError("document '" + out.id + "': gold tags are not valid IOB2");
  }
  return out;
}

double batch_loss(const TaggerModel& model, const std::vector<TrainingDocument>& data,
                  double o_tag_loss_weight) {
  const auto examples = build_examples(model, data);
  std::vector<const Example*> batch;
  for (const auto& e : examples) batch.push_back(&e);
  if (batch.empty()) return 0;
  return accumulate(model, batch, o_tag_loss_weight, nullptr);
}

TrainResult train(TaggerModel model, const std::vector<TrainingDocument>& data,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  model.check_consistency();
  if (data.empty()) throw DataError("training set is empty");
  if (!model.is_trainable() && model.head == HeadKind::kSoftmax) {
    throw UsageError("a SOFTMAX head over external emissions has no trainable parameters");
  }
  const auto examples = build_examples(model, data);
  if (examples.empty()) throw DataError("training set yields no spans");

  const std::size_t per_epoch = (examples.size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = per_epoch * static_cast<std::size_t>(cfg.epochs);
  auto rng = make_stream(cfg.seed, kShuffleStream);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  Optimizer opt(cfg);
  AdamState s_emb, s_proj, s_bias, s_trans;
  TrainResult result{std::move(model), {}, {}};
  auto& m = result.model;
  std::size_t step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    for (std::size_t b = 0; b < per_epoch; ++b) {
      std::vector<const Example*> batch;
      for (std::size_t i = b * cfg.batch_size; i < std::min((b + 1) * cfg.batch_size, order.size());
           ++i) {
        batch.push_back(&examples[order[i]]);
      }
      Gradients g = zero_gradients(m);
      const double loss = accumulate(m, batch, cfg.o_tag_loss_weight, &g);
      const double lr_enc = lr_schedule(step, total_steps, cfg.lr_encoder, cfg.warmup_fraction);
      const double lr_head = lr_schedule(step, total_steps, cfg.lr_head, cfg.warmup_fraction);
      opt.tick();
      if (auto* enc = std::get_if<TrainableEncoder>(&m.emissions)) {
        opt.step(enc->embeddings, g.embeddings, lr_enc, true, s_emb);
        opt.step(enc->projection, g.projection, lr_head, true, s_proj);
        Eigen::Map<Eigen::MatrixXd> bias(enc->bias.data(), 1, enc->bias.size());
        opt.step(bias, g.bias, lr_head, false, s_bias);
      }
      if (m.transitions) opt.step(*m.transitions, g.transitions, lr_head, true, s_trans);
      result.step_losses.push_back(loss);
      epoch_loss += loss;
      ++step;
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(per_epoch));
    if (on_epoch) on_epoch(epoch, m);
  }
  return result;
}

Eigen::MatrixXd iob2_transition_penalty(const TagSet& tags, double penalty) {
  const auto k = static_cast<Eigen::Index>(tags.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k + 2, k + 2);
  for (Eigen::Index to = 0; to < k; ++to) {
    if (!TagSet::is_inside(static_cast<int>(to))) continue;
    out(crf::start_state(k), to) = penalty;
    for (Eigen::Index from = 0; from < k; ++from) {
      const int f = static_cast<int>(from);
      if (f == TagSet::kOutside || TagSet::class_of(f) != TagSet::class_of(static_cast<int>(to))) {
        out(from, to) = penalty;
      }
    }
  }
  return out;
}

TagSequence predict_raw(const TaggerModel& model, const TokenizedDocument& doc,
                        const std::string& doc_id, const PredictOptions& opts) {
  model.check_consistency();
  const auto spans = make_spans(doc.sub_tokens.size(), model.spans);
  std::optional<Eigen::MatrixXd> transitions = model.transitions;
  if (transitions && opts.constrain_transitions) *transitions += iob2_transition_penalty(model.tags);

  std::vector<std::vector<int>> per_span;
  per_span.reserve(spans.size());
  for (const auto& span : spans) {
    std::vector<int> sub_tags(span.size(), TagSet::kOutside);
    const auto words = span_words(doc, span);
    if (!words.empty()) {
      const Eigen::MatrixXd p = emissions_for_span(model, doc, span, doc_id);
      const auto path = transitions ? crf::viterbi_decode(*transitions, p).path
                                    : crf::argmax_decode(p);
      // Continuation sub-tokens inherit their word's tag when the word starts
      // inside the span; only first sub-token positions are read back.
      std::size_t w = 0;
      for (std::size_t i = span.start; i < span.end; ++i) {
        const auto& st = doc.sub_tokens[i];
        if (st.is_first) {
          sub_tags[i - span.start] = path[w++];
        } else if (i > span.start) {
          sub_tags[i - span.start] = sub_tags[i - span.start - 1];
        }
      }
    }
    per_span.push_back(std::move(sub_tags));
  }
  const auto merged = merge_predictions(spans, per_span);
  TagSequence out;
  out.reserve(doc.pre_tokens.size());
  for (auto pos : doc.first_sub_token_positions()) out.push_back(merged[pos]);
  return out;
}

Prediction predict(const TaggerModel& model, const TokenizedDocument& doc,
                   const std::string& doc_id, const PredictOptions& opts) {
  Prediction out;
  if (doc.pre_tokens.empty()) return out;
  out.tags = filter_invalid(predict_raw(model, doc, doc_id, opts), model.tags);
  out.entities = decode(out.tags, model.tags);
  return out;
}

Prediction predict_text(const TaggerModel& model, std::string_view text,
                        const PredictOptions& opts) {
  return predict(model, tokenize(*model.vocab, text), {}, opts);
}

std::vector<Prediction> predict_all(const TaggerModel& model,
                                    const std::vector<TokenizedDocument>& docs,
                                    const std::vector<std::string>& doc_ids, std::size_t threads,
                                    const PredictOptions& opts) {
  if (doc_ids.size() != docs.size()) {
    throw std::invalid_argument("predict_all: one id per document required");
  }
  std::vector<Prediction> out(docs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < docs.size(); i = next++) {
      try {
        out[i] = predict(model, docs[i], doc_ids[i], opts);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(threads, docs.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace crfner
