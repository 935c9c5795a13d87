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

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "crfner/crf.hpp"
#include "crfner/crf_oracle.hpp"
#include "crfner/error.hpp"
#include "crfner/tagger.hpp"
#include "doctest.h"

using namespace crfner;

namespace {

std::shared_ptr<const Vocabulary> small_vocab() {
  return std::make_shared<const Vocabulary>(std::vector<std::string>{
      "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "casa", "##mente", "ana", "rio", "de", "lisboa",
      "silva", ".", "##s"});
}

TrainConfig small_config(HeadKind head) {
  TrainConfig cfg;
  cfg.head = head;
  cfg.embedding_dim = 6;
  cfg.seed = 3;
  return cfg;
}

ConllDocument conll(std::initializer_list<std::pair<const char*, const char*>> rows) {
  ConllDocument d;
  for (auto [w, t] : rows) d.rows.push_back({w, t});
  return d;
}

std::vector<TrainingDocument> tiny_corpus(const Vocabulary& v, const TagSet& ts) {
  return {
      training_document(v, ts, conll({{"ana", "B-PESSOA"}, {"silva", "I-PESSOA"}, {"de", "O"},
                                      {"lisboa", "B-LOCAL"}, {".", "O"}}),
                        "0"),
      training_document(v, ts, conll({{"casamente", "O"}, {"rio", "B-LOCAL"}, {"anas", "B-PESSOA"}}),
                        "1"),
      training_document(v, ts, conll({{"lisboa", "B-LOCAL"}, {"de", "O"}, {"casas", "O"}}), "2"),
  };
}

}  // namespace

TEST_CASE("training defaults") {
  const TrainConfig cfg;
  CHECK(cfg.epochs == 15);
  CHECK(cfg.batch_size == 16);
  CHECK(cfg.lr_encoder == 5e-5);
  CHECK(cfg.lr_head == 1e-3);
  CHECK(cfg.warmup_fraction == 0.1);
  CHECK(cfg.weight_decay == 0.01);
  CHECK(cfg.o_tag_bias_init == 6.0);
  CHECK(cfg.o_tag_loss_weight == 0.01);
  CHECK(cfg.head == HeadKind::kCrf);
  CHECK_THROWS_AS(parse_head("lstm"), UsageError);
  CHECK(parse_optimizer("adamw") == OptimizerKind::kAdamW);
}

TEST_CASE("lr_schedule warmup then linear decay") {
  CHECK(lr_schedule(5, 100, 1.0, 0.1) == doctest::Approx(0.5));
  CHECK(lr_schedule(10, 100, 1.0, 0.1) == doctest::Approx(1.0));
  CHECK(lr_schedule(55, 100, 1.0, 0.1) == doctest::Approx(0.5));
  CHECK(lr_schedule(0, 100, 1.0, 0.1) == 0.0);
  CHECK(lr_schedule(100, 100, 1.0, 0.1) == 0.0);
  CHECK(lr_schedule(0, 10, 2.0, 0.0) == doctest::Approx(2.0));
}

TEST_CASE("init_tagger biases O and is seed-deterministic") {
  const auto v = small_vocab();
  const TagSet ts({"PESSOA", "LOCAL"});
  const auto m = init_tagger(v, ts, {8, 4}, small_config(HeadKind::kCrf));
  const auto& enc = std::get<TrainableEncoder>(m.emissions);
  CHECK(enc.bias(TagSet::kOutside) == 6.0);
  CHECK(enc.bias.tail(4).isZero());
  CHECK(m.transitions->isZero());
  CHECK(m.transitions->rows() == 7);
  const auto again = init_tagger(v, ts, {8, 4}, small_config(HeadKind::kCrf));
  CHECK(std::get<TrainableEncoder>(again.emissions).embeddings == enc.embeddings);
  CHECK_FALSE(init_tagger(v, ts, {8, 4}, small_config(HeadKind::kSoftmax)).transitions);
}

TEST_CASE("emissions_for_span produces one row per word start") {
  const auto v = small_vocab();
  const TagSet ts({"PESSOA", "LOCAL"});
  const auto m = init_tagger(v, ts, {4, 2}, small_config(HeadKind::kCrf));
  const auto& enc = std::get<TrainableEncoder>(m.emissions);
  const auto doc = tokenize(*v, "casamente ana casas rio");  // 6 sub-tokens, 4 words
  REQUIRE(doc.sub_tokens.size() == 6);
  const auto spans = make_spans(doc.sub_tokens.size(), m.spans);
  REQUIRE(spans.size() == 2);
  const auto p0 = emissions_for_span(m, doc, spans[0]);  // casa ##mente ana casa
  CHECK(p0.rows() == 3);
  const auto p1 = emissions_for_span(m, doc, spans[1]);  // ana casa ##s rio
  CHECK(p1.rows() == 3);
  for (int j = 0; j < 5; ++j) {
    double ref = enc.bias(j);
    for (int h = 0; h < 6; ++h) ref += enc.embeddings(v->find("rio").value(), h) * enc.projection(h, j);
    CHECK(p1(2, j) == doctest::Approx(ref).epsilon(1e-12));
  }
  CHECK_THROWS_AS(emissions_for_span(m, doc, Span{1, 2}), DataError);
}

TEST_CASE("CRF batch loss equals brute-force mean negative log-likelihood") {
  const auto v = small_vocab();
  const TagSet ts({"PESSOA", "LOCAL"});
  const auto m = init_tagger(v, ts, {64, 16}, small_config(HeadKind::kCrf));
  auto data = tiny_corpus(*v, ts);
  auto model = m;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 1);
  for (Eigen::Index i = 0; i < model.transitions->size(); ++i) model.transitions->data()[i] = n(rng);

  double ref = 0;
  for (const auto& d : data) {
    const auto p = emissions_for_span(model, d.doc, make_spans(d.doc.sub_tokens.size(), model.spans)[0]);
    const auto oracle = crf::brute_force_oracle(*model.transitions, p);
    double gold = 0;
    const auto k = ts.size();
    int prev = static_cast<int>(k);
    for (std::size_t i = 0; i < d.gold.size(); ++i) {
      gold += (*model.transitions)(prev, d.gold[i]) + p(static_cast<Eigen::Index>(i), d.gold[i]);
      prev = d.gold[i];
    }
    gold += (*model.transitions)(prev, static_cast<Eigen::Index>(k + 1));
    ref += oracle.log_partition - gold;
  }
  CHECK(batch_loss(model, data, 0.01) == doctest::Approx(ref / 3).epsilon(1e-12));
}

TEST_CASE("softmax loss with unit O weight is plain cross entropy") {
  const auto v = small_vocab();
  const TagSet ts({"PESSOA", "LOCAL"});
  const auto m = init_tagger(v, ts, {64, 16}, small_config(HeadKind::kSoftmax));
  const auto data = tiny_corpus(*v, ts);
  double sum = 0;
  std::size_t count = 0;
  for (const auto& d : data) {
    const auto p = emissions_for_span(m, d.doc, make_spans(d.doc.sub_tokens.size(), m.spans)[0]);
    for (std::size_t i = 0; i < d.gold.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      sum += std::log(p.row(r).array().exp().sum()) - p(r, d.gold[i]);
      ++count;
    }
  }
  CHECK(batch_loss(m, data, 1.0) == doctest::Approx(sum / static_cast<double>(count)).epsilon(1e-12));
  // With weight 0 only entity tokens count.
  CHECK(batch_loss(m, data, 0.0) != doctest::Approx(batch_loss(m, data, 1.0)));
}

TEST_CASE("one SGD step moves parameters by -lr times the finite-difference gradient") {
  const auto v = small_vocab();
  const TagSet ts({"PESSOA", "LOCAL"});
  for (auto head : {HeadKind::kCrf, HeadKind::kSoftmax}) {
    auto cfg = small_config(head);
    cfg.epochs = 1;
    cfg.batch_size = 100;
    cfg.warmup_fraction = 0;
    cfg.weight_decay = 0;
    cfg.lr_encoder = 1e-3;
    cfg.lr_head = 1e-3;
    cfg.o_tag_loss_weight = 0.3;
    const auto m = init_tagger(v, ts, {64, 16}, cfg);
    const auto data = tiny_corpus(*v, ts);
    const auto trained = train(m, data, cfg).model;
    const auto& before = std::get<TrainableEncoder>(m.emissions);
    const auto& after = std::get<TrainableEncoder>(trained.emissions);
    const double h = 1e-6;
    auto fd = [&](auto mutate) {
      auto plus = m, minus = m;
      mutate(plus, h);
      mutate(minus, -h);
      return (batch_loss(plus, data, cfg.o_tag_loss_weight) -
              batch_loss(minus, data, cfg.o_tag_loss_weight)) / (2 * h);
    };
    for (int j = 0; j < 5; ++j) {
      const double g = fd([&](TaggerModel& x, double e) {
        std::get<TrainableEncoder>(x.emissions).projection(2, j) += e;
      });
      CHECK((before.projection(2, j) - after.projection(2, j)) / 1e-3 ==
            doctest::Approx(g).epsilon(1e-5));
      const double gb = fd([&](TaggerModel& x, double e) {
        std::get<TrainableEncoder>(x.emissions).bias(j) += e;
      });
      CHECK((before.bias(j) - after.bias(j)) / 1e-3 == doctest::Approx(gb).epsilon(1e-5));
    }
    const auto lisboa = v->find("lisboa").value();
    const double ge = fd([&](TaggerModel& x, double e) {
      std::get<TrainableEncoder>(x.emissions).embeddings(lisboa, 1) += e;
    });
    CHECK((before.embeddings(lisboa, 1) - after.embeddings(lisboa, 1)) / 1e-3 ==
          doctest::Approx(ge).epsilon(1e-5));
    if (head == HeadKind::kCrf) {
      const double gt = fd([&](TaggerModel& x, double e) { (*x.transitions)(0, 3) += e; });
      CHECK(((*m.transitions)(0, 3) - (*trained.transitions)(0, 3)) / 1e-3 ==
            doctest::Approx(gt).epsilon(1e-5));
    }
  }
}

TEST_CASE("memorizes a tiny corpus") {
  const auto v = small_vocab();
  const TagSet ts({"PESSOA", "LOCAL"});
  for (auto head : {HeadKind::kCrf, HeadKind::kSoftmax}) {
    auto cfg = small_config(head);
    cfg.epochs = 200;
    cfg.batch_size = 2;
    cfg.optimizer = OptimizerKind::kAdamW;
    cfg.lr_encoder = 0.05;
    cfg.lr_head = 0.05;
    const auto data = tiny_corpus(*v, ts);
    const auto result = train(init_tagger(v, ts, {64, 16}, cfg), data, cfg);
    CHECK(result.epoch_losses.back() < 0.05 * result.epoch_losses.front());
    for (const auto& d : data) CHECK(predict(result.model, d.doc, d.id).tags == d.gold);
    if (head == HeadKind::kCrf) {
      const auto& d = data[0];
      const auto p = emissions_for_span(result.model, d.doc, make_spans(d.doc.sub_tokens.size(), result.model.spans)[0]);
      const double gold = crf::path_score(*result.model.transitions, p, d.gold);
      CHECK(std::exp(gold - crf::log_partition(*result.model.transitions, p)) > 0.99);
    }
  }
}

TEST_CASE("training is deterministic for a fixed seed and rejects misaligned data") {
  const auto v = small_vocab();
  const TagSet ts({"PESSOA", "LOCAL"});
  auto cfg = small_config(HeadKind::kCrf);
  cfg.epochs = 3;
  cfg.batch_size = 2;
  const auto data = tiny_corpus(*v, ts);
  const auto a = train(init_tagger(v, ts, {4, 2}, cfg), data, cfg);
  const auto b = train(init_tagger(v, ts, {4, 2}, cfg), data, cfg);
  CHECK(a.step_losses == b.step_losses);
  CHECK(*a.model.transitions == *b.model.transitions);
  CHECK(a.step_losses.size() == 3 * ((a.step_losses.size() / 3)));

  auto bad = data;
  bad[1].gold.pop_back();
  CHECK_THROWS_WITH_AS(train(init_tagger(v, ts, {4, 2}, cfg), bad, cfg), doctest::Contains("'1'"),
                       DataError);
  CHECK_THROWS_AS(training_document(*v, ts, conll({{"ana", "I-PESSOA"}}), "x"), DataError);
  CHECK_THROWS_AS(training_document(*v, ts, conll({{"ana", "B-OBRA"}}), "x"), DataError);
}

TEST_CASE("short documents decode exactly as the no-windowing pipeline") {
  const auto v = small_vocab();
  const TagSet ts({"PESSOA", "LOCAL"});
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0, 2);
  const std::vector<std::string> words = {"casa", "casamente", "ana", "rio", "de", "lisboa", "."};
  for (auto head : {HeadKind::kCrf, HeadKind::kSoftmax}) {
    auto m = init_tagger(v, ts, {32, 8}, small_config(head));
    auto& enc = std::get<TrainableEncoder>(m.emissions);
    enc.projection = enc.projection.unaryExpr([&](double) { return n(rng); });
    enc.bias.setZero();
    if (m.transitions) *m.transitions = m.transitions->unaryExpr([&](double) { return n(rng); });
    for (int trial = 0; trial < 100; ++trial) {
      std::string text;
      for (int i = 0; i < 1 + trial % 12; ++i) text += words[rng() % words.size()] + " ";
      const auto doc = tokenize(*v, text);
      REQUIRE(doc.sub_tokens.size() <= 32);
      const auto p = emissions_for_span(m, doc, Span{0, doc.sub_tokens.size()});
      const auto direct = m.transitions ? crf::viterbi_decode(*m.transitions, p).path : crf::argmax_decode(p);
      CHECK(predict_raw(m, doc) == direct);
      CHECK(predict(m, doc).tags == filter_invalid(direct, ts));
    }
  }
  const auto m = init_tagger(v, ts, {32, 8}, small_config(HeadKind::kCrf));
  CHECK(predict_text(m, "").tags.empty());
  CHECK(predict_text(m, " \n").entities.empty());
}

TEST_CASE("constrained transitions make filtering the identity") {
  const auto v = small_vocab();
  const TagSet ts({"PESSOA", "LOCAL", "TEMPO"});
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0, 3);
  // Single-span documents: merging spans can still join an O to an I-x.
  auto m = init_tagger(v, ts, {64, 16}, small_config(HeadKind::kCrf));
  auto& enc = std::get<TrainableEncoder>(m.emissions);
  enc.projection = enc.projection.unaryExpr([&](double) { return n(rng); });
  *m.transitions = m.transitions->unaryExpr([&](double) { return n(rng); });
  const std::vector<std::string> words = {"casa", "casamente", "ana", "rio", "de", "lisboa", "silvas"};
  int unconstrained_invalid = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    for (int i = 0; i < 1 + trial % 20; ++i) text += words[rng() % words.size()] + " ";
    const auto doc = tokenize(*v, text);
    const auto raw = predict_raw(m, doc, {}, {.constrain_transitions = true});
    CHECK(filter_invalid(raw, ts) == raw);
    unconstrained_invalid += !is_valid_iob2(predict_raw(m, doc), ts);
  }
  CHECK(unconstrained_invalid > 0);
}

TEST_CASE("predict_all is independent of the thread count") {
  const auto v = small_vocab();
  const TagSet ts({"PESSOA", "LOCAL"});
  std::mt19937_64 rng(2);
  auto m = init_tagger(v, ts, {5, 2}, small_config(HeadKind::kCrf));
  std::normal_distribution<double> n(0, 2);
  *m.transitions = m.transitions->unaryExpr([&](double) { return n(rng); });
  std::get<TrainableEncoder>(m.emissions).projection *= 100;
  const std::vector<std::string> words = {"casa", "casamente", "ana", "rio", "de", "lisboa"};
  std::vector<TokenizedDocument> docs;
  std::vector<std::string> ids;
  for (int d = 0; d < 40; ++d) {
    std::string text;
    for (int i = 0; i < d % 17; ++i) text += words[rng() % words.size()] + " ";
    docs.push_back(tokenize(*v, text));
    ids.push_back(std::to_string(d));
  }
  const auto one = predict_all(m, docs, ids, 1);
  for (std::size_t t : {2u, 4u, 16u}) {
    const auto many = predict_all(m, docs, ids, t);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      CHECK(many[i].tags == one[i].tags);
      CHECK(many[i].entities == one[i].entities);
    }
  }
}

TEST_CASE("checkpoint round trip is exact") {
  const auto v = small_vocab();
  const TagSet ts({"PESSOA", "LOCAL"});
  for (auto head : {HeadKind::kCrf, HeadKind::kSoftmax}) {
    auto cfg = small_config(head);
    cfg.epochs = 2;
    const auto m = train(init_tagger(v, ts, {8, 4}, cfg), tiny_corpus(*v, ts), cfg).model;
    std::stringstream ss;
    save_checkpoint(ss, m);
    const auto text = ss.str();
    const auto loaded = load_checkpoint(ss);
    CHECK(loaded.head == m.head);
    CHECK(loaded.tags.classes() == m.tags.classes());
    CHECK(loaded.spans.max_len == 8);
    CHECK(loaded.spans.stride == 4);
    CHECK(loaded.vocab->tokens() == v->tokens());
    CHECK(std::get<TrainableEncoder>(loaded.emissions).embeddings ==
          std::get<TrainableEncoder>(m.emissions).embeddings);
    CHECK(std::get<TrainableEncoder>(loaded.emissions).bias == std::get<TrainableEncoder>(m.emissions).bias);
    CHECK(loaded.transitions.has_value() == m.transitions.has_value());
    if (m.transitions) CHECK(*loaded.transitions == *m.transitions);
    std::stringstream again;
    save_checkpoint(again, loaded);
    CHECK(again.str() == text);

    std::stringstream truncated(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(load_checkpoint(truncated), DataError);
  }
  std::stringstream junk("not a checkpoint\n");
  CHECK_THROWS_AS(load_checkpoint(junk), DataError);
}

TEST_CASE("external emissions: fixture file, column alignment, transitions-only training") {
  const auto v = small_vocab();
  const TagSet ts({"PESSOA", "LOCAL"});
  std::ifstream in(CRFNER_FIXTURE_DIR "/emissions_small.tsv");
  REQUIRE(in);
  const auto file = read_external_emissions(in);
  CHECK(file.tag_names == std::vector<std::string>{"O", "B-LOCAL", "I-LOCAL", "B-PESSOA", "I-PESSOA"});
  const auto ext = align_external_emissions(file, ts);
  REQUIRE(ext.by_document.count("0"));
  // Column B-LOCAL in the file is column 3 in the tag set.
  CHECK(ext.by_document.at("0")(3, 3) == 4.0);
  CHECK(ext.by_document.at("0")(0, 1) == 5.0);

  const auto data = tiny_corpus(*v, ts);
  TaggerModel m{v, ts, {64, 16}, HeadKind::kCrf, ext, Eigen::MatrixXd::Zero(7, 7)};
  for (const auto& d : data) CHECK(predict(m, d.doc, d.id).tags == d.gold);

  auto cfg = small_config(HeadKind::kCrf);
  cfg.epochs = 5;
  cfg.lr_head = 0.1;
  cfg.warmup_fraction = 0;
  const auto trained = train(m, data, cfg).model;
  CHECK_FALSE(trained.transitions->isZero());
  CHECK(std::get<ExternalEmissions>(trained.emissions).by_document.at("0") == ext.by_document.at("0"));
  CHECK(batch_loss(trained, data, 0) < batch_loss(m, data, 0));

  CHECK_THROWS_AS(predict(m, data[0].doc, "missing"), DataError);
  auto short_ext = ext;
  short_ext.by_document["0"].conservativeResize(2, 5);
  m.emissions = short_ext;
  CHECK_THROWS_AS(predict(m, data[0].doc, "0"), DataError);

  std::stringstream dup("#emissions\t3\tO\tO\tB-PESSOA\n");
  CHECK_THROWS_AS(align_external_emissions(read_external_emissions(dup), TagSet({"PESSOA"})), DataError);
  std::stringstream round;
  write_external_emissions(round, file.tag_names, {{"0", file.emissions.by_document.at("0")}});
  CHECK(read_external_emissions(round).emissions.by_document.at("0") == file.emissions.by_document.at("0"));
}
