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

#include <sstream>

#include "crfner/config.hpp"
#include "crfner/error.hpp"
#include "doctest.h"

using namespace crfner;

TEST_CASE("parse a full config") {
  std::stringstream in(R"([paths]
vocab = data/vocab.txt
train = data/train.conll

[spans]
max_len = 256
stride = 64

[tags]
scenario = total

[train]
epochs = 3
lr_head = 0.01
head = softmax
optimizer = adamw

[eval]
per_class = false

[run]
seed = 7
threads = 4
)");
  const auto cfg = parse_config(in);
  CHECK(cfg.paths.vocab == "data/vocab.txt");
  CHECK(cfg.spans.max_len == 256);
  CHECK(cfg.spans.stride == 64);
  CHECK(cfg.entity_classes().size() == 10);
  CHECK(cfg.train.epochs == 3);
  CHECK(cfg.train.lr_head == 0.01);
  CHECK(cfg.train.lr_encoder == 5e-5);
  CHECK(cfg.train.head == HeadKind::kSoftmax);
  CHECK(cfg.train.optimizer == OptimizerKind::kAdamW);
  CHECK_FALSE(cfg.eval.per_class);
  CHECK(cfg.seed == 7);
  CHECK(cfg.threads == 4);
  CHECK(cfg.train.seed == derive_seed(7, "train"));
}

TEST_CASE("defaults, overrides and errors") {
  std::stringstream empty("");
  auto cfg = parse_config(empty);
  CHECK(cfg.spans.max_len == 512);
  CHECK(cfg.spans.stride == 128);
  CHECK(cfg.entity_classes().size() == 5);
  set_config_value(cfg, "tags.classes", "PER, LOC");
  CHECK(cfg.entity_classes() == std::vector<std::string>{"PER", "LOC"});
  CHECK_THROWS_AS(set_config_value(cfg, "train.nope", "1"), UsageError);
  CHECK_THROWS_AS(set_config_value(cfg, "train.epochs", "x"), UsageError);
  set_config_value(cfg, "spans.stride", "1000");
  CHECK_THROWS_AS(validate_config(cfg), UsageError);
  set_config_value(cfg, "spans.max_len", "1000");
  validate_config(cfg);
  std::stringstream bad("[train]\nlearning = 1\n");
  CHECK_THROWS_AS(parse_config(bad), UsageError);
  std::stringstream scen("[tags]\nscenario = partial\n");
  CHECK_THROWS_AS(parse_config(scen), UsageError);
}

TEST_CASE("canonical form, hash and seed derivation are stable") {
  std::stringstream a("[run]\nseed = 5\n"), b("[run]\nseed=5\n\n[spans]\nmax_len = 512\n");
  const auto ca = parse_config(a), cb = parse_config(b);
  CHECK(canonical_config(ca) == canonical_config(cb));
  CHECK(config_hash(ca) == config_hash(cb));
  CHECK(config_hash(ca).size() == 16);
  auto cc = ca;
  set_config_value(cc, "run.seed", "6");
  validate_config(cc);
  CHECK(config_hash(cc) != config_hash(ca));
  CHECK(derive_seed(13, "train") == derive_seed(13, "train"));
  CHECK(derive_seed(13, "train") != derive_seed(13, "split"));
  CHECK(derive_seed(13, "train") != derive_seed(14, "train"));
  std::stringstream round(canonical_config(cc));
  // The canonical form is itself not INI (no sections); re-parse via overrides.
  PipelineConfig back;
  std::string line;
  while (std::getline(round, line)) {
    const auto eq = line.find(" = ");
    set_config_value(back, line.substr(0, eq), line.substr(eq + 3));
  }
  validate_config(back);
  CHECK(canonical_config(back) == canonical_config(cc));
}
