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
#include <string>
#include <string_view>
#include <vector>

#include "crfner/tagger.hpp"
#include "crfner/windowing.hpp"

namespace crfner {

struct PathsConfig {
  std::string vocab;
  std::string train;
  std::string dev;
  std::string test;
  std::string model;
  std::string output;
  std::string emissions;
};

struct EvalConfig {
  bool per_class = true;
  std::size_t resamples = 2000;
  bool constrain_transitions = false;
};

// INI-style pipeline description:
//
//   [paths]  vocab train dev test model output emissions
//   [spans]  max_len stride
//   [tags]   scenario (selective|total) or classes (comma separated)
//   [train]  epochs batch_size lr_encoder lr_head warmup_fraction
//            weight_decay o_tag_bias_init o_tag_loss_weight head optimizer
//            embedding_dim dev_fraction
//   [eval]   per_class resamples constrain_transitions
//   [run]    seed threads
struct PipelineConfig {
  PathsConfig paths;
  SpanConfig spans;
  std::string scenario = "selective";
  std::vector<std::string> classes;  // overrides the scenario when set
  TrainConfig train;                 // train.seed is derived, see derive_seed
  double dev_fraction = 0.1;
  EvalConfig eval;
  std::uint64_t seed = 13;
  std::size_t threads = 1;

  // Entity classes in effect: `classes`, else the scenario's.
  std::vector<std::string> entity_classes() const;
};

// Throws UsageError on unknown sections or keys and on malformed values.
PipelineConfig parse_config(std::istream& in);
PipelineConfig load_config_file(const std::string& path);

// Sets "section.key" as if it appeared in the file. Cross-field checks are
// left to validate_config.
void set_config_value(PipelineConfig& cfg, const std::string& dotted_key, const std::string& value);
// Throws UsageError on inconsistent values; derives train.seed from run.seed.
void validate_config(PipelineConfig& cfg);

// Every key in a fixed order, one "section.key = value" per line.
std::string canonical_config(const PipelineConfig& cfg);
// 16 hex digits of FNV-1a over canonical_config.
std::string config_hash(const PipelineConfig& cfg);

// Per-module seed from the global one; stable across platforms.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view name);

}  // namespace crfner
