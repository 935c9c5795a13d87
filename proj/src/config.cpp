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

#include "crfner/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "crfner/error.hpp"
#include "crfner/harem.hpp"

namespace crfner {

namespace {

namespace pt = boost::property_tree;

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw UsageError("config " + key + ": bad number '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw UsageError("config " + key + ": expected true or false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
  }
  return out;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <typename T>
Field number(T PipelineConfig::*member) {
  return {[member](PipelineConfig& c, const std::string& k, const std::string& v) { c.*member = parse_number<T>(k, v); },
          [member](const PipelineConfig& c) { return std::to_string(c.*member); }};
}

Field path(std::string PathsConfig::*member) {
  return {[member](PipelineConfig& c, const std::string&, const std::string& v) { c.paths.*member = v; },
          [member](const PipelineConfig& c) { return c.paths.*member; }};
}

template <typename T>
Field train_number(T TrainConfig::*member) {
  return {[member](PipelineConfig& c, const std::string& k, const std::string& v) { c.train.*member = parse_number<T>(k, v); },
          [member](const PipelineConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return format_double(c.train.*member);
            else return std::to_string(c.train.*member);
          }};
}

// Ordered: canonical_config walks this table.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"paths.vocab", path(&PathsConfig::vocab)},
      {"paths.train", path(&PathsConfig::train)},
      {"paths.dev", path(&PathsConfig::dev)},
      {"paths.test", path(&PathsConfig::test)},
      {"paths.model", path(&PathsConfig::model)},
      {"paths.output", path(&PathsConfig::output)},
      {"paths.emissions", path(&PathsConfig::emissions)},
      {"spans.max_len",
       {[](PipelineConfig& c, const std::string& k, const std::string& v) { c.spans.max_len = parse_number<std::size_t>(k, v); },
        [](const PipelineConfig& c) { return std::to_string(c.spans.max_len); }}},
      {"spans.stride",
       {[](PipelineConfig& c, const std::string& k, const std::string& v) { c.spans.stride = parse_number<std::size_t>(k, v); },
        [](const PipelineConfig& c) { return std::to_string(c.spans.stride); }}},
      {"tags.scenario",
       {[](PipelineConfig& c, const std::string&, const std::string& v) {
          harem::scenario(v);
          c.scenario = v;
        },
        [](const PipelineConfig& c) { return c.scenario; }}},
      {"tags.classes",
       {[](PipelineConfig& c, const std::string&, const std::string& v) { c.classes = split_list(v); },
        [](const PipelineConfig& c) { return join_list(c.classes); }}},
      {"train.epochs", train_number(&TrainConfig::epochs)},
      {"train.batch_size", train_number(&TrainConfig::batch_size)},
      {"train.lr_encoder", train_number(&TrainConfig::lr_encoder)},
      {"train.lr_head", train_number(&TrainConfig::lr_head)},
      {"train.warmup_fraction", train_number(&TrainConfig::warmup_fraction)},
      {"train.weight_decay", train_number(&TrainConfig::weight_decay)},
      {"train.o_tag_bias_init", train_number(&TrainConfig::o_tag_bias_init)},
      {"train.o_tag_loss_weight", train_number(&TrainConfig::o_tag_loss_weight)},
      {"train.head",
       {[](PipelineConfig& c, const std::string&, const std::string& v) { c.train.head = parse_head(v); },
        [](const PipelineConfig& c) { return to_string(c.train.head); }}},
      {"train.optimizer",
       {[](PipelineConfig& c, const std::string&, const std::string& v) { c.train.optimizer = parse_optimizer(v); },
        [](const PipelineConfig& c) { return to_string(c.train.optimizer); }}},
      {"train.embedding_dim", train_number(&TrainConfig::embedding_dim)},
      {"train.dev_fraction",
       {[](PipelineConfig& c, const std::string& k, const std::string& v) { c.dev_fraction = parse_number<double>(k, v); },
        [](const PipelineConfig& c) { return format_double(c.dev_fraction); }}},
      {"eval.per_class",
       {[](PipelineConfig& c, const std::string& k, const std::string& v) { c.eval.per_class = parse_bool(k, v); },
        [](const PipelineConfig& c) { return std::string(c.eval.per_class ? "true" : "false"); }}},
      {"eval.resamples",
       {[](PipelineConfig& c, const std::string& k, const std::string& v) { c.eval.resamples = parse_number<std::size_t>(k, v); },
        [](const PipelineConfig& c) { return std::to_string(c.eval.resamples); }}},
      {"eval.constrain_transitions",
       {[](PipelineConfig& c, const std::string& k, const std::string& v) { c.eval.constrain_transitions = parse_bool(k, v); },
        [](const PipelineConfig& c) { return std::string(c.eval.constrain_transitions ? "true" : "false"); }}},
      {"run.seed", number(&PipelineConfig::seed)},
      {"run.threads", number(&PipelineConfig::threads)},
  };
  return table;
}

}  // namespace

void validate_config(PipelineConfig& cfg) {
  try {
    cfg.spans.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config spans: ") + e.what());
  }
  if (!(cfg.dev_fraction >= 0 && cfg.dev_fraction < 1)) throw UsageError("config train.dev_fraction must lie in [0, 1)");
  if (cfg.threads == 0) throw UsageError("config run.threads must be positive");
  cfg.train.seed = derive_seed(cfg.seed, "train");
  cfg.train.validate();
}

std::vector<std::string> PipelineConfig::entity_classes() const {
  return classes.empty() ? harem::scenario(scenario).classes : classes;
}

void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, field] : fields()) {
    if (name == key) {
      field.set(cfg, key, value);
      return;
    }
  }
  throw UsageError("unknown config key '" + key + "'");
}

PipelineConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw UsageError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  PipelineConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw UsageError("config key '" + section + "' outside a section");
    }
    for (const auto& [key, value] : body) {
      const auto dotted = section + "." + key;
      bool known = false;
      for (const auto& [name, field] : fields()) {
        if (name == dotted) {
          field.set(cfg, dotted, value.data());
          known = true;
        }
      }
      if (!known) throw UsageError("unknown config key '" + dotted + "'");
    }
  }
  validate_config(cfg);
  return cfg;
}

PipelineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string canonical_config(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& [name, field] : fields()) out += name + " = " + field.get(cfg) + "\n";
  return out;
}

std::string config_hash(const PipelineConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view name) {
  std::vector<std::uint32_t> words = {static_cast<std::uint32_t>(global_seed),
                                      static_cast<std::uint32_t>(global_seed >> 32)};
  for (unsigned char c : name) words.push_back(c);
  std::seed_seq seq(words.begin(), words.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace crfner
