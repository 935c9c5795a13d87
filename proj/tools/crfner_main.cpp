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

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "crfner/config.hpp"
#include "crfner/conll.hpp"
#include "crfner/error.hpp"
#include "crfner/eval.hpp"
#include "crfner/harem.hpp"
#include "crfner/io.hpp"
#include "crfner/synthetic.hpp"
#include "crfner/tagger.hpp"
#include "crfner/vocab.hpp"

using namespace crfner;

namespace {

struct Options {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::vector<std::string> sets;
};

// Option whose value is recorded as a config override.
CLI::Option* config_option(CLI::App* app, Options& opts, const std::string& flag, const std::string& key,
                           const std::string& help) {
  return app->add_option_function<std::string>(
      flag, [&opts, key](const std::string& v) { opts.overrides.emplace_back(key, v); }, help + " [" + key + "]");
}

CLI::Option* config_flag(CLI::App* app, Options& opts, const std::string& flag, const std::string& key,
                         const std::string& help) {
  return app->add_flag_callback(flag, [&opts, key] { opts.overrides.emplace_back(key, "true"); },
                                help + " [" + key + "]");
}

PipelineConfig resolve_config(const Options& opts, const std::string& command) {
  PipelineConfig cfg;
  if (!opts.config_path.empty()) cfg = load_config_file(opts.config_path);
  for (const auto& s : opts.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects section.key=value, got '" + s + "'");
    set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& [k, v] : opts.overrides) set_config_value(cfg, k, v);
  validate_config(cfg);
  std::cerr << "crfner " << command << ": config_hash=" << config_hash(cfg) << " seed=" << cfg.seed << "\n";
  return cfg;
}

const std::string& require(const std::string& value, const std::string& what) {
  if (value.empty()) throw UsageError("missing " + what);
  return value;
}

std::string to_text(const auto& writer) {
  std::ostringstream out;
  writer(out);
  return out.str();
}

// Plain text: documents separated by blank lines.
std::vector<std::string> read_text_documents(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> docs;
  std::string line, current;
  auto flush = [&] {
    if (!current.empty()) docs.push_back(current);
    current.clear();
  };
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      flush();
    } else {
      current += line + "\n";
    }
  }
  flush();
  return docs;
}

std::vector<TokenizedDocument> load_documents(const Vocabulary& vocab, const std::string& path,
                                              const std::string& format) {
  std::vector<TokenizedDocument> out;
  if (format == "text") {
    for (const auto& text : read_text_documents(path)) out.push_back(tokenize(vocab, text));
  } else if (format == "conll") {
    for (const auto& d : read_conll_file(path)) {
      out.push_back(wordpiece_tokenize(vocab, pre_tokens_from_words(d.tokens())));
    }
  } else {
    throw UsageError("unknown input format '" + format + "' (expected conll or text)");
  }
  return out;
}

std::vector<std::string> ordinal_ids(std::size_t n) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
  return ids;
}

std::optional<ExternalEmissions> load_emissions(const PipelineConfig& cfg, const TagSet& tags) {
  if (cfg.paths.emissions.empty()) return std::nullopt;
  std::istringstream in(read_file(cfg.paths.emissions));
  return align_external_emissions(read_external_emissions(in), tags);
}

void convert_vocab(const PipelineConfig&, const std::string& input, const std::string& output,
                   const std::string& punctuation_from) {
  std::istringstream in(read_file(require(input, "--input")));
  const auto punct = punctuation_from.empty() ? default_punctuation_set()
                                              : punctuation_from_vocab(Vocabulary::load_file(punctuation_from));
  const auto result = convert_sentencepiece_vocab(read_sentencepiece_vocab(in), punct);
  for (const auto& d : result.diagnostics) std::cerr << "warning: " << d << "\n";
  write_file_atomic(require(output, "--output"), to_text([&](std::ostream& o) { result.vocab.save(o); }));
  std::cerr << "wrote " << result.vocab.size() << " tokens\n";
}

void tokenize_command(const PipelineConfig& cfg, const std::string& input, const std::string& format,
                      const std::string& output) {
  const auto vocab = Vocabulary::load_file(require(cfg.paths.vocab, "--vocab"));
  const auto docs = load_documents(vocab, require(input, "--input"), format);
  write_file_atomic(require(output, "--output"), to_text([&](std::ostream& o) { write_tokens(o, vocab, docs); }));
}

void split_spans_command(const PipelineConfig& cfg, const std::string& input, const std::string& output) {
  std::istringstream in(read_file(require(input, "--input")));
  const auto docs = read_tokens(in);
  std::ostringstream out;
  out << "#doc\tspan\tstart\tend\tcontext_start\tcontext_end\n";
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto spans = make_spans(docs[d].sub_tokens.size(), cfg.spans);
    for (std::size_t s = 0; s < spans.size(); ++s) {
      out << d << '\t' << s << '\t' << spans[s].start << '\t' << spans[s].end << '\t' << spans[s].context_start
          << '\t' << spans[s].context_end << '\n';
    }
  }
  write_file_atomic(require(output, "--output"), out.str());
}

void preprocess_harem(const PipelineConfig& cfg, const std::string& input, const std::string& output,
                      const std::string& stats_path) {
  const auto sc = harem::scenario(cfg.scenario);
  std::vector<std::string> warnings;
  const auto raw = harem::parse(read_file(require(input, "--input")), &warnings);
  std::vector<harem::ResolvedDocument> resolved;
  for (const auto& d : raw) resolved.push_back(harem::resolve(d, sc));
  const auto ex = harem::export_conll(resolved, sc, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  write_file_atomic(require(output, "--output"), to_text([&](std::ostream& o) { write_conll(o, ex.documents); }));
  const auto report = harem::format_stats(ex.stats);
  if (stats_path.empty()) {
    std::cout << report;
  } else {
    write_file_atomic(stats_path, report);
  }
}

std::vector<TrainingDocument> training_set(const Vocabulary& vocab, const TagSet& tags,
                                           const std::vector<ConllDocument>& docs) {
  std::vector<TrainingDocument> out;
  for (std::size_t i = 0; i < docs.size(); ++i) out.push_back(training_document(vocab, tags, docs[i], std::to_string(i)));
  return out;
}

void train_command(const PipelineConfig& cfg) {
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::load_file(require(cfg.paths.vocab, "--vocab")));
  const TagSet tags(cfg.entity_classes());
  auto data = training_set(*vocab, tags, read_conll_file(require(cfg.paths.train, "--train"), 2));
  const auto& model_path = require(cfg.paths.model, "--model");

  std::vector<TrainingDocument> dev;
  if (!cfg.paths.dev.empty()) {
    dev = training_set(*vocab, tags, read_conll_file(cfg.paths.dev, 2));
  } else if (cfg.dev_fraction > 0 && cfg.paths.emissions.empty()) {
    const auto n_dev = static_cast<std::size_t>(cfg.dev_fraction * static_cast<double>(data.size()));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(cfg.seed, "dev_split"));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> is_dev(data.size(), false);
    for (std::size_t i = 0; i < n_dev; ++i) is_dev[order[i]] = true;
    std::vector<TrainingDocument> kept;
    for (std::size_t i = 0; i < data.size(); ++i) (is_dev[i] ? dev : kept).push_back(std::move(data[i]));
    data = std::move(kept);
  }
  std::cerr << "train: " << data.size() << " documents, dev: " << dev.size() << " documents\n";

  TaggerModel model = init_tagger(vocab, tags, cfg.spans, cfg.train);
  if (auto ext = load_emissions(cfg, tags)) {
    model.emissions = std::move(*ext);
    model.check_consistency();
  }
  std::vector<TokenizedDocument> dev_docs;
  std::vector<EntitySet> dev_gold;
  for (const auto& d : dev) {
    dev_docs.push_back(d.doc);
    dev_gold.push_back(decode(d.gold, tags));
  }
  const auto dev_ids = ordinal_ids(dev.size());
  const auto result = train(std::move(model), data, cfg.train, [&](int epoch, const TaggerModel& m) {
    std::cerr << "epoch " << epoch;
    if (!dev.empty()) {
      std::vector<EntitySet> pred;
      for (auto& p : predict_all(m, dev_docs, dev_ids, cfg.threads)) pred.push_back(std::move(p.entities));
      std::cerr << " dev_f1=" << evaluate(dev_gold, pred).f1;
    }
    std::cerr << "\n";
  });
  for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
    std::cerr << "epoch " << e + 1 << " loss=" << result.epoch_losses[e] << "\n";
  }
  save_checkpoint_file(model_path, result.model);
}

void predict_command(const PipelineConfig& cfg, const std::string& format) {
  const auto& input = cfg.paths.test;
  const auto& output = cfg.paths.output;
  auto model = load_checkpoint_file(require(cfg.paths.model, "--model"));
  if (!model.is_trainable()) {
    auto ext = load_emissions(cfg, model.tags);
    if (!ext) throw UsageError("model uses external emissions; pass --emissions");
    model.emissions = std::move(*ext);
  }
  const auto docs = load_documents(*model.vocab, require(input, "--input"), format);
  const auto preds =
      predict_all(model, docs, ordinal_ids(docs.size()), cfg.threads, {cfg.eval.constrain_transitions});
  std::vector<ConllDocument> out(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (std::size_t i = 0; i < docs[d].pre_tokens.size(); ++i) {
      out[d].rows.push_back({docs[d].pre_tokens[i].text, model.tags.tag_name(preds[d].tags[i])});
    }
  }
  write_file_atomic(require(output, "--output"), to_text([&](std::ostream& o) { write_conll(o, out); }));
}

void evaluate_command(const PipelineConfig& cfg, const std::string& gold_path, const std::string& pred_path,
                      const std::string& other_path, const std::string& output) {
  const auto gold = read_conll_file(require(gold_path, "--gold"), 2);
  ConllEvaluation result;
  std::vector<ConllDocument> pred;
  if (pred_path.empty()) {
    result = evaluate_conll(gold);
  } else {
    pred = read_conll_file(pred_path, 2);
    result = evaluate_conll_pair(gold, pred);
  }
  auto report = format_conlleval(result, cfg.eval.per_class);
  if (!other_path.empty()) {
    if (pred.empty()) throw UsageError("--bootstrap needs --pred");
    const auto other = read_conll_file(other_path, 2);
    evaluate_conll_pair(gold, other);  // token alignment check
    report += format_bootstrap(bootstrap_compare(conll_entities(gold, false), conll_entities(pred, true),
                                                 conll_entities(other, true), cfg.eval.resamples,
                                                 derive_seed(cfg.seed, "bootstrap"), cfg.threads));
  }
  if (output.empty()) {
    std::cout << report;
  } else {
    write_file_atomic(output, report);
  }
}

void make_synthetic(const PipelineConfig& cfg, const std::string& dir, std::size_t sentences) {
  SyntheticOptions opts;
  opts.sentences = sentences;
  opts.seed = derive_seed(cfg.seed, "synthetic");
  const auto corpus = make_copy_task_corpus(opts);
  const std::filesystem::path root(require(dir, "--output-dir"));
  std::filesystem::create_directories(root);
  write_file_atomic((root / "vocab.txt").string(),
                    to_text([&](std::ostream& o) { Vocabulary(corpus.vocab_tokens).save(o); }));
  write_file_atomic((root / "train.conll").string(), to_text([&](std::ostream& o) { write_conll(o, corpus.train); }));
  write_file_atomic((root / "test.conll").string(), to_text([&](std::ostream& o) { write_conll(o, corpus.test); }));
  std::cerr << "classes: ";
  for (const auto& c : corpus.tags.classes()) std::cerr << c << " ";
  std::cerr << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crfner: CRF named entity recognition toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opts;
  app.add_option("--config", opts.config_path, "pipeline config file")->envname("CRFNER_CONFIG");
  app.add_option("--set", opts.sets, "override a config key: section.key=value");
  config_option(&app, opts, "--seed", "run.seed", "global seed");
  config_option(&app, opts, "--threads", "run.threads", "worker threads");

  std::string input, output, format = "conll", stats, punct, gold, pred, other, out_dir;
  std::size_t sentences = 500;

  auto* cv = app.add_subcommand("convert-vocab", "SentencePiece vocabulary to WordPiece");
  cv->add_option("--input", input, "SentencePiece .vocab file")->required();
  cv->add_option("--output", output, "WordPiece vocabulary to write")->required();
  cv->add_option("--punctuation-from", punct, "take punctuation tokens from this WordPiece vocabulary");

  auto* tk = app.add_subcommand("tokenize", "WordPiece tokenization to a tokens file");
  config_option(tk, opts, "--vocab", "paths.vocab", "vocabulary");
  tk->add_option("--input", input, "input documents")->required();
  tk->add_option("--format", format, "conll or text (blank-line separated documents)");
  tk->add_option("--output", output, "tokens file to write")->required();

  auto* ss = app.add_subcommand("split-spans", "list the spans of each tokenized document");
  ss->add_option("--input", input, "tokens file")->required();
  ss->add_option("--output", output, "span table to write")->required();
  config_option(ss, opts, "--max-len", "spans.max_len", "span length S");
  config_option(ss, opts, "--stride", "spans.stride", "stride D");

  auto* ph = app.add_subcommand("preprocess-harem", "HAREM XML to CoNLL");
  ph->add_option("--input", input, "HAREM Golden Collection XML")->required();
  config_option(ph, opts, "--scenario", "tags.scenario", "selective or total");
  ph->add_option("--output", output, "CoNLL file to write")->required();
  ph->add_option("--stats", stats, "statistics report (default: stdout)");

  auto* tr = app.add_subcommand("train", "train a tagger");
  config_option(tr, opts, "--vocab", "paths.vocab", "vocabulary");
  config_option(tr, opts, "--train", "paths.train", "training CoNLL (token, tag)");
  config_option(tr, opts, "--dev", "paths.dev", "development CoNLL");
  config_option(tr, opts, "--model", "paths.model", "checkpoint to write");
  config_option(tr, opts, "--emissions", "paths.emissions", "external emissions file");
  config_option(tr, opts, "--scenario", "tags.scenario", "selective or total");
  config_option(tr, opts, "--classes", "tags.classes", "comma separated entity classes");
  config_option(tr, opts, "--head", "train.head", "crf or softmax");
  config_option(tr, opts, "--optimizer", "train.optimizer", "sgd or adamw");
  config_option(tr, opts, "--epochs", "train.epochs", "epochs");
  config_option(tr, opts, "--batch-size", "train.batch_size", "batch size");
  config_option(tr, opts, "--lr-encoder", "train.lr_encoder", "encoder learning rate");
  config_option(tr, opts, "--lr-head", "train.lr_head", "head learning rate");
  config_option(tr, opts, "--embedding-dim", "train.embedding_dim", "toy encoder width");
  config_option(tr, opts, "--dev-fraction", "train.dev_fraction", "held-out share when no --dev");
  config_option(tr, opts, "--max-len", "spans.max_len", "span length S");
  config_option(tr, opts, "--stride", "spans.stride", "stride D");

  auto* pr = app.add_subcommand("predict", "tag documents");
  config_option(pr, opts, "--model", "paths.model", "checkpoint");
  config_option(pr, opts, "--emissions", "paths.emissions", "external emissions file");
  config_option(pr, opts, "--input", "paths.test", "documents");
  pr->add_option("--format", format, "conll or text");
  config_option(pr, opts, "--output", "paths.output", "CoNLL predictions (token, tag)");
  config_flag(pr, opts, "--constrain", "eval.constrain_transitions", "forbid invalid IOB2 transitions");

  auto* ev = app.add_subcommand("evaluate", "entity-level precision, recall and F1");
  ev->add_option("--gold", gold, "gold CoNLL, or token/gold/pred when --pred is absent")->required();
  ev->add_option("--pred", pred, "predicted CoNLL");
  ev->add_option("--bootstrap", other, "second prediction file to compare against --pred");
  config_option(ev, opts, "--resamples", "eval.resamples", "bootstrap resamples");
  ev->add_flag_callback("--per-class", [&opts] { opts.overrides.emplace_back("eval.per_class", "true"); },
                        "per-class lines [eval.per_class]");
  ev->add_flag_callback("--no-per-class", [&opts] { opts.overrides.emplace_back("eval.per_class", "false"); },
                        "overall lines only");
  ev->add_option("--output", output, "report file (default: stdout)");

  auto* ms = app.add_subcommand("make-synthetic", "write the copy-task corpus");
  ms->add_option("--output-dir", out_dir, "directory for vocab.txt, train.conll, test.conll")->required();
  ms->add_option("--sentences", sentences, "sentence count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    auto* sub = app.get_subcommands().front();
    const auto cfg = resolve_config(opts, sub->get_name());
    if (sub == cv) convert_vocab(cfg, input, output, punct);
    else if (sub == tk) tokenize_command(cfg, input, format, output);
    else if (sub == ss) split_spans_command(cfg, input, output);
    else if (sub == ph) preprocess_harem(cfg, input, output, stats);
    else if (sub == tr) train_command(cfg);
    else if (sub == pr) predict_command(cfg, format);
    else if (sub == ev) evaluate_command(cfg, gold, pred, other, output);
    else if (sub == ms) make_synthetic(cfg, out_dir, sentences);
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
