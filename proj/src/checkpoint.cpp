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

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "crfner/error.hpp"
#include "crfner/io.hpp"
#include "crfner/tagger.hpp"

namespace crfner {

namespace {

constexpr std::string_view kMagic = "crfner-checkpoint";
constexpr int kVersion = 1;

void write_matrix(std::ostream& out, std::string_view name, const Eigen::MatrixXd& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << m(i, j);
    out << '\n';
  }
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string line() {
    std::string l;
    if (!std::getline(in_, l)) fail("unexpected end of file");
    ++line_no_;
    if (!l.empty() && l.back() == '\r') l.pop_back();
    return l;
  }

  // Reads "<key> <value...>" and returns the value part.
  std::string field(std::string_view key) {
    const auto l = line();
    if (!l.starts_with(key) || (l.size() > key.size() && l[key.size()] != ' ')) {
      fail("expected '" + std::string(key) + "'");
    }
    return l.size() > key.size() ? l.substr(key.size() + 1) : std::string();
  }

  std::size_t count(std::string_view key) {
    const auto v = field(key);
    try {
      return std::stoul(v);
    } catch (const std::logic_error&) {
      fail("malformed count for '" + std::string(key) + "'");
    }
  }

  Eigen::MatrixXd matrix(std::string_view name) {
    std::istringstream header(field(name));
    Eigen::Index rows = 0, cols = 0;
    if (!(header >> rows >> cols) || rows < 0 || cols < 0) fail("malformed matrix header");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      std::istringstream row(line());
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (!(row >> m(i, j))) fail("malformed matrix row");
      }
    }
    return m;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("checkpoint line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace

void save_checkpoint(std::ostream& out, const TaggerModel& model) {
  model.check_consistency();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << kMagic << ' ' << kVersion << '\n';
  out << "head " << to_string(model.head) << '\n';
  out << "max_len " << model.spans.max_len << '\n';
  out << "stride " << model.spans.stride << '\n';
  out << "classes " << model.tags.num_classes() << '\n';
  for (const auto& c : model.tags.classes()) out << c << '\n';
  out << "vocab " << model.vocab->size() << '\n';
  model.vocab->save(out);
  if (const auto* enc = std::get_if<TrainableEncoder>(&model.emissions)) {
    out << "encoder trainable\n";
    write_matrix(out, "embeddings", enc->embeddings);
    write_matrix(out, "projection", enc->projection);
    write_matrix(out, "bias", enc->bias);
  } else {
    out << "encoder external\n";
  }
  if (model.transitions) write_matrix(out, "transitions", *model.transitions);
  out << "end\n";
}

TaggerModel load_checkpoint(std::istream& in) {
  Reader r(in);
  const auto header = r.line();
  if (header != std::string(kMagic) + " " + std::to_string(kVersion)) {
    r.fail("not a version " + std::to_string(kVersion) + " checkpoint");
  }
  const HeadKind head = [&] {
    try {
      return parse_head(r.field("head"));
    } catch (const UsageError& e) {
      r.fail(e.what());
    }
  }();
  SpanConfig spans{r.count("max_len"), r.count("stride")};
  std::vector<std::string> classes(r.count("classes"));
  for (auto& c : classes) c = r.line();
  std::vector<std::string> tokens(r.count("vocab"));
  for (auto& t : tokens) t = r.line();
  auto vocab = std::make_shared<const Vocabulary>(std::move(tokens));

  EmissionModel emissions;
  const auto encoder = r.field("encoder");
  if (encoder == "trainable") {
    TrainableEncoder enc;
    enc.embeddings = r.matrix("embeddings");
    enc.projection = r.matrix("projection");
    const Eigen::MatrixXd bias = r.matrix("bias");
    if (bias.rows() != 1) r.fail("bias must be a single row");
    enc.bias = bias.row(0);
    emissions = std::move(enc);
  } else if (encoder == "external") {
    emissions = ExternalEmissions{};
  } else {
    r.fail("unknown encoder '" + encoder + "'");
  }
  std::optional<Eigen::MatrixXd> transitions;
  if (head == HeadKind::kCrf) transitions = r.matrix("transitions");
  if (r.line() != "end") r.fail("expected 'end'");

  TaggerModel model{std::move(vocab), TagSet(std::move(classes)), spans, head,
                    std::move(emissions), std::move(transitions)};
  try {
    model.check_consistency();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  return model;
}

void save_checkpoint_file(const std::string& path, const TaggerModel& model) {
  std::ostringstream out;
  save_checkpoint(out, model);
  write_file_atomic(path, out.str());
}

TaggerModel load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  return load_checkpoint(in);
}

ExternalEmissionsFile read_external_emissions(std::istream& in) {
  ExternalEmissionsFile file;
  std::string line;
  std::size_t line_no = 0;
  std::size_t k = 0;
  auto fail = [&](const std::string& what) {
    throw DataError("emissions line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    if (line_no == 1) {
      std::string magic;
      if (!(fields >> magic >> k) || magic != "#emissions" || k == 0) {
        fail("expected header '#emissions<TAB>K<TAB>tags...'");
      }
      std::string tag;
      while (fields >> tag) file.tag_names.push_back(tag);
      if (file.tag_names.size() != k) fail("header declares K=" + std::to_string(k) + " but lists " +
                                           std::to_string(file.tag_names.size()) + " tags");
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) fail("expected 'id<TAB>n<TAB>scores'");
    const std::string id = line.substr(0, tab);
    fields.str(line.substr(tab + 1));
    fields.clear();
    long n = 0;
    if (!(fields >> n) || n < 0) fail("malformed row count");
    Eigen::MatrixXd m(n, static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (!(fields >> m(i, j))) fail("expected " + std::to_string(n * static_cast<long>(k)) + " scores");
    std::string extra;
    if (fields >> extra) fail("trailing data after scores");
    if (!file.emissions.by_document.emplace(id, std::move(m)).second) fail("duplicate document id '" + id + "'");
  }
  if (k == 0) throw DataError("emissions file is empty");
  return file;
}

void write_external_emissions(std::ostream& out, const std::vector<std::string>& tag_names,
                              const std::vector<std::pair<std::string, Eigen::MatrixXd>>& docs) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "#emissions\t" << tag_names.size();
  for (const auto& t : tag_names) out << '\t' << t;
  out << '\n';
  for (const auto& [id, m] : docs) {
    out << id << '\t' << m.rows() << '\t';
    bool first = true;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        out << (first ? "" : " ") << m(i, j);
        first = false;
      }
    out << '\n';
  }
}

ExternalEmissions align_external_emissions(const ExternalEmissionsFile& file, const TagSet& tags) {
  if (file.tag_names.size() != tags.size()) {
    throw DataError("emissions file declares " + std::to_string(file.tag_names.size()) +
                    " tags, model has " + std::to_string(tags.size()));
  }
  std::vector<Eigen::Index> column(tags.size(), -1);
  for (std::size_t c = 0; c < file.tag_names.size(); ++c) {
    auto& slot = column[static_cast<std::size_t>(tags.tag_index(file.tag_names[c]))];
    if (slot >= 0) throw DataError("emissions file lists tag '" + file.tag_names[c] + "' twice");
    slot = static_cast<Eigen::Index>(c);
  }
  ExternalEmissions out;
  for (const auto& [id, m] : file.emissions.by_document) {
    Eigen::MatrixXd r(m.rows(), m.cols());
    for (std::size_t t = 0; t < column.size(); ++t) r.col(static_cast<Eigen::Index>(t)) = m.col(column[t]);
    out.by_document.emplace(id, std::move(r));
  }
  return out;
}

}  // namespace crfner
