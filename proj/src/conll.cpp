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

#include "crfner/conll.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "crfner/error.hpp"

namespace crfner {

std::vector<std::string> ConllDocument::column(std::size_t index) const {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(index));
  return out;
}

std::vector<std::string> ConllDocument::last_column() const {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.back());
  return out;
}

std::vector<ConllDocument> read_conll(std::istream& in, std::size_t min_columns) {
  std::vector<ConllDocument> docs;
  ConllDocument current;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  auto close = [&] {
    if (!current.rows.empty()) docs.push_back(std::move(current));
    current = {};
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with("-DOCSTART-")) {
      close();
      continue;
    }
    std::vector<std::string> fields;
    std::size_t begin = 0;
    while (true) {
      const auto tab = line.find('\t', begin);
      fields.push_back(line.substr(begin, tab - begin));
      if (tab == std::string::npos) break;
      begin = tab + 1;
    }
    for (const auto& f : fields) {
      if (f.empty()) throw DataError("CoNLL line " + std::to_string(line_no) + ": empty field");
    }
    if (fields.size() < min_columns) {
      throw DataError("CoNLL line " + std::to_string(line_no) + ": expected at least " +
                      std::to_string(min_columns) + " tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw DataError("CoNLL line " + std::to_string(line_no) + ": expected " +
                      std::to_string(width) + " fields, got " + std::to_string(fields.size()));
    }
    current.rows.push_back(std::move(fields));
  }
  close();
  return docs;
}

std::vector<ConllDocument> read_conll_file(const std::string& path, std::size_t min_columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return read_conll(in, min_columns);
}

void write_conll(std::ostream& out, const std::vector<ConllDocument>& docs) {
  for (const auto& doc : docs) {
    for (const auto& row : doc.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << row[i];
      out << '\n';
    }
    out << '\n';
  }
}

}  // namespace crfner
