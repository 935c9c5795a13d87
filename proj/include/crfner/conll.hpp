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

#include <iosfwd>
#include <string>
#include <vector>

namespace crfner {

// One document of a CoNLL-style file: tab-separated rows, the first column
// being the token.
struct ConllDocument {
  std::vector<std::vector<std::string>> rows;

  std::size_t size() const { return rows.size(); }
  std::vector<std::string> column(std::size_t index) const;
  std::vector<std::string> tokens() const { return column(0); }
  std::vector<std::string> last_column() const;

  bool operator==(const ConllDocument&) const = default;
};

// Blank lines (and "-DOCSTART-" lines) separate documents. Every row in the
// file must have the same number of fields, at least `min_columns`. Throws
// DataError with the line number otherwise.
std::vector<ConllDocument> read_conll(std::istream& in, std::size_t min_columns = 1);
std::vector<ConllDocument> read_conll_file(const std::string& path, std::size_t min_columns = 1);

// Rows joined by tabs, one blank line after each document.
void write_conll(std::ostream& out, const std::vector<ConllDocument>& docs);

}  // namespace crfner
