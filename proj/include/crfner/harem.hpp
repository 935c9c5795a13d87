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

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crfner/conll.hpp"
#include "crfner/tagscheme.hpp"

namespace crfner::harem {

struct Scenario {
  std::string name;                  // "selective" or "total"
  std::vector<std::string> classes;  // canonical HAREM category names

  bool contains(const std::string& cls) const;
};

// selective: PESSOA ORGANIZACAO LOCAL VALOR TEMPO.
// total: LOCAL PESSOA ORGANIZACAO VALOR TEMPO OBRA COISA ACONTECIMENTO
// ABSTRACCAO OUTRO.
Scenario selective();
Scenario total();
// Throws UsageError for anything but "selective" or "total".
Scenario scenario(const std::string& name);

// Upper-cases and maps English or accented spellings (PER, ORGANIZAÇÃO, ...)
// to the canonical name; unknown categories come back upper-cased.
std::string canonical_category(std::string_view category);

struct TextSegment {
  std::string text;
  bool operator==(const TextSegment&) const = default;
};

struct EmSegment {
  std::string text;
  std::vector<std::string> categories;  // from CATEG, split at '|'
  bool operator==(const EmSegment&) const = default;
};

using AltItem = std::variant<TextSegment, EmSegment>;

struct AltSegment {
  std::vector<std::vector<AltItem>> alternatives;
  bool operator==(const AltSegment&) const = default;
};

using RawSegment = std::variant<TextSegment, EmSegment, AltSegment>;

struct RawDocument {
  std::string id;
  std::vector<RawSegment> segments;
};

// Parses a HAREM Golden Collection file. Each DOC element becomes a document
// (id from DOCID, else its ordinal); without DOC elements the whole file is
// one document. Character data is kept as is, with a newline appended after
// each P element. Unknown elements are transparent and reported in
// `warnings`. Malformed XML throws DataError with line and column.
std::vector<RawDocument> parse(std::string_view xml, std::vector<std::string>* warnings = nullptr);

// Index of the alternative with the most EMs; the first one on ties.
std::size_t resolve_alt(const AltSegment& alt);

// First category of the list that belongs to the scenario.
std::optional<std::string> resolve_categories(const std::vector<std::string>& categories,
                                              const Scenario& scenario);

// Entities carry byte offsets into `text`.
struct ResolvedDocument {
  std::string id;
  std::string text;
  std::vector<Entity> entities;
};

ResolvedDocument resolve(const RawDocument& doc, const Scenario& scenario);

struct DocumentStats {
  std::string id;
  std::size_t tokens = 0;
  std::size_t entities = 0;
};

struct Stats {
  std::string scenario;
  std::size_t documents = 0;
  std::size_t tokens = 0;
  std::size_t entities = 0;
  std::vector<DocumentStats> per_document;
};

struct Export {
  std::vector<ConllDocument> documents;  // token<TAB>tag
  Stats stats;
};

// Tokens come from pre_tokenize. An entity whose boundary falls inside a
// token is widened to the covering tokens; one that then overlaps an earlier
// entity, or covers no token, is dropped. Both cases are reported in
// `warnings` with the document id.
Export export_conll(const std::vector<ResolvedDocument>& docs, const Scenario& scenario,
                    std::vector<std::string>* warnings = nullptr);

// Human-readable table followed by a key=value block and one
// "doc.<id>=tokens,entities" line per document.
std::string format_stats(const Stats& stats);

}  // namespace crfner::harem
