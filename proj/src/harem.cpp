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

#include "crfner/harem.hpp"

#include <expat.h>

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "crfner/error.hpp"
#include "crfner/vocab.hpp"

namespace crfner::harem {

namespace {

const std::map<std::string, std::string, std::less<>> kAliases = {
    {"PER", "PESSOA"},         {"PERSON", "PESSOA"},
    {"ORG", "ORGANIZACAO"},    {"ORGANIZATION", "ORGANIZACAO"},
    {"ORGANIZAÇÃO", "ORGANIZACAO"},
    {"LOC", "LOCAL"},          {"LOCATION", "LOCAL"},
    {"VALUE", "VALOR"},        {"DATE", "TEMPO"},
    {"TIME", "TEMPO"},         {"TITLE", "OBRA"},
    {"THING", "COISA"},        {"EVENT", "ACONTECIMENTO"},
    {"ABSTRACTION", "ABSTRACCAO"}, {"ABSTRACÇÃO", "ABSTRACCAO"},
    {"OTHER", "OUTRO"},
};

// Structural elements that carry no annotation.
const std::set<std::string, std::less<>> kTransparent = {"colHAREM", "DOC", "P", "OMITIDO"};

std::string upper_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  // Accented capitals used in category names.
  for (auto [lower, upper] : {std::pair{"ç", "Ç"}, std::pair{"ã", "Ã"}}) {
    for (auto pos = out.find(lower); pos != std::string::npos; pos = out.find(lower, pos)) {
      out.replace(pos, 2, upper);
    }
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  return std::string(s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1));
}

std::vector<std::string> split_categories(std::string_view categ) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= categ.size()) {
    const auto bar = std::min(categ.find('|', start), categ.size());
    auto c = trim(categ.substr(start, bar - start));
    if (!c.empty()) out.push_back(canonical_category(c));
    start = bar + 1;
  }
  return out;
}

template <typename Items>
void append_text(Items& items, std::string_view s) {
  if (s.empty()) return;
  if (!items.empty()) {
    if (auto* t = std::get_if<TextSegment>(&items.back())) {
      t->text += s;
      return;
    }
  }
  items.push_back(TextSegment{std::string(s)});
}

class Parser {
 public:
  explicit Parser(std::vector<std::string>* warnings) : warnings_(warnings) {}

  std::vector<RawDocument> run(std::string_view xml) {
    std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> p(XML_ParserCreate(nullptr),
                                                                   &XML_ParserFree);
    if (!p) throw std::bad_alloc();
    XML_SetUserData(p.get(), this);
    XML_SetElementHandler(p.get(), &Parser::on_start, &Parser::on_end);
    XML_SetCharacterDataHandler(p.get(), &Parser::on_text);
    if (XML_Parse(p.get(), xml.data(), static_cast<int>(xml.size()), XML_TRUE) == XML_STATUS_ERROR) {
      throw DataError("XML error at line " + std::to_string(XML_GetCurrentLineNumber(p.get())) +
                      ", column " + std::to_string(XML_GetCurrentColumnNumber(p.get())) + ": " +
                      XML_ErrorString(XML_GetErrorCode(p.get())));
    }
    if (docs_.empty()) {
      bool blank = true;
      for (const auto& s : implicit_.segments) {
        const auto* t = std::get_if<TextSegment>(&s);
        blank = blank && t && trim(t->text).empty();
      }
      if (!blank) {
        implicit_.id = "0";
        docs_.push_back(std::move(implicit_));
      }
    }
    return std::move(docs_);
  }

 private:
  static void on_start(void* self, const XML_Char* name, const XML_Char** attrs) {
    static_cast<Parser*>(self)->start(name, attrs);
  }
  static void on_end(void* self, const XML_Char* name) { static_cast<Parser*>(self)->end(name); }
  static void on_text(void* self, const XML_Char* s, int len) {
    static_cast<Parser*>(self)->text(std::string_view(s, static_cast<std::size_t>(len)));
  }

  static std::string attr(const XML_Char** attrs, std::string_view key) {
    for (; *attrs; attrs += 2) {
      if (key == attrs[0]) return attrs[1];
    }
    return {};
  }

  RawDocument& doc() { return in_doc_ ? docs_.back() : implicit_; }

  void warn(const std::string& msg) {
    if (warnings_) warnings_->push_back(msg);
  }

  std::string doc_label() { return in_doc_ ? "document '" + docs_.back().id + "'" : "document"; }

  void start(std::string_view name, const XML_Char** attrs) {
    if (name == "DOC") {
      if (in_doc_) warn("nested DOC element treated as transparent");
      else {
        auto id = attr(attrs, "DOCID");
        docs_.push_back({id.empty() ? std::to_string(docs_.size()) : id, {}});
        in_doc_ = true;
      }
      ++doc_depth_;
    } else if (name == "EM") {
      if (em_depth_++ > 0) {
        warn(doc_label() + ": nested EM inside EM; keeping the outermost");
        return;
      }
      em_ = EmSegment{{}, split_categories(attr(attrs, "CATEG"))};
    } else if (name == "ALT") {
      if (em_depth_ > 0 || alt_depth_++ > 0) {
        warn(doc_label() + ": nested ALT treated as transparent");
        if (em_depth_ > 0) ++alt_depth_;
        return;
      }
      alt_ = AltSegment{{{}}};
    } else if (!kTransparent.count(name)) {
      if (unknown_.insert(std::string(name)).second) {
        warn("unknown element <" + std::string(name) + "> kept as plain text");
      }
    }
  }

  void end(std::string_view name) {
    if (name == "DOC") {
      if (--doc_depth_ == 0) in_doc_ = false;
    } else if (name == "EM") {
      if (--em_depth_ > 0) return;
      if (alt_depth_ > 0) alt_.alternatives.back().push_back(std::move(em_));
      else doc().segments.push_back(std::move(em_));
    } else if (name == "ALT") {
      if (--alt_depth_ > 0) return;
      if (em_depth_ == 0) doc().segments.push_back(std::move(alt_));
    } else if (name == "P") {
      text("\n");
    }
  }

  void text(std::string_view s) {
    if (em_depth_ > 0) {
      em_.text += s;
    } else if (alt_depth_ > 0) {
      std::size_t start = 0;
      for (auto bar = s.find('|'); bar != std::string_view::npos; bar = s.find('|', start)) {
        append_text(alt_.alternatives.back(), s.substr(start, bar - start));
        alt_.alternatives.emplace_back();
        start = bar + 1;
      }
      append_text(alt_.alternatives.back(), s.substr(start));
    } else {
      append_text(doc().segments, s);
    }
  }

  std::vector<std::string>* warnings_;
  std::vector<RawDocument> docs_;
  RawDocument implicit_;
  bool in_doc_ = false;
  int doc_depth_ = 0;
  int em_depth_ = 0;
  int alt_depth_ = 0;
  EmSegment em_;
  AltSegment alt_;
  std::set<std::string, std::less<>> unknown_;
};

struct Builder {
  const Scenario& scenario;
  ResolvedDocument out;

  void add(const TextSegment& t) { out.text += t.text; }
  void add(const EmSegment& em) {
    const auto start = out.text.size();
    out.text += em.text;
    if (auto cls = resolve_categories(em.categories, scenario)) {
      out.entities.push_back({start, out.text.size(), *cls});
    }
  }
  void add(const AltSegment& alt) {
    for (const auto& item : alt.alternatives[resolve_alt(alt)]) {
      std::visit([this](const auto& x) { add(x); }, item);
    }
  }
};

}  // namespace

bool Scenario::contains(const std::string& cls) const {
  return std::find(classes.begin(), classes.end(), cls) != classes.end();
}

Scenario selective() { return {"selective", {"PESSOA", "ORGANIZACAO", "LOCAL", "VALOR", "TEMPO"}}; }

Scenario total() {
  return {"total", {"LOCAL", "PESSOA", "ORGANIZACAO", "VALOR", "TEMPO", "OBRA", "COISA",
                    "ACONTECIMENTO", "ABSTRACCAO", "OUTRO"}};
}

Scenario scenario(const std::string& name) {
  if (name == "selective") return selective();
  if (name == "total") return total();
  throw UsageError("unknown scenario '" + name + "' (expected selective or total)");
}

std::string canonical_category(std::string_view category) {
  auto up = upper_ascii(trim(category));
  auto it = kAliases.find(up);
  return it == kAliases.end() ? up : it->second;
}

std::vector<RawDocument> parse(std::string_view xml, std::vector<std::string>* warnings) {
  return Parser(warnings).run(xml);
}

std::size_t resolve_alt(const AltSegment& alt) {
  std::size_t best = 0;
  std::ptrdiff_t best_count = -1;
  for (std::size_t i = 0; i < alt.alternatives.size(); ++i) {
    const auto count = std::count_if(alt.alternatives[i].begin(), alt.alternatives[i].end(),
                                     [](const AltItem& x) { return std::holds_alternative<EmSegment>(x); });
    if (count > best_count) {
      best = i;
      best_count = count;
    }
  }
  return best;
}

std::optional<std::string> resolve_categories(const std::vector<std::string>& categories,
                                              const Scenario& scenario) {
  for (const auto& c : categories) {
    if (scenario.contains(c)) return c;
  }
  return std::nullopt;
}

ResolvedDocument resolve(const RawDocument& doc, const Scenario& scenario) {
  Builder b{scenario, {doc.id, {}, {}}};
  for (const auto& seg : doc.segments) std::visit([&b](const auto& x) { b.add(x); }, seg);
  return std::move(b.out);
}

Export export_conll(const std::vector<ResolvedDocument>& docs, const Scenario& scenario,
                    std::vector<std::string>* warnings) {
  const TagSet ts(scenario.classes);
  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };
  Export out;
  out.stats.scenario = scenario.name;
  for (const auto& d : docs) {
    const auto toks = pre_tokenize(d.text);
    std::vector<Entity> token_entities;
    std::size_t next_free = 0;
    for (const auto& e : d.entities) {
      const auto label = "document '" + d.id + "': entity " + e.class_name + " at bytes [" +
                         std::to_string(e.start) + ", " + std::to_string(e.end) + ")";
      auto first = std::find_if(toks.begin(), toks.end(), [&](const PreToken& t) { return t.char_end > e.start; });
      auto last = std::find_if(first, toks.end(), [&](const PreToken& t) { return t.char_start >= e.end; });
      if (first == last) {
        warn(label + " covers no token; dropped");
        continue;
      }
      const auto b = static_cast<std::size_t>(first - toks.begin());
      const auto f = static_cast<std::size_t>(last - toks.begin());
      if (b < next_free) {
        warn(label + " overlaps the previous entity after widening; dropped");
        continue;
      }
      if (first->char_start < e.start || std::prev(last)->char_end > e.end) {
        warn(label + " does not align with token boundaries; widened to tokens [" +
             std::to_string(b) + ", " + std::to_string(f) + ")");
      }
      token_entities.push_back({b, f, e.class_name});
      next_free = f;
    }
    const auto tags = encode(token_entities, toks.size(), ts);
    ConllDocument conll;
    for (std::size_t i = 0; i < toks.size(); ++i) conll.rows.push_back({toks[i].text, ts.tag_name(tags[i])});
    out.documents.push_back(std::move(conll));
    out.stats.per_document.push_back({d.id, toks.size(), token_entities.size()});
    ++out.stats.documents;
    out.stats.tokens += toks.size();
    out.stats.entities += token_entities.size();
  }
  return out;
}

std::string format_stats(const Stats& s) {
  std::ostringstream out;
  out << "scenario    documents    tokens  entities\n";
  char line[128];
  std::snprintf(line, sizeof line, "%-10s %10zu %9zu %9zu\n", s.scenario.c_str(), s.documents,
                s.tokens, s.entities);
  out << line << "\n";
  out << "scenario=" << s.scenario << "\ndocuments=" << s.documents << "\ntokens=" << s.tokens
      << "\nentities=" << s.entities << "\n";
  for (const auto& d : s.per_document) out << "doc." << d.id << "=" << d.tokens << "," << d.entities << "\n";
  return out.str();
}

}  // namespace crfner::harem
