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

#include "crfner/vocab.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "crfner/error.hpp"
#include "crfner/unicode.hpp"

namespace crfner {

namespace {

bool is_reserved(std::string_view token) {
  return token.size() >= 3 && token.front() == '[' && token.back() == ']';
}

bool has_split_char(std::string_view text) {
  for (std::size_t pos = 0; pos < text.size();) {
    const auto cp = unicode::decode_at(text, pos);
    if (unicode::is_punctuation(cp.value) || unicode::is_whitespace(cp.value)) return true;
    pos = cp.end;
  }
  return false;
}

bool is_single_punctuation(std::string_view text) {
  if (text.empty()) return false;
  const auto cp = unicode::decode_at(text, 0);
  return cp.end == text.size() && unicode::is_punctuation(cp.value);
}

std::vector<std::string> split_tab(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t begin = 0;
  while (true) {
    const auto tab = line.find('\t', begin);
    fields.push_back(line.substr(begin, tab - begin));
    if (tab == std::string::npos) break;
    begin = tab + 1;
  }
  return fields;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const auto& t = tokens_[i];
    if (t.empty() || t.find('\n') != std::string::npos) {
      throw DataError("vocabulary: token " + std::to_string(i) + " is empty or contains a newline");
    }
    if (!index_.emplace(t, static_cast<TokenId>(i)).second) {
      throw DataError("vocabulary: duplicate token '" + t + "' at id " + std::to_string(i));
    }
  }
  auto special = [&](std::string_view name) {
    auto id = find(name);
    if (!id) throw DataError("vocabulary: missing special token " + std::string(name));
    return *id;
  };
  cls_id_ = special(kClsToken);
  sep_id_ = special(kSepToken);
  mask_id_ = special(kMaskToken);
  unk_id_ = special(kUnkToken);
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw DataError("vocabulary: id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Vocabulary::shape_violations() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    std::string_view t = tokens_[i];
    if (is_reserved(t)) continue;
    std::string_view body = t;
    if (t.starts_with(kContinuationPrefix)) body.remove_prefix(kContinuationPrefix.size());
    if (body.size() == t.size() && is_single_punctuation(t)) continue;
    if (body.empty() || has_split_char(body)) {
      out.push_back("token " + std::to_string(i) + " '" + std::string(t) +
                    "' mixes punctuation or whitespace with other characters");
    }
  }
  return out;
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

Vocabulary Vocabulary::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary file " + path);
  return load(in);
}

void Vocabulary::save(std::ostream& out) const {
  for (const auto& t : tokens_) out << t << '\n';
}

std::vector<std::size_t> TokenizedDocument::first_sub_token_positions() const {
  std::vector<std::size_t> out;
  out.reserve(pre_tokens.size());
  for (std::size_t i = 0; i < sub_tokens.size(); ++i) {
    if (sub_tokens[i].is_first) out.push_back(i);
  }
  return out;
}

std::vector<PreToken> pre_tokenize(std::string_view text) {
  std::vector<PreToken> out;
  std::size_t word_start = 0;
  bool in_word = false;
  auto flush = [&](std::size_t end) {
    if (in_word) {
      out.push_back({std::string(text.substr(word_start, end - word_start)), word_start, end});
      in_word = false;
    }
  };
  for (std::size_t pos = 0; pos < text.size();) {
    const auto cp = unicode::decode_at(text, pos);
    if (unicode::is_whitespace(cp.value)) {
      flush(cp.begin);
    } else if (unicode::is_punctuation(cp.value)) {
      flush(cp.begin);
      out.push_back({std::string(text.substr(cp.begin, cp.end - cp.begin)), cp.begin, cp.end});
    } else if (!in_word) {
      in_word = true;
      word_start = cp.begin;
    }
    pos = cp.end;
  }
  flush(text.size());
  return out;
}

std::vector<PreToken> pre_tokens_from_words(const std::vector<std::string>& words) {
  std::vector<PreToken> out;
  out.reserve(words.size());
  std::size_t offset = 0;
  for (const auto& w : words) {
    out.push_back({w, offset, offset + w.size()});
    offset += w.size() + 1;
  }
  return out;
}

std::vector<TokenId> wordpiece_word(const Vocabulary& vocab, std::string_view word) {
  // Byte offset of every code point boundary.
  std::vector<std::size_t> bounds;
  for (std::size_t pos = 0; pos < word.size(); pos = unicode::decode_at(word, pos).end) {
    bounds.push_back(pos);
  }
  bounds.push_back(word.size());
  const std::size_t n_chars = bounds.size() - 1;
  if (n_chars == 0 || n_chars > kMaxCharsPerWord) return {vocab.unk_id()};

  std::vector<TokenId> pieces;
  std::string candidate;
  std::size_t start = 0;
  while (start < n_chars) {
    std::optional<TokenId> match;
    std::size_t end = n_chars;
    for (; end > start; --end) {
      candidate.clear();
      if (start > 0) candidate.append(kContinuationPrefix);
      candidate.append(word.substr(bounds[start], bounds[end] - bounds[start]));
      if ((match = vocab.find(candidate))) break;
    }
    if (!match) return {vocab.unk_id()};
    pieces.push_back(*match);
    start = end;
  }
  return pieces;
}

TokenizedDocument wordpiece_tokenize(const Vocabulary& vocab, std::vector<PreToken> pre_tokens) {
  TokenizedDocument doc;
  doc.pre_tokens = std::move(pre_tokens);
  for (std::size_t w = 0; w < doc.pre_tokens.size(); ++w) {
    // Words supplied verbatim (CoNLL input) may still contain punctuation;
    // every split part stays owned by the same word.
    const auto parts = pre_tokenize(doc.pre_tokens[w].text);
    std::vector<TokenId> ids;
    for (const auto& part : parts) {
      auto piece_ids = wordpiece_word(vocab, part.text);
      ids.insert(ids.end(), piece_ids.begin(), piece_ids.end());
    }
    if (ids.empty()) ids.push_back(vocab.unk_id());
    for (std::size_t k = 0; k < ids.size(); ++k) {
      doc.sub_tokens.push_back({ids[k], w, k == 0});
    }
  }
  return doc;
}

ConversionResult convert_sentencepiece_vocab(const std::vector<std::string>& sp_tokens,
                                             const std::set<char32_t>& punctuation) {
  std::vector<std::string> tokens;
  std::unordered_set<std::string> seen;
  std::vector<std::string> diagnostics;
  auto add = [&](std::string t) {
    if (seen.insert(t).second) tokens.push_back(std::move(t));
  };
  for (auto s : {kClsToken, kMaskToken, kSepToken, kUnkToken}) add(std::string(s));
  for (char32_t c : punctuation) {
    if (!unicode::is_punctuation(c)) {
      diagnostics.push_back("punctuation set member U+" + std::to_string(static_cast<uint32_t>(c)) +
                            " is not punctuation; skipped");
      continue;
    }
    std::string t;
    unicode::append_utf8(t, c);
    add(std::move(t));
  }

  static const std::unordered_set<std::string> kControlPieces = {"<unk>", "<s>", "</s>", "<pad>"};
  for (std::size_t i = 0; i < sp_tokens.size(); ++i) {
    std::string_view piece = sp_tokens[i];
    if (kControlPieces.contains(std::string(piece))) {
      diagnostics.push_back("piece " + std::to_string(i) + " '" + std::string(piece) +
                            "': SentencePiece control symbol skipped");
      continue;
    }
    bool word_initial = piece.starts_with(kWordBoundaryMarker);
    if (word_initial) piece.remove_prefix(kWordBoundaryMarker.size());
    if (piece.find(kWordBoundaryMarker) != std::string_view::npos) {
      diagnostics.push_back("piece " + std::to_string(i) + " '" + sp_tokens[i] +
                            "': word marker is not piece-initial; rejected");
      continue;
    }
    // Punctuation splits the piece; the unit after a split starts a new word.
    std::string unit;
    auto flush = [&] {
      if (!unit.empty()) {
        add(word_initial ? unit : std::string(kContinuationPrefix) + unit);
        unit.clear();
      }
    };
    for (std::size_t pos = 0; pos < piece.size();) {
      const auto cp = unicode::decode_at(piece, pos);
      if (unicode::is_punctuation(cp.value) || unicode::is_whitespace(cp.value)) {
        flush();
        word_initial = true;
      } else {
        unicode::append_utf8(unit, cp.value);
      }
      pos = cp.end;
    }
    flush();
  }
  return {Vocabulary(std::move(tokens)), std::move(diagnostics)};
}

std::set<char32_t> default_punctuation_set() {
  std::set<char32_t> out;
  for (char32_t c = 0x21; c < 0x7F; ++c) {
    if (unicode::is_punctuation(c)) out.insert(c);
  }
  for (char32_t c = 0xA0; c <= 0xBF; ++c) {
    if (unicode::is_punctuation(c)) out.insert(c);
  }
  return out;
}

std::set<char32_t> punctuation_from_vocab(const Vocabulary& vocab) {
  std::set<char32_t> out;
  for (const auto& t : vocab.tokens()) {
    if (is_single_punctuation(t)) out.insert(unicode::decode_at(t, 0).value);
  }
  return out;
}

std::vector<std::string> read_sentencepiece_vocab(std::istream& in) {
  std::vector<std::string> pieces;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    pieces.push_back(line.substr(0, line.find('\t')));
  }
  return pieces;
}

void write_tokens(std::ostream& out, const Vocabulary& vocab,
                  const std::vector<TokenizedDocument>& docs) {
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& doc = docs[d];
    out << "# doc " << d << '\n';
    for (const auto& st : doc.sub_tokens) {
      const auto& w = doc.pre_tokens.at(st.word);
      out << st.word << '\t' << w.char_start << '\t' << w.char_end << '\t' << w.text << '\t'
          << st.id << '\t' << vocab.token(st.id) << '\t' << (st.is_first ? 1 : 0) << '\n';
    }
    out << '\n';
  }
}

std::vector<TokenizedDocument> read_tokens(std::istream& in) {
  std::vector<TokenizedDocument> docs;
  TokenizedDocument current;
  bool open = false;
  std::string line;
  std::size_t line_no = 0;
  auto close = [&] {
    if (open) docs.push_back(std::move(current));
    current = {};
    open = false;
  };
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) {
      close();
      continue;
    }
    if (line.front() == '#') {
      close();
      open = true;
      continue;
    }
    if (!open) {
      throw DataError("tokens file line " + std::to_string(line_no) + ": missing '# doc' header");
    }
    const auto f = split_tab(line);
    if (f.size() != 7) {
      throw DataError("tokens file line " + std::to_string(line_no) + ": expected 7 fields, got " +
                      std::to_string(f.size()));
    }
    try {
      const std::size_t word = std::stoul(f[0]);
      const bool first = f[6] == "1";
      if (first) {
        if (word != current.pre_tokens.size()) {
          throw DataError("tokens file line " + std::to_string(line_no) + ": word index out of order");
        }
        current.pre_tokens.push_back({f[3], std::stoul(f[1]), std::stoul(f[2])});
      } else if (current.pre_tokens.empty() || word + 1 != current.pre_tokens.size()) {
        throw DataError("tokens file line " + std::to_string(line_no) +
                        ": continuation sub-token without its word");
      }
      current.sub_tokens.push_back({static_cast<TokenId>(std::stol(f[4])), word, first});
    } catch (const std::logic_error&) {
      throw DataError("tokens file line " + std::to_string(line_no) + ": malformed number");
    }
  }
  close();
  return docs;
}

}  // namespace crfner
