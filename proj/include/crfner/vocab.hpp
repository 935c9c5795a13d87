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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace crfner {

using TokenId = std::int32_t;

inline constexpr std::string_view kContinuationPrefix = "##";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kMaskToken = "[MASK]";
inline constexpr std::string_view kUnkToken = "[UNK]";
// SentencePiece word-boundary marker, U+2581.
inline constexpr std::string_view kWordBoundaryMarker = "\xE2\x96\x81";
inline constexpr std::size_t kMaxCharsPerWord = 100;

// Ordered subword inventory. Immutable once constructed; ids are line
// numbers of the standard WordPiece vocab file.
class Vocabulary {
 public:
  // Throws DataError on duplicate tokens or a missing/duplicated special.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  TokenId cls_id() const { return cls_id_; }
  TokenId sep_id() const { return sep_id_; }
  TokenId mask_id() const { return mask_id_; }
  TokenId unk_id() const { return unk_id_; }

  // Checks the shape rules a converted vocabulary must satisfy: every
  // non-reserved token is a single punctuation character, a "##" piece, or a
  // word-initial piece, and never mixes punctuation with other characters.
  // Bracketed reserved tokens such as [PAD] or [unused7] are exempt. Returns
  // one message per violation.
  std::vector<std::string> shape_violations() const;

  static Vocabulary load(std::istream& in);
  static Vocabulary load_file(const std::string& path);
  void save(std::ostream& out) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId cls_id_ = -1;
  TokenId sep_id_ = -1;
  TokenId mask_id_ = -1;
  TokenId unk_id_ = -1;
};

// A whitespace/punctuation delimited surface token. Offsets are UTF-8 byte
// offsets into the source text, half-open.
struct PreToken {
  std::string text;
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  friend bool operator==(const PreToken&, const PreToken&) = default;
};

struct SubToken {
  TokenId id = 0;
  std::size_t word = 0;  // index of the owning pre-token
  bool is_first = false;

  friend bool operator==(const SubToken&, const SubToken&) = default;
};

struct TokenizedDocument {
  std::vector<PreToken> pre_tokens;
  std::vector<SubToken> sub_tokens;

  // Position of each pre-token's first sub-token.
  std::vector<std::size_t> first_sub_token_positions() const;

  friend bool operator==(const TokenizedDocument&, const TokenizedDocument&) = default;
};

std::vector<PreToken> pre_tokenize(std::string_view text);

// Same split rule applied to words that are already tokenized (e.g. the first
// column of a CoNLL file); offsets are synthesized as if words were joined by
// single spaces.
std::vector<PreToken> pre_tokens_from_words(const std::vector<std::string>& words);

// Greedy longest-match-first segmentation of a single word. Returns {unk}
// when some suffix cannot be matched or the word exceeds kMaxCharsPerWord.
std::vector<TokenId> wordpiece_word(const Vocabulary& vocab, std::string_view word);

TokenizedDocument wordpiece_tokenize(const Vocabulary& vocab,
                                     std::vector<PreToken> pre_tokens);

inline TokenizedDocument tokenize(const Vocabulary& vocab, std::string_view text) {
  return wordpiece_tokenize(vocab, pre_tokenize(text));
}

struct ConversionResult {
  Vocabulary vocab;
  std::vector<std::string> diagnostics;  // one entry per rejected piece
};

// Converts SentencePiece pieces (with U+2581 word markers) to a WordPiece
// vocabulary: specials first, then `punctuation` in code point order, then the
// derived subword units in first-seen order.
ConversionResult convert_sentencepiece_vocab(const std::vector<std::string>& sp_tokens,
                                             const std::set<char32_t>& punctuation);

// ASCII punctuation plus the Latin-1 punctuation block.
std::set<char32_t> default_punctuation_set();

// Every single-code-point punctuation token of an existing vocabulary file.
std::set<char32_t> punctuation_from_vocab(const Vocabulary& vocab);

// Reads a SentencePiece .vocab file ("piece<TAB>score" per line) or a plain
// one-piece-per-line list.
std::vector<std::string> read_sentencepiece_vocab(std::istream& in);

// Tokens file: each document opens with a "# doc <n>" line followed by one
// line per sub-token,
//   word<TAB>char_start<TAB>char_end<TAB>word_text<TAB>sub_id<TAB>piece<TAB>is_first
// and a blank line.
void write_tokens(std::ostream& out, const Vocabulary& vocab,
                  const std::vector<TokenizedDocument>& docs);
std::vector<TokenizedDocument> read_tokens(std::istream& in);

}  // namespace crfner
