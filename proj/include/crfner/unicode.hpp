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
#include <string>
#include <string_view>

namespace crfner::unicode {

// One decoded code point and the byte range it occupies in the source.
struct CodePoint {
  char32_t value;
  std::size_t begin;
  std::size_t end;
};

// Decodes the code point starting at byte `pos`. Ill-formed sequences decode
// to U+FFFD and consume exactly one byte, so offsets always advance.
CodePoint decode_at(std::string_view text, std::size_t pos);

std::size_t count_code_points(std::string_view text);

void append_utf8(std::string& out, char32_t cp);

// Unicode general category P* plus the ASCII symbols $ + < = > ^ ` | ~,
// the same class the reference BERT tokenizer splits on.
bool is_punctuation(char32_t cp);

// Space, tab, newline, carriage return, and category Zs.
bool is_whitespace(char32_t cp);

}  // namespace crfner::unicode
