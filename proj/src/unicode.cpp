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

#include "crfner/unicode.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace crfner::unicode {

CodePoint decode_at(std::string_view text, std::size_t pos) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  auto i = static_cast<int32_t>(pos);
  UChar32 c = 0;
  U8_NEXT(bytes, i, length, c);
  if (c < 0) {
    return {U'\uFFFD', pos, pos + 1};
  }
  return {static_cast<char32_t>(c), pos, static_cast<std::size_t>(i)};
}

std::size_t count_code_points(std::string_view text) {
  std::size_t count = 0;
  for (std::size_t pos = 0; pos < text.size(); pos = decode_at(text, pos).end) {
    ++count;
  }
  return count;
}

void append_utf8(std::string& out, char32_t cp) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(buf, len, U8_MAX_LENGTH, static_cast<UChar32>(cp), error);
  if (error) {
    // U+FFFD
    out.append("\xEF\xBF\xBD");
    return;
  }
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(len));
}

bool is_punctuation(char32_t cp) {
  switch (cp) {
    case U'$':
    case U'+':
    case U'<':
    case U'=':
    case U'>':
    case U'^':
    case U'`':
    case U'|':
    case U'~':
      return true;
    default:
      return u_ispunct(static_cast<UChar32>(cp));
  }
}

bool is_whitespace(char32_t cp) {
  if (cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r') return true;
  return u_charType(static_cast<UChar32>(cp)) == U_SPACE_SEPARATOR;
}

}  // namespace crfner::unicode
