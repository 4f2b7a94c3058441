// Copyright 2026 The ctcseg Authors
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

#ifndef CTCSEG_UTF8_HPP_
#define CTCSEG_UTF8_HPP_

#include <string>
#include <string_view>

namespace ctcseg {

// Decodes UTF-8 into code points. Invalid sequences (stray continuation
// bytes, overlong encodings, surrogates, out-of-range values) decode to
// U+FFFD, one replacement per offending byte, and decoding resynchronizes
// at the next byte.
std::u32string utf8_to_utf32(std::string_view utf8);

std::string utf32_to_utf8(std::u32string_view utf32);

std::string utf8_of(char32_t code_point);

}  // namespace ctcseg

#endif  // CTCSEG_UTF8_HPP_
