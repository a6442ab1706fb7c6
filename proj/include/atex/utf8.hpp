#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace atex::utf8 {

// Decodes UTF-8 into code points. Throws ParseError on invalid sequences.
std::vector<char32_t> decode(std::string_view s);

std::string encode(const std::vector<char32_t>& cps);

// Number of code points in s.
std::size_t length(std::string_view s);

// Code-point slice [from, to) re-encoded as UTF-8. Clamps to the end.
std::string slice(std::string_view s, std::size_t from, std::size_t to);

// Simple one-to-one lowercase: ASCII, Latin-1 Supplement and Latin Extended-A
// (covers Turkish including the dotted capital I). Each code point maps to
// exactly one code point, so character offsets survive lowercasing.
char32_t lower(char32_t c);
std::string lower(std::string_view s);

}  // namespace atex::utf8
