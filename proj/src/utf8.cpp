#include "atex/utf8.hpp"

#include "atex/errors.hpp"

namespace atex::utf8 {

std::vector<char32_t> decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      throw ParseError(0, "invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + len > s.size()) {
      throw ParseError(0, "truncated UTF-8 sequence at offset " + std::to_string(i));
    }
    for (std::size_t k = 1; k < len; ++k) {
      unsigned char b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        throw ParseError(0, "invalid UTF-8 continuation at offset " + std::to_string(i + k));
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlong encodings and surrogate range.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || (cp >= 0xD800 && cp <= 0xDFFF) ||
        cp > 0x10FFFF) {
      throw ParseError(0, "invalid UTF-8 code point at offset " + std::to_string(i));
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

std::size_t length(std::string_view s) { return decode(s).size(); }

std::string slice(std::string_view s, std::size_t from, std::size_t to) {
  std::vector<char32_t> cps = decode(s);
  if (from > cps.size()) from = cps.size();
  if (to > cps.size()) to = cps.size();
  if (from >= to) return {};
  return encode(std::vector<char32_t>(cps.begin() + from, cps.begin() + to));
}

char32_t lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 0x20;
  // Latin-1 Supplement uppercase block, skipping the multiplication sign.
  if ((c >= 0xC0 && c <= 0xD6) || (c >= 0xD8 && c <= 0xDE)) return c + 0x20;
  // Latin Extended-A comes in upper/lower pairs.
  if (c >= 0x100 && c <= 0x137) {
    if (c == 0x130) return U'i';  // dotted capital I (Turkish)
    if (c == 0x131) return c;     // dotless i is already lowercase
    return (c % 2 == 0) ? c + 1 : c;
  }
  if (c >= 0x139 && c <= 0x148) return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return (c % 2 == 0) ? c + 1 : c;
  if (c == 0x178) return 0xFF;  // Y with diaeresis
  if (c >= 0x179 && c <= 0x17E) return (c % 2 == 1) ? c + 1 : c;
  return c;
}

std::string lower(std::string_view s) {
  std::vector<char32_t> cps = decode(s);
  for (char32_t& c : cps) c = lower(c);
  return encode(cps);
}

}  // namespace atex::utf8
