#include "pubrank/text.hpp"

#include <array>
#include <cctype>

#include <openssl/evp.h>

#include "pubrank/errors.hpp"

namespace pubrank::text {

bool is_space(char32_t cp) noexcept {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

namespace {

// Decodes one code point at `i`, advancing `i`. Malformed sequences decode as
// the single lead byte so callers never loop forever.
char32_t decode(std::string_view s, std::size_t& i) noexcept {
  auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = (b0 & 0xE0) == 0xC0 ? 2 : (b0 & 0xF0) == 0xE0 ? 3 : (b0 & 0xF8) == 0xF0 ? 4 : 0;
  if (len == 0) {
    ++i;
    return 0xFFFD;
  }
  char32_t cp = b0 & (0x7F >> len);
  for (int k = 1; k < len; ++k) {
    int c = cont(static_cast<std::size_t>(k));
    if (c < 0) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

}  // namespace

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  std::size_t start = std::string_view::npos;
  while (i < s.size()) {
    std::size_t at = i;
    char32_t cp = decode(s, i);
    if (is_space(cp)) {
      if (start != std::string_view::npos) {
        tokens.push_back(s.substr(start, at - start));
        start = std::string_view::npos;
      }
    } else if (start == std::string_view::npos) {
      start = at;
    }
  }
  if (start != std::string_view::npos) tokens.push_back(s.substr(start));
  return tokens;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  for (auto tok : split_whitespace(s)) {
    if (!out.empty()) out.push_back(' ');
    out.append(tok);
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t i = 0;
  std::size_t first = std::string_view::npos;
  std::size_t last_end = 0;
  while (i < s.size()) {
    std::size_t at = i;
    char32_t cp = decode(s, i);
    if (!is_space(cp)) {
      if (first == std::string_view::npos) first = at;
      last_end = i;
    }
  }
  if (first == std::string_view::npos) return {};
  return std::string(s.substr(first, last_end - first));
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view utf8_prefix(std::string_view s, std::size_t max_code_points) noexcept {
  std::size_t i = 0;
  std::size_t n = 0;
  while (i < s.size() && n < max_code_points) {
    decode(s, i);
    ++n;
  }
  return s.substr(0, i);
}

std::size_t utf8_length(std::string_view s) noexcept {
  std::size_t i = 0;
  std::size_t n = 0;
  while (i < s.size()) {
    decode(s, i);
    ++n;
  }
  return n;
}

std::string normalize_answer(std::string_view s) {
  std::string out = collapse_whitespace(ascii_lower(s));
  auto is_punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  std::size_t b = 0;
  std::size_t e = out.size();
  while (b < e && (is_punct(out[b]) || out[b] == ' ')) ++b;
  while (e > b && (is_punct(out[e - 1]) || out[e - 1] == ' ')) --e;
  return out.substr(b, e - b);
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::data, "sha256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0x0F]);
  }
  return out;
}

}  // namespace pubrank::text
