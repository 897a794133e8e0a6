#include "xlhwr/text.hpp"

#include "xlhwr/errors.hpp"

namespace xlhwr {

std::string join_word(const Word& w) {
  std::string out;
  for (const auto& c : w) out += c;
  return out;
}

std::vector<std::string> utf8_codepoints(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char b = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if (b >= 0xF0)
      len = 4;
    else if (b >= 0xE0)
      len = 3;
    else if (b >= 0xC0)
      len = 2;
    if (i + len > s.size()) len = s.size() - i;  // tolerate truncation
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

Word tokenize_word(const std::string& s, const std::set<std::string>& tokens,
                   bool strict) {
  Word out;
  std::size_t i = 0;
  std::size_t max_len = 1;
  for (const auto& t : tokens) max_len = std::max(max_len, t.size());
  while (i < s.size()) {
    std::size_t take = 0;
    const std::size_t limit = std::min(max_len, s.size() - i);
    for (std::size_t len = limit; len >= 1; --len) {
      if (tokens.count(s.substr(i, len))) {
        take = len;
        break;
      }
    }
    if (take == 0) {
      // Unknown run: fall back to one codepoint.
      const unsigned char b = static_cast<unsigned char>(s[i]);
      std::size_t len = 1;
      if (b >= 0xF0)
        len = 4;
      else if (b >= 0xE0)
        len = 3;
      else if (b >= 0xC0)
        len = 2;
      if (i + len > s.size()) len = s.size() - i;
      if (strict)
        throw CoverageError("tokenize_word: unknown character '" +
                            s.substr(i, len) + "' in '" + s + "'");
      take = len;
    }
    out.push_back(s.substr(i, take));
    i += take;
  }
  return out;
}

}  // namespace xlhwr
