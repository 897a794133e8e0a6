#pragma once

#include <set>
#include <string>
#include <vector>

namespace xlhwr {

// A character id is an arbitrary non-empty UTF-8 token; a word is an ordered
// sequence of them. Synthetic scripts use single-codepoint ids, but nothing
// below assumes that.
using Word = std::vector<std::string>;

// Concatenated UTF-8 form (how words appear in manifests and keyword files).
std::string join_word(const Word& w);

// Splits a UTF-8 string into codepoint substrings.
std::vector<std::string> utf8_codepoints(const std::string& s);

// Greedy longest-match tokenization against a known character inventory.
// Falls back to single codepoints for runs not covered by the inventory,
// so plain-codepoint scripts work without a token list. Throws CoverageError
// when `strict` and an unknown codepoint run is hit.
Word tokenize_word(const std::string& s, const std::set<std::string>& tokens,
                   bool strict = false);

}  // namespace xlhwr
