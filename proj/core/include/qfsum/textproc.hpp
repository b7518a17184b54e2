#pragma once

// Rule-based sentence segmentation and tokenization.
//
// Sentences end at '.', '!' or '?' (plus any run of further terminators
// and closing quotes/brackets) when followed by whitespace and then an
// uppercase letter or a digit. A small list of abbreviations suppresses
// the split. Tokens are casefolded maximal runs of alphanumeric code points.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qfsum/corpus.hpp"

namespace qfsum {

struct Sentence {
  std::string text;
  std::string doc_id;
  std::size_t index_in_doc = 0;
};

using TokenList = std::vector<std::string>;

// Sentences of title followed by sentences of text; index_in_doc runs 0..k-1.
std::vector<Sentence> split_sentences(const Document& doc);

// Trimmed, non-empty sentence strings of one block of text.
std::vector<std::string> split_sentences(std::string_view text);

TokenList tokenize(std::string_view text);

std::string casefold(std::string_view text);

// Collapses whitespace runs to one space and trims both ends.
std::string collapse_whitespace(std::string_view text);

std::string join_tokens(const TokenList& tokens);

}  // namespace qfsum
