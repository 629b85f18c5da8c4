#ifndef ESE_TEXT_HPP
#define ESE_TEXT_HPP

#include <string>
#include <string_view>
#include <unordered_set>

namespace ese {

// ASCII-only lowercasing; non-ASCII bytes pass through untouched.
std::string to_lower(std::string_view s);

// Built-in list of ~150 English function words. Norm-cased input expected.
const std::unordered_set<std::string>& stopwords();

bool is_stopword(const std::string& norm);

// A content token carries at least one alphanumeric character and is not a
// stopword. Punctuation-only tokens are never content.
bool is_content_token(const std::string& norm);

// Default negator list used by the sentiment scorer and the NLI heuristic.
const std::unordered_set<std::string>& default_negators();

// Default intensifier list (loadable data for lexicon consumers).
const std::unordered_set<std::string>& default_intensifiers();

}  // namespace ese

#endif
