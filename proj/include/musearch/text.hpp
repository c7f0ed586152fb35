#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace musearch {

/// Lowercases, folds diacritics ("Götterfunken" -> "gotterfunken",
/// "Łódź" -> "lodz") and splits on anything that is not a letter or digit.
/// Input is UTF-8; invalid bytes act as separators.
std::vector<std::string> tokenize(std::string_view text);

/// The single normalized term for `word`, or an empty string when `word`
/// holds no letters or digits. Multi-token input is joined without spaces.
std::string normalize_term(std::string_view word);

/// Compiled-in stopword list (English and Polish function words).
const std::set<std::string, std::less<>>& stopwords();

}  // namespace musearch
