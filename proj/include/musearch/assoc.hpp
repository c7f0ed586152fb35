#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "musearch/error.hpp"
#include "musearch/tune.hpp"

namespace musearch {

/// One result page of a text search, already tokenized.
struct DocumentHit {
  int rank = 1;  ///< 1-based position in the result list
  std::vector<std::string> tokens;
};

/// Builds a hit from raw text with the index tokenizer.
DocumentHit make_hit(int rank, std::string_view text);

/// Source of ranked result pages for a text query.
class SearchClient {
 public:
  virtual ~SearchClient() = default;
  /// Deterministic for a fixed corpus. Ranks are 1..N in result order.
  virtual std::vector<DocumentHit> search(const std::vector<std::string>& query_terms) const = 0;
};

/// A directory of plain-text documents, one per file. Every document that
/// contains at least one query term is a hit; hits are ranked by filename.
class CorpusSearchClient : public SearchClient {
 public:
  explicit CorpusSearchClient(std::filesystem::path directory);
  std::vector<DocumentHit> search(const std::vector<std::string>& query_terms) const override;

 private:
  std::vector<std::vector<std::string>> documents_;
};

struct AssociationParams {
  double alpha = 1.0;
  double beta = 0.1;
  double gamma = 0.05;
  double threshold = 0.01;  ///< fraction of result pages a word must exceed

  friend bool operator==(const AssociationParams&, const AssociationParams&) = default;
};

struct AssociationScore {
  std::string word;
  double delta = 0.0;
  std::size_t support = 0;  ///< I: hits containing the word
  std::size_t total = 0;    ///< N: all hits
  int first_rank = 0;       ///< k: rank of the first hit containing the word

  friend bool operator==(const AssociationScore&, const AssociationScore&) = default;
};

class AssociationError : public Error {
 public:
  using Error::Error;
};

/// Fewest words strictly between any occurrence of `word` and any
/// occurrence of an anchor (0 for neighbours or the same position). Throws
/// AssociationError when `word` or every anchor is missing from `doc`.
std::size_t proximity(std::string_view word, const std::set<std::string>& anchors, const DocumentHit& doc);

/// Words found in strictly more than threshold * N distinct hits; stopwords
/// and query terms are never candidates.
std::set<std::string> extract_candidates(const std::vector<DocumentHit>& hits,
                                         const std::set<std::string>& query_terms, double threshold = 0.01);

/// Matching function (lower is a stronger association):
///   delta = alpha * N / I + beta * (sum of proximities over the I hits) / I + gamma * k
/// A hit containing the word but no query term contributes its own length
/// as the proximity. Throws AssociationError when no hit contains the word.
AssociationScore score(std::string_view word, const std::vector<DocumentHit>& hits,
                       const std::set<std::string>& query_terms, const AssociationParams& params);

/// Normalized terms of the known text fields used to query the client:
/// title, artist names and release name, stopwords left out.
std::set<std::string> association_query_terms(const TuneRecord& tune);

/// Queries the client with everything known about the tune, then scores
/// every candidate word. Sorted by ascending delta, ties by word.
std::vector<AssociationScore> mine(const TuneRecord& tune, const SearchClient& client,
                                   const AssociationParams& params);

}  // namespace musearch
