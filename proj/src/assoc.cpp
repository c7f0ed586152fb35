#include "musearch/assoc.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "musearch/text.hpp"

namespace musearch {

DocumentHit make_hit(int rank, std::string_view text) { return {rank, tokenize(text)}; }

CorpusSearchClient::CorpusSearchClient(std::filesystem::path directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) throw AssociationError("corpus directory not found: " + directory.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw AssociationError("cannot read corpus document: " + f.string());
    std::ostringstream text;
    text << in.rdbuf();
    documents_.push_back(tokenize(text.str()));
  }
}

std::vector<DocumentHit> CorpusSearchClient::search(const std::vector<std::string>& query_terms) const {
  std::set<std::string> wanted;
  for (const auto& t : query_terms) {
    for (auto& n : tokenize(t)) wanted.insert(std::move(n));
  }
  std::vector<DocumentHit> hits;
  for (const auto& doc : documents_) {
    const bool matches = std::any_of(doc.begin(), doc.end(), [&](const std::string& w) { return wanted.contains(w); });
    if (matches) hits.push_back({static_cast<int>(hits.size()) + 1, doc});
  }
  return hits;
}

std::size_t proximity(std::string_view word, const std::set<std::string>& anchors, const DocumentHit& doc) {
  std::vector<std::size_t> word_at, anchor_at;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    if (doc.tokens[i] == word) word_at.push_back(i);
    if (anchors.contains(doc.tokens[i])) anchor_at.push_back(i);
  }
  if (word_at.empty()) throw AssociationError("word '" + std::string(word) + "' does not occur in the document");
  if (anchor_at.empty()) throw AssociationError("no anchor term occurs in the document");
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (auto w : word_at) {
    for (auto a : anchor_at) {
      const std::size_t gap = w > a ? w - a : a - w;
      best = std::min(best, gap == 0 ? 0 : gap - 1);
    }
  }
  return best;
}

std::set<std::string> extract_candidates(const std::vector<DocumentHit>& hits,
                                         const std::set<std::string>& query_terms, double threshold) {
  std::map<std::string, std::size_t> doc_freq;
  for (const auto& hit : hits) {
    std::set<std::string_view> seen(hit.tokens.begin(), hit.tokens.end());
    for (auto w : seen) ++doc_freq[std::string(w)];
  }
  const double cutoff = threshold * static_cast<double>(hits.size());
  const auto& stop = stopwords();
  std::set<std::string> out;
  for (const auto& [word, df] : doc_freq) {
    if (stop.contains(word) || query_terms.contains(word)) continue;
    if (static_cast<double>(df) > cutoff) out.insert(word);
  }
  return out;
}

AssociationScore score(std::string_view word, const std::vector<DocumentHit>& hits,
                       const std::set<std::string>& query_terms, const AssociationParams& params) {
  AssociationScore s;
  s.word = std::string(word);
  s.total = hits.size();
  double distance_sum = 0.0;
  int first_rank = std::numeric_limits<int>::max();
  for (const auto& hit : hits) {
    if (std::find(hit.tokens.begin(), hit.tokens.end(), word) == hit.tokens.end()) continue;
    ++s.support;
    first_rank = std::min(first_rank, hit.rank);
    const bool anchored = std::any_of(hit.tokens.begin(), hit.tokens.end(),
                                      [&](const std::string& t) { return query_terms.contains(t); });
    distance_sum += anchored ? static_cast<double>(proximity(word, query_terms, hit))
                             : static_cast<double>(hit.tokens.size());
  }
  if (s.support == 0) throw AssociationError("word '" + s.word + "' occurs in no result");
  s.first_rank = first_rank;
  const double n = static_cast<double>(s.total);
  const double i = static_cast<double>(s.support);
  s.delta = params.alpha * n / i + params.beta * distance_sum / i + params.gamma * first_rank;
  return s;
}

std::set<std::string> association_query_terms(const TuneRecord& tune) {
  std::set<std::string> terms;
  const auto& stop = stopwords();
  auto add = [&](std::string_view text) {
    for (auto& t : tokenize(text)) {
      if (!stop.contains(t)) terms.insert(std::move(t));
    }
  };
  add(tune.title);
  for (const auto& a : tune.artists) add(a.name);
  if (tune.release) add(tune.release->name);
  return terms;
}

std::vector<AssociationScore> mine(const TuneRecord& tune, const SearchClient& client,
                                   const AssociationParams& params) {
  const auto terms = association_query_terms(tune);
  if (terms.empty()) throw AssociationError("tune has no text to build a query from");
  const auto hits = client.search(std::vector<std::string>(terms.begin(), terms.end()));
  std::vector<AssociationScore> out;
  if (hits.empty()) return out;
  for (const auto& word : extract_candidates(hits, terms, params.threshold)) {
    out.push_back(score(word, hits, terms, params));
  }
  std::sort(out.begin(), out.end(), [](const AssociationScore& a, const AssociationScore& b) {
    if (a.delta != b.delta) return a.delta < b.delta;
    return a.word < b.word;
  });
  return out;
}

}  // namespace musearch
