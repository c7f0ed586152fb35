#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "musearch/tune.hpp"

namespace musearch {

using PostingSet = std::set<TuneId>;

/// Character trie from normalized terms to the tunes containing them.
/// Nodes live in one vector, so the tree copies as a value.
class LexicalTree {
 public:
  LexicalTree();

  void insert(std::string_view term, TuneId tune);
  /// Returns true when the posting existed.
  bool erase(std::string_view term, TuneId tune);

  /// Exact-term lookup; an empty set when the term is absent.
  const PostingSet& find(std::string_view term) const;

  /// Every term with a non-empty posting set, in lexicographic order.
  std::vector<std::pair<std::string, PostingSet>> entries() const;

  std::size_t term_count() const noexcept { return term_count_; }

  friend bool operator==(const LexicalTree& a, const LexicalTree& b) { return a.entries() == b.entries(); }

 private:
  struct Node {
    std::map<char, std::uint32_t> children;
    PostingSet postings;
  };

  std::uint32_t walk(std::string_view term) const;
  void collect(std::uint32_t node, std::string& prefix,
               std::vector<std::pair<std::string, PostingSet>>& out) const;

  std::vector<Node> nodes_;
  std::size_t term_count_ = 0;
};

}  // namespace musearch
