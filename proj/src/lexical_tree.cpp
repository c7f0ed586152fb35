#include "musearch/lexical_tree.hpp"

namespace musearch {

namespace {
constexpr std::uint32_t kMissing = 0xFFFFFFFFu;
}

LexicalTree::LexicalTree() : nodes_(1) {}

void LexicalTree::insert(std::string_view term, TuneId tune) {
  std::uint32_t node = 0;
  for (char c : term) {
    auto it = nodes_[node].children.find(c);
    if (it == nodes_[node].children.end()) {
      const auto next = static_cast<std::uint32_t>(nodes_.size());
      nodes_[node].children.emplace(c, next);
      nodes_.emplace_back();
      node = next;
    } else {
      node = it->second;
    }
  }
  auto& postings = nodes_[node].postings;
  if (postings.empty()) ++term_count_;
  postings.insert(tune);
}

std::uint32_t LexicalTree::walk(std::string_view term) const {
  std::uint32_t node = 0;
  for (char c : term) {
    auto it = nodes_[node].children.find(c);
    if (it == nodes_[node].children.end()) return kMissing;
    node = it->second;
  }
  return node;
}

bool LexicalTree::erase(std::string_view term, TuneId tune) {
  const auto node = walk(term);
  if (node == kMissing) return false;
  auto& postings = nodes_[node].postings;
  if (postings.erase(tune) == 0) return false;
  if (postings.empty()) --term_count_;
  return true;
}

const PostingSet& LexicalTree::find(std::string_view term) const {
  static const PostingSet kEmpty;
  const auto node = walk(term);
  return node == kMissing ? kEmpty : nodes_[node].postings;
}

void LexicalTree::collect(std::uint32_t node, std::string& prefix,
                          std::vector<std::pair<std::string, PostingSet>>& out) const {
  if (!nodes_[node].postings.empty()) out.emplace_back(prefix, nodes_[node].postings);
  for (const auto& [c, child] : nodes_[node].children) {
    prefix.push_back(c);
    collect(child, prefix, out);
    prefix.pop_back();
  }
}

std::vector<std::pair<std::string, PostingSet>> LexicalTree::entries() const {
  std::vector<std::pair<std::string, PostingSet>> out;
  std::string prefix;
  collect(0, prefix, out);
  return out;
}

}  // namespace musearch
