#include "musearch/text_index.hpp"

#include <algorithm>
#include <cctype>

#include "musearch/text.hpp"

namespace musearch {

std::string_view to_string(Field f) {
  switch (f) {
    case Field::Title: return "TITLE";
    case Field::Artist: return "ARTIST";
    case Field::Album: return "ALBUM";
    case Field::Lyrics: return "LYRICS";
    case Field::Genre: return "GENRE";
    case Field::Associations: return "ASSOCIATIONS";
    case Field::Company: return "COMPANY";
    case Field::Performance: return "PERFORMANCE";
  }
  return "TITLE";
}

std::optional<Field> parse_field(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  for (auto f : kAllFields) {
    if (to_string(f) == up) return f;
  }
  return std::nullopt;
}

namespace {

using Tree = TextIndex::Tree;

std::vector<Tree> trees_for(Field f) {
  switch (f) {
    case Field::Title: return {Tree::Title};
    case Field::Artist: return {Tree::Composer, Tree::Lyricist, Tree::Performer};
    case Field::Album: return {Tree::Album};
    case Field::Lyrics: return {Tree::Lyrics};
    case Field::Genre: return {Tree::Genre};
    case Field::Associations: return {Tree::Associations};
    case Field::Company: return {Tree::Company};
    case Field::Performance: return {Tree::Performance};
  }
  return {};
}

Tree tree_for(ArtistRole role) {
  switch (role) {
    case ArtistRole::Composer: return Tree::Composer;
    case ArtistRole::Lyricist: return Tree::Lyricist;
    case ArtistRole::Performer: return Tree::Performer;
  }
  return Tree::Performer;
}

}  // namespace

void TextIndex::index_tune(const TuneRecord& record) {
  remove_tune(record.id);
  std::vector<std::pair<Tree, std::string>> terms;
  auto add = [&](Tree tree, std::string_view text) {
    for (auto& term : tokenize(text)) terms.emplace_back(tree, std::move(term));
  };
  add(Tree::Title, record.title);
  add(Tree::Lyrics, record.lyrics);
  add(Tree::Genre, record.genre);
  for (const auto& a : record.artists) add(tree_for(a.role), a.name);
  if (record.release) add(Tree::Album, record.release->name);
  for (const auto& p : record.performances) add(Tree::Performance, p.event);
  add(Tree::Company, record.company);
  for (const auto& a : record.associations) add(Tree::Associations, a.word);

  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  for (const auto& [tree, term] : terms) trees_[static_cast<std::size_t>(tree)].insert(term, record.id);
  indexed_[record.id] = std::move(terms);
}

void TextIndex::remove_tune(TuneId tune) {
  auto it = indexed_.find(tune);
  if (it == indexed_.end()) return;
  for (const auto& [tree, term] : it->second) trees_[static_cast<std::size_t>(tree)].erase(term, tune);
  indexed_.erase(it);
}

PostingSet TextIndex::lookup(std::optional<Field> field, std::string_view term) const {
  const auto normalized = normalize_term(term);
  PostingSet out;
  if (normalized.empty()) return out;
  auto visit = [&](Field f) {
    for (auto t : trees_for(f)) {
      const auto& hits = trees_[static_cast<std::size_t>(t)].find(normalized);
      out.insert(hits.begin(), hits.end());
    }
  };
  if (field) {
    visit(*field);
  } else {
    for (auto f : kAllFields) visit(f);
  }
  return out;
}

PostingSet TextIndex::lookup(std::string_view field_name, std::string_view term) const {
  if (field_name.empty()) return lookup(std::optional<Field>{}, term);
  auto f = parse_field(field_name);
  if (!f) throw UnknownFieldError(field_name);
  return lookup(f, term);
}

std::vector<TuneId> TextIndex::tunes() const {
  std::vector<TuneId> out;
  for (const auto& [id, terms] : indexed_) out.push_back(id);
  return out;
}

PostingSet combine(SetOp op, std::span<const PostingSet> sets) {
  if (sets.empty()) {
    if (op == SetOp::Or) return {};
    throw QueryError("query must contain a positive term");
  }
  PostingSet acc = sets.front();
  for (std::size_t i = 1; i < sets.size(); ++i) {
    const auto& s = sets[i];
    switch (op) {
      case SetOp::And:
        std::erase_if(acc, [&](TuneId id) { return !s.contains(id); });
        break;
      case SetOp::Or:
        acc.insert(s.begin(), s.end());
        break;
      case SetOp::Not:
        for (auto id : s) acc.erase(id);
        break;
    }
  }
  return acc;
}

}  // namespace musearch
