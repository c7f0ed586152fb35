#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "musearch/error.hpp"
#include "musearch/lexical_tree.hpp"
#include "musearch/tune.hpp"

namespace musearch {

/// Searchable fields, in the order a fieldless lookup visits them.
enum class Field { Title, Artist, Album, Lyrics, Genre, Associations, Company, Performance };

inline constexpr Field kAllFields[] = {Field::Title, Field::Artist, Field::Album, Field::Lyrics,
                                       Field::Genre, Field::Associations, Field::Company, Field::Performance};

std::string_view to_string(Field f);
/// Case-insensitive; accepts the bracket-free tag names ("ALBUM", "title").
std::optional<Field> parse_field(std::string_view name);

class UnknownFieldError : public Error {
 public:
  explicit UnknownFieldError(std::string_view name) : Error("unknown field '" + std::string(name) + "'") {}
};

/// One lexical tree per text field of the tune record. Artists get one
/// tree per role; the Artist field searches all three.
class TextIndex {
 public:
  enum class Tree { Title, Composer, Lyricist, Performer, Album, Lyrics, Genre, Associations, Company, Performance };
  static constexpr std::size_t kTreeCount = 10;

  /// Indexes every text field; an already indexed tune is replaced.
  void index_tune(const TuneRecord& record);
  void remove_tune(TuneId tune);
  bool contains(TuneId tune) const { return indexed_.count(tune) != 0; }

  /// Exact match of the normalized term. Without a field, the union over
  /// all fields.
  PostingSet lookup(std::optional<Field> field, std::string_view term) const;
  /// Field by name; an empty name means no field. Throws UnknownFieldError.
  PostingSet lookup(std::string_view field_name, std::string_view term) const;

  const LexicalTree& tree(Tree t) const { return trees_[static_cast<std::size_t>(t)]; }
  std::vector<TuneId> tunes() const;

  friend bool operator==(const TextIndex&, const TextIndex&) = default;

 private:
  std::array<LexicalTree, kTreeCount> trees_;
  std::map<TuneId, std::vector<std::pair<Tree, std::string>>> indexed_;
};

enum class SetOp { And, Or, Not };

class QueryError : public Error {
 public:
  using Error::Error;
};

/// Set algebra over posting sets. NOT subtracts every further set from the
/// first one (the positive accumulator). Throws QueryError when AND or NOT
/// get no sets at all.
PostingSet combine(SetOp op, std::span<const PostingSet> sets);

}  // namespace musearch
