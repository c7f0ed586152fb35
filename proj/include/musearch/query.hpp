#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "musearch/pattern_space.hpp"
#include "musearch/text_index.hpp"

namespace musearch {

/// Query grammar (whitespace separates items, OR has the lowest precedence):
///
///   query   := term* melody*
///   term    := op? field? WORD
///   op      := "or" | "!"            (no operator means AND)
///   field   := "[TITLE]" | "[ARTIST]" | "[LYRICS]" | "[ALBUM]"
///   melody  := "[" ("PIT" | "IOI" | "BTH") ":" symbols "]"
///
/// WORD is a run of letters and digits and is stored normalized. Field and
/// notation names are case-insensitive. PIT and IOI literals use the
/// symbols * + - 0; BTH literals are tuples such as (*,*)(+,0).
struct TextTerm {
  SetOp op = SetOp::And;
  std::optional<Field> field;
  std::string word;

  friend bool operator==(const TextTerm&, const TextTerm&) = default;
};

struct MelodyLiteral {
  Notation notation = Notation::PitQ;
  Tokens tokens;

  friend bool operator==(const MelodyLiteral&, const MelodyLiteral&) = default;
};

struct QueryAST {
  std::vector<TextTerm> terms;
  std::vector<MelodyLiteral> melodies;

  friend bool operator==(const QueryAST&, const QueryAST&) = default;
};

enum class ParseErrorKind {
  EmptyQuery,
  UnknownField,
  MelodyBeforeText,
  MalformedBracket,
  DanglingOperator,
  InvalidMelody,
};

std::string_view to_string(ParseErrorKind kind);

class ParseError : public QueryError {
 public:
  ParseError(ParseErrorKind kind, std::size_t position, const std::string& detail)
      : QueryError(std::string(to_string(kind)) + " at offset " + std::to_string(position) + ": " + detail),
        kind_(kind),
        position_(position) {}

  ParseErrorKind kind() const noexcept { return kind_; }
  std::size_t position() const noexcept { return position_; }

 private:
  ParseErrorKind kind_;
  std::size_t position_;
};

QueryAST parse_query(std::string_view text);

/// Canonical text form; parse_query(render(ast)) == ast.
std::string render(const QueryAST& ast);

struct TermRef {
  std::optional<Field> field;
  std::string word;

  friend bool operator==(const TermRef&, const TermRef&) = default;
};

struct Conjunct {
  std::vector<TermRef> positives;
  std::vector<TermRef> negatives;  ///< applied after all positives

  friend bool operator==(const Conjunct&, const Conjunct&) = default;
};

struct DNFQuery {
  std::vector<Conjunct> disjuncts;
  std::vector<MelodyLiteral> melodies;  ///< shared by every conjunct

  friend bool operator==(const DNFQuery&, const DNFQuery&) = default;
};

/// Splits the flat term list at every OR and moves negations behind the
/// positive terms of their conjunct. Throws QueryError when a conjunct has
/// only negated terms.
DNFQuery to_dnf(const QueryAST& ast);

/// "(a) OR (b AND NOT [LYRICS]c)" style rendering, melodies appended.
std::string to_string(const DNFQuery& q);

using SpaceSet = std::array<PatternSpace, kNotationCount>;

SpaceSet make_space_set(const ClusteringOptions& options = {});

inline PatternSpace& space_for(SpaceSet& spaces, Notation n) { return spaces[static_cast<std::size_t>(n)]; }
inline const PatternSpace& space_for(const SpaceSet& spaces, Notation n) {
  return spaces[static_cast<std::size_t>(n)];
}

/// A tune in the result; `distance` is absent for text-only matches.
struct QueryHit {
  TuneId tune = 0;
  std::optional<double> distance;

  friend bool operator==(const QueryHit&, const QueryHit&) = default;
};

/// Tunes matching the text part of the query (union of the conjuncts).
PostingSet evaluate_text(const DNFQuery& q, const TextIndex& index);

/// Text search first, melody search inside its results.
///
/// Each melody literal is searched in its own notation space. When the
/// query has text terms, melody hits outside the text result are dropped;
/// a melody-only query searches the whole space. A tune's
/// distance is its smallest hit distance divided by the literal length.
/// Results with a distance come sorted by distance, then tune id;
/// text-only results are in tune id order.
std::vector<QueryHit> execute(const DNFQuery& q, const TextIndex& index, const SpaceSet& spaces, double d1);

}  // namespace musearch
