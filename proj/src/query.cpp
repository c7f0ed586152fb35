#include "musearch/query.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "musearch/text.hpp"

namespace musearch {

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::EmptyQuery: return "empty query";
    case ParseErrorKind::UnknownField: return "unknown field";
    case ParseErrorKind::MelodyBeforeText: return "melody before text";
    case ParseErrorKind::MalformedBracket: return "malformed bracket";
    case ParseErrorKind::DanglingOperator: return "dangling operator";
    case ParseErrorKind::InvalidMelody: return "invalid melody";
  }
  return "parse error";
}

namespace {

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u);
}

std::string trim_copy(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::optional<Field> query_field(std::string_view name) {
  auto f = parse_field(name);
  if (f == Field::Title || f == Field::Artist || f == Field::Lyrics || f == Field::Album) return f;
  return std::nullopt;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  QueryAST run() {
    while (true) {
      while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ >= text_.size()) break;
      const char c = text_[pos_];
      if (c == '[') {
        bracket();
      } else if (c == ']') {
        fail(ParseErrorKind::MalformedBracket, "unmatched ']'");
      } else if (c == '!') {
        if (pending_op_ || pending_field_) fail(ParseErrorKind::DanglingOperator, "operator without a word");
        pending_op_ = SetOp::Not;
        op_at_ = pos_++;
      } else if (is_word_byte(c)) {
        word();
      } else {
        ++pos_;
      }
    }
    if (pending_op_) {
      pos_ = op_at_;
      fail(ParseErrorKind::DanglingOperator, "operator without a word");
    }
    if (pending_field_) {
      pos_ = field_at_;
      fail(ParseErrorKind::DanglingOperator, "field tag without a word");
    }
    if (ast_.terms.empty() && ast_.melodies.empty()) {
      pos_ = 0;
      fail(ParseErrorKind::EmptyQuery, "nothing to search for");
    }
    return std::move(ast_);
  }

 private:
  [[noreturn]] void fail(ParseErrorKind kind, const std::string& detail) const {
    throw ParseError(kind, pos_, detail);
  }

  void bracket() {
    const auto open = pos_;
    const auto close = text_.find(']', open + 1);
    if (close == std::string_view::npos) fail(ParseErrorKind::MalformedBracket, "unclosed '['");
    const auto inner = text_.substr(open + 1, close - open - 1);
    if (inner.find('[') != std::string_view::npos) fail(ParseErrorKind::MalformedBracket, "nested '['");
    const auto colon = inner.find(':');
    if (colon != std::string_view::npos) {
      melody(inner.substr(0, colon), inner.substr(colon + 1));
    } else {
      const auto name = trim_copy(inner);
      if (name.empty()) fail(ParseErrorKind::MalformedBracket, "empty field tag");
      if (pending_field_) fail(ParseErrorKind::MalformedBracket, "two field tags for one word");
      const auto f = query_field(name);
      if (!f) fail(ParseErrorKind::UnknownField, "'" + name + "' is not TITLE, ARTIST, LYRICS or ALBUM");
      if (!ast_.melodies.empty()) fail(ParseErrorKind::MelodyBeforeText, "text terms must precede melodies");
      pending_field_ = f;
      field_at_ = open;
    }
    pos_ = close + 1;
  }

  void melody(std::string_view notation_name, std::string_view symbols) {
    if (pending_op_ || pending_field_) fail(ParseErrorKind::DanglingOperator, "operator or field before a melody");
    const auto notation = parse_notation(trim_copy(notation_name));
    if (!notation) fail(ParseErrorKind::InvalidMelody, "unknown notation '" + trim_copy(notation_name) + "'");
    auto tokens = parse_tokens(*notation, symbols);
    if (!tokens) fail(ParseErrorKind::InvalidMelody, "bad symbols for " + std::string(to_string(*notation)));
    if (tokens->empty()) fail(ParseErrorKind::InvalidMelody, "empty melody");
    ast_.melodies.push_back({*notation, std::move(*tokens)});
  }

  void word() {
    const auto start = pos_;
    while (pos_ < text_.size() && is_word_byte(text_[pos_])) ++pos_;
    const auto raw = text_.substr(start, pos_ - start);
    std::string lowered(raw);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lowered == "or" && !pending_op_ && !pending_field_) {
      if (ast_.terms.empty()) {
        pos_ = start;
        fail(ParseErrorKind::DanglingOperator, "'or' needs a term before it");
      }
      pending_op_ = SetOp::Or;
      op_at_ = start;
      return;
    }
    auto term = normalize_term(raw);
    if (term.empty()) return;
    if (!ast_.melodies.empty()) {
      pos_ = start;
      fail(ParseErrorKind::MelodyBeforeText, "text terms must precede melodies");
    }
    ast_.terms.push_back({pending_op_.value_or(SetOp::And), pending_field_, std::move(term)});
    pending_op_.reset();
    pending_field_.reset();
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  QueryAST ast_;
  std::optional<SetOp> pending_op_;
  std::optional<Field> pending_field_;
  std::size_t op_at_ = 0;
  std::size_t field_at_ = 0;
};

std::string render_term(const TermRef& t) {
  std::string out;
  if (t.field) out += "[" + std::string(to_string(*t.field)) + "]";
  return out + t.word;
}

}  // namespace

QueryAST parse_query(std::string_view text) { return Parser(text).run(); }

std::string render(const QueryAST& ast) {
  std::string out;
  auto sep = [&] {
    if (!out.empty()) out += ' ';
  };
  for (const auto& t : ast.terms) {
    sep();
    if (t.op == SetOp::Or) out += "or ";
    if (t.op == SetOp::Not) out += "!";
    out += render_term({t.field, t.word});
  }
  for (const auto& m : ast.melodies) {
    sep();
    out += "[" + std::string(to_string(m.notation)) + ":" + musearch::render(m.notation, m.tokens) + "]";
  }
  return out;
}

DNFQuery to_dnf(const QueryAST& ast) {
  DNFQuery q;
  for (std::size_t i = 0; i < ast.terms.size(); ++i) {
    const auto& t = ast.terms[i];
    if (i == 0 || t.op == SetOp::Or) q.disjuncts.emplace_back();
    auto& conj = q.disjuncts.back();
    (t.op == SetOp::Not ? conj.negatives : conj.positives).push_back({t.field, t.word});
  }
  for (const auto& c : q.disjuncts) {
    if (c.positives.empty()) throw QueryError("query must contain a positive term in every OR branch");
  }
  q.melodies = ast.melodies;
  return q;
}

std::string to_string(const DNFQuery& q) {
  std::string out;
  for (std::size_t i = 0; i < q.disjuncts.size(); ++i) {
    if (i) out += " OR ";
    out += "(";
    bool first = true;
    for (const auto& t : q.disjuncts[i].positives) {
      out += (first ? "" : " AND ") + render_term(t);
      first = false;
    }
    for (const auto& t : q.disjuncts[i].negatives) out += " AND NOT " + render_term(t);
    out += ")";
  }
  for (const auto& m : q.melodies) {
    if (!out.empty()) out += ' ';
    out += "[" + std::string(to_string(m.notation)) + ":" + render(m.notation, m.tokens) + "]";
  }
  return out;
}

SpaceSet make_space_set(const ClusteringOptions& options) {
  return {PatternSpace(Notation::PitQ, options), PatternSpace(Notation::IoiQ, options),
          PatternSpace(Notation::Bth, options)};
}

PostingSet evaluate_text(const DNFQuery& q, const TextIndex& index) {
  std::vector<PostingSet> branches;
  for (const auto& conj : q.disjuncts) {
    std::vector<PostingSet> positives;
    for (const auto& t : conj.positives) positives.push_back(index.lookup(t.field, t.word));
    std::vector<PostingSet> sets{combine(SetOp::And, positives)};
    for (const auto& t : conj.negatives) sets.push_back(index.lookup(t.field, t.word));
    branches.push_back(combine(SetOp::Not, sets));
  }
  return combine(SetOp::Or, branches);
}

std::vector<QueryHit> execute(const DNFQuery& q, const TextIndex& index, const SpaceSet& spaces, double d1) {
  if (q.disjuncts.empty() && q.melodies.empty()) throw QueryError("query has neither text terms nor melodies");
  const PostingSet text = evaluate_text(q, index);

  std::vector<QueryHit> out;
  if (q.melodies.empty()) {
    for (auto id : text) out.push_back({id, std::nullopt});
    return out;
  }

  const bool constrained = !q.disjuncts.empty();
  std::map<TuneId, double> best;
  for (const auto& m : q.melodies) {
    const double length = static_cast<double>(m.tokens.size());
    for (const auto& hit : melody_search(space_for(spaces, m.notation), m.tokens, d1)) {
      const auto tune = hit.pattern.tune_id;
      if (constrained && !text.contains(tune)) continue;
      const double normalized = hit.distance / length;
      auto [it, inserted] = best.try_emplace(tune, normalized);
      if (!inserted) it->second = std::min(it->second, normalized);
    }
  }
  for (const auto& [tune, d] : best) out.push_back({tune, d});
  std::stable_sort(out.begin(), out.end(), [](const QueryHit& a, const QueryHit& b) { return *a.distance < *b.distance; });
  return out;
}

}  // namespace musearch
