#include <gtest/gtest.h>

#include <map>
#include <set>

#include "fixtures.hpp"
#include "musearch/query.hpp"
#include "oracles.hpp"

using namespace musearch;
using namespace musearch::testing;

namespace {

Tokens tokens_of(Notation n, std::string_view text) { return *parse_tokens(n, text); }

ParseErrorKind kind_of(std::string_view q) {
  try {
    parse_query(q);
  } catch (const ParseError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << q;
  return ParseErrorKind::EmptyQuery;
}

TermRef ref(std::string word, std::optional<Field> field = std::nullopt) { return {field, std::move(word)}; }

std::set<TuneId> ids_of(const std::vector<QueryHit>& hits) {
  std::set<TuneId> out;
  for (const auto& h : hits) out.insert(h.tune);
  return out;
}

}  // namespace

TEST(ParseQuery, FieldTaggedAlbum) {
  const auto ast = parse_query("[ALBUM]Californication");
  ASSERT_EQ(ast.terms.size(), 1u);
  EXPECT_EQ(ast.terms[0], (TextTerm{SetOp::And, Field::Album, "californication"}));
  EXPECT_TRUE(ast.melodies.empty());
}

TEST(ParseQuery, SingleWord) {
  EXPECT_EQ(parse_query("joy"), (QueryAST{{{SetOp::And, std::nullopt, "joy"}}, {}}));
}

TEST(ParseQuery, TextWithPitchLiteral) {
  const auto ast = parse_query("[artist]Beethoven or [TITLE]joy !symphony [PIT:*0+-+++-]");
  const std::vector<TextTerm> terms = {
      {SetOp::And, Field::Artist, "beethoven"},
      {SetOp::Or, Field::Title, "joy"},
      {SetOp::Not, std::nullopt, "symphony"},
  };
  EXPECT_EQ(ast.terms, terms);
  ASSERT_EQ(ast.melodies.size(), 1u);
  EXPECT_EQ(ast.melodies[0].notation, Notation::PitQ);
  EXPECT_EQ(ast.melodies[0].tokens, tokens_of(Notation::PitQ, kOdeFragment));
}

TEST(ParseQuery, AllNotations) {
  const auto ast = parse_query("x [PIT:*0+] [ioi:*0-] [BTH:(*,*)(+,0)(-,+)]");
  ASSERT_EQ(ast.melodies.size(), 3u);
  EXPECT_EQ(ast.melodies[1].notation, Notation::IoiQ);
  EXPECT_EQ(ast.melodies[2].notation, Notation::Bth);
  EXPECT_EQ(ast.melodies[2].tokens.size(), 3u);
}

TEST(ParseQuery, MelodyOnlyIsAllowed) {
  const auto ast = parse_query("[PIT:*0+]");
  EXPECT_TRUE(ast.terms.empty());
  EXPECT_EQ(ast.melodies.size(), 1u);
}

TEST(ParseQuery, ErrorsByKind) {
  EXPECT_EQ(kind_of(""), ParseErrorKind::EmptyQuery);
  EXPECT_EQ(kind_of("   "), ParseErrorKind::EmptyQuery);
  EXPECT_EQ(kind_of("[GENRE]rock"), ParseErrorKind::UnknownField);
  EXPECT_EQ(kind_of("[NOPE]x"), ParseErrorKind::UnknownField);
  EXPECT_EQ(kind_of("[PIT:*0+] joy"), ParseErrorKind::MelodyBeforeText);
  EXPECT_EQ(kind_of("[PIT:*0+] [TITLE]joy"), ParseErrorKind::MelodyBeforeText);
  EXPECT_EQ(kind_of("[TITLE joy"), ParseErrorKind::MalformedBracket);
  EXPECT_EQ(kind_of("joy]"), ParseErrorKind::MalformedBracket);
  EXPECT_EQ(kind_of("[]joy"), ParseErrorKind::MalformedBracket);
  EXPECT_EQ(kind_of("[TITLE][ARTIST]joy"), ParseErrorKind::MalformedBracket);
  EXPECT_EQ(kind_of("or joy"), ParseErrorKind::DanglingOperator);
  EXPECT_EQ(kind_of("joy or"), ParseErrorKind::DanglingOperator);
  EXPECT_EQ(kind_of("joy !"), ParseErrorKind::DanglingOperator);
  EXPECT_EQ(kind_of("joy [TITLE]"), ParseErrorKind::DanglingOperator);
  EXPECT_EQ(kind_of("joy [XYZ:*0]"), ParseErrorKind::InvalidMelody);
  EXPECT_EQ(kind_of("joy [PIT:*0x]"), ParseErrorKind::InvalidMelody);
  EXPECT_EQ(kind_of("joy [PIT:]"), ParseErrorKind::InvalidMelody);
  EXPECT_EQ(kind_of("joy [BTH:(*,*)(+]"), ParseErrorKind::InvalidMelody);
}

TEST(ParseQuery, ErrorReportsOffset) {
  try {
    parse_query("joy [NOPE]x");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 4u);
  }
}

TEST(ParseQuery, RenderRoundTrips) {
  for (const auto& q : fixture_queries()) {
    const auto ast = parse_query(q);
    EXPECT_EQ(parse_query(render(ast)), ast) << q;
  }
}

TEST(ToDnf, Examples) {
  const auto simple = to_dnf(parse_query("a b"));
  ASSERT_EQ(simple.disjuncts.size(), 1u);
  EXPECT_EQ(simple.disjuncts[0].positives, (std::vector<TermRef>{ref("a"), ref("b")}));

  const auto split = to_dnf(parse_query("a or b !c"));
  ASSERT_EQ(split.disjuncts.size(), 2u);
  EXPECT_EQ(split.disjuncts[0], (Conjunct{{ref("a")}, {}}));
  EXPECT_EQ(split.disjuncts[1], (Conjunct{{ref("b")}, {ref("c")}}));

  const auto moved = to_dnf(parse_query("!a b"));
  ASSERT_EQ(moved.disjuncts.size(), 1u);
  EXPECT_EQ(moved.disjuncts[0], (Conjunct{{ref("b")}, {ref("a")}}));

  const auto fielded = to_dnf(parse_query("[LYRICS]x or [TITLE]y [PIT:*0]"));
  EXPECT_EQ(to_string(fielded), "([LYRICS]x) OR ([TITLE]y) [PIT:*0]");
}

TEST(ToDnf, OnlyNegatedBranchIsRejected) {
  EXPECT_THROW(to_dnf(parse_query("!a")), QueryError);
  EXPECT_THROW(to_dnf(parse_query("a or !b")), QueryError);
}

// Random flat queries over four words and five tunes: the DNF evaluated by
// the index agrees with a direct per-tune evaluation.
TEST(ToDnf, AgreesWithFlatEvaluation) {
  const std::vector<std::string> words = {"alpha", "bravo", "charlie", "delta"};
  Rng rng(17);
  int checked = 0;
  for (int round = 0; round < 60; ++round) {
    std::map<std::string, std::set<TuneId>> postings;
    TextIndex index;
    std::set<TuneId> universe;
    for (TuneId t = 1; t <= 5; ++t) {
      TuneRecord r;
      r.id = t;
      universe.insert(t);
      for (const auto& w : words) {
        if (rng.below(2)) {
          r.title += w + " ";
          postings[w].insert(t);
        }
      }
      r.title += "tune";
      index.index_tune(r);
    }
    for (int q = 0; q < 20; ++q) {
      std::string text;
      const auto n = 1 + rng.below(5);
      for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
          const auto op = rng.below(4);
          if (op == 0) text += "or ";
          if (op == 1) text += "!";
        } else if (rng.below(4) == 0) {
          text += "!";
        }
        text += words[rng.below(words.size())] + " ";
      }
      const auto ast = parse_query(text);
      DNFQuery dnf;
      try {
        dnf = to_dnf(ast);
      } catch (const QueryError&) {
        continue;
      }
      const auto got = evaluate_text(dnf, index);
      const std::set<TuneId> got_set(got.begin(), got.end());
      EXPECT_EQ(got_set, oracle::evaluate_flat(ast, postings, universe)) << text;
      ++checked;
    }
  }
  EXPECT_GT(checked, 600);
}

// Reading the terms strictly left to right is a different operator: the
// query "a or b c" differs on a tune that has only a.
TEST(ToDnf, OrBindsLoosest) {
  TextIndex index;
  TuneRecord r;
  r.id = 1;
  r.title = "a";
  index.index_tune(r);
  const auto got = evaluate_text(to_dnf(parse_query("a or b c")), index);
  EXPECT_EQ(got.size(), 1u);
}

TEST(Execute, TextOnlyQueries) {
  const auto db = fixture_database();
  const auto album = db.search("[ALBUM]Californication");
  EXPECT_EQ(ids_of(album), (std::set<TuneId>{9, 10, 11, 12}));
  for (const auto& h : album) EXPECT_FALSE(h.distance.has_value());
  EXPECT_TRUE(db.search("nonexistentword").empty());
  EXPECT_TRUE(ids_of(db.search("beethoven")).contains(kTextOnlyTune));
}

TEST(Execute, MelodyFindsTheOde) {
  const auto db = fixture_database();
  const auto hits = db.search(std::string("[PIT:") + std::string(kOdeFragment) + "]");
  ASSERT_FALSE(hits.empty());
  const auto ids = ids_of(hits);
  EXPECT_TRUE(ids.contains(kOdeTune));
  EXPECT_TRUE(ids.contains(kOdeToMyFamilyTune));
  EXPECT_EQ(*hits.front().distance, 0.0);
  for (std::size_t i = 1; i < hits.size(); ++i) EXPECT_LE(*hits[i - 1].distance, *hits[i].distance);
}

TEST(Execute, TextConstrainsMelody) {
  const auto db = fixture_database();
  const auto hits = db.search(std::string("[ARTIST]beethoven [PIT:") + std::string(kOdeFragment) + "]");
  const auto ids = ids_of(hits);
  EXPECT_TRUE(ids.contains(kOdeTune));
  EXPECT_FALSE(ids.contains(kOdeToMyFamilyTune));
}

TEST(Execute, CombinedResultIsSubsetOfTextResult) {
  const auto db = fixture_database();
  for (const auto& t : fixture_text_parts()) {
    const auto text_ids = ids_of(db.search(t));
    for (const auto& m : fixture_melody_parts()) {
      const auto combined = ids_of(db.search(t + " " + m));
      for (auto id : combined) EXPECT_TRUE(text_ids.contains(id)) << t << " " << m << " -> " << id;
    }
  }
}

TEST(Execute, MatchesBruteForcePipeline) {
  const auto db = fixture_database();
  for (const auto& q : fixture_queries()) {
    const auto dnf = to_dnf(parse_query(q));
    const auto got = db.search(dnf);
    const auto want = oracle::execute(db, dnf);
    ASSERT_EQ(got.size(), want.size()) << q;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].tune, want[i].tune) << q;
      ASSERT_EQ(got[i].distance.has_value(), want[i].distance.has_value()) << q;
      if (got[i].distance) EXPECT_NEAR(*got[i].distance, *want[i].distance, 1e-12) << q;
    }
  }
}

TEST(Execute, EmptyQueryIsRejected) {
  EXPECT_THROW(execute(DNFQuery{}, TextIndex{}, make_space_set(), 2.0), QueryError);
}
