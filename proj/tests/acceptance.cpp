// Acceptance gate: one line per criterion, nonzero exit when any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "musearch/assoc.hpp"
#include "musearch/database.hpp"
#include "musearch/edit_distance.hpp"
#include "musearch/melody.hpp"
#include "musearch/pattern_space.hpp"
#include "musearch/profile.hpp"
#include "musearch/query.hpp"
#include "oracles.hpp"

using namespace musearch;
using namespace musearch::testing;
namespace fs = std::filesystem;

namespace {

struct Failed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Failed(what);
}

std::string random_string(Rng& rng, std::size_t max_len, std::string_view alphabet) {
  std::string s;
  const auto len = rng.below(max_len + 1);
  for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.below(alphabet.size())];
  return s;
}

std::set<TuneId> ids_of(const std::vector<QueryHit>& hits) {
  std::set<TuneId> out;
  for (const auto& h : hits) out.insert(h.tune);
  return out;
}

void ode_round_trip() {
  const auto line = ode_line();
  check(transcribe_pit(line).to_string() == kOdePit, "basic PIT listing");
  check(quantize(transcribe_pit(line)).to_string() == kOdeQuantPit, "quantified PIT listing");
  const auto ioi = transcribe_ioi(line, 4);
  check(ioi.to_string() == kOdeIoi, "IOI listing");
  check(quantize(ioi).to_string() == kOdeQuantIoi, "quantified IOI listing");
  const auto bth = transcribe_bth(line, 4);
  check(bth.size() == 32, "BTH length");
  const auto pit = *parse_contour_string(kOdeQuantPit);
  const auto qioi = *parse_contour_string(kOdeQuantIoi);
  for (std::size_t i = 0; i < 32; ++i) {
    check(bth.tuples[i] == std::make_pair(pit.symbols[i], qioi.symbols[i]), "BTH pairing at " + std::to_string(i));
  }
  auto dropped = bth;
  dropped.tuples.erase(dropped.tuples.begin() + 4);
  check(dropped == *parse_bth_string(kOdePrintedBth), "printed BTH is the pairing minus the fifth tuple");
}

void edit_distance_oracle() {
  Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_string(rng, 6, "+-0");
    const auto b = random_string(rng, 6, "+-0");
    check(edit_distance(a, b) == oracle::edit_script_search(a, b, "+-0"), "DP vs edit-script search: " + a + "/" + b);
  }
  for (int i = 0; i < 1000; ++i) {
    const auto x = random_string(rng, 8, "*+-0");
    const auto y = random_string(rng, 8, "*+-0");
    const auto z = random_string(rng, 8, "*+-0");
    const double xy = edit_distance(x, y);
    check(xy == edit_distance(y, x), "symmetry");
    check((xy == 0.0) == (x == y), "identity");
    check(edit_distance(x, z) <= xy + edit_distance(y, z), "triangle inequality");
  }
}

void expect_invariants(const PatternSpace& space, const std::vector<Pattern>& points) {
  std::map<PatternId, int> seen;
  for (const auto& c : space.clusters()) {
    check(!c.members.empty(), "empty cluster");
    check(c.radius >= space.options().d0, "radius below d0");
    bool medoid_in = false;
    for (const auto& m : c.members) {
      ++seen[m.id];
      medoid_in = medoid_in || m == c.medoid;
      check(space.distance(c.medoid.tokens, m.tokens) <= c.radius, "member outside its radius");
    }
    check(medoid_in, "medoid not a member");
  }
  check(seen.size() == points.size(), "partition misses points");
  for (const auto& [id, n] : seen) check(n == 1, "pattern in two clusters");
}

void clustering_invariants() {
  const auto points = synthetic_patterns(Notation::PitQ, 1000, 31);
  const auto space = build_clusters(Notation::PitQ, points, {2.0, {}, 50});
  check(space.iterations() <= 50, "iteration cap");
  expect_invariants(space, points);

  // reference trace, d0 = 1, converged
  const char* raw[] = {"+++", "++-", "+-+", "---", "--0", "-0-", "000", "00+", "0+0", "+0+-"};
  std::vector<Pattern> ten;
  PatternId id = 1;
  for (const char* p : raw) ten.push_back(make_pattern(Notation::PitQ, p, id, id)), ++id;
  const auto traced = build_clusters(Notation::PitQ, ten, {1.0, {}, 50});
  const std::vector<std::vector<std::string>> want = {
      {"---", "-0-", "---", "--0", "-0-"}, {"000", "000", "0+0", "00+", "000"},
      {"+++", "++-", "+++", "++-", "+-+"}, {"+0+-", "+0+-", "+0+-"}};
  check(traced.converged() && traced.iterations() == 3, "trace iteration count");
  check(traced.clusters().size() == want.size(), "trace cluster count");
  for (std::size_t i = 0; i < want.size(); ++i) {
    const auto& c = traced.clusters()[i];
    std::vector<std::string> got = {render(Notation::PitQ, c.medoid.tokens), render(Notation::PitQ, c.seed.tokens)};
    for (const auto& m : c.members) got.push_back(render(Notation::PitQ, m.tokens));
    check(got == want[i] && c.radius == 1.0, "trace cluster " + std::to_string(i));
  }

  auto growing = space;
  Rng rng(32);
  for (int i = 0; i < 100; ++i) {
    Pattern p{static_cast<PatternId>(10000 + i), Notation::PitQ, random_tokens(rng, Notation::PitQ, rng.between(3, 12)),
              static_cast<TuneId>(5000 + i)};
    double best = kUnbounded;
    for (const auto& c : growing.clusters()) best = std::min(best, oracle::edit_distance(c.medoid.tokens, p.tokens));
    const auto& c = growing.clusters()[growing.insert(p)];
    check(oracle::edit_distance(c.medoid.tokens, p.tokens) == best, "insert chose a farther medoid");
    check(best <= c.radius, "insert left the pattern outside the radius");
  }
}

void melody_search_oracle() {
  const auto points = synthetic_patterns(Notation::PitQ, 100, 41, 5, 9);
  const auto space = build_clusters(Notation::PitQ, points, {2.0, {}, 50});
  Rng rng(42);
  for (int q = 0; q < 40; ++q) {
    const auto query = random_tokens(rng, Notation::PitQ, rng.between(2, 7));
    for (double d1 : {0.0, 1.0, 2.0, 3.0, kUnbounded}) {
      const auto got = melody_search(space, query, d1);
      const auto want = oracle::melody_search(space, query, d1);
      check(got.size() == want.size(), "result size");
      for (std::size_t i = 0; i < got.size(); ++i) {
        check(got[i].pattern == want[i].first && got[i].distance == want[i].second, "result order");
      }
      if (d1 == kUnbounded) check(got.size() == points.size(), "unbounded search misses patterns");
    }
  }
  for (const auto& p : points) {
    const auto got = melody_search(space, p, space.clusters()[*space.find(p.id)].radius);
    check(!got.empty() && got[0].distance == 0.0, "stored pattern not at distance 0");
  }
}

void association_oracle() {
  const auto corpus = planted_corpus();
  const auto hits = hits_of(corpus.texts);
  check(extract_candidates(hits, corpus.query_terms, 0.01) == corpus.planted, "candidates differ from planted words");
  const AssociationParams p{1.0, 0.1, 0.05, 0.01};
  for (const auto& w : corpus.planted) {
    const auto want = oracle::delta(w, corpus.texts, corpus.query_terms, p.alpha, p.beta, p.gamma);
    check(std::abs(score(w, hits, corpus.query_terms, p).delta - want.delta) <= 1e-9, "delta of " + w);
  }
  const std::vector<std::string> everywhere = {"beethoven wow", "wow beethoven", "x beethoven wow"};
  check(score("wow", hits_of(everywhere), {"beethoven"}, p).delta == p.alpha + p.gamma, "degenerate case");
}

void query_language() {
  const auto album = parse_query("[ALBUM]Californication");
  check(album == QueryAST{{{SetOp::And, Field::Album, "californication"}}, {}}, "album AST");

  const auto dnf = to_dnf(parse_query("a or b !c"));
  check(dnf.disjuncts == std::vector<Conjunct>{{{{std::nullopt, "a"}}, {}}, {{{std::nullopt, "b"}}, {{std::nullopt, "c"}}}},
        "a or b !c");

  const std::vector<std::string> suite = {
      "a",       "a b",         "a or b",      "a !b",        "!a b",      "a or b c",      "a b or c",
      "a or b !c", "a !b or c", "a b c",      "a or b or c", "!a !b c",   "a !a",          "a or c !b",
      "b c or a !c", "a b !c or b", "c !a or a !b", "a a or b", "b or c !a or a", "!c b or a !b"};
  const std::vector<std::string> words = {"a", "b", "c"};
  // each tune holds a subset of the words: enumerate every assignment of
  // posting sets over five tunes
  const std::size_t tunes = 5;
  std::vector<std::pair<QueryAST, DNFQuery>> parsed;
  for (const auto& q : suite) {
    const auto ast = parse_query(q);
    parsed.emplace_back(ast, to_dnf(ast));
  }
  const std::uint64_t assignments = 1ull << (words.size() * tunes);
  std::set<TuneId> universe;
  for (TuneId t = 1; t <= tunes; ++t) universe.insert(t);
  for (std::uint64_t bits = 0; bits < assignments; ++bits) {
    std::map<std::string, std::set<TuneId>> postings;
    TextIndex index;
    for (TuneId t = 1; t <= tunes; ++t) {
      TuneRecord r;
      r.id = t;
      r.title = "tune";
      for (std::size_t w = 0; w < words.size(); ++w) {
        if (bits >> ((t - 1) * words.size() + w) & 1) {
          r.title += " " + words[w];
          postings[words[w]].insert(t);
        }
      }
      index.index_tune(r);
    }
    for (const auto& [ast, q] : parsed) {
      const auto got = evaluate_text(q, index);
      if (std::set<TuneId>(got.begin(), got.end()) != oracle::evaluate_flat(ast, postings, universe)) {
        throw Failed("DNF semantics differ for '" + render(ast) + "'");
      }
    }
  }
}

void pipeline_constraint() {
  const auto db = fixture_database();
  for (const auto& t : fixture_text_parts()) {
    const auto text_ids = ids_of(db.search(t));
    for (const auto& m : fixture_melody_parts()) {
      for (auto id : ids_of(db.search(t + " " + m))) check(text_ids.contains(id), "'" + t + " " + m + "' leaves text result");
    }
  }
  const auto hits = db.search("beethoven [PIT:" + std::string(kOdeFragment) + "]");
  check(!hits.empty() && hits.front().tune == kOdeTune, "Ode to Joy not at rank 1");
}

void ordering_oracle() {
  const auto db = fixture_database();
  std::map<TuneId, std::string> genres;
  for (const auto& [id, r] : db.tunes()) genres[id] = normalize_genre(r.genre);
  Rng rng(81);
  for (const auto& u : fixture_users()) {
    for (int round = 0; round < 20; ++round) {
      std::vector<Candidate> cands;
      std::vector<std::pair<TuneId, double>> sheet_in;
      for (TuneId t = 1; t <= 20; ++t) {
        if (rng.below(2)) continue;
        const double d = static_cast<double>(rng.below(6)) / 8.0;
        cands.push_back({t, d});
        sheet_in.emplace_back(t, d);
      }
      const auto& profile = db.profiles().user(u);
      for (bool raw : {false, true}) {
        auto params = db.config().relevancy;
        params.raw = raw;
        const auto got = rank_results(cands, profile, db.groups(), db.profiles(),
                                      [&](TuneId t) { return genres.at(t); }, params);
        const auto want = oracle::relevancy_sheet(sheet_in, u, profile.preferred_genres,
                                                  group_of(u, db.groups()).members, db.scrobble_log(), genres, params);
        check(got.size() == want.size(), "ranked size");
        for (std::size_t i = 0; i < got.size(); ++i) {
          check(got[i].tune == want[i].tune, "order for " + u);
          check(std::abs(got[i].score - want[i].score) <= 1e-9, "score for " + u);
        }
      }
    }
  }
  const RelevancyParams p;
  for (int i = 0; i < 200; ++i) {
    const RelevancyTerms t{rng.unit() * 4, rng.unit(), static_cast<double>(rng.below(3)),
                           static_cast<double>(rng.below(8)), 3.0, 10.0};
    const double base = relevancy(t, p);
    auto a = t;
    a.distance += 0.5;
    check(relevancy(a, p) < base, "distance monotonicity");
    auto b = t;
    b.gen += 0.25;
    check(relevancy(b, p) > base, "gen monotonicity");
    auto c = t;
    c.listened += 1;
    check(relevancy(c, p) > base, "listened monotonicity");
    auto d = t;
    d.pop += 1;
    check(relevancy(d, p) > base, "pop monotonicity");
  }
}

void persistence() {
  const auto db = fixture_database();
  TempDir dir;
  db.save(dir / "a");
  const auto loaded = Database::load(dir / "a");
  for (const auto& q : fixture_queries()) check(loaded.search(q) == db.search(q), "query differs after load: " + q);
  loaded.save(dir / "b");
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename();
    check(read_file(entry.path()) == read_file(dir / "b" / name), "second save differs: " + name.string());
  }
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename().string();
    fs::remove_all(dir / "cut");
    fs::copy(dir / "a", dir / "cut");
    const auto text = read_file(dir / "cut" / name);
    write_file(dir / "cut" / name, text.substr(0, text.size() / 2));
    bool rejected = false;
    try {
      (void)Database::load(dir / "cut");
    } catch (const CorruptFileError&) {
      rejected = true;
    }
    check(rejected, "truncated " + name + " was accepted");
  }
}

void performance() {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  for (auto n : kAllNotations) {
    const auto points = synthetic_patterns(n, 1000, 91 + static_cast<int>(n));
    const auto space = build_clusters(n, points, {3.0, {}, 50});
    check(space.size() == points.size(), "space size");
  }
  const double build_s = std::chrono::duration<double>(clock::now() - start).count();
  check(build_s < 10.0, "building three spaces took " + std::to_string(build_s) + " s");

  const auto db = fixture_database();
  const std::string q = "beethoven or [ALBUM]californication [PIT:" + std::string(kOdeFragment) +
                        "] [IOI:*0000-0+] [BTH:(*,*)(0,0)(+,0)(-,0)(+,0)(+,-)(+,0)(-,+)]";
  const auto qstart = clock::now();
  const auto hits = db.search(q);
  const double query_ms = std::chrono::duration<double, std::milli>(clock::now() - qstart).count();
  check(!hits.empty(), "combined query found nothing");
  check(query_ms < 100.0, "combined query took " + std::to_string(query_ms) + " ms");
}

struct Criterion {
  const char* name;
  double limit_s;
  std::function<void()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"1 Ode to Joy transcription round trip", 1, ode_round_trip},
      {"2 edit distance oracle and metric axioms", 10, edit_distance_oracle},
      {"3 clustering invariants, trace and insert", 30, clustering_invariants},
      {"4 melody search oracle", 10, melody_search_oracle},
      {"5 association score oracle", 5, association_oracle},
      {"6 query language and DNF semantics", 5, query_language},
      {"7 text constrains melody results", 5, pipeline_constraint},
      {"8 relevancy ordering oracle", 5, ordering_oracle},
      {"9 persistence round trip", 10, persistence},
      {"10 desk-scale performance", 10, performance},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string problem;
    try {
      c.run();
    } catch (const std::exception& e) {
      problem = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (problem.empty() && secs > c.limit_s) problem = "over the time limit";
    if (!problem.empty()) ++failures;
    std::printf("[%s] %-45s %8.3f s (limit %g s)%s%s\n", problem.empty() ? "PASS" : "FAIL", c.name, secs, c.limit_s,
                problem.empty() ? "" : "  ", problem.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
