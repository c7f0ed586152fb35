#include "fixtures.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

#include "musearch/input_formats.hpp"

namespace musearch::testing {

std::filesystem::path data_path(std::string_view name) { return std::filesystem::path(MUSEARCH_DATA_DIR) / name; }

std::vector<NoteEvent> ode_events() { return read_note_events_file(data_path("ode_to_joy.notes.csv").string()); }

MonophonicLine ode_line() { return MonophonicLine(ode_events()); }

Tokens random_tokens(Rng& rng, Notation notation, std::size_t length, bool leading_wildcard) {
  Tokens out;
  out.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    if (i == 0 && leading_wildcard) {
      out.push_back(0);
    } else if (notation == Notation::Bth) {
      out.push_back(static_cast<Symbol>(4 * rng.between(1, 3) + rng.between(1, 3)));
    } else {
      out.push_back(static_cast<Symbol>(rng.between(1, 3)));
    }
  }
  return out;
}

std::vector<Pattern> synthetic_patterns(Notation notation, std::size_t count, std::uint64_t seed, std::size_t min_len,
                                        std::size_t max_len, std::size_t per_tune) {
  Rng rng(seed);
  std::vector<Pattern> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto len = static_cast<std::size_t>(rng.between(static_cast<int>(min_len), static_cast<int>(max_len)));
    out.push_back({i + 1, notation, random_tokens(rng, notation, len, rng.below(4) == 0), 1 + i / per_tune});
  }
  return out;
}

Pattern make_pattern(Notation notation, std::string_view rendered, PatternId id, TuneId tune) {
  auto tokens = parse_tokens(notation, rendered);
  if (!tokens) throw std::invalid_argument("bad pattern literal " + std::string(rendered));
  return {id, notation, std::move(*tokens), tune};
}

std::vector<NoteEvent> random_melody(Rng& rng, std::size_t notes) {
  static constexpr int kUnits[] = {1, 2, 2, 2, 4};
  std::vector<NoteEvent> out;
  int pitch = rng.between(55, 72);
  std::int64_t onset = 0;
  for (std::size_t i = 0; i < notes; ++i) {
    const std::int64_t length = 250 * kUnits[rng.below(5)];
    out.push_back({onset, length, pitch, 80, 0, false});
    onset += length;
    pitch = std::clamp(pitch + rng.between(-4, 4), 40, 90);
  }
  return out;
}

namespace {

struct TuneSpec {
  std::string title;
  std::vector<Artist> artists;
  std::optional<Release> release;
  std::string genre;
  std::string lyrics;
  std::vector<Performance> performances;
  std::string company;
};

std::vector<TuneSpec> tune_specs() {
  using enum ArtistRole;
  const Artist beethoven{"Ludwig van Beethoven", Composer};
  const Artist rhcp{"Red Hot Chili Peppers", Performer};
  const Release californication{ReleaseKind::Album, "Californication", 1999};
  return {
      {"Ode to Joy",
       {beethoven, {"Friedrich Schiller", Lyricist}, {"Berliner Philharmoniker", Performer}},
       Release{ReleaseKind::Album, "Symphony No. 9", 1824},
       "classical",
       "Freude, schöner Götterfunken, Tochter aus Elysium",
       {{"Premiere Vienna", "1824-05-07"}},
       "Deutsche Grammophon"},
      {"Für Elise", {beethoven}, Release{ReleaseKind::Single, "Für Elise", 1867}, "classical", "", {}, ""},
      {"Moonlight Sonata", {beethoven}, Release{ReleaseKind::Album, "Piano Sonatas", std::nullopt}, "classical", "", {}, ""},
      {"Symphony No. 5", {beethoven}, Release{ReleaseKind::Album, "Symphony No. 5", 1808}, "classical", "", {}, ""},
      {"Eine kleine Nachtmusik", {{"Wolfgang Amadeus Mozart", Composer}}, std::nullopt, "classical", "", {}, ""},
      {"Turkish March", {{"Wolfgang Amadeus Mozart", Composer}}, std::nullopt, "classical", "", {}, ""},
      {"Toccata and Fugue", {{"Johann Sebastian Bach", Composer}}, std::nullopt, "classical", "", {}, ""},
      {"Air on the G String", {{"Johann Sebastian Bach", Composer}}, std::nullopt, "classical", "", {}, ""},
      {"Californication", {rhcp}, californication, "rock",
       "Psychic spies from China try to steal your mind's elation, dream of Californication", {}, "Warner Bros"},
      {"Scar Tissue", {rhcp}, californication, "rock", "With the birds I'll share this lonely view", {}, "Warner Bros"},
      {"Otherside", {rhcp}, californication, "rock", "How long how long will I slide", {}, "Warner Bros"},
      {"Around the World", {rhcp}, californication, "rock", "", {}, "Warner Bros"},
      {"Under the Bridge", {rhcp}, Release{ReleaseKind::Album, "Blood Sugar Sex Magik", 1991}, "rock",
       "Sometimes I feel like I don't have a partner", {}, "Warner Bros"},
      {"Yesterday", {{"The Beatles", Performer}, {"Paul McCartney", Composer}}, Release{ReleaseKind::Album, "Help!", 1965},
       "pop", "Yesterday, all my troubles seemed so far away", {}, "EMI"},
      {"Let It Be", {{"The Beatles", Performer}}, Release{ReleaseKind::Album, "Let It Be", 1970}, "pop",
       "When I find myself in times of trouble", {}, "EMI"},
      {"Bohemian Rhapsody", {{"Queen", Performer}, {"Freddie Mercury", Composer}},
       Release{ReleaseKind::Album, "A Night at the Opera", 1975}, "rock", "Is this the real life", {{"Live Aid", "1985-07-13"}},
       "EMI"},
      {"We Will Rock You", {{"Queen", Performer}}, Release{ReleaseKind::Album, "News of the World", 1977}, "rock", "", {}, "EMI"},
      {"Love Will Tear Us Apart", {{"Joy Division", Performer}}, Release{ReleaseKind::Single, "Love Will Tear Us Apart", 1980},
       "post punk", "", {}, "Factory"},
      {"Ode to My Family", {{"The Cranberries", Performer}}, Release{ReleaseKind::Album, "No Need to Argue", 1994}, "rock",
       "Understand the things I say", {}, "Island"},
      {"Beethoven's Last Night", {{"Trans-Siberian Orchestra", Performer}},
       Release{ReleaseKind::Album, "Beethoven's Last Night", 2000}, "rock", "", {}, "Atlantic"},
  };
}

// The Ode sung a fourth higher and 20% slower.
std::vector<NoteEvent> ode_variant() {
  auto notes = ode_events();
  for (auto& n : notes) {
    n.pitch += 5;
    n.onset_ms = n.onset_ms * 6 / 5;
    n.duration_ms = n.duration_ms * 6 / 5;
  }
  return notes;
}

}  // namespace

std::vector<std::string> fixture_users() { return {"u1", "u2", "u3", "u4", "u5", "u6"}; }

std::vector<ScrobbleEvent> fixture_scrobbles() {
  const std::vector<std::pair<std::string, std::vector<TuneId>>> listens = {
      {"u1", {9, 9, 10, 11, 16}}, {"u3", {9, 12, 14, 16, 16}}, {"u5", {10, 13, 16, 17}},
      {"u2", {1, 1, 2, 3}},       {"u4", {1, 4, 5, 7}},        {"u6", {2, 6, 8, 14, 15}},
  };
  std::vector<ScrobbleEvent> out;
  std::int64_t t = 1'700'000'000;
  for (const auto& [user, tunes] : listens) {
    for (auto tune : tunes) out.push_back({user, tune, t += 60});
  }
  return out;
}

Database fixture_database(const Config& config) {
  Database db(config);
  const auto specs = tune_specs();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    TuneMetadata meta;
    meta.id = i + 1;
    meta.record.title = s.title;
    meta.record.artists = s.artists;
    meta.record.release = s.release;
    meta.record.genre = s.genre;
    meta.record.lyrics = s.lyrics;
    meta.record.performances = s.performances;
    meta.record.company = s.company;
    std::vector<NoteEvent> notes;
    const TuneId id = i + 1;
    if (id == kOdeTune) {
      notes = ode_events();
    } else if (id == kOdeToMyFamilyTune) {
      notes = ode_variant();
    } else if (id != kTextOnlyTune) {
      Rng rng(1000 + id);
      notes = random_melody(rng, 20 + static_cast<std::size_t>(rng.below(16)));
    }
    db.ingest_tune(meta, notes);
  }
  using enum Sex;
  db.set_profile("u1", 22, Female, {"rock"});
  db.set_profile("u2", 61, Male, {"classical"});
  db.set_profile("u3", 25, Male, {"rock", "pop"});
  db.set_profile("u4", 67, Female, {"classical"});
  db.set_profile("u5", 30, Other, {"rock"});
  db.set_profile("u6", 58, Unspecified, {"classical", "pop"});
  for (const auto& e : fixture_scrobbles()) db.record_scrobble(e);
  return db;
}

std::vector<std::string> fixture_text_parts() {
  return {"beethoven", "classical", "rock", "[ALBUM]Californication", "queen or beatles", "mozart or bach",
          "rock !queen", "ode", "[ARTIST]beethoven or [TITLE]ode", "nonexistentword"};
}

std::vector<std::string> fixture_melody_parts() {
  return {"[PIT:*0+-+++-]", "[IOI:*0000-0+]", "[BTH:(*,*)(0,0)(+,0)(-,0)(+,0)(+,-)(+,0)(-,+)]",
          "[PIT:*+-+-+-+]", "[IOI:*+-0+-0+]", "[PIT:+++---]",
          "[PIT:*0+-+++-] [IOI:*0000-0+]"};
}

std::vector<std::string> fixture_queries() {
  std::vector<std::string> out = {
      "beethoven", "[ALBUM]Californication", "[ARTIST]queen or [ARTIST]beatles", "rock !queen", "joy", "[TITLE]ode",
      "[TITLE]ode !beethoven", "californication or yesterday", "[LYRICS]yesterday", "live aid", "nonexistentword",
      "[PIT:*0+-+++-]", "[IOI:*0000-0+]", "[BTH:(*,*)(0,0)(+,0)(-,0)(+,0)(+,-)(+,0)(-,+)]",
  };
  for (const auto& t : fixture_text_parts()) {
    for (const auto& m : fixture_melody_parts()) out.push_back(t + " " + m);
  }
  return out;
}

PlantedCorpus planted_corpus() {
  PlantedCorpus c;
  c.query_terms = {"ode", "joy", "beethoven"};
  c.planted = {"liveaid", "symphony", "vienna", "schiller"};
  for (int i = 0; i < 100; ++i) {
    const std::string tag = "w" + std::to_string(i);
    std::vector<std::string> words;
    if (i == 50 || i == 51) words.insert(words.end(), {"schiller", tag + "d"});
    words.push_back(tag + "a");
    if (i % 3 == 0) {
      words.push_back("beethoven");
    } else {
      words.insert(words.end(), {"ode", "to", "joy"});
    }
    if (i % 5 < 2) {
      if (i % 10 == 0) {
        words.push_back("liveaid");
      } else {
        words.insert(words.end(), {"the", tag + "b", "liveaid"});
      }
    }
    if (i % 5 == 2) words.insert(words.end(), {"of", "the", tag + "c", "symphony"});
    if (i == 3 || i == 30 || i == 60 || i == 90 || i == 99) words.insert(words.end(), {"and", "vienna"});
    if (i == 7) words.push_back("unicorn");
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    c.texts.push_back(text);
  }
  return c;
}

std::vector<DocumentHit> hits_of(const std::vector<std::string>& texts) {
  std::vector<DocumentHit> out;
  for (std::size_t i = 0; i < texts.size(); ++i) out.push_back(make_hit(static_cast<int>(i + 1), texts[i]));
  return out;
}

std::vector<UserProfile> block_profiles() {
  static const char* kGenres[] = {"rock", "classical", "jazz"};
  static const int kBaseAge[] = {20, 60, 40};
  std::vector<UserProfile> out;
  for (int i = 1; i <= 12; ++i) {
    const int block = (i - 1) % 3;
    UserProfile p;
    p.id = (i < 10 ? "p0" : "p") + std::to_string(i);
    p.age = kBaseAge[block] + (i % 4);
    p.preferred_genres = {kGenres[block]};
    out.push_back(p);
  }
  return out;
}

TempDir::TempDir() {
  static int counter = 0;
  path_ = std::filesystem::temp_directory_path() /
          ("musearch-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace musearch::testing
