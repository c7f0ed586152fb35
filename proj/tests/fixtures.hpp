#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "musearch/assoc.hpp"
#include "musearch/database.hpp"
#include "musearch/melody.hpp"
#include "musearch/pattern_space.hpp"
#include "musearch/profile.hpp"

namespace musearch::testing {

// Ode to Joy listings as printed for the reference fragment.
inline constexpr std::string_view kOdePit =
    "* 0 2 -4 2 2 1 -1 -4 2 2 1 -1 -2 -2 2 -7 9 0 1 2 0 -2 -1 -2 -2 0 2 2 -2 -2 0";
inline constexpr std::string_view kOdeQuantPit =
    "* 0 + - + + + - - + + + - - - + - + 0 + + 0 - - - - 0 + + - - 0";
inline constexpr std::string_view kOdeIoi = "2 2 2 2 2 1 1 2 2 2 1 1 2 2 2 2 4 2 2 2 2 2 2 2 2 2 2 2 2 2 1 4";
inline constexpr std::string_view kOdeQuantIoi =
    "* 0 0 0 0 - 0 + 0 0 - 0 + 0 0 0 + - 0 0 0 0 0 0 0 0 0 0 0 0 - +";
inline constexpr std::string_view kOdePrintedBth =
    "(*,*)(0,0)(+,0)(-,0)(+,-)(+,0)(-,+)(-,0)(+,0)(+,-)(+,0)(-,+)(-,0)(-,0)(+,0)(-,+)(+,-)(0,0)(+,0)(+,0)"
    "(0,0)(-,0)(-,0)(-,0)(-,0)(0,0)(+,0)(+,0)(-,0)(-,-)(0,+)";
inline constexpr int kOdeStartPitch = 64;
inline constexpr double kOdeUnitMs = 250.0;

/// First eight quantified PIT symbols of the Ode; one of its stored patterns.
inline constexpr std::string_view kOdeFragment = "*0+-+++-";

MonophonicLine ode_line();
std::vector<NoteEvent> ode_events();

std::filesystem::path data_path(std::string_view name);

/// Deterministic generator; draws do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }
  double unit() { return static_cast<double>(engine_() >> 11) / 9007199254740992.0; }

 private:
  std::mt19937_64 engine_;
};

Tokens random_tokens(Rng& rng, Notation notation, std::size_t length, bool leading_wildcard = false);
/// `count` patterns of the notation with lengths in [min_len, max_len],
/// pattern ids 1..count and tune ids 1 + i / per_tune.
std::vector<Pattern> synthetic_patterns(Notation notation, std::size_t count, std::uint64_t seed,
                                        std::size_t min_len = 6, std::size_t max_len = 10, std::size_t per_tune = 3);
Pattern make_pattern(Notation notation, std::string_view rendered, PatternId id = 0, TuneId tune = 0);

/// A random melody of `notes` notes.
std::vector<NoteEvent> random_melody(Rng& rng, std::size_t notes);

inline constexpr TuneId kOdeTune = 1;
inline constexpr TuneId kOdeToMyFamilyTune = 19;
inline constexpr TuneId kTextOnlyTune = 20;

/// Twenty tunes: Beethoven and other classical pieces, the Californication
/// album, a few rock and pop songs. Tune 19 hums a transposed Ode; tune 20
/// has no melody. Six users in two taste blocks with seeded scrobbles.
Database fixture_database(const Config& config = {});
std::vector<std::string> fixture_users();
std::vector<ScrobbleEvent> fixture_scrobbles();

/// Text, melody and combined queries over the fixture database.
std::vector<std::string> fixture_queries();
/// Text-only queries and melody literals crossed for the constraint check.
std::vector<std::string> fixture_text_parts();
std::vector<std::string> fixture_melody_parts();

/// Result pages with planted associations for the query terms ode/joy/beethoven.
struct PlantedCorpus {
  std::vector<std::string> texts;  ///< rank i + 1 is texts[i]
  std::set<std::string> query_terms;
  std::set<std::string> planted;   ///< words in more than 1% of pages
};
PlantedCorpus planted_corpus();
std::vector<DocumentHit> hits_of(const std::vector<std::string>& texts);

/// Twelve users in three genre blocks; ids interleave the blocks.
std::vector<UserProfile> block_profiles();

/// Temporary directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace musearch::testing
