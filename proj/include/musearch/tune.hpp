#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace musearch {

using TuneId = std::uint64_t;
using PatternId = std::uint64_t;

enum class ArtistRole { Composer, Lyricist, Performer };
enum class ReleaseKind { Album, Single, Bootleg };

std::string_view to_string(ArtistRole role);
std::string_view to_string(ReleaseKind kind);
std::optional<ArtistRole> parse_artist_role(std::string_view text);
std::optional<ReleaseKind> parse_release_kind(std::string_view text);

struct Artist {
  std::string name;
  ArtistRole role = ArtistRole::Performer;

  friend bool operator==(const Artist&, const Artist&) = default;
};

struct Release {
  ReleaseKind kind = ReleaseKind::Album;
  std::string name;
  std::optional<int> year;

  friend bool operator==(const Release&, const Release&) = default;
};

struct Performance {
  std::string event;
  std::string date;

  friend bool operator==(const Performance&, const Performance&) = default;
};

/// A mined free association: lower `delta` means a stronger association.
struct Association {
  std::string word;
  double delta = 0.0;

  friend bool operator==(const Association&, const Association&) = default;
};

/// Everything the database knows about one tune.
struct TuneRecord {
  TuneId id = 0;
  std::string title;
  std::string lyrics;
  std::string genre;
  std::vector<Artist> artists;
  std::optional<Release> release;
  std::vector<Performance> performances;
  std::string company;
  std::vector<Association> associations;
  std::vector<PatternId> pattern_ids;

  friend bool operator==(const TuneRecord&, const TuneRecord&) = default;
};

}  // namespace musearch
