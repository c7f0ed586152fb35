#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "musearch/error.hpp"
#include "musearch/tune.hpp"

namespace musearch {

using UserId = std::string;

struct ScrobbleEvent {
  UserId user;
  TuneId tune = 0;
  std::int64_t timestamp = 0;

  friend bool operator==(const ScrobbleEvent&, const ScrobbleEvent&) = default;
};

enum class Sex { Unspecified, Female, Male, Other };

std::string_view to_string(Sex s);
std::optional<Sex> parse_sex(std::string_view text);

struct UserProfile {
  UserId id;
  int age = 0;
  Sex sex = Sex::Unspecified;
  std::set<std::string> preferred_genres;  ///< normalized genre names
  std::vector<std::string> search_history;
  std::map<TuneId, std::uint64_t> scrobble_counts;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

struct Group {
  std::size_t id = 0;
  std::vector<UserId> members;  ///< sorted

  friend bool operator==(const Group&, const Group&) = default;
};

class ProfileError : public Error {
 public:
  using Error::Error;
};

/// Genre names are compared after tokenizing and rejoining with spaces.
std::string normalize_genre(std::string_view genre);

/// User profiles plus the global listen counter fed by scrobbles.
class ProfileRegistry {
 public:
  /// Creates or updates the static part of a profile; scrobble counts and
  /// search history are kept.
  void set_profile(const UserId& id, int age, Sex sex, const std::set<std::string>& genres);
  void add_search(const UserId& id, std::string query);

  /// Counts the listen for the user and globally. Throws ProfileError for
  /// an unknown user or a tune rejected by `tune_exists`.
  void record_scrobble(const ScrobbleEvent& e, const std::function<bool(TuneId)>& tune_exists);

  /// Forgets every listen of `tune`.
  void forget_tune(TuneId tune);

  bool has_user(const UserId& id) const { return users_.contains(id); }
  const UserProfile& user(const UserId& id) const;
  std::vector<UserProfile> profiles() const;
  std::uint64_t popularity(TuneId tune) const;

  friend bool operator==(const ProfileRegistry&, const ProfileRegistry&) = default;

 private:
  std::map<UserId, UserProfile> users_;
  std::map<TuneId, std::uint64_t> popularity_;
};

/// Partitions users into at most `g` groups by k-means over a feature
/// vector of genre indicators plus age scaled to [0, 1]. The first `g`
/// users in id order seed the centres; groups that end up empty are
/// dropped. Throws ProfileError when g is 0.
std::vector<Group> assign_groups(std::vector<UserProfile> profiles, std::size_t g);

/// The group containing `user`, or a singleton group when none does.
Group group_of(const UserId& user, const std::vector<Group>& groups);

struct RelevancyParams {
  double alpha = 1.0;
  double beta = 0.5;
  double gamma = 0.25;
  double delta = 0.25;
  bool raw = false;  ///< use raw listened/pop counts instead of normalized ones

  friend bool operator==(const RelevancyParams&, const RelevancyParams&) = default;
};

void validate(const RelevancyParams& params);

/// Inputs of the ordering factor for one candidate.
struct RelevancyTerms {
  double distance = 0.0;   ///< melody distance, 0 for text-only matches
  double gen = 0.0;        ///< preference fit in [0, 1]
  double listened = 0.0;   ///< peers who listened
  double pop = 0.0;        ///< global listen count
  double group_size = 1.0;
  double max_pop = 0.0;    ///< largest pop among the candidates
};

/// alpha / (1 + distance) + beta * gen + gamma * listened / group_size
///   + delta * pop / max_pop (higher is better). In raw mode listened and
/// pop enter unscaled.
double relevancy(const RelevancyTerms& t, const RelevancyParams& params);

struct RankedTune {
  TuneId tune = 0;
  double distance = 0.0;
  double score = 0.0;
  double gen = 0.0;
  std::size_t listened = 0;
  std::uint64_t pop = 0;
};

struct Candidate {
  TuneId tune = 0;
  double distance = 0.0;
};

/// Fraction of the user's preferred genres equal to the tune's genre.
double genre_fit(const UserProfile& user, std::string_view tune_genre);

/// Orders candidates by descending relevancy, then ascending distance, then
/// tune id. `genre_of` maps a tune to its genre.
std::vector<RankedTune> rank_results(const std::vector<Candidate>& candidates, const UserProfile& user,
                                     const std::vector<Group>& groups, const ProfileRegistry& registry,
                                     const std::function<std::string(TuneId)>& genre_of,
                                     const RelevancyParams& params);

struct Recommendation {
  TuneId tune = 0;
  std::uint64_t peer_listens = 0;

  friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

/// Tunes the user's group peers listened to and the user has not, most
/// listened first (ties by tune id), at most `top` of them.
std::vector<Recommendation> recommend(const UserProfile& user, const std::vector<Group>& groups,
                                      const ProfileRegistry& registry, std::size_t top);

}  // namespace musearch
