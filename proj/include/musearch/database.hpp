#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "musearch/config.hpp"
#include "musearch/input_formats.hpp"
#include "musearch/profile.hpp"
#include "musearch/query.hpp"
#include "musearch/text_index.hpp"

namespace musearch {

inline constexpr int kStoreFormatVersion = 1;

class StoreError : public Error {
 public:
  using Error::Error;
};

/// Exclusive advisory lock on a database directory, held as a LOCK file
/// created with O_EXCL semantics. Throws StoreError when already held.
class DirectoryLock {
 public:
  explicit DirectoryLock(std::filesystem::path directory);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

  const std::filesystem::path& directory() const noexcept { return directory_; }

 private:
  std::filesystem::path directory_;
  std::filesystem::path file_;
};

/// Reads a scrobble log: `user_id,tune_id,timestamp` per line, '#' comments.
std::vector<ScrobbleEvent> read_scrobble_log(std::istream& in, const std::string& source = "<scrobbles>");

/// The whole searchable state: tune records, their text trees, one pattern
/// space per notation, user profiles, groups and the scrobble log.
class Database {
 public:
  explicit Database(Config config = {});

  const Config& config() const noexcept { return config_; }
  /// Clustering options take effect at the next rebuild_spaces().
  void set_config(Config config);

  const std::map<TuneId, TuneRecord>& tunes() const noexcept { return tunes_; }
  const TuneRecord* find_tune(TuneId id) const;
  const TextIndex& text() const noexcept { return text_; }
  const SpaceSet& spaces() const noexcept { return spaces_; }

  /// Flattens and transcribes the notes, stores the most frequent fragments
  /// of every notation in its space and indexes the text fields. A tune
  /// with the same id, or with no id but the same title, artists and
  /// release, is replaced. No notes means a text-only record.
  TuneId ingest_tune(const TuneMetadata& metadata, const std::vector<NoteEvent>& notes);
  TuneId ingest_files(const std::string& metadata_path, const std::optional<std::string>& notes_path);

  void remove_tune(TuneId id);
  void set_associations(TuneId id, std::vector<Association> associations);

  /// Re-clusters all three spaces from scratch.
  void rebuild_spaces();

  std::vector<QueryHit> search(const DNFQuery& query) const;
  std::vector<QueryHit> search(std::string_view query) const;

  const ProfileRegistry& profiles() const noexcept { return profiles_; }
  const std::vector<Group>& groups() const noexcept { return groups_; }
  void set_profile(const UserId& id, int age, Sex sex, const std::set<std::string>& genres);
  void add_search(const UserId& id, std::string query);
  void record_scrobble(const ScrobbleEvent& e);
  const std::vector<ScrobbleEvent>& scrobble_log() const noexcept { return scrobbles_; }

  std::vector<RankedTune> rank(const std::vector<QueryHit>& hits, const UserId& user) const;
  std::vector<Recommendation> recommend(const UserId& user, std::size_t top) const;

  /// Referential integrity violations; empty when the database is sound.
  std::vector<std::string> check_integrity() const;

  /// Writes the directory layout described in docs/FORMATS.md. Every file
  /// is written to a temporary name first and renamed into place.
  void save(const std::filesystem::path& directory) const;
  void save(const std::filesystem::path& directory, const DirectoryLock& lock) const;

  /// Reads a saved directory into a fresh database. Throws
  /// VersionMismatchError, CorruptFileError or StoreError; nothing is
  /// returned on failure.
  static Database load(const std::filesystem::path& directory);

 private:
  std::optional<TuneId> match_existing(const TuneMetadata& metadata) const;
  void regroup();

  Config config_;
  std::map<TuneId, TuneRecord> tunes_;
  TextIndex text_;
  SpaceSet spaces_;
  ProfileRegistry profiles_;
  std::vector<Group> groups_;
  std::vector<ScrobbleEvent> scrobbles_;
  TuneId next_tune_ = 1;
  PatternId next_pattern_ = 1;
};

}  // namespace musearch
