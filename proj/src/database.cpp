#include "musearch/database.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "musearch/space_io.hpp"

namespace musearch {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Locking

DirectoryLock::DirectoryLock(fs::path directory) : directory_(std::move(directory)), file_(directory_ / "LOCK") {
  std::error_code ec;
  fs::create_directories(directory_, ec);
  const int fd = ::open(file_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) throw StoreError("database is locked by another writer: " + file_.string());
  const auto pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(file_, ec);
}

// ---------------------------------------------------------------------------
// Scrobble log

namespace {

bool valid_user_id(std::string_view id) {
  return !id.empty() && std::none_of(id.begin(), id.end(), [](unsigned char c) {
    return c == ',' || std::isspace(c) || std::iscntrl(c);
  });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename Int>
Int parse_field_int(std::string_view text, const std::string& source, std::size_t line, const char* field) {
  text = trim(text);
  Int v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InputError(source, line, field, "expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::vector<ScrobbleEvent> read_scrobble_log(std::istream& in, const std::string& source) {
  std::vector<ScrobbleEvent> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto c1 = text.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : text.find(',', c1 + 1);
    if (c2 == std::string_view::npos || text.find(',', c2 + 1) != std::string_view::npos) {
      throw InputError(source, line, "", "expected 'user_id,tune_id,timestamp'");
    }
    ScrobbleEvent e;
    e.user = std::string(trim(text.substr(0, c1)));
    if (!valid_user_id(e.user)) throw InputError(source, line, "user_id", "invalid user id");
    e.tune = parse_field_int<TuneId>(text.substr(c1 + 1, c2 - c1 - 1), source, line, "tune_id");
    e.timestamp = parse_field_int<std::int64_t>(text.substr(c2 + 1), source, line, "timestamp");
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Database

Database::Database(Config config) : config_(std::move(config)), spaces_(make_space_set(config_.clustering())) {
  validate(config_);
}

void Database::set_config(Config config) {
  validate(config);
  const bool regroup_needed = config.groups != config_.groups;
  config_ = std::move(config);
  if (regroup_needed) regroup();
}

const TuneRecord* Database::find_tune(TuneId id) const {
  auto it = tunes_.find(id);
  return it == tunes_.end() ? nullptr : &it->second;
}

std::optional<TuneId> Database::match_existing(const TuneMetadata& metadata) const {
  if (metadata.id) return metadata.id;
  const auto& r = metadata.record;
  for (const auto& [id, t] : tunes_) {
    if (t.title == r.title && t.artists == r.artists && t.release == r.release) return id;
  }
  return std::nullopt;
}

TuneId Database::ingest_tune(const TuneMetadata& metadata, const std::vector<NoteEvent>& notes) {
  if (metadata.record.title.empty() && metadata.record.lyrics.empty() && metadata.record.artists.empty()) {
    throw StoreError("tune metadata needs at least a title, lyrics or an artist");
  }
  const auto existing = match_existing(metadata);
  const TuneId id = existing.value_or(next_tune_);
  if (id == 0) throw StoreError("tune id 0 is reserved");

  // Build everything before touching state so a bad melody leaves no trace.
  const MonophonicLine line = flatten(notes, config_.onset_grid_ms);
  std::vector<Pattern> patterns;
  if (!line.empty()) {
    const std::array<Tokens, kNotationCount> transcriptions = {
        to_symbols(quantize(transcribe_pit(line))), to_symbols(quantize(transcribe_ioi(line, config_.k))),
        to_symbols(transcribe_bth(line, config_.k))};
    PatternId next = next_pattern_;
    for (auto n : kAllNotations) {
      const auto& t = transcriptions[static_cast<std::size_t>(n)];
      for (auto& f : extract_patterns<Symbol>(t, config_.pattern_length, config_.top_patterns)) {
        patterns.push_back({next++, n, std::move(f.tokens), id});
      }
    }
  }

  if (tunes_.contains(id)) {
    for (auto& s : spaces_) s.remove_tune(id);
  }
  TuneRecord record = metadata.record;
  record.id = id;
  record.pattern_ids.clear();
  for (auto& p : patterns) {
    record.pattern_ids.push_back(p.id);
    next_pattern_ = std::max(next_pattern_, p.id + 1);
    space_for(spaces_, p.notation).insert(std::move(p));
  }
  text_.index_tune(record);
  tunes_[id] = std::move(record);
  next_tune_ = std::max(next_tune_, id + 1);
  return id;
}

TuneId Database::ingest_files(const std::string& metadata_path, const std::optional<std::string>& notes_path) {
  const auto metadata = read_tune_metadata_file(metadata_path);
  std::vector<NoteEvent> notes;
  if (notes_path) notes = read_note_events_file(*notes_path);
  return ingest_tune(metadata, notes);
}

void Database::remove_tune(TuneId id) {
  if (!tunes_.contains(id)) throw StoreError("unknown tune " + std::to_string(id));
  for (auto& s : spaces_) s.remove_tune(id);
  text_.remove_tune(id);
  tunes_.erase(id);
  profiles_.forget_tune(id);
  std::erase_if(scrobbles_, [id](const ScrobbleEvent& e) { return e.tune == id; });
}

void Database::set_associations(TuneId id, std::vector<Association> associations) {
  auto it = tunes_.find(id);
  if (it == tunes_.end()) throw StoreError("unknown tune " + std::to_string(id));
  it->second.associations = std::move(associations);
  text_.index_tune(it->second);
}

void Database::rebuild_spaces() {
  for (auto n : kAllNotations) {
    auto& s = space_for(spaces_, n);
    s = build_clusters(n, s.members(), config_.clustering());
  }
}

std::vector<QueryHit> Database::search(const DNFQuery& query) const {
  return execute(query, text_, spaces_, config_.d1);
}

std::vector<QueryHit> Database::search(std::string_view query) const { return search(to_dnf(parse_query(query))); }

void Database::regroup() { groups_ = assign_groups(profiles_.profiles(), config_.groups); }

void Database::set_profile(const UserId& id, int age, Sex sex, const std::set<std::string>& genres) {
  if (!valid_user_id(id)) throw ProfileError("user id must be non-empty without commas or spaces: '" + id + "'");
  profiles_.set_profile(id, age, sex, genres);
  regroup();
}

void Database::add_search(const UserId& id, std::string query) { profiles_.add_search(id, std::move(query)); }

void Database::record_scrobble(const ScrobbleEvent& e) {
  profiles_.record_scrobble(e, [this](TuneId t) { return tunes_.contains(t); });
  scrobbles_.push_back(e);
}

std::vector<RankedTune> Database::rank(const std::vector<QueryHit>& hits, const UserId& user) const {
  std::vector<Candidate> candidates;
  candidates.reserve(hits.size());
  for (const auto& h : hits) candidates.push_back({h.tune, h.distance.value_or(0.0)});
  return rank_results(candidates, profiles_.user(user), groups_, profiles_,
                      [this](TuneId t) {
                        const auto* r = find_tune(t);
                        return r ? r->genre : std::string{};
                      },
                      config_.relevancy);
}

std::vector<Recommendation> Database::recommend(const UserId& user, std::size_t top) const {
  return musearch::recommend(profiles_.user(user), groups_, profiles_, top);
}

std::vector<std::string> Database::check_integrity() const {
  std::vector<std::string> problems;
  std::map<PatternId, std::pair<Notation, TuneId>> stored;
  for (auto n : kAllNotations) {
    const auto& s = space_for(spaces_, n);
    if (s.notation() != n) problems.push_back("space slot holds the wrong notation");
    for (const auto& c : s.clusters()) {
      for (const auto& m : c.members) {
        if (!stored.emplace(m.id, std::make_pair(n, m.tune_id)).second) {
          problems.push_back("pattern " + std::to_string(m.id) + " stored more than once");
        }
        if (c.medoid.tokens.size() && s.distance(c.medoid.tokens, m.tokens) > c.radius) {
          problems.push_back("pattern " + std::to_string(m.id) + " outside its cluster radius");
        }
      }
    }
  }
  std::set<PatternId> referenced;
  for (const auto& [id, t] : tunes_) {
    if (t.id != id) problems.push_back("tune " + std::to_string(id) + " stored under the wrong id");
    for (auto p : t.pattern_ids) {
      referenced.insert(p);
      auto it = stored.find(p);
      if (it == stored.end()) {
        problems.push_back("tune " + std::to_string(id) + " references missing pattern " + std::to_string(p));
      } else if (it->second.second != id) {
        problems.push_back("pattern " + std::to_string(p) + " belongs to another tune");
      }
    }
  }
  for (const auto& [p, where] : stored) {
    if (!referenced.contains(p)) problems.push_back("orphan pattern " + std::to_string(p));
  }
  for (auto id : text_.tunes()) {
    if (!tunes_.contains(id)) problems.push_back("text index references missing tune " + std::to_string(id));
  }
  for (std::size_t t = 0; t < TextIndex::kTreeCount; ++t) {
    for (const auto& [term, postings] : text_.tree(static_cast<TextIndex::Tree>(t)).entries()) {
      for (auto id : postings) {
        if (!tunes_.contains(id)) problems.push_back("posting for '" + term + "' references missing tune");
      }
    }
  }
  for (const auto& e : scrobbles_) {
    if (!tunes_.contains(e.tune)) problems.push_back("scrobble of missing tune " + std::to_string(e.tune));
    if (!profiles_.has_user(e.user)) problems.push_back("scrobble by unknown user " + e.user);
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr const char* kRecordsMagic = "musearch-records";
constexpr const char* kProfilesMagic = "musearch-profiles";
constexpr const char* kScrobblesMagic = "musearch-scrobbles";
constexpr const char* kConfigMagic = "musearch-config";

std::string space_file(Notation n) {
  std::string name(to_string(n));
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  return "space_" + name + ".jsonl";
}

json record_json(const TuneRecord& r) {
  json artists = json::array();
  for (const auto& a : r.artists) artists.push_back({{"name", a.name}, {"role", std::string(to_string(a.role))}});
  json performances = json::array();
  for (const auto& p : r.performances) performances.push_back({{"event", p.event}, {"date", p.date}});
  json associations = json::array();
  for (const auto& a : r.associations) associations.push_back({{"word", a.word}, {"delta", a.delta}});
  json release = nullptr;
  if (r.release) {
    release = {{"kind", std::string(to_string(r.release->kind))}, {"name", r.release->name}};
    release["year"] = r.release->year ? json(*r.release->year) : json(nullptr);
  }
  return {{"id", r.id},           {"title", r.title},
          {"lyrics", r.lyrics},   {"genre", r.genre},
          {"artists", artists},   {"release", release},
          {"performances", performances}, {"company", r.company},
          {"associations", associations}, {"pattern_ids", r.pattern_ids}};
}

TuneRecord record_from(const json& j) {
  TuneRecord r;
  r.id = j.at("id").get<TuneId>();
  r.title = j.at("title").get<std::string>();
  r.lyrics = j.at("lyrics").get<std::string>();
  r.genre = j.at("genre").get<std::string>();
  for (const auto& a : j.at("artists")) {
    auto role = parse_artist_role(a.at("role").get<std::string>());
    if (!role) throw CorruptFileError("unknown artist role");
    r.artists.push_back({a.at("name").get<std::string>(), *role});
  }
  const auto& rel = j.at("release");
  if (!rel.is_null()) {
    auto kind = parse_release_kind(rel.at("kind").get<std::string>());
    if (!kind) throw CorruptFileError("unknown release kind");
    Release out{*kind, rel.at("name").get<std::string>(), std::nullopt};
    if (!rel.at("year").is_null()) out.year = rel.at("year").get<int>();
    r.release = out;
  }
  for (const auto& p : j.at("performances")) {
    r.performances.push_back({p.at("event").get<std::string>(), p.at("date").get<std::string>()});
  }
  r.company = j.at("company").get<std::string>();
  for (const auto& a : j.at("associations")) {
    r.associations.push_back({a.at("word").get<std::string>(), a.at("delta").get<double>()});
  }
  r.pattern_ids = j.at("pattern_ids").get<std::vector<PatternId>>();
  return r;
}

// Writes `content` next to `target` and renames it into place.
void write_file(const fs::path& target, const std::string& content) {
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw StoreError("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptFileError("missing database file " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Header/trailer framed JSON Lines; returns the body lines' JSON.
std::vector<json> read_framed(const fs::path& path, const char* magic, json& header) {
  std::istringstream in(read_file(path));
  const std::string source = path.filename().string();
  std::vector<json> body;
  std::string line;
  std::size_t no = 0;
  auto parse = [&](const std::string& text) {
    try {
      return json::parse(text);
    } catch (const json::parse_error&) {
      throw CorruptFileError(source + ":" + std::to_string(no) + ": not valid JSON");
    }
  };
  if (!std::getline(in, line)) throw CorruptFileError(source + ": empty file");
  ++no;
  header = parse(line);
  if (!header.is_object() || header.value("format", "") != magic) throw CorruptFileError(source + ": bad header");
  const int version = header.value("version", -1);
  if (version != kStoreFormatVersion) {
    throw VersionMismatchError(source + ": format version " + std::to_string(version) + ", expected " +
                               std::to_string(kStoreFormatVersion));
  }
  const auto count = header.at("count").get<std::size_t>();
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw CorruptFileError(source + ": truncated");
    ++no;
    body.push_back(parse(line));
  }
  if (!std::getline(in, line)) throw CorruptFileError(source + ": truncated, trailer missing");
  ++no;
  const json trailer = parse(line);
  if (trailer.value("end", "") != magic || trailer.value("count", std::size_t{0}) != count) {
    throw CorruptFileError(source + ": bad trailer");
  }
  if (std::getline(in, line)) throw CorruptFileError(source + ": data after trailer");
  return body;
}

std::string framed(const char* magic, json header, const std::vector<json>& body) {
  header["format"] = magic;
  header["version"] = kStoreFormatVersion;
  header["count"] = body.size();
  std::string out = header.dump() + "\n";
  for (const auto& j : body) out += j.dump() + "\n";
  out += json{{"end", magic}, {"count", body.size()}}.dump() + "\n";
  return out;
}

}  // namespace

void Database::save(const fs::path& directory) const {
  DirectoryLock lock(directory);
  save(directory, lock);
}

void Database::save(const fs::path& directory, const DirectoryLock& lock) const {
  if (fs::absolute(lock.directory()).lexically_normal() != fs::absolute(directory).lexically_normal()) {
    throw StoreError("lock does not cover " + directory.string());
  }
  fs::create_directories(directory);

  {
    std::ostringstream cfg;
    cfg << "# " << kConfigMagic << ' ' << kStoreFormatVersion << '\n';
    Config stored = config_;
    stored.db.clear();
    write_config(cfg, stored);
    cfg << "# end\n";
    write_file(directory / "config.txt", cfg.str());
  }

  std::vector<json> records;
  for (const auto& [id, r] : tunes_) records.push_back(record_json(r));
  write_file(directory / "records.jsonl",
             framed(kRecordsMagic, {{"next_tune", next_tune_}, {"next_pattern", next_pattern_}}, records));

  for (auto n : kAllNotations) {
    std::ostringstream out;
    write_space(out, space_for(spaces_, n));
    write_file(directory / space_file(n), out.str());
  }

  std::vector<json> users;
  for (const auto& u : profiles_.profiles()) {
    users.push_back({{"id", u.id},
                     {"age", u.age},
                     {"sex", std::string(to_string(u.sex))},
                     {"genres", u.preferred_genres},
                     {"history", u.search_history}});
  }
  write_file(directory / "profiles.jsonl", framed(kProfilesMagic, json::object(), users));

  std::ostringstream log;
  log << "# " << kScrobblesMagic << ' ' << kStoreFormatVersion << '\n';
  for (const auto& e : scrobbles_) log << e.user << ',' << e.tune << ',' << e.timestamp << '\n';
  log << "# end " << scrobbles_.size() << '\n';
  write_file(directory / "scrobbles.log", log.str());
}

Database Database::load(const fs::path& directory) {
  if (!fs::is_directory(directory)) throw StoreError("no database at " + directory.string());
  try {
    Config config;
    {
      const std::string text = read_file(directory / "config.txt");
      const std::string header = "# " + std::string(kConfigMagic) + ' ';
      if (text.rfind(header, 0) != 0) throw CorruptFileError("config.txt: bad header");
      const auto eol = text.find('\n');
      if (text.substr(header.size(), eol - header.size()) != std::to_string(kStoreFormatVersion)) {
        throw VersionMismatchError("config.txt: unsupported format version");
      }
      if (text.size() < 6 || text.compare(text.size() - 6, 6, "# end\n") != 0) {
        throw CorruptFileError("config.txt: truncated");
      }
      std::istringstream in(text);
      read_config(in, config, "config.txt");
      config.db = directory.string();
    }
    Database db(config);

    json header;
    for (const auto& j : read_framed(directory / "records.jsonl", kRecordsMagic, header)) {
      TuneRecord r = record_from(j);
      const TuneId id = r.id;
      db.text_.index_tune(r);
      if (!db.tunes_.emplace(id, std::move(r)).second) throw CorruptFileError("records.jsonl: duplicate tune id");
    }
    db.next_tune_ = header.at("next_tune").get<TuneId>();
    db.next_pattern_ = header.at("next_pattern").get<PatternId>();

    for (auto n : kAllNotations) {
      std::istringstream in(read_file(directory / space_file(n)));
      auto space = read_space(in, space_file(n));
      if (space.notation() != n) throw CorruptFileError(space_file(n) + ": wrong notation");
      space_for(db.spaces_, n) = std::move(space);
    }

    for (const auto& j : read_framed(directory / "profiles.jsonl", kProfilesMagic, header)) {
      const auto id = j.at("id").get<std::string>();
      auto sex = parse_sex(j.at("sex").get<std::string>());
      if (!sex) throw CorruptFileError("profiles.jsonl: unknown sex value");
      db.profiles_.set_profile(id, j.at("age").get<int>(), *sex, j.at("genres").get<std::set<std::string>>());
      for (const auto& q : j.at("history")) db.profiles_.add_search(id, q.get<std::string>());
    }

    {
      const std::string text = read_file(directory / "scrobbles.log");
      const std::string header_line = "# " + std::string(kScrobblesMagic) + ' ';
      if (text.rfind(header_line, 0) != 0) throw CorruptFileError("scrobbles.log: bad header");
      std::istringstream in(text);
      const auto events = read_scrobble_log(in, "scrobbles.log");
      const std::string trailer = "# end " + std::to_string(events.size()) + "\n";
      if (text.size() < trailer.size() || text.compare(text.size() - trailer.size(), trailer.size(), trailer) != 0) {
        throw CorruptFileError("scrobbles.log: truncated");
      }
      for (const auto& e : events) db.record_scrobble(e);
    }
    db.regroup();

    const auto problems = db.check_integrity();
    if (!problems.empty()) throw CorruptFileError("integrity check failed: " + problems.front());
    return db;
  } catch (const json::exception& e) {
    throw CorruptFileError(std::string("malformed database file: ") + e.what());
  } catch (const InputError& e) {
    throw CorruptFileError(e.what());
  } catch (const ConfigError& e) {
    throw CorruptFileError(e.what());
  } catch (const ProfileError& e) {
    throw CorruptFileError(e.what());
  }
}

}  // namespace musearch
