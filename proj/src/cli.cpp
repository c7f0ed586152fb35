#include "musearch/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "musearch/assoc.hpp"
#include "musearch/database.hpp"
#include "musearch/input_formats.hpp"

namespace musearch::cli {

namespace {

using nlohmann::json;

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string db;
  std::string config_file;
  bool json = false;

  std::optional<double> d0, d1, insert_cost, delete_cost, substitute_cost;
  std::optional<std::size_t> k, pattern_length, top_patterns, max_iter, groups;
  std::optional<double> alpha, beta, gamma, threshold;
  std::optional<double> rel_alpha, rel_beta, rel_gamma, rel_delta;
  bool rel_raw = false;
  std::optional<std::string> corpus;

  // subcommand arguments
  std::string meta, notes, query, hum, user, file, key, value, sex;
  std::optional<TuneId> tune;
  std::optional<std::int64_t> timestamp;
  std::optional<int> age;
  std::vector<std::string> genres;
  std::size_t limit = 0;
  std::size_t top = 10;
};

Config apply_overrides(Config c, const Options& o) {
  if (!o.config_file.empty()) {
    std::ifstream in(o.config_file);
    if (!in) throw ConfigError("cannot open config file " + o.config_file);
    read_config(in, c, o.config_file);
  }
  auto set = [](auto& target, const auto& opt) {
    if (opt) target = *opt;
  };
  set(c.d0, o.d0);
  set(c.d1, o.d1);
  set(c.costs.insert_cost, o.insert_cost);
  set(c.costs.delete_cost, o.delete_cost);
  set(c.costs.substitute_cost, o.substitute_cost);
  set(c.k, o.k);
  set(c.pattern_length, o.pattern_length);
  set(c.top_patterns, o.top_patterns);
  set(c.max_iter, o.max_iter);
  set(c.groups, o.groups);
  set(c.assoc.alpha, o.alpha);
  set(c.assoc.beta, o.beta);
  set(c.assoc.gamma, o.gamma);
  set(c.assoc.threshold, o.threshold);
  set(c.relevancy.alpha, o.rel_alpha);
  set(c.relevancy.beta, o.rel_beta);
  set(c.relevancy.gamma, o.rel_gamma);
  set(c.relevancy.delta, o.rel_delta);
  if (o.rel_raw) c.relevancy.raw = true;
  set(c.corpus, o.corpus);
  if (!o.db.empty()) c.db = o.db;
  validate(c);
  return c;
}

/// A loaded database plus, for writing commands, the directory lock.
struct Session {
  std::filesystem::path path;
  std::unique_ptr<DirectoryLock> lock;
  Config persisted;
  Database db;

  void commit() {
    Config runtime = db.config();
    db.set_config(persisted);
    db.save(path, *lock);
    db.set_config(runtime);
  }
};

Session open(const Options& o, bool write) {
  if (o.db.empty()) throw UsageError("--db is required");
  Session s{o.db, nullptr, {}, Database{}};
  if (write) s.lock = std::make_unique<DirectoryLock>(s.path);
  if (std::filesystem::exists(s.path / "records.jsonl")) {
    s.db = Database::load(s.path);
    s.persisted = s.db.config();
    s.persisted.db.clear();
  } else if (write) {
    s.persisted = apply_overrides(Config{}, o);
    s.persisted.db.clear();
    s.db = Database(s.persisted);
  } else {
    throw StoreError("no database at " + o.db);
  }
  s.db.set_config(apply_overrides(s.persisted, o));
  return s;
}

std::string format_distance(const std::optional<double>& d) {
  if (!d) return "-";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << *d;
  return s.str();
}

std::string title_of(const Database& db, TuneId id) {
  const auto* r = db.find_tune(id);
  return r ? r->title : std::string{};
}

int cmd_ingest(const Options& o, std::ostream& out) {
  auto s = open(o, true);
  const auto id = s.db.ingest_files(o.meta, o.notes.empty() ? std::nullopt : std::optional<std::string>(o.notes));
  s.commit();
  const auto* r = s.db.find_tune(id);
  if (o.json) {
    out << json{{"tune_id", id}, {"title", r->title}, {"patterns", r->pattern_ids.size()}}.dump() << '\n';
  } else {
    out << "ingested tune " << id << " (" << r->title << "), " << r->pattern_ids.size() << " patterns\n";
  }
  return kExitOk;
}

int cmd_rebuild(const Options& o, std::ostream& out) {
  auto s = open(o, true);
  s.db.rebuild_spaces();
  s.commit();
  for (auto n : kAllNotations) {
    const auto& space = space_for(s.db.spaces(), n);
    if (o.json) {
      out << json{{"notation", std::string(to_string(n))},
                  {"patterns", space.size()},
                  {"clusters", space.clusters().size()},
                  {"iterations", space.iterations()},
                  {"converged", space.converged()}}
                 .dump()
          << '\n';
    } else {
      out << to_string(n) << "\t" << space.size() << " patterns\t" << space.clusters().size() << " clusters\t"
          << space.iterations() << " iterations" << (space.converged() ? "" : " (iteration cap reached)") << '\n';
    }
  }
  return kExitOk;
}

int cmd_search(const Options& o, std::ostream& out) {
  std::string text = o.query;
  const bool blank = std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
  if (blank && o.hum.empty()) throw UsageError("search needs a query or --hum");

  const bool personal = !o.user.empty();
  auto s = open(o, personal);
  if (!o.hum.empty()) {
    const auto& c = s.db.config();
    text = append_hummed_melody(text, o.hum, c.onset_grid_ms, c.k, c.pattern_length);
  }

  DNFQuery query;
  try {
    query = to_dnf(parse_query(text));
  } catch (const QueryError& e) {
    throw UsageError(std::string("bad query: ") + e.what());
  }
  const auto hits = s.db.search(query);

  std::size_t shown = o.limit ? std::min(o.limit, hits.size()) : hits.size();
  if (personal) {
    const auto ranked = s.db.rank(hits, o.user);
    s.db.add_search(o.user, text);
    s.commit();
    if (!o.json) out << "rank\ttune_id\ttitle\tdistance\tscore\n";
    for (std::size_t i = 0; i < shown; ++i) {
      const auto& r = ranked[i];
      const auto hit = std::find_if(hits.begin(), hits.end(), [&](const QueryHit& h) { return h.tune == r.tune; });
      if (o.json) {
        out << json{{"rank", i + 1},
                    {"tune_id", r.tune},
                    {"title", title_of(s.db, r.tune)},
                    {"distance", hit->distance ? json(*hit->distance) : json(nullptr)},
                    {"score", r.score}}
                   .dump()
            << '\n';
      } else {
        out << i + 1 << '\t' << r.tune << '\t' << title_of(s.db, r.tune) << '\t' << format_distance(hit->distance)
            << '\t' << std::fixed << std::setprecision(6) << r.score << std::defaultfloat << '\n';
      }
    }
    return kExitOk;
  }

  if (!o.json) out << "rank\ttune_id\ttitle\tdistance\n";
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& h = hits[i];
    if (o.json) {
      out << json{{"rank", i + 1},
                  {"tune_id", h.tune},
                  {"title", title_of(s.db, h.tune)},
                  {"distance", h.distance ? json(*h.distance) : json(nullptr)}}
                 .dump()
          << '\n';
    } else {
      out << i + 1 << '\t' << h.tune << '\t' << title_of(s.db, h.tune) << '\t' << format_distance(h.distance) << '\n';
    }
  }
  return kExitOk;
}

int cmd_assoc_mine(const Options& o, std::ostream& out) {
  auto s = open(o, true);
  const auto& cfg = s.db.config();
  if (cfg.corpus.empty()) throw UsageError("--corpus is required (or set corpus in the config)");
  if (!o.tune) throw UsageError("--tune is required");
  const auto* record = s.db.find_tune(*o.tune);
  if (!record) throw StoreError("unknown tune " + std::to_string(*o.tune));

  const CorpusSearchClient client(cfg.corpus);
  const auto scores = mine(*record, client, cfg.assoc);
  std::vector<Association> associations;
  for (const auto& sc : scores) associations.push_back({sc.word, sc.delta});
  s.db.set_associations(*o.tune, std::move(associations));
  s.commit();

  if (!o.json) out << "word\tdelta\tsupport\ttotal\tfirst_rank\n";
  for (const auto& sc : scores) {
    if (o.json) {
      out << json{{"word", sc.word}, {"delta", sc.delta}, {"support", sc.support}, {"total", sc.total},
                  {"first_rank", sc.first_rank}}
                 .dump()
          << '\n';
    } else {
      out << sc.word << '\t' << sc.delta << '\t' << sc.support << '\t' << sc.total << '\t' << sc.first_rank << '\n';
    }
  }
  return kExitOk;
}

int cmd_scrobble_add(const Options& o, std::ostream& out) {
  if (o.user.empty() || !o.tune) throw UsageError("--user and --tune are required");
  auto s = open(o, true);
  s.db.record_scrobble({o.user, *o.tune, o.timestamp.value_or(0)});
  s.commit();
  if (o.json) {
    out << json{{"user", o.user}, {"tune_id", *o.tune}, {"pop", s.db.profiles().popularity(*o.tune)}}.dump() << '\n';
  } else {
    out << "scrobbled tune " << *o.tune << " for " << o.user << '\n';
  }
  return kExitOk;
}

int cmd_scrobble_import(const Options& o, std::ostream& out) {
  std::ifstream in(o.file);
  if (!in) throw InputError(o.file, 0, "", "cannot open file");
  const auto events = read_scrobble_log(in, o.file);
  auto s = open(o, true);
  for (const auto& e : events) s.db.record_scrobble(e);
  s.commit();
  if (o.json) {
    out << json{{"imported", events.size()}}.dump() << '\n';
  } else {
    out << "imported " << events.size() << " scrobbles\n";
  }
  return kExitOk;
}

int cmd_profile_set(const Options& o, std::ostream& out) {
  if (o.user.empty()) throw UsageError("--user is required");
  auto sex = parse_sex(o.sex);
  if (!sex) throw UsageError("--sex must be female, male, other or unspecified");
  auto s = open(o, true);
  int age = o.age.value_or(0);
  std::set<std::string> genres(o.genres.begin(), o.genres.end());
  if (s.db.profiles().has_user(o.user)) {
    const auto& existing = s.db.profiles().user(o.user);
    if (!o.age) age = existing.age;
    if (o.sex.empty()) *sex = existing.sex;
    if (o.genres.empty()) genres = existing.preferred_genres;
  }
  s.db.set_profile(o.user, age, *sex, genres);
  s.commit();
  const auto group = group_of(o.user, s.db.groups());
  if (o.json) {
    out << json{{"user", o.user}, {"group", group.id}, {"group_members", group.members}}.dump() << '\n';
  } else {
    out << "profile " << o.user << " saved, group " << group.id << " (" << group.members.size() << " members)\n";
  }
  return kExitOk;
}

int cmd_recommend(const Options& o, std::ostream& out) {
  if (o.user.empty()) throw UsageError("--user is required");
  auto s = open(o, false);
  const auto recs = s.db.recommend(o.user, o.top);
  if (!o.json) out << "rank\ttune_id\ttitle\tpeer_listens\n";
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (o.json) {
      out << json{{"rank", i + 1}, {"tune_id", recs[i].tune}, {"title", title_of(s.db, recs[i].tune)},
                  {"peer_listens", recs[i].peer_listens}}
                 .dump()
          << '\n';
    } else {
      out << i + 1 << '\t' << recs[i].tune << '\t' << title_of(s.db, recs[i].tune) << '\t' << recs[i].peer_listens
          << '\n';
    }
  }
  return kExitOk;
}

int cmd_config_show(const Options& o, std::ostream& out) {
  Config base;
  if (!o.db.empty() && std::filesystem::exists(std::filesystem::path(o.db) / "records.jsonl")) {
    base = Database::load(o.db).config();
  }
  const Config c = apply_overrides(base, o);
  if (o.json) {
    json j = json::object();
    for (const auto& k : config_keys()) j[k] = get_config_value(c, k);
    out << j.dump() << '\n';
  } else {
    write_config(out, c);
  }
  return kExitOk;
}

int cmd_config_set(const Options& o, std::ostream& out) {
  auto s = open(o, true);
  set_config_value(s.persisted, o.key, o.value);
  validate(s.persisted);
  s.db.set_config(s.persisted);
  s.commit();
  out << o.key << " = " << get_config_value(s.persisted, o.key) << '\n';
  return kExitOk;
}

void add_global_options(CLI::App& app, Options& o) {
  app.add_option("--db", o.db, "Database directory");
  app.add_option("--config", o.config_file, "Config file (key = value lines)");
  app.add_flag("--json", o.json, "Machine-readable output, one JSON object per line");
  app.add_option("--d0", o.d0, "Base cluster radius");
  app.add_option("--d1", o.d1, "Melody search radius around cluster medoids");
  app.add_option("--max-iter", o.max_iter, "Clustering iteration cap");
  app.add_option("--insert-cost", o.insert_cost, "Edit cost of an insertion");
  app.add_option("--delete-cost", o.delete_cost, "Edit cost of a deletion");
  app.add_option("--substitute-cost", o.substitute_cost, "Edit cost of a substitution");
  app.add_option("--k", o.k, "Number of shortest intervals averaged into the IOI unit");
  app.add_option("--pattern-length", o.pattern_length, "Pattern length in symbols");
  app.add_option("--top", o.top_patterns, "Patterns stored per notation and tune");
  app.add_option("--groups", o.groups, "Number of user groups");
  app.add_option("--alpha", o.alpha, "Association weight of N/I");
  app.add_option("--beta", o.beta, "Association weight of the mean proximity");
  app.add_option("--gamma", o.gamma, "Association weight of the first rank");
  app.add_option("--threshold", o.threshold, "Fraction of result pages a candidate word must exceed");
  app.add_option("--rel-alpha", o.rel_alpha, "Relevancy weight of melody closeness");
  app.add_option("--rel-beta", o.rel_beta, "Relevancy weight of genre preference");
  app.add_option("--rel-gamma", o.rel_gamma, "Relevancy weight of group listening");
  app.add_option("--rel-delta", o.rel_delta, "Relevancy weight of popularity");
  app.add_flag("--rel-raw", o.rel_raw, "Use raw listened/pop counts in the relevancy");
  app.add_option("--corpus", o.corpus, "Corpus directory for association mining");
}

}  // namespace

std::string append_hummed_melody(const std::string& query, const std::string& notes_path, std::int64_t grid_ms,
                                 std::size_t k, std::size_t pattern_length) {
  const auto events = read_note_events_file(notes_path);
  const auto line = flatten(events, grid_ms);
  if (line.empty()) throw InputError(notes_path, 0, "", "no melody notes");
  const std::array<Tokens, kNotationCount> transcriptions = {to_symbols(quantize(transcribe_pit(line))),
                                                             to_symbols(quantize(transcribe_ioi(line, k))),
                                                             to_symbols(transcribe_bth(line, k))};
  std::string out = query;
  for (auto n : kAllNotations) {
    const auto& t = transcriptions[static_cast<std::size_t>(n)];
    const auto best = extract_patterns<Symbol>(t, pattern_length, 1);
    out += " [" + std::string(to_string(n)) + ":" + render(n, best.front().tokens) + "]";
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Music search engine: text and melody indexes with personalised ranking", "musearch"};
  app.require_subcommand(1);
  add_global_options(app, o);

  auto* ingest = app.add_subcommand("ingest", "Add or replace a tune from a metadata file and a note file");
  ingest->add_option("--meta", o.meta, "Metadata file (key: value lines)")->required();
  ingest->add_option("--notes", o.notes, "Note events (CSV or JSON lines)");

  auto* rebuild = app.add_subcommand("rebuild", "Re-cluster all pattern spaces");

  auto* search = app.add_subcommand("search", "Run a query");
  search->add_option("query", o.query, "Query text")->required();
  search->add_option("--hum", o.hum, "Note file whose melody is appended to the query");
  search->add_option("--user", o.user, "Order results for this user");
  search->add_option("--limit", o.limit, "Show at most this many results");

  auto* assoc = app.add_subcommand("assoc", "Free associations");
  assoc->require_subcommand(1);
  auto* assoc_mine = assoc->add_subcommand("mine", "Mine associations of a tune from the corpus");
  assoc_mine->add_option("--tune", o.tune, "Tune id")->required();

  auto* scrobble = app.add_subcommand("scrobble", "Record listening");
  scrobble->require_subcommand(1);
  auto* scrobble_add = scrobble->add_subcommand("add", "Record one listen");
  scrobble_add->add_option("--user", o.user)->required();
  scrobble_add->add_option("--tune", o.tune)->required();
  scrobble_add->add_option("--timestamp", o.timestamp);
  auto* scrobble_import = scrobble->add_subcommand("import", "Import a user_id,tune_id,timestamp log");
  scrobble_import->add_option("file", o.file)->required();

  auto* profile = app.add_subcommand("profile", "User profiles");
  profile->require_subcommand(1);
  auto* profile_set = profile->add_subcommand("set", "Create or update a profile");
  profile_set->add_option("--user", o.user)->required();
  profile_set->add_option("--age", o.age);
  profile_set->add_option("--sex", o.sex);
  profile_set->add_option("--genre", o.genres, "Preferred genre (repeatable)");

  auto* rec = app.add_subcommand("recommend", "Suggest tunes listened by group peers");
  rec->add_option("--user", o.user)->required();
  rec->add_option("--top", o.top, "Number of suggestions");

  auto* config = app.add_subcommand("config", "Show or change configuration");
  config->require_subcommand(1);
  auto* config_show = config->add_subcommand("show", "Print every parameter");
  auto* config_set = config->add_subcommand("set", "Change a stored parameter");
  config_set->add_option("key", o.key)->required();
  config_set->add_option("value", o.value)->required();

  for (auto* sub : {ingest, rebuild, search, assoc, assoc_mine, scrobble, scrobble_add, scrobble_import, profile,
                    profile_set, rec, config, config_show, config_set}) {
    sub->fallthrough();
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*ingest) return cmd_ingest(o, out);
    if (*rebuild) return cmd_rebuild(o, out);
    if (*search) return cmd_search(o, out);
    if (*assoc_mine) return cmd_assoc_mine(o, out);
    if (*scrobble_add) return cmd_scrobble_add(o, out);
    if (*scrobble_import) return cmd_scrobble_import(o, out);
    if (*profile_set) return cmd_profile_set(o, out);
    if (*rec) return cmd_recommend(o, out);
    if (*config_show) return cmd_config_show(o, out);
    if (*config_set) return cmd_config_set(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace musearch::cli
