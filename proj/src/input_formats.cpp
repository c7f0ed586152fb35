#include "musearch/input_formats.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include "json.hpp"
#include <sstream>

#include "musearch/error.hpp"

namespace musearch {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

template <typename Int>
Int parse_integer(std::string_view text, const std::string& source, std::size_t line, const char* field) {
  text = trim(text);
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InputError(source, line, field, "expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

bool parse_flag(std::string_view text, const std::string& source, std::size_t line) {
  const auto v = lower(trim(text));
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no" || v.empty()) return false;
  throw InputError(source, line, "percussive", "expected 0/1/true/false, got '" + v + "'");
}

constexpr const char* kNoteFields[] = {"onset_ms", "duration_ms", "pitch", "velocity", "channel", "percussive"};

void check_event(const NoteEvent& e, const std::string& source, std::size_t line) {
  if (e.onset_ms < 0) throw InputError(source, line, "onset_ms", "must be non-negative");
  if (e.duration_ms <= 0) throw InputError(source, line, "duration_ms", "must be positive");
  if (e.pitch < 0 || e.pitch > 127) throw InputError(source, line, "pitch", "must be within 0..127");
  if (e.velocity < 0 || e.velocity > 127) throw InputError(source, line, "velocity", "must be within 0..127");
}

NoteEvent parse_json_event(std::string_view text, const std::string& source, std::size_t line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(source, line, "", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError(source, line, "", "expected a JSON object");
  NoteEvent e;
  auto integer = [&](const char* key, auto& target, bool required) {
    if (!j.contains(key)) {
      if (required) throw InputError(source, line, key, "missing");
      return;
    }
    if (!j[key].is_number_integer()) throw InputError(source, line, key, "expected an integer");
    target = j[key].get<std::remove_reference_t<decltype(target)>>();
  };
  integer("onset_ms", e.onset_ms, true);
  integer("duration_ms", e.duration_ms, true);
  integer("pitch", e.pitch, true);
  integer("velocity", e.velocity, false);
  integer("channel", e.channel, false);
  if (j.contains("percussive")) {
    const auto& p = j["percussive"];
    if (p.is_boolean()) {
      e.percussive = p.get<bool>();
    } else if (p.is_number_integer()) {
      e.percussive = p.get<int>() != 0;
    } else {
      throw InputError(source, line, "percussive", "expected a boolean");
    }
  }
  return e;
}

std::vector<std::string_view> split_commas(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(',', start);
    out.push_back(trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

NoteEvent parse_csv_event(std::string_view text, const std::string& source, std::size_t line) {
  auto cells = split_commas(text);
  if (cells.size() < 3 || cells.size() > 6) {
    throw InputError(source, line, "", "expected 3 to 6 comma-separated fields, got " + std::to_string(cells.size()));
  }
  NoteEvent e;
  e.onset_ms = parse_integer<std::int64_t>(cells[0], source, line, kNoteFields[0]);
  e.duration_ms = parse_integer<std::int64_t>(cells[1], source, line, kNoteFields[1]);
  e.pitch = parse_integer<int>(cells[2], source, line, kNoteFields[2]);
  if (cells.size() > 3) e.velocity = parse_integer<int>(cells[3], source, line, kNoteFields[3]);
  if (cells.size() > 4) e.channel = parse_integer<int>(cells[4], source, line, kNoteFields[4]);
  if (cells.size() > 5) e.percussive = parse_flag(cells[5], source, line);
  return e;
}

bool is_header_row(std::string_view text) {
  auto cells = split_commas(text);
  return !cells.empty() && lower(cells[0]) == "onset_ms";
}

}  // namespace

std::vector<NoteEvent> read_note_events(std::istream& in, const std::string& source) {
  std::vector<NoteEvent> events;
  std::string raw;
  std::size_t line = 0;
  bool seen_data = false;
  while (std::getline(in, raw)) {
    ++line;
    auto text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    if (!seen_data && is_header_row(text)) {
      seen_data = true;
      continue;
    }
    seen_data = true;
    NoteEvent e = text.front() == '{' ? parse_json_event(text, source, line) : parse_csv_event(text, source, line);
    check_event(e, source, line);
    events.push_back(e);
  }
  return events;
}

std::vector<NoteEvent> read_note_events_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path, 0, "", "cannot open file");
  return read_note_events(in, path);
}

void write_note_events_csv(std::ostream& out, const std::vector<NoteEvent>& events) {
  out << "onset_ms,duration_ms,pitch,velocity,channel,percussive\n";
  for (const auto& e : events) {
    out << e.onset_ms << ',' << e.duration_ms << ',' << e.pitch << ',' << e.velocity << ',' << e.channel << ','
        << (e.percussive ? 1 : 0) << '\n';
  }
}

namespace {

// Splits "a | b | c" into trimmed cells.
std::vector<std::string> split_bars(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find('|', start);
    out.emplace_back(trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

TuneMetadata read_tune_metadata(std::istream& in, const std::string& source) {
  TuneMetadata meta;
  auto& r = meta.record;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw InputError(source, line, "", "expected 'key: value'");
    const std::string key = lower(trim(text.substr(0, colon)));
    const std::string value(trim(text.substr(colon + 1)));

    if (key == "id") {
      meta.id = parse_integer<TuneId>(value, source, line, "id");
    } else if (key == "title") {
      r.title = value;
    } else if (key == "lyrics") {
      if (!r.lyrics.empty()) r.lyrics += '\n';
      r.lyrics += value;
    } else if (key == "genre") {
      r.genre = value;
    } else if (auto role = parse_artist_role(key)) {
      if (value.empty()) throw InputError(source, line, key, "artist name is empty");
      r.artists.push_back({value, *role});
    } else if (key == "release") {
      auto cells = split_bars(value);
      if (cells.size() < 2 || cells.size() > 3) {
        throw InputError(source, line, key, "expected 'kind | name [| year]'");
      }
      auto kind = parse_release_kind(lower(cells[0]));
      if (!kind) throw InputError(source, line, key, "unknown release kind '" + cells[0] + "'");
      Release rel{*kind, cells[1], std::nullopt};
      if (cells.size() == 3 && !cells[2].empty()) rel.year = parse_integer<int>(cells[2], source, line, "release");
      r.release = rel;
    } else if (key == "performance") {
      auto cells = split_bars(value);
      if (cells.size() > 2 || cells[0].empty()) throw InputError(source, line, key, "expected 'event [| date]'");
      r.performances.push_back({cells[0], cells.size() == 2 ? cells[1] : std::string{}});
    } else if (key == "company") {
      r.company = value;
    } else if (key == "association") {
      auto cells = split_bars(value);
      if (cells.size() != 2 || cells[0].empty()) throw InputError(source, line, key, "expected 'word | delta'");
      double delta = 0.0;
      try {
        std::size_t used = 0;
        delta = std::stod(cells[1], &used);
        if (used != cells[1].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw InputError(source, line, key, "delta is not a number: '" + cells[1] + "'");
      }
      r.associations.push_back({cells[0], delta});
    } else {
      throw InputError(source, line, key, "unknown metadata key");
    }
  }
  return meta;
}

TuneMetadata read_tune_metadata_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path, 0, "", "cannot open file");
  return read_tune_metadata(in, path);
}

std::string_view to_string(ArtistRole role) {
  switch (role) {
    case ArtistRole::Composer: return "composer";
    case ArtistRole::Lyricist: return "lyricist";
    case ArtistRole::Performer: return "performer";
  }
  return "performer";
}

std::string_view to_string(ReleaseKind kind) {
  switch (kind) {
    case ReleaseKind::Album: return "album";
    case ReleaseKind::Single: return "single";
    case ReleaseKind::Bootleg: return "bootleg";
  }
  return "album";
}

std::optional<ArtistRole> parse_artist_role(std::string_view text) {
  if (text == "composer") return ArtistRole::Composer;
  if (text == "lyricist") return ArtistRole::Lyricist;
  if (text == "performer") return ArtistRole::Performer;
  return std::nullopt;
}

std::optional<ReleaseKind> parse_release_kind(std::string_view text) {
  if (text == "album") return ReleaseKind::Album;
  if (text == "single") return ReleaseKind::Single;
  if (text == "bootleg") return ReleaseKind::Bootleg;
  return std::nullopt;
}

}  // namespace musearch
