#include "musearch/melody.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace musearch {

void validate(const NoteEvent& event) {
  if (event.duration_ms <= 0) throw std::invalid_argument("note duration must be positive");
  if (event.onset_ms < 0) throw std::invalid_argument("note onset must be non-negative");
  if (event.pitch < 0 || event.pitch > 127) throw std::invalid_argument("pitch outside 0..127");
  if (event.velocity < 0 || event.velocity > 127) throw std::invalid_argument("velocity outside 0..127");
}

MonophonicLine::MonophonicLine(std::vector<NoteEvent> notes) : notes_(std::move(notes)) {
  for (std::size_t i = 0; i < notes_.size(); ++i) {
    validate(notes_[i]);
    if (notes_[i].percussive) throw std::invalid_argument("melody line contains a percussive event");
    if (i > 0 && notes_[i].onset_ms <= notes_[i - 1].onset_ms) {
      throw std::invalid_argument("melody line onsets must be strictly increasing");
    }
  }
}

MonophonicLine flatten(std::span<const NoteEvent> events, std::int64_t grid_ms) {
  if (grid_ms <= 0) throw std::invalid_argument("onset grid must be positive");

  std::vector<NoteEvent> pitched;
  pitched.reserve(events.size());
  for (const auto& e : events) {
    validate(e);
    if (!e.percussive) pitched.push_back(e);
  }

  // Survivor order within a cell: highest pitch, loudest, earliest.
  auto better = [](const NoteEvent& a, const NoteEvent& b) {
    if (a.pitch != b.pitch) return a.pitch > b.pitch;
    if (a.velocity != b.velocity) return a.velocity > b.velocity;
    return a.onset_ms < b.onset_ms;
  };

  std::map<std::int64_t, NoteEvent> cells;
  for (const auto& e : pitched) {
    auto [it, inserted] = cells.try_emplace(e.onset_ms / grid_ms, e);
    if (!inserted && better(e, it->second)) it->second = e;
  }

  std::vector<NoteEvent> line;
  line.reserve(cells.size());
  for (auto& [cell, e] : cells) line.push_back(e);
  return MonophonicLine(std::move(line));
}

char to_char(Contour c) {
  switch (c) {
    case Contour::Wildcard: return '*';
    case Contour::Up: return '+';
    case Contour::Down: return '-';
    case Contour::Same: return '0';
  }
  return '?';
}

std::optional<Contour> contour_from_char(char c) {
  switch (c) {
    case '*': return Contour::Wildcard;
    case '+': return Contour::Up;
    case '-': return Contour::Down;
    case '0': return Contour::Same;
    default: return std::nullopt;
  }
}

std::string ContourString::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i) out += ' ';
    out += to_char(symbols[i]);
  }
  return out;
}

std::string ContourString::to_compact() const {
  std::string out;
  out.reserve(symbols.size());
  for (auto s : symbols) out += to_char(s);
  return out;
}

std::optional<ContourString> parse_contour_string(std::string_view text) {
  ContourString out;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    auto s = contour_from_char(c);
    if (!s) return std::nullopt;
    out.symbols.push_back(*s);
  }
  return out;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<int> parse_int(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

}  // namespace

std::string PitString::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) out += ' ';
    out += i == 0 ? std::string("*") : std::to_string(steps[i]);
  }
  return out;
}

std::optional<PitString> parse_pit_string(std::string_view text) {
  PitString out;
  auto words = split_ws(text);
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i == 0) {
      if (words[i] != "*") return std::nullopt;
      out.steps.push_back(0);
      continue;
    }
    auto v = parse_int(words[i]);
    if (!v) return std::nullopt;
    out.steps.push_back(*v);
  }
  return out;
}

std::string IoiString::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(tokens[i]);
  }
  return out;
}

std::optional<IoiString> parse_ioi_string(std::string_view text, double unit_ms) {
  IoiString out;
  out.unit_ms = unit_ms;
  for (auto w : split_ws(text)) {
    auto v = parse_int(w);
    if (!v || *v < 1) return std::nullopt;
    out.tokens.push_back(*v);
  }
  return out;
}

std::string BthString::to_string() const {
  std::string out;
  for (auto [p, i] : tuples) {
    out += '(';
    out += to_char(p);
    out += ',';
    out += to_char(i);
    out += ')';
  }
  return out;
}

std::optional<BthString> parse_bth_string(std::string_view text) {
  std::string compact;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
  }
  BthString out;
  std::size_t i = 0;
  while (i < compact.size()) {
    if (i + 5 > compact.size() || compact[i] != '(' || compact[i + 2] != ',' || compact[i + 4] != ')') {
      return std::nullopt;
    }
    auto p = contour_from_char(compact[i + 1]);
    auto q = contour_from_char(compact[i + 3]);
    if (!p || !q) return std::nullopt;
    out.tuples.emplace_back(*p, *q);
    i += 5;
  }
  return out;
}

PitString transcribe_pit(const MonophonicLine& line) {
  PitString out;
  const auto& notes = line.notes();
  out.steps.reserve(notes.size());
  for (std::size_t i = 0; i < notes.size(); ++i) {
    out.steps.push_back(i == 0 ? 0 : notes[i].pitch - notes[i - 1].pitch);
  }
  return out;
}

QuantizedPitString quantize(const PitString& pit) {
  ContourString out;
  out.symbols.reserve(pit.size());
  for (std::size_t i = 0; i < pit.size(); ++i) {
    out.symbols.push_back(i == 0 ? Contour::Wildcard : contour_of_difference(pit.steps[i]));
  }
  return out;
}

namespace {

std::vector<std::int64_t> intervals_of(const MonophonicLine& line) {
  const auto& notes = line.notes();
  std::vector<std::int64_t> out;
  out.reserve(notes.size());
  for (std::size_t i = 0; i + 1 < notes.size(); ++i) {
    out.push_back(notes[i + 1].onset_ms - notes[i].onset_ms);
  }
  if (!notes.empty()) out.push_back(notes.back().duration_ms);
  return out;
}

// Unit as an exact fraction sum/count of the `k` shortest intervals.
std::pair<std::int64_t, std::int64_t> unit_of(std::vector<std::int64_t> intervals, std::size_t k) {
  const std::size_t take = std::min(k, intervals.size());
  std::partial_sort(intervals.begin(), intervals.begin() + static_cast<std::ptrdiff_t>(take), intervals.end());
  const std::int64_t sum = std::accumulate(intervals.begin(), intervals.begin() + static_cast<std::ptrdiff_t>(take),
                                           std::int64_t{0});
  return {sum, static_cast<std::int64_t>(take)};
}

}  // namespace

IoiString transcribe_ioi(const MonophonicLine& line, std::size_t k) {
  if (k == 0) throw std::invalid_argument("IOI unit sample size k must be at least 1");
  IoiString out;
  if (line.empty()) return out;

  const auto intervals = intervals_of(line);
  const auto [sum, count] = unit_of(intervals, k);
  out.unit_ms = static_cast<double>(sum) / static_cast<double>(count);
  out.tokens.reserve(intervals.size());
  for (auto interval : intervals) {
    // round-half-up(interval / (sum / count)) in exact integer arithmetic
    const std::int64_t q = (2 * interval * count + sum) / (2 * sum);
    out.tokens.push_back(static_cast<int>(std::max<std::int64_t>(q, 1)));
  }
  return out;
}

QuantizedIoiString quantize(const IoiString& ioi) {
  ContourString out;
  out.symbols.reserve(ioi.size());
  for (std::size_t i = 0; i < ioi.size(); ++i) {
    out.symbols.push_back(i == 0 ? Contour::Wildcard : contour_of_difference(ioi.tokens[i] - ioi.tokens[i - 1]));
  }
  return out;
}

BthString join(const QuantizedPitString& pit, const QuantizedIoiString& ioi) {
  if (pit.size() != ioi.size()) throw std::invalid_argument("PIT and IOI transcriptions differ in length");
  BthString out;
  out.tuples.reserve(pit.size());
  for (std::size_t i = 0; i < pit.size(); ++i) out.tuples.emplace_back(pit.symbols[i], ioi.symbols[i]);
  return out;
}

BthString transcribe_bth(const MonophonicLine& line, std::size_t k) {
  return join(quantize(transcribe_pit(line)), quantize(transcribe_ioi(line, k)));
}

MonophonicLine line_from_transcription(int start_pitch, const PitString& pit, const IoiString& ioi) {
  if (pit.size() != ioi.size()) throw std::invalid_argument("PIT and IOI transcriptions differ in length");
  if (ioi.unit_ms <= 0.0 && !ioi.tokens.empty()) throw std::invalid_argument("IOI unit must be positive");
  std::vector<NoteEvent> notes;
  notes.reserve(pit.size());
  std::int64_t onset = 0;
  int pitch = start_pitch;
  for (std::size_t i = 0; i < pit.size(); ++i) {
    if (i > 0) pitch += pit.steps[i];
    const auto length = static_cast<std::int64_t>(std::llround(ioi.tokens[i] * ioi.unit_ms));
    notes.push_back({onset, length, pitch, 64, 0, false});
    onset += length;
  }
  return MonophonicLine(std::move(notes));
}

namespace {

template <typename Range>
double population_stddev(const Range& values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

}  // namespace

Personality personality(const MonophonicLine& line, std::size_t k) {
  if (k == 0) throw std::invalid_argument("IOI unit sample size k must be at least 1");
  if (line.size() < 2) return {};
  std::vector<double> pitches;
  for (const auto& n : line.notes()) pitches.push_back(n.pitch);
  const auto intervals = intervals_of(line);
  const auto [sum, count] = unit_of(intervals, k);
  const double unit = static_cast<double>(sum) / static_cast<double>(count);
  std::vector<double> scaled;
  for (auto i : intervals) scaled.push_back(static_cast<double>(i) / unit);
  return {population_stddev(pitches), population_stddev(scaled)};
}

}  // namespace musearch
