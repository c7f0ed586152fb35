#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace musearch {

/// One symbolic note as delivered by the ingestion layer.
struct NoteEvent {
  std::int64_t onset_ms = 0;
  std::int64_t duration_ms = 1;
  int pitch = 60;     ///< MIDI semitone number, 0..127
  int velocity = 64;  ///< loudness, 0..127
  int channel = 0;
  bool percussive = false;

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

/// Throws std::invalid_argument when the event breaks its range invariants.
void validate(const NoteEvent& event);

/// A single melody line: strictly increasing onsets, no percussion.
class MonophonicLine {
 public:
  MonophonicLine() = default;

  /// Validates the line invariants; throws std::invalid_argument on violation.
  explicit MonophonicLine(std::vector<NoteEvent> notes);

  const std::vector<NoteEvent>& notes() const noexcept { return notes_; }
  std::size_t size() const noexcept { return notes_.size(); }
  bool empty() const noexcept { return notes_.empty(); }

  friend bool operator==(const MonophonicLine&, const MonophonicLine&) = default;

 private:
  std::vector<NoteEvent> notes_;
};

inline constexpr std::int64_t kDefaultOnsetGridMs = 30;
inline constexpr std::size_t kDefaultUnitSampleSize = 4;

/// Reduces polyphonic material to one leading line.
///
/// Percussive events are dropped. Remaining events are bucketed by
/// `onset_ms / grid_ms`; each bucket keeps its highest pitch, then the
/// loudest, then the earliest event.
MonophonicLine flatten(std::span<const NoteEvent> events, std::int64_t grid_ms = kDefaultOnsetGridMs);

/// Quantified contour symbol shared by the PIT and IOI notations.
enum class Contour : std::uint8_t { Wildcard = 0, Up = 1, Down = 2, Same = 3 };

char to_char(Contour c);
std::optional<Contour> contour_from_char(char c);

template <typename T>
constexpr Contour contour_of_difference(T diff) {
  return diff > 0 ? Contour::Up : (diff < 0 ? Contour::Down : Contour::Same);
}

/// Sign-only transcription. Rendered either space separated ("* 0 + -")
/// or compact ("*0+-").
struct ContourString {
  std::vector<Contour> symbols;

  std::size_t size() const noexcept { return symbols.size(); }
  std::string to_string() const;
  std::string to_compact() const;

  friend bool operator==(const ContourString&, const ContourString&) = default;
};

using QuantizedPitString = ContourString;
using QuantizedIoiString = ContourString;

/// Accepts both rendered forms; whitespace is ignored.
std::optional<ContourString> parse_contour_string(std::string_view text);

/// Half-tone steps between consecutive notes. `steps[0]` stands for the
/// leading wildcard and is always 0.
struct PitString {
  std::vector<int> steps;

  std::size_t size() const noexcept { return steps.size(); }
  std::string to_string() const;

  friend bool operator==(const PitString&, const PitString&) = default;
};

std::optional<PitString> parse_pit_string(std::string_view text);

/// Inter-onset intervals in multiples of `unit_ms`.
struct IoiString {
  std::vector<int> tokens;
  double unit_ms = 0.0;

  std::size_t size() const noexcept { return tokens.size(); }
  std::string to_string() const;

  friend bool operator==(const IoiString&, const IoiString&) = default;
};

std::optional<IoiString> parse_ioi_string(std::string_view text, double unit_ms);

struct BthString {
  std::vector<std::pair<Contour, Contour>> tuples;

  std::size_t size() const noexcept { return tuples.size(); }
  std::string to_string() const;

  friend bool operator==(const BthString&, const BthString&) = default;
};

std::optional<BthString> parse_bth_string(std::string_view text);

PitString transcribe_pit(const MonophonicLine& line);
QuantizedPitString quantize(const PitString& pit);

/// Inter-onset intervals; the final note uses its own duration. The unit is
/// the mean of the `k` shortest intervals (all of them when fewer exist) and
/// every token is round-half-up(interval / unit), never below 1.
IoiString transcribe_ioi(const MonophonicLine& line, std::size_t k = kDefaultUnitSampleSize);
QuantizedIoiString quantize(const IoiString& ioi);

/// Pairs two quantified strings element by element. Throws
/// std::invalid_argument on a length mismatch.
BthString join(const QuantizedPitString& pit, const QuantizedIoiString& ioi);
BthString transcribe_bth(const MonophonicLine& line, std::size_t k = kDefaultUnitSampleSize);

/// Rebuilds a line from its transcriptions; onsets start at 0 and every note
/// lasts until the next onset.
MonophonicLine line_from_transcription(int start_pitch, const PitString& pit, const IoiString& ioi);

struct Personality {
  double pitch_stddev = 0.0;  ///< half-tones
  double ioi_stddev = 0.0;    ///< IOI units

  friend bool operator==(const Personality&, const Personality&) = default;
};

/// Population standard deviations of pitch and of the inter-onset intervals
/// (expressed in the same unit transcribe_ioi uses).
Personality personality(const MonophonicLine& line, std::size_t k = kDefaultUnitSampleSize);

/// A frequent fragment of a transcription.
template <typename T>
struct Fragment {
  std::vector<T> tokens;
  std::size_t count = 0;
  std::size_t first_position = 0;
};

/// The `top` most frequent windows of exactly `length` tokens; overlapping
/// windows count. Ties go to the earlier first occurrence. A transcription
/// shorter than `length` yields itself as the only fragment.
template <typename T>
std::vector<Fragment<T>> extract_patterns(std::span<const T> tokens, std::size_t length, std::size_t top) {
  if (length < 2) throw std::invalid_argument("pattern length must be at least 2");
  std::vector<Fragment<T>> out;
  if (tokens.empty() || top == 0) return out;
  if (tokens.size() < length) {
    out.push_back({std::vector<T>(tokens.begin(), tokens.end()), 1, 0});
    return out;
  }
  std::map<std::vector<T>, std::size_t> slot;
  for (std::size_t pos = 0; pos + length <= tokens.size(); ++pos) {
    std::vector<T> window(tokens.begin() + pos, tokens.begin() + pos + length);
    auto [it, inserted] = slot.try_emplace(std::move(window), out.size());
    if (inserted) {
      out.push_back({it->first, 0, pos});
    }
    ++out[it->second].count;
  }
  std::stable_sort(out.begin(), out.end(), [](const Fragment<T>& a, const Fragment<T>& b) {
    return a.count > b.count;
  });
  if (out.size() > top) out.resize(top);
  return out;
}

}  // namespace musearch
