#pragma once

#include <istream>
#include <string>
#include <vector>

#include "musearch/melody.hpp"
#include "musearch/tune.hpp"

namespace musearch {

/// Reads note events, one per line. Each line is either a JSON object with
/// the keys onset_ms, duration_ms, pitch, velocity, channel, percussive or
/// the same six fields comma separated in that order. A CSV header row,
/// blank lines and lines starting with '#' are skipped. Throws InputError
/// naming the offending line and field.
std::vector<NoteEvent> read_note_events(std::istream& in, const std::string& source = "<notes>");
std::vector<NoteEvent> read_note_events_file(const std::string& path);

void write_note_events_csv(std::ostream& out, const std::vector<NoteEvent>& events);

/// Tune metadata as `key: value` lines. List fields repeat their key.
struct TuneMetadata {
  std::optional<TuneId> id;
  TuneRecord record;
};

TuneMetadata read_tune_metadata(std::istream& in, const std::string& source = "<metadata>");
TuneMetadata read_tune_metadata_file(const std::string& path);

}  // namespace musearch
