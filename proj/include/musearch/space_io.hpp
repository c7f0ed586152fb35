#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "musearch/pattern_space.hpp"

namespace musearch {

inline constexpr int kSpaceFormatVersion = 1;

/// JSON Lines: a header object, one object per cluster, and a trailer that
/// repeats the cluster count. See docs/FORMATS.md.
void write_space(std::ostream& out, const PatternSpace& space);

/// Throws VersionMismatchError for another format version and
/// CorruptFileError for anything malformed or truncated.
PatternSpace read_space(std::istream& in, const std::string& source = "<space>");

}  // namespace musearch
