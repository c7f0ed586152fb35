#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace musearch::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (without the program name). Output goes to `out`,
/// diagnostics and usage text to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Appends PIT, IOI and BTH literals of a hummed note file to `query`.
/// Each literal is the hum's most frequent window of `pattern_length`
/// symbols, so it lines up with the stored patterns; a shorter hum is used
/// whole.
std::string append_hummed_melody(const std::string& query, const std::string& notes_path, std::int64_t grid_ms,
                                 std::size_t k, std::size_t pattern_length);

}  // namespace musearch::cli
