#pragma once

#include <stdexcept>
#include <string>

namespace musearch {

/// Base class of every exception raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (note events, metadata, scrobble log).
/// `line` is 1-based; 0 when the error is not tied to a line.
class InputError : public Error {
 public:
  InputError(std::string source, std::size_t line, std::string field, const std::string& what)
      : Error(source + (line ? ":" + std::to_string(line) : std::string{}) +
              (field.empty() ? std::string{} : " [" + field + "]") + ": " + what),
        source_(std::move(source)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string source_;
  std::size_t line_;
  std::string field_;
};

}  // namespace musearch

namespace musearch {

/// A stored file is damaged or truncated.
class CorruptFileError : public Error {
 public:
  using Error::Error;
};

/// A stored file was written by an incompatible format version.
class VersionMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace musearch
