#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "musearch/assoc.hpp"
#include "musearch/error.hpp"
#include "musearch/pattern_space.hpp"
#include "musearch/profile.hpp"

namespace musearch {

/// Every tunable of the engine. Defaults are listed by `config show`.
struct Config {
  // melody transcription and patterns
  std::int64_t onset_grid_ms = kDefaultOnsetGridMs;
  std::size_t k = kDefaultUnitSampleSize;
  std::size_t pattern_length = 8;
  std::size_t top_patterns = 3;

  // pattern spaces
  double d0 = 3.0;
  double d1 = 5.0;
  std::size_t max_iter = 50;
  CostModel costs{};

  AssociationParams assoc{};
  RelevancyParams relevancy{};
  std::size_t groups = 2;

  std::string corpus;
  std::string db;

  ClusteringOptions clustering() const { return {d0, costs, max_iter}; }

  friend bool operator==(const Config&, const Config&) = default;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Throws ConfigError when a value is outside its documented range.
void validate(const Config& config);

/// Keys in the order `config show` prints them.
std::vector<std::string> config_keys();

/// Sets one key from its text form; throws ConfigError.
void set_config_value(Config& config, std::string_view key, std::string_view value);
std::string get_config_value(const Config& config, std::string_view key);

/// `key = value` lines; blank lines and '#' comments are ignored.
void read_config(std::istream& in, Config& config, const std::string& source = "<config>");
void write_config(std::ostream& out, const Config& config);

}  // namespace musearch
