#include "musearch/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>

namespace musearch {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view key, std::string_view text) {
  const std::string s(trim(text));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) throw ConfigError(std::string(key) + ": not a number: '" + s + "'");
  return v;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view text) {
  text = trim(text);
  Int v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": not an integer: '" + std::string(text) + "'");
  }
  return v;
}

bool to_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(std::string(key) + ": not a boolean: '" + std::string(text) + "'");
}

// Shortest text that reads back as the same double.
std::string fmt(double v) {
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
  return std::string(buf, end);
}

struct Entry {
  std::function<void(Config&, std::string_view)> set;
  std::function<std::string(const Config&)> get;
};

using Field = double& (*)(Config&);

Entry real(const char* key, Field field) {
  return {[key, field](Config& c, std::string_view v) { field(c) = to_double(key, v); },
          [field](const Config& c) { return fmt(field(const_cast<Config&>(c))); }};
}

const std::vector<std::pair<std::string, Entry>>& table() {
  static const std::vector<std::pair<std::string, Entry>> entries = {
      {"onset_grid_ms", {[](Config& c, std::string_view v) { c.onset_grid_ms = to_int<std::int64_t>("onset_grid_ms", v); },
                         [](const Config& c) { return std::to_string(c.onset_grid_ms); }}},
      {"k", {[](Config& c, std::string_view v) { c.k = to_int<std::size_t>("k", v); },
             [](const Config& c) { return std::to_string(c.k); }}},
      {"pattern_length", {[](Config& c, std::string_view v) { c.pattern_length = to_int<std::size_t>("pattern_length", v); },
                          [](const Config& c) { return std::to_string(c.pattern_length); }}},
      {"top_patterns", {[](Config& c, std::string_view v) { c.top_patterns = to_int<std::size_t>("top_patterns", v); },
                        [](const Config& c) { return std::to_string(c.top_patterns); }}},
      {"d0", real("d0", [](Config& c) -> double& { return c.d0; })},
      {"d1", {[](Config& c, std::string_view v) {
                const auto t = trim(v);
                c.d1 = (t == "inf" || t == "infinity") ? kUnbounded : to_double("d1", t);
              },
              [](const Config& c) { return std::isinf(c.d1) ? std::string("inf") : fmt(c.d1); }}},
      {"max_iter", {[](Config& c, std::string_view v) { c.max_iter = to_int<std::size_t>("max_iter", v); },
                    [](const Config& c) { return std::to_string(c.max_iter); }}},
      {"insert_cost", real("insert_cost", [](Config& c) -> double& { return c.costs.insert_cost; })},
      {"delete_cost", real("delete_cost", [](Config& c) -> double& { return c.costs.delete_cost; })},
      {"substitute_cost", real("substitute_cost", [](Config& c) -> double& { return c.costs.substitute_cost; })},
      {"alpha", real("alpha", [](Config& c) -> double& { return c.assoc.alpha; })},
      {"beta", real("beta", [](Config& c) -> double& { return c.assoc.beta; })},
      {"gamma", real("gamma", [](Config& c) -> double& { return c.assoc.gamma; })},
      {"threshold", real("threshold", [](Config& c) -> double& { return c.assoc.threshold; })},
      {"rel_alpha", real("rel_alpha", [](Config& c) -> double& { return c.relevancy.alpha; })},
      {"rel_beta", real("rel_beta", [](Config& c) -> double& { return c.relevancy.beta; })},
      {"rel_gamma", real("rel_gamma", [](Config& c) -> double& { return c.relevancy.gamma; })},
      {"rel_delta", real("rel_delta", [](Config& c) -> double& { return c.relevancy.delta; })},
      {"rel_raw", {[](Config& c, std::string_view v) { c.relevancy.raw = to_bool("rel_raw", v); },
                   [](const Config& c) { return std::string(c.relevancy.raw ? "true" : "false"); }}},
      {"groups", {[](Config& c, std::string_view v) { c.groups = to_int<std::size_t>("groups", v); },
                  [](const Config& c) { return std::to_string(c.groups); }}},
      {"corpus", {[](Config& c, std::string_view v) { c.corpus = std::string(trim(v)); },
                  [](const Config& c) { return c.corpus; }}},
      {"db", {[](Config& c, std::string_view v) { c.db = std::string(trim(v)); },
              [](const Config& c) { return c.db; }}},
  };
  return entries;
}

const Entry& entry(std::string_view key) {
  for (const auto& [name, e] : table()) {
    if (name == key) return e;
  }
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

}  // namespace

void validate(const Config& c) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(c.onset_grid_ms > 0, "onset_grid_ms must be positive");
  require(c.k >= 1, "k must be at least 1");
  require(c.pattern_length >= 2, "pattern_length must be at least 2");
  require(c.top_patterns >= 1, "top_patterns must be at least 1");
  require(c.d0 > 0.0 && std::isfinite(c.d0), "d0 must be positive and finite");
  require(c.d1 >= 0.0, "d1 must be non-negative");
  require(c.max_iter >= 1, "max_iter must be at least 1");
  for (double v : {c.costs.insert_cost, c.costs.delete_cost, c.costs.substitute_cost}) {
    require(v >= 0.0 && std::isfinite(v), "edit costs must be finite and non-negative");
  }
  for (double v : {c.assoc.alpha, c.assoc.beta, c.assoc.gamma}) {
    require(std::isfinite(v), "association parameters must be finite");
  }
  require(c.assoc.threshold >= 0.0 && c.assoc.threshold <= 1.0, "threshold must lie in [0, 1]");
  for (double v : {c.relevancy.alpha, c.relevancy.beta, c.relevancy.gamma, c.relevancy.delta}) {
    require(v >= 0.0 && std::isfinite(v), "relevancy parameters must be finite and non-negative");
  }
  require(c.groups >= 1, "groups must be at least 1");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [name, e] : table()) keys.push_back(name);
  return keys;
}

void set_config_value(Config& config, std::string_view key, std::string_view value) {
  try {
    entry(key).set(config, value);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.rfind(':', 0) == 0 ? std::string(key) + msg : msg);
  }
}

std::string get_config_value(const Config& config, std::string_view key) { return entry(key).get(config); }

void read_config(std::istream& in, Config& config, const std::string& source) {
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source + ":" + std::to_string(line) + ": expected 'key = value'");
    }
    try {
      set_config_value(config, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line) + ": " + e.what());
    }
  }
}

void write_config(std::ostream& out, const Config& config) {
  for (const auto& [name, e] : table()) out << name << " = " << e.get(config) << '\n';
}

}  // namespace musearch
