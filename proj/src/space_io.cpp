#include "musearch/space_io.hpp"

#include "json.hpp"
#include "musearch/error.hpp"

namespace musearch {

namespace {

using nlohmann::json;

constexpr const char* kMagic = "musearch-space";

json pattern_json(const Pattern& p) {
  return {{"id", p.id}, {"tune", p.tune_id}, {"tokens", render(p.notation, p.tokens)}};
}

Pattern pattern_from(const json& j, Notation notation) {
  Pattern p;
  p.notation = notation;
  p.id = j.at("id").get<PatternId>();
  p.tune_id = j.at("tune").get<TuneId>();
  auto tokens = parse_tokens(notation, j.at("tokens").get<std::string>());
  if (!tokens || tokens->empty()) throw CorruptFileError("invalid pattern tokens");
  p.tokens = std::move(*tokens);
  return p;
}

}  // namespace

void write_space(std::ostream& out, const PatternSpace& space) {
  const auto& o = space.options();
  json header = {{"format", kMagic},
                 {"version", kSpaceFormatVersion},
                 {"notation", std::string(to_string(space.notation()))},
                 {"d0", o.d0},
                 {"max_iter", o.max_iter},
                 {"costs", {{"insert", o.costs.insert_cost}, {"delete", o.costs.delete_cost},
                            {"substitute", o.costs.substitute_cost}}},
                 {"clusters", space.clusters().size()}};
  out << header.dump() << '\n';
  for (const auto& c : space.clusters()) {
    json members = json::array();
    for (const auto& m : c.members) members.push_back(pattern_json(m));
    json line = {{"medoid", pattern_json(c.medoid)},
                 {"seed", pattern_json(c.seed)},
                 {"radius", c.radius},
                 {"stale", c.stale},
                 {"members", std::move(members)}};
    out << line.dump() << '\n';
  }
  out << json{{"end", kMagic}, {"clusters", space.clusters().size()}}.dump() << '\n';
}

PatternSpace read_space(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> json {
    if (!std::getline(in, line)) throw CorruptFileError(source + ": unexpected end of file");
    ++line_no;
    try {
      return json::parse(line);
    } catch (const json::parse_error&) {
      throw CorruptFileError(source + ":" + std::to_string(line_no) + ": not valid JSON");
    }
  };

  try {
    const json header = next();
    if (!header.is_object() || header.value("format", "") != kMagic) {
      throw CorruptFileError(source + ": missing space header");
    }
    const int version = header.at("version").get<int>();
    if (version != kSpaceFormatVersion) {
      throw VersionMismatchError(source + ": space format version " + std::to_string(version) + ", expected " +
                                 std::to_string(kSpaceFormatVersion));
    }
    const auto notation = parse_notation(header.at("notation").get<std::string>());
    if (!notation) throw CorruptFileError(source + ": unknown notation");
    ClusteringOptions options;
    options.d0 = header.at("d0").get<double>();
    options.max_iter = header.at("max_iter").get<std::size_t>();
    const auto& costs = header.at("costs");
    options.costs = {costs.at("insert").get<double>(), costs.at("delete").get<double>(),
                     costs.at("substitute").get<double>()};
    const auto count = header.at("clusters").get<std::size_t>();

    std::vector<Cluster> clusters;
    for (std::size_t i = 0; i < count; ++i) {
      const json j = next();
      Cluster c;
      c.medoid = pattern_from(j.at("medoid"), *notation);
      c.seed = pattern_from(j.at("seed"), *notation);
      c.radius = j.at("radius").get<double>();
      c.stale = j.at("stale").get<bool>();
      for (const auto& m : j.at("members")) c.members.push_back(pattern_from(m, *notation));
      clusters.push_back(std::move(c));
    }
    const json trailer = next();
    if (trailer.value("end", "") != kMagic || trailer.at("clusters").get<std::size_t>() != count) {
      throw CorruptFileError(source + ": bad trailer");
    }
    return PatternSpace::from_clusters(*notation, options, std::move(clusters));
  } catch (const json::exception& e) {
    throw CorruptFileError(source + ":" + std::to_string(line_no) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw CorruptFileError(source + ": " + e.what());
  }
}

}  // namespace musearch
