#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "musearch/edit_distance.hpp"
#include "musearch/melody.hpp"
#include "musearch/tune.hpp"

namespace musearch {

/// Every notation gets its own metric space.
enum class Notation : std::uint8_t { PitQ = 0, IoiQ = 1, Bth = 2 };

inline constexpr std::size_t kNotationCount = 3;
inline constexpr Notation kAllNotations[] = {Notation::PitQ, Notation::IoiQ, Notation::Bth};

std::string_view to_string(Notation n);
/// Accepts "PIT", "IOI", "BTH" in any case.
std::optional<Notation> parse_notation(std::string_view text);

/// Encoded pattern symbol. PIT/IOI use the Contour values 0..3; a BTH
/// tuple (p, i) is encoded as 4 * p + i.
using Symbol = std::uint8_t;
using Tokens = std::vector<Symbol>;

Tokens to_symbols(const ContourString& s);
Tokens to_symbols(const BthString& s);
bool is_valid(Notation n, std::span<const Symbol> tokens);

/// Renders PIT/IOI compactly ("*0+-") and BTH as tuples ("(*,*)(0,+)").
std::string render(Notation n, std::span<const Symbol> tokens);
/// Empty or malformed text gives nullopt.
std::optional<Tokens> parse_tokens(Notation n, std::string_view text);

struct Pattern {
  PatternId id = 0;
  Notation notation = Notation::PitQ;
  Tokens tokens;
  TuneId tune_id = 0;

  friend bool operator==(const Pattern&, const Pattern&) = default;
};

/// Canonical order: tokens, then tune id, then pattern id.
bool canonical_less(const Pattern& a, const Pattern& b);

struct Cluster {
  Pattern medoid;
  Pattern seed;
  double radius = 0.0;
  std::vector<Pattern> members;
  bool stale = false;  ///< grown by insert/remove since the last build

  friend bool operator==(const Cluster&, const Cluster&) = default;
};

struct ClusteringOptions {
  double d0 = 3.0;
  CostModel costs{};
  std::size_t max_iter = 50;

  friend bool operator==(const ClusteringOptions&, const ClusteringOptions&) = default;
};

void validate(const ClusteringOptions& options);

/// A clustered metric space over the patterns of one notation.
class PatternSpace {
 public:
  explicit PatternSpace(Notation notation = Notation::PitQ, ClusteringOptions options = {});

  /// Assembles a space from stored clusters; throws std::invalid_argument
  /// when the partition or cluster invariants do not hold.
  static PatternSpace from_clusters(Notation notation, ClusteringOptions options, std::vector<Cluster> clusters);

  Notation notation() const noexcept { return notation_; }
  const ClusteringOptions& options() const noexcept { return options_; }
  const std::vector<Cluster>& clusters() const noexcept { return clusters_; }
  std::size_t size() const noexcept;
  bool empty() const noexcept { return clusters_.empty(); }

  /// Iterations used by the last build (0 for spaces grown by insert only).
  std::size_t iterations() const noexcept { return iterations_; }
  bool converged() const noexcept { return converged_; }

  /// All members in canonical order.
  std::vector<Pattern> members() const;

  double distance(std::span<const Symbol> from, std::span<const Symbol> to) const {
    return edit_distance(from, to, options_.costs);
  }

  /// Nearest-neighbour insertion. The pattern joins the cluster with the
  /// closest medoid; a too-distant pattern widens that cluster's radius and
  /// marks it stale. Returns the cluster index. Throws
  /// std::invalid_argument on a notation mismatch or invalid tokens.
  std::size_t insert(Pattern p);

  /// Drops every pattern owned by `tune`; returns how many were removed.
  std::size_t remove_tune(TuneId tune);

  /// Index of the cluster holding `pattern`, if any.
  std::optional<std::size_t> find(PatternId pattern) const;

  /// Compares notation, options and clusters; build statistics are ignored.
  friend bool operator==(const PatternSpace& a, const PatternSpace& b) {
    return a.notation_ == b.notation_ && a.options_ == b.options_ && a.clusters_ == b.clusters_;
  }

 private:
  friend PatternSpace build_clusters(Notation, std::vector<Pattern>, const ClusteringOptions&);

  Notation notation_;
  ClusteringOptions options_;
  std::vector<Cluster> clusters_;
  std::size_t iterations_ = 0;
  bool converged_ = true;
};

/// Farthest-point clustering with medoid refinement.
///
/// Phase one repeatedly takes the uncovered pattern with the largest summed
/// distance to all uncovered patterns and covers everything within d0 of
/// it. Phase two recomputes medoids, regathers every pattern around the
/// nearest medoid within that cluster's radius max(d0, d(medoid, seed)),
/// starts new clusters for stragglers, and merges clusters whose medoid lies
/// inside another cluster. It stops when the medoids stop changing or after
/// `max_iter` rounds. The result depends only on the multiset of patterns.
PatternSpace build_clusters(Notation notation, std::vector<Pattern> points, const ClusteringOptions& options = {});

/// Re-clusters all current members with the space's own options.
PatternSpace rebuild(const PatternSpace& space);

struct SearchMatch {
  Pattern pattern;
  double distance = 0.0;
};

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Gathers the members of every cluster whose medoid is within `d1` of the
/// query (substring distance of query into medoid) and sorts them by
/// substring distance of the query into the member, then tune id, tokens
/// and pattern id.
std::vector<SearchMatch> melody_search(const PatternSpace& space, std::span<const Symbol> query, double d1);

/// Same, for a query pattern; throws std::invalid_argument on a notation
/// mismatch.
std::vector<SearchMatch> melody_search(const PatternSpace& space, const Pattern& query, double d1);

}  // namespace musearch
