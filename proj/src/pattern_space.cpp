#include "musearch/pattern_space.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>
#include <stdexcept>

namespace musearch {

std::string_view to_string(Notation n) {
  switch (n) {
    case Notation::PitQ: return "PIT";
    case Notation::IoiQ: return "IOI";
    case Notation::Bth: return "BTH";
  }
  return "PIT";
}

std::optional<Notation> parse_notation(std::string_view text) {
  std::string up(text);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "PIT") return Notation::PitQ;
  if (up == "IOI") return Notation::IoiQ;
  if (up == "BTH") return Notation::Bth;
  return std::nullopt;
}

Tokens to_symbols(const ContourString& s) {
  Tokens out;
  out.reserve(s.size());
  for (auto c : s.symbols) out.push_back(static_cast<Symbol>(c));
  return out;
}

Tokens to_symbols(const BthString& s) {
  Tokens out;
  out.reserve(s.size());
  for (auto [p, i] : s.tuples) out.push_back(static_cast<Symbol>(4 * static_cast<int>(p) + static_cast<int>(i)));
  return out;
}

bool is_valid(Notation n, std::span<const Symbol> tokens) {
  const Symbol limit = n == Notation::Bth ? 16 : 4;
  return std::all_of(tokens.begin(), tokens.end(), [limit](Symbol s) { return s < limit; });
}

std::string render(Notation n, std::span<const Symbol> tokens) {
  std::string out;
  for (auto s : tokens) {
    if (n == Notation::Bth) {
      out += '(';
      out += to_char(static_cast<Contour>(s / 4));
      out += ',';
      out += to_char(static_cast<Contour>(s % 4));
      out += ')';
    } else {
      out += to_char(static_cast<Contour>(s));
    }
  }
  return out;
}

std::optional<Tokens> parse_tokens(Notation n, std::string_view text) {
  std::optional<Tokens> out;
  if (n == Notation::Bth) {
    if (auto bth = parse_bth_string(text)) out = to_symbols(*bth);
  } else if (auto contour = parse_contour_string(text)) {
    out = to_symbols(*contour);
  }
  if (out && out->empty()) out.reset();
  return out;
}

bool canonical_less(const Pattern& a, const Pattern& b) {
  if (a.tokens != b.tokens) return a.tokens < b.tokens;
  if (a.tune_id != b.tune_id) return a.tune_id < b.tune_id;
  return a.id < b.id;
}

void validate(const ClusteringOptions& options) {
  if (!(options.d0 > 0.0) || !std::isfinite(options.d0)) throw std::invalid_argument("d0 must be positive");
  if (options.max_iter == 0) throw std::invalid_argument("max_iter must be at least 1");
  validate(options.costs);
}

PatternSpace::PatternSpace(Notation notation, ClusteringOptions options)
    : notation_(notation), options_(options) {
  validate(options_);
}

std::size_t PatternSpace::size() const noexcept {
  std::size_t n = 0;
  for (const auto& c : clusters_) n += c.members.size();
  return n;
}

std::vector<Pattern> PatternSpace::members() const {
  std::vector<Pattern> out;
  out.reserve(size());
  for (const auto& c : clusters_) out.insert(out.end(), c.members.begin(), c.members.end());
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

std::optional<std::size_t> PatternSpace::find(PatternId pattern) const {
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    for (const auto& m : clusters_[c].members) {
      if (m.id == pattern) return c;
    }
  }
  return std::nullopt;
}

namespace {

void check_pattern(Notation notation, const Pattern& p) {
  if (p.notation != notation) throw std::invalid_argument("pattern notation does not match the space");
  if (p.tokens.empty()) throw std::invalid_argument("pattern is empty");
  if (!is_valid(notation, p.tokens)) throw std::invalid_argument("pattern has symbols outside its alphabet");
}

// Medoid: member with the smallest summed distance to the others; ties go
// to the canonically smallest member.
std::size_t medoid_of(const std::vector<Pattern>& members, const CostModel& costs) {
  std::size_t best = 0;
  double best_sum = kUnbounded;
  for (std::size_t i = 0; i < members.size(); ++i) {
    double sum = 0.0;
    for (const auto& other : members) sum += edit_distance<Symbol>(members[i].tokens, other.tokens, costs);
    if (sum < best_sum || (sum == best_sum && canonical_less(members[i], members[best]))) {
      best = i;
      best_sum = sum;
    }
  }
  return best;
}

// Radius that covers every member and respects the base radius and seed.
double covering_radius(const Cluster& c, double d0, const CostModel& costs) {
  double r = std::max(d0, edit_distance<Symbol>(c.medoid.tokens, c.seed.tokens, costs));
  for (const auto& m : c.members) r = std::max(r, edit_distance<Symbol>(c.medoid.tokens, m.tokens, costs));
  return r;
}

}  // namespace

std::size_t PatternSpace::insert(Pattern p) {
  check_pattern(notation_, p);
  if (clusters_.empty()) {
    clusters_.push_back({p, p, options_.d0, {p}, false});
    return 0;
  }
  std::size_t best = 0;
  double best_d = kUnbounded;
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    const double d = distance(clusters_[c].medoid.tokens, p.tokens);
    if (d < best_d) {
      best = c;
      best_d = d;
    }
  }
  auto& cluster = clusters_[best];
  cluster.members.push_back(std::move(p));
  if (best_d > cluster.radius) {
    cluster.radius = best_d;
    cluster.stale = true;
  }
  return best;
}

std::size_t PatternSpace::remove_tune(TuneId tune) {
  std::size_t removed = 0;
  for (auto& c : clusters_) {
    const auto before = c.members.size();
    std::erase_if(c.members, [tune](const Pattern& p) { return p.tune_id == tune; });
    if (c.members.size() == before) continue;
    removed += before - c.members.size();
    if (c.members.empty()) continue;
    const bool medoid_kept = std::any_of(c.members.begin(), c.members.end(),
                                         [&](const Pattern& p) { return p.id == c.medoid.id; });
    if (!medoid_kept) {
      c.medoid = c.members[medoid_of(c.members, options_.costs)];
      c.radius = covering_radius(c, options_.d0, options_.costs);
      c.stale = true;
    }
  }
  std::erase_if(clusters_, [](const Cluster& c) { return c.members.empty(); });
  return removed;
}

PatternSpace PatternSpace::from_clusters(Notation notation, ClusteringOptions options, std::vector<Cluster> clusters) {
  PatternSpace space(notation, options);
  std::set<PatternId> seen;
  for (const auto& c : clusters) {
    if (c.members.empty()) throw std::invalid_argument("cluster has no members");
    check_pattern(notation, c.seed);
    bool medoid_found = false;
    for (const auto& m : c.members) {
      check_pattern(notation, m);
      if (!seen.insert(m.id).second) throw std::invalid_argument("pattern stored in more than one cluster");
      if (m == c.medoid) medoid_found = true;
      if (space.distance(c.medoid.tokens, m.tokens) > c.radius) {
        throw std::invalid_argument("cluster member lies outside the cluster radius");
      }
    }
    if (!medoid_found) throw std::invalid_argument("cluster medoid is not a member");
    if (c.radius < options.d0) throw std::invalid_argument("cluster radius below d0");
  }
  space.clusters_ = std::move(clusters);
  return space;
}

namespace {

// Clustering state over indices into the canonically sorted points.
struct WorkCluster {
  std::size_t seed;
  std::vector<std::size_t> members;
  std::size_t medoid = 0;
  double radius = 0.0;
};

class Builder {
 public:
  Builder(std::vector<Pattern> points, const ClusteringOptions& options)
      : points_(std::move(points)), options_(options), n_(points_.size()), dist_(n_ * n_, 0.0) {
    const auto& c = options_.costs;
    const bool symmetric = c.insert_cost == c.delete_cost;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = symmetric ? i + 1 : 0; j < n_; ++j) {
        if (i == j) continue;
        dist_[i * n_ + j] = edit_distance<Symbol>(points_[i].tokens, points_[j].tokens, c);
        if (symmetric) dist_[j * n_ + i] = dist_[i * n_ + j];
      }
    }
  }

  double d(std::size_t from, std::size_t to) const { return dist_[from * n_ + to]; }

  // Farthest-point covering of `pool` at radius d0; appends the clusters.
  void cover(std::vector<std::size_t> pool, std::vector<WorkCluster>& out) const {
    std::vector<double> sums(pool.size(), 0.0);
    for (std::size_t a = 0; a < pool.size(); ++a) {
      for (std::size_t b = 0; b < pool.size(); ++b) sums[a] += d(pool[a], pool[b]);
    }
    std::vector<bool> covered(pool.size(), false);
    std::size_t remaining = pool.size();
    while (remaining > 0) {
      std::size_t seed = pool.size();
      for (std::size_t a = 0; a < pool.size(); ++a) {
        if (covered[a]) continue;
        if (seed == pool.size() || sums[a] > sums[seed]) seed = a;
      }
      WorkCluster cluster{pool[seed], {}};
      std::vector<std::size_t> taken;
      for (std::size_t a = 0; a < pool.size(); ++a) {
        if (!covered[a] && d(pool[seed], pool[a]) <= options_.d0) taken.push_back(a);
      }
      for (auto a : taken) {
        covered[a] = true;
        cluster.members.push_back(pool[a]);
        --remaining;
      }
      for (std::size_t a = 0; a < pool.size(); ++a) {
        if (covered[a]) continue;
        for (auto t : taken) sums[a] -= d(pool[a], pool[t]);
      }
      out.push_back(std::move(cluster));
    }
  }

  void refresh_medoid(WorkCluster& c) const {
    std::sort(c.members.begin(), c.members.end());
    std::size_t best = c.members.front();
    double best_sum = kUnbounded;
    for (auto m : c.members) {
      double sum = 0.0;
      for (auto x : c.members) sum += d(m, x);
      // members are in canonical order, so strict < keeps the smallest on ties
      if (sum < best_sum) {
        best = m;
        best_sum = sum;
      }
    }
    c.medoid = best;
    c.radius = std::max(options_.d0, d(c.medoid, c.seed));
  }

  void widen_to_cover(WorkCluster& c) const {
    for (auto m : c.members) c.radius = std::max(c.radius, d(c.medoid, m));
  }

  PatternSpace run(Notation notation, std::size_t& iterations, bool& converged) {
    std::vector<WorkCluster> clusters;
    std::vector<std::size_t> all(n_);
    std::iota(all.begin(), all.end(), 0);
    cover(all, clusters);

    iterations = 0;
    converged = n_ == 0;
    while (!converged && iterations < options_.max_iter) {
      ++iterations;
      for (auto& c : clusters) refresh_medoid(c);
      const auto before = medoid_set(clusters);

      regather(clusters);
      for (auto& c : clusters) refresh_medoid(c);
      merge(clusters);

      converged = medoid_set(clusters) == before;
    }

    for (auto& c : clusters) {
      refresh_medoid(c);
      widen_to_cover(c);
    }
    return assemble(notation, clusters);
  }

 private:
  static std::set<std::size_t> medoid_set(const std::vector<WorkCluster>& clusters) {
    std::set<std::size_t> out;
    for (const auto& c : clusters) out.insert(c.medoid);
    return out;
  }

  void regather(std::vector<WorkCluster>& clusters) const {
    std::vector<std::vector<std::size_t>> gathered(clusters.size());
    std::vector<std::size_t> stragglers;
    for (std::size_t p = 0; p < n_; ++p) {
      std::size_t best = clusters.size();
      double best_d = kUnbounded;
      for (std::size_t c = 0; c < clusters.size(); ++c) {
        const double dist = d(clusters[c].medoid, p);
        if (dist <= clusters[c].radius && dist < best_d) {
          best = c;
          best_d = dist;
        }
      }
      if (best == clusters.size()) {
        stragglers.push_back(p);
      } else {
        gathered[best].push_back(p);
      }
    }
    for (std::size_t c = 0; c < clusters.size(); ++c) clusters[c].members = std::move(gathered[c]);
    std::erase_if(clusters, [](const WorkCluster& c) { return c.members.empty(); });
    if (!stragglers.empty()) {
      const auto first_new = clusters.size();
      cover(std::move(stragglers), clusters);
      for (auto i = first_new; i < clusters.size(); ++i) refresh_medoid(clusters[i]);
    }
  }

  // Folds any cluster whose medoid lies inside another cluster into that
  // cluster, one pair at a time, until no such pair is left.
  void merge(std::vector<WorkCluster>& clusters) const {
    bool merged = true;
    while (merged) {
      merged = false;
      for (std::size_t a = 0; a < clusters.size() && !merged; ++a) {
        for (std::size_t b = 0; b < clusters.size() && !merged; ++b) {
          if (a == b || d(clusters[b].medoid, clusters[a].medoid) > clusters[b].radius) continue;
          auto& into = clusters[b];
          into.members.insert(into.members.end(), clusters[a].members.begin(), clusters[a].members.end());
          refresh_medoid(into);
          widen_to_cover(into);
          clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(a));
          merged = true;
        }
      }
    }
  }

  PatternSpace assemble(Notation notation, const std::vector<WorkCluster>& work) const {
    std::vector<Cluster> clusters;
    clusters.reserve(work.size());
    for (const auto& w : work) {
      Cluster c{points_[w.medoid], points_[w.seed], w.radius, {}, false};
      for (auto m : w.members) c.members.push_back(points_[m]);
      clusters.push_back(std::move(c));
    }
    return PatternSpace::from_clusters(notation, options_, std::move(clusters));
  }

  std::vector<Pattern> points_;
  ClusteringOptions options_;
  std::size_t n_;
  std::vector<double> dist_;
};

}  // namespace

PatternSpace build_clusters(Notation notation, std::vector<Pattern> points, const ClusteringOptions& options) {
  validate(options);
  for (const auto& p : points) check_pattern(notation, p);
  std::sort(points.begin(), points.end(), canonical_less);
  Builder builder(std::move(points), options);
  std::size_t iterations = 0;
  bool converged = true;
  PatternSpace space = builder.run(notation, iterations, converged);
  space.iterations_ = iterations;
  space.converged_ = converged;
  return space;
}

PatternSpace rebuild(const PatternSpace& space) {
  return build_clusters(space.notation(), space.members(), space.options());
}

std::vector<SearchMatch> melody_search(const PatternSpace& space, std::span<const Symbol> query, double d1) {
  const auto& costs = space.options().costs;
  std::vector<SearchMatch> out;
  for (const auto& c : space.clusters()) {
    if (substring_distance<Symbol>(query, c.medoid.tokens, costs) > d1) continue;
    for (const auto& m : c.members) out.push_back({m, substring_distance<Symbol>(query, m.tokens, costs)});
  }
  std::sort(out.begin(), out.end(), [](const SearchMatch& a, const SearchMatch& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.pattern.tune_id != b.pattern.tune_id) return a.pattern.tune_id < b.pattern.tune_id;
    return canonical_less(a.pattern, b.pattern);
  });
  return out;
}

std::vector<SearchMatch> melody_search(const PatternSpace& space, const Pattern& query, double d1) {
  if (query.notation != space.notation()) throw std::invalid_argument("query notation does not match the space");
  return melody_search(space, std::span<const Symbol>(query.tokens), d1);
}

}  // namespace musearch
