#include "musearch/profile.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "musearch/text.hpp"

namespace musearch {

std::string_view to_string(Sex s) {
  switch (s) {
    case Sex::Unspecified: return "unspecified";
    case Sex::Female: return "female";
    case Sex::Male: return "male";
    case Sex::Other: return "other";
  }
  return "unspecified";
}

std::optional<Sex> parse_sex(std::string_view text) {
  std::string v(text);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v.empty() || v == "unspecified" || v == "u") return Sex::Unspecified;
  if (v == "female" || v == "f") return Sex::Female;
  if (v == "male" || v == "m") return Sex::Male;
  if (v == "other" || v == "o") return Sex::Other;
  return std::nullopt;
}

std::string normalize_genre(std::string_view genre) {
  std::string out;
  for (const auto& t : tokenize(genre)) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

void ProfileRegistry::set_profile(const UserId& id, int age, Sex sex, const std::set<std::string>& genres) {
  if (id.empty()) throw ProfileError("user id must not be empty");
  if (age < 0) throw ProfileError("age must be non-negative");
  auto& u = users_[id];
  u.id = id;
  u.age = age;
  u.sex = sex;
  u.preferred_genres.clear();
  for (const auto& g : genres) {
    auto n = normalize_genre(g);
    if (!n.empty()) u.preferred_genres.insert(std::move(n));
  }
}

void ProfileRegistry::add_search(const UserId& id, std::string query) {
  auto it = users_.find(id);
  if (it == users_.end()) throw ProfileError("unknown user '" + id + "'");
  it->second.search_history.push_back(std::move(query));
}

void ProfileRegistry::record_scrobble(const ScrobbleEvent& e, const std::function<bool(TuneId)>& tune_exists) {
  auto it = users_.find(e.user);
  if (it == users_.end()) throw ProfileError("unknown user '" + e.user + "'");
  if (!tune_exists(e.tune)) throw ProfileError("unknown tune " + std::to_string(e.tune));
  ++it->second.scrobble_counts[e.tune];
  ++popularity_[e.tune];
}

void ProfileRegistry::forget_tune(TuneId tune) {
  popularity_.erase(tune);
  for (auto& [id, u] : users_) u.scrobble_counts.erase(tune);
}

const UserProfile& ProfileRegistry::user(const UserId& id) const {
  auto it = users_.find(id);
  if (it == users_.end()) throw ProfileError("unknown user '" + id + "'");
  return it->second;
}

std::vector<UserProfile> ProfileRegistry::profiles() const {
  std::vector<UserProfile> out;
  for (const auto& [id, u] : users_) out.push_back(u);
  return out;
}

std::uint64_t ProfileRegistry::popularity(TuneId tune) const {
  auto it = popularity_.find(tune);
  return it == popularity_.end() ? 0 : it->second;
}

std::vector<Group> assign_groups(std::vector<UserProfile> profiles, std::size_t g) {
  if (g == 0) throw ProfileError("group count must be at least 1");
  std::sort(profiles.begin(), profiles.end(), [](const UserProfile& a, const UserProfile& b) { return a.id < b.id; });
  const std::size_t n = profiles.size();
  if (n == 0) return {};
  g = std::min(g, n);

  std::set<std::string> genres;
  int min_age = std::numeric_limits<int>::max();
  int max_age = std::numeric_limits<int>::min();
  for (const auto& p : profiles) {
    genres.insert(p.preferred_genres.begin(), p.preferred_genres.end());
    min_age = std::min(min_age, p.age);
    max_age = std::max(max_age, p.age);
  }
  const std::vector<std::string> axes(genres.begin(), genres.end());
  const std::size_t dim = axes.size() + 1;

  std::vector<std::vector<double>> features(n, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < axes.size(); ++a) features[i][a] = profiles[i].preferred_genres.contains(axes[a]);
    features[i][axes.size()] =
        max_age > min_age ? static_cast<double>(profiles[i].age - min_age) / (max_age - min_age) : 0.0;
  }

  auto sq = [&](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
    return s;
  };

  std::vector<std::vector<double>> centres(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(g));
  std::vector<std::size_t> assignment(n, g);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < g; ++c) {
        const double d = sq(features[i], centres[c]);
        if (d < best_d) {
          best = c;
          best_d = d;
        }
      }
      if (assignment[i] != best) {
        assignment[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    for (std::size_t c = 0; c < g; ++c) {
      std::vector<double> sum(dim, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (assignment[i] != c) continue;
        for (std::size_t k = 0; k < dim; ++k) sum[k] += features[i][k];
        ++count;
      }
      if (count == 0) continue;  // empty centre stays put
      for (auto& v : sum) v /= static_cast<double>(count);
      centres[c] = std::move(sum);
    }
  }

  std::vector<Group> groups;
  for (std::size_t c = 0; c < g; ++c) {
    Group grp;
    for (std::size_t i = 0; i < n; ++i) {
      if (assignment[i] == c) grp.members.push_back(profiles[i].id);
    }
    if (grp.members.empty()) continue;
    grp.id = groups.size();
    groups.push_back(std::move(grp));
  }
  return groups;
}

Group group_of(const UserId& user, const std::vector<Group>& groups) {
  for (const auto& g : groups) {
    if (std::binary_search(g.members.begin(), g.members.end(), user)) return g;
  }
  return Group{groups.size(), {user}};
}

void validate(const RelevancyParams& params) {
  for (double v : {params.alpha, params.beta, params.gamma, params.delta}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ProfileError("relevancy parameters must be finite and non-negative");
  }
}

double relevancy(const RelevancyTerms& t, const RelevancyParams& params) {
  if (t.distance < 0.0) throw ProfileError("distance must be non-negative");
  double listened = t.listened;
  double pop = t.pop;
  if (!params.raw) {
    listened = t.group_size > 0.0 ? t.listened / t.group_size : 0.0;
    pop = t.max_pop > 0.0 ? t.pop / t.max_pop : 0.0;
  }
  return params.alpha / (1.0 + t.distance) + params.beta * t.gen + params.gamma * listened + params.delta * pop;
}

double genre_fit(const UserProfile& user, std::string_view tune_genre) {
  if (user.preferred_genres.empty()) return 0.0;
  const auto g = normalize_genre(tune_genre);
  return user.preferred_genres.contains(g) ? 1.0 / static_cast<double>(user.preferred_genres.size()) : 0.0;
}

namespace {

std::vector<const UserProfile*> peers_of(const UserProfile& user, const Group& group, const ProfileRegistry& registry) {
  std::vector<const UserProfile*> peers;
  for (const auto& id : group.members) {
    if (id == user.id || !registry.has_user(id)) continue;
    peers.push_back(&registry.user(id));
  }
  return peers;
}

}  // namespace

std::vector<RankedTune> rank_results(const std::vector<Candidate>& candidates, const UserProfile& user,
                                     const std::vector<Group>& groups, const ProfileRegistry& registry,
                                     const std::function<std::string(TuneId)>& genre_of,
                                     const RelevancyParams& params) {
  validate(params);
  const Group group = group_of(user.id, groups);
  const auto peers = peers_of(user, group, registry);

  std::uint64_t max_pop = 0;
  for (const auto& c : candidates) max_pop = std::max(max_pop, registry.popularity(c.tune));

  std::vector<RankedTune> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    RankedTune r;
    r.tune = c.tune;
    r.distance = c.distance;
    r.gen = genre_fit(user, genre_of(c.tune));
    for (const auto* p : peers) {
      auto it = p->scrobble_counts.find(c.tune);
      if (it != p->scrobble_counts.end() && it->second > 0) ++r.listened;
    }
    r.pop = registry.popularity(c.tune);
    r.score = relevancy({c.distance, r.gen, static_cast<double>(r.listened), static_cast<double>(r.pop),
                         static_cast<double>(group.members.size()), static_cast<double>(max_pop)},
                        params);
    out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const RankedTune& a, const RankedTune& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.tune < b.tune;
  });
  return out;
}

std::vector<Recommendation> recommend(const UserProfile& user, const std::vector<Group>& groups,
                                      const ProfileRegistry& registry, std::size_t top) {
  const Group group = group_of(user.id, groups);
  std::map<TuneId, std::uint64_t> listens;
  for (const auto* p : peers_of(user, group, registry)) {
    for (const auto& [tune, count] : p->scrobble_counts) {
      if (count > 0 && !user.scrobble_counts.contains(tune)) listens[tune] += count;
    }
  }
  std::vector<Recommendation> out;
  for (const auto& [tune, count] : listens) out.push_back({tune, count});
  std::stable_sort(out.begin(), out.end(),
                   [](const Recommendation& a, const Recommendation& b) { return a.peer_listens > b.peer_listens; });
  if (out.size() > top) out.resize(top);
  return out;
}

}  // namespace musearch
