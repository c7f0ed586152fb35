#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace musearch {

/// Weights of the elementary edit operations. Insertion and deletion are
/// relative to the first (query) argument: turning `a` into `b`, an
/// insertion adds a symbol of `b`, a deletion drops a symbol of `a`.
struct CostModel {
  double insert_cost = 1.0;
  double delete_cost = 1.0;
  double substitute_cost = 1.0;

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

inline void validate(const CostModel& costs) {
  for (double c : {costs.insert_cost, costs.delete_cost, costs.substitute_cost}) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("edit costs must be finite and non-negative");
  }
}

namespace detail {

// One DP over `a` (rows) and `b` (columns). With `free_ends` the first row
// is zero and the result is the minimum of the last row, which lets `a`
// align against any contiguous slice of `b`.
template <typename T>
double edit_dp(std::span<const T> a, std::span<const T> b, const CostModel& c, bool free_ends) {
  std::vector<double> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = free_ends ? 0.0 : static_cast<double>(j) * c.insert_cost;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<double>(i) * c.delete_cost;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const double diag = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0.0 : c.substitute_cost);
      const double del = prev[j] + c.delete_cost;
      const double ins = cur[j - 1] + c.insert_cost;
      cur[j] = std::min({diag, del, ins});
    }
    std::swap(prev, cur);
  }
  return free_ends ? *std::min_element(prev.begin(), prev.end()) : prev[b.size()];
}

}  // namespace detail

/// Weighted Levenshtein distance (global alignment).
template <typename T>
double edit_distance(std::span<const T> a, std::span<const T> b, const CostModel& costs = {}) {
  return detail::edit_dp(a, b, costs, false);
}

/// Cheapest way to turn `query` into some contiguous substring of `target`
/// (semi-global alignment: the target's prefix and suffix are free).
template <typename T>
double substring_distance(std::span<const T> query, std::span<const T> target, const CostModel& costs = {}) {
  return detail::edit_dp(query, target, costs, true);
}

inline double edit_distance(std::string_view a, std::string_view b, const CostModel& costs = {}) {
  return edit_distance(std::span<const char>(a), std::span<const char>(b), costs);
}

inline double substring_distance(std::string_view query, std::string_view target, const CostModel& costs = {}) {
  return substring_distance(std::span<const char>(query), std::span<const char>(target), costs);
}

}  // namespace musearch
