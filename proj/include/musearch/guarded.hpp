#pragma once

#include <mutex>
#include <shared_mutex>
#include <utility>

namespace musearch {

/// Many concurrent readers, one exclusive writer. Readers see either the
/// state before or after a write, never one in progress. A waiting writer
/// holds the turnstile, so a steady stream of readers cannot starve it.
template <typename T>
class Guarded {
 public:
  Guarded() = default;
  explicit Guarded(T value) : value_(std::move(value)) {}

  template <typename Fn>
  decltype(auto) read(Fn&& fn) const {
    { std::lock_guard pass(turnstile_); }
    std::shared_lock lock(mutex_);
    return std::forward<Fn>(fn)(static_cast<const T&>(value_));
  }

  template <typename Fn>
  decltype(auto) write(Fn&& fn) {
    std::lock_guard gate(turnstile_);
    std::unique_lock lock(mutex_);
    return std::forward<Fn>(fn)(value_);
  }

  T snapshot() const {
    return read([](const T& v) { return v; });
  }

 private:
  mutable std::mutex turnstile_;
  mutable std::shared_mutex mutex_;
  T value_{};
};

}  // namespace musearch
