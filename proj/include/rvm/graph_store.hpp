#pragma once

#include <mutex>
#include <shared_mutex>
#include <utility>

#include "rvm/dataset.hpp"

namespace rvm {

/// A Dataset shared between threads: many concurrent readers or one
/// writer. Every public mutation is atomic with respect to readers.
class GraphStore {
 public:
  GraphStore() = default;
  explicit GraphStore(Dataset data) : data_(std::move(data)) {}

  GraphStore(const GraphStore&) = delete;
  GraphStore& operator=(const GraphStore&) = delete;

  /// Runs f(const Dataset&) under a shared lock.
  template <class F>
  decltype(auto) read(F&& f) const {
    std::shared_lock lock(mu_);
    return std::forward<F>(f)(static_cast<const Dataset&>(data_));
  }

  /// Runs f(Dataset&) under the exclusive lock. f must not call back into
  /// this store.
  template <class F>
  decltype(auto) write(F&& f) {
    std::unique_lock lock(mu_);
    return std::forward<F>(f)(data_);
  }

  bool insert(const Quad& q) {
    return write([&](Dataset& d) { return d.insert(q); });
  }
  bool erase(const Quad& q) {
    return write([&](Dataset& d) { return d.erase(q); });
  }
  bool contains(const Quad& q) const {
    return read([&](const Dataset& d) { return d.contains(q); });
  }
  std::vector<Quad> match(const QuadPattern& pattern) const {
    return read([&](const Dataset& d) { return d.match(pattern); });
  }
  std::size_t size() const {
    return read([](const Dataset& d) { return d.size(); });
  }
  std::size_t apply(std::span<const Quad> removals, std::span<const Quad> additions, bool enforce_quota = true) {
    return write([&](Dataset& d) { return d.apply(removals, additions, enforce_quota); });
  }

  /// Atomically replaces `expected` with `replacement` iff `expected` is
  /// present. Returns whether the swap happened.
  bool compare_and_swap(const Quad& expected, const Quad& replacement) {
    return write([&](Dataset& d) {
      if (!d.contains(expected)) return false;
      const Quad rm[] = {expected};
      const Quad add[] = {replacement};
      d.apply(rm, add, false);
      return true;
    });
  }

  Dataset snapshot() const {
    return read([](const Dataset& d) { return d; });
  }

 private:
  mutable std::shared_mutex mu_;
  Dataset data_;
};

}  // namespace rvm
