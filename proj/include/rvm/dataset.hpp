#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "rvm/term.hpp"

namespace rvm {

/// A quad with optional positions; an absent position matches anything.
struct QuadPattern {
  std::optional<Term> s;
  std::optional<Term> p;
  std::optional<Term> o;
  std::optional<Term> g;
};

enum class IndexOrder { GSPO, SPOG, POSG, OSPG };

namespace detail {

// Position numbering: 0=s 1=p 2=o 3=g.
using Permutation = std::array<int, 4>;

constexpr Permutation permutation(IndexOrder order) {
  switch (order) {
    case IndexOrder::GSPO: return {3, 0, 1, 2};
    case IndexOrder::SPOG: return {0, 1, 2, 3};
    case IndexOrder::POSG: return {1, 2, 0, 3};
    case IndexOrder::OSPG: return {2, 0, 1, 3};
  }
  return {0, 1, 2, 3};
}

inline const Term& position(const Quad& q, int i) {
  switch (i) {
    case 0: return q.s;
    case 1: return q.p;
    case 2: return q.o;
    default: return q.g;
  }
}

template <IndexOrder Order>
struct QuadLess {
  bool operator()(const Quad& a, const Quad& b) const {
    for (int i : permutation(Order)) {
      auto c = position(a, i) <=> position(b, i);
      if (c != 0) return c < 0;
    }
    return false;
  }
};

}  // namespace detail

/// In-memory quad set with four covering indexes and per-graph quotas.
/// Not synchronized; see GraphStore for the shared, locked wrapper.
class Dataset {
 public:
  /// Inserts q. Returns false if q was already present.
  /// Throws QuotaExceeded if q.g would exceed its quota.
  bool insert(const Quad& q);
  bool erase(const Quad& q);
  bool contains(const Quad& q) const;

  std::vector<Quad> match(const QuadPattern& pattern) const;
  std::size_t count(const QuadPattern& pattern) const;

  std::size_t size() const { return gspo_.size(); }
  std::size_t graph_size(const Term& g) const;
  bool has_graph(const Term& g) const { return graph_size(g) > 0; }
  std::vector<Term> graphs() const;

  /// All quads in the given index order.
  std::vector<Quad> scan(IndexOrder order) const;
  std::vector<Quad> quads() const { return scan(IndexOrder::GSPO); }

  /// Applies removals then additions atomically: if any quota check fails
  /// nothing changes. Returns the number of quads actually removed plus added.
  std::size_t apply(std::span<const Quad> removals, std::span<const Quad> additions, bool enforce_quota = true);

  void set_quota(const Term& g, std::size_t limit) { quotas_[g] = limit; }
  void clear_quota(const Term& g) { quotas_.erase(g); }
  void set_default_quota(std::optional<std::size_t> limit) { default_quota_ = limit; }
  std::optional<std::size_t> quota_for(const Term& g) const;

  /// A blank node whose label is not used anywhere in the dataset.
  Term fresh_blank();

  void clear();

 private:
  template <IndexOrder Order, class F>
  void visit(const std::set<Quad, detail::QuadLess<Order>>& index, const QuadPattern& pat, F&& f) const;
  template <class F>
  void for_each_match(const QuadPattern& pat, F&& f) const;

  void insert_unchecked(const Quad& q);
  void erase_unchecked(const Quad& q);

  std::set<Quad, detail::QuadLess<IndexOrder::GSPO>> gspo_;
  std::set<Quad, detail::QuadLess<IndexOrder::SPOG>> spog_;
  std::set<Quad, detail::QuadLess<IndexOrder::POSG>> posg_;
  std::set<Quad, detail::QuadLess<IndexOrder::OSPG>> ospg_;
  std::unordered_map<Term, std::size_t> graph_sizes_;
  std::unordered_map<Term, std::size_t> quotas_;
  std::optional<std::size_t> default_quota_;
  std::uint64_t next_blank_ = 0;
};

}  // namespace rvm
