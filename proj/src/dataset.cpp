#include "rvm/dataset.hpp"

#include <algorithm>

#include "rvm/error.hpp"

namespace rvm {

namespace {

const std::optional<Term>& pattern_position(const QuadPattern& p, int i) {
  switch (i) {
    case 0: return p.s;
    case 1: return p.p;
    case 2: return p.o;
    default: return p.g;
  }
}

bool matches(const QuadPattern& pat, const Quad& q) {
  for (int i = 0; i < 4; ++i) {
    const auto& want = pattern_position(pat, i);
    if (want && *want != detail::position(q, i)) return false;
  }
  return true;
}

// Number of leading positions of the order that the pattern binds.
int bound_prefix(const QuadPattern& pat, IndexOrder order) {
  int n = 0;
  for (int i : detail::permutation(order)) {
    if (!pattern_position(pat, i)) break;
    ++n;
  }
  return n;
}

Term& mutable_position(Quad& q, int i) {
  switch (i) {
    case 0: return q.s;
    case 1: return q.p;
    case 2: return q.o;
    default: return q.g;
  }
}

}  // namespace

template <IndexOrder Order, class F>
void Dataset::visit(const std::set<Quad, detail::QuadLess<Order>>& index, const QuadPattern& pat, F&& f) const {
  const int prefix = bound_prefix(pat, Order);
  const auto perm = detail::permutation(Order);
  // Default-constructed terms sort first, so this is the smallest quad
  // sharing the bound prefix.
  Quad low;
  for (int k = 0; k < prefix; ++k) mutable_position(low, perm[k]) = *pattern_position(pat, perm[k]);
  for (auto it = index.lower_bound(low); it != index.end(); ++it) {
    bool in_prefix = true;
    for (int k = 0; k < prefix; ++k) {
      if (detail::position(*it, perm[k]) != *pattern_position(pat, perm[k])) {
        in_prefix = false;
        break;
      }
    }
    if (!in_prefix) break;
    if (matches(pat, *it)) f(*it);
  }
}

template <class F>
void Dataset::for_each_match(const QuadPattern& pat, F&& f) const {
  const int g = bound_prefix(pat, IndexOrder::GSPO);
  const int s = bound_prefix(pat, IndexOrder::SPOG);
  const int p = bound_prefix(pat, IndexOrder::POSG);
  const int o = bound_prefix(pat, IndexOrder::OSPG);
  const int best = std::max({g, s, p, o});
  if (best == s) return visit(spog_, pat, f);
  if (best == p) return visit(posg_, pat, f);
  if (best == o) return visit(ospg_, pat, f);
  visit(gspo_, pat, f);
}

bool Dataset::insert(const Quad& q) {
  if (gspo_.contains(q)) return false;
  if (auto limit = quota_for(q.g); limit && graph_size(q.g) + 1 > *limit) throw QuotaExceeded(q.g.value(), *limit);
  insert_unchecked(q);
  return true;
}

bool Dataset::erase(const Quad& q) {
  if (!gspo_.contains(q)) return false;
  erase_unchecked(q);
  return true;
}

bool Dataset::contains(const Quad& q) const { return gspo_.contains(q); }

std::vector<Quad> Dataset::match(const QuadPattern& pattern) const {
  std::vector<Quad> out;
  for_each_match(pattern, [&](const Quad& q) { out.push_back(q); });
  return out;
}

std::size_t Dataset::count(const QuadPattern& pattern) const {
  std::size_t n = 0;
  for_each_match(pattern, [&](const Quad&) { ++n; });
  return n;
}

std::size_t Dataset::graph_size(const Term& g) const {
  auto it = graph_sizes_.find(g);
  return it == graph_sizes_.end() ? 0 : it->second;
}

std::vector<Term> Dataset::graphs() const {
  std::vector<Term> out;
  out.reserve(graph_sizes_.size());
  for (const auto& [g, n] : graph_sizes_) out.push_back(g);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Quad> Dataset::scan(IndexOrder order) const {
  switch (order) {
    case IndexOrder::GSPO: return {gspo_.begin(), gspo_.end()};
    case IndexOrder::SPOG: return {spog_.begin(), spog_.end()};
    case IndexOrder::POSG: return {posg_.begin(), posg_.end()};
    case IndexOrder::OSPG: return {ospg_.begin(), ospg_.end()};
  }
  return {};
}

std::size_t Dataset::apply(std::span<const Quad> removals, std::span<const Quad> additions, bool enforce_quota) {
  std::set<Quad, detail::QuadLess<IndexOrder::GSPO>> removed;
  for (const Quad& q : removals)
    if (gspo_.contains(q)) removed.insert(q);
  std::set<Quad, detail::QuadLess<IndexOrder::GSPO>> added;
  for (const Quad& q : additions)
    if (!gspo_.contains(q) || removed.contains(q)) added.insert(q);
  // A quad both removed and re-added is a no-op.
  for (auto it = added.begin(); it != added.end();) {
    if (removed.erase(*it)) {
      it = added.erase(it);
    } else {
      ++it;
    }
  }

  if (enforce_quota) {
    std::map<Term, long long> delta;
    for (const Quad& q : removed) --delta[q.g];
    for (const Quad& q : added) ++delta[q.g];
    for (const auto& [g, d] : delta) {
      auto limit = quota_for(g);
      if (limit && d > 0 && static_cast<long long>(graph_size(g)) + d > static_cast<long long>(*limit))
        throw QuotaExceeded(g.value(), *limit);
    }
  }

  for (const Quad& q : removed) erase_unchecked(q);
  for (const Quad& q : added) insert_unchecked(q);
  return removed.size() + added.size();
}

std::optional<std::size_t> Dataset::quota_for(const Term& g) const {
  if (auto it = quotas_.find(g); it != quotas_.end()) return it->second;
  return default_quota_;
}

Term Dataset::fresh_blank() {
  for (;;) {
    Term b = Term::blank("b" + std::to_string(next_blank_++));
    if (count({b, {}, {}, {}}) == 0 && count({{}, {}, b, {}}) == 0) return b;
  }
}

void Dataset::clear() {
  gspo_.clear();
  spog_.clear();
  posg_.clear();
  ospg_.clear();
  graph_sizes_.clear();
}

void Dataset::insert_unchecked(const Quad& q) {
  gspo_.insert(q);
  spog_.insert(q);
  posg_.insert(q);
  ospg_.insert(q);
  ++graph_sizes_[q.g];
}

void Dataset::erase_unchecked(const Quad& q) {
  gspo_.erase(q);
  spog_.erase(q);
  posg_.erase(q);
  ospg_.erase(q);
  if (--graph_sizes_[q.g] == 0) graph_sizes_.erase(q.g);
}

}  // namespace rvm
