#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "errors.hpp"
#include "intern.hpp"
#include "sexpr.hpp"

namespace forcelab {

class HFSet;

namespace detail {
struct HFNode {
  std::vector<HFSet> children;
  std::size_t rank = 0;
  std::uint32_t id = 0;
};
InternTable<HFNode>& hf_table();
}  // namespace detail

// Hereditarily finite set, hash-consed: equal sets share one node.
class HFSet {
 public:
  HFSet();

  static HFSet make(std::vector<HFSet> children);

  const std::vector<HFSet>& children() const { return n_->children; }
  std::size_t size() const { return n_->children.size(); }
  bool empty() const { return n_->children.empty(); }
  std::size_t rank() const { return n_->rank; }
  std::uint32_t id() const { return n_->id; }

  bool contains(const HFSet& x) const {
    const auto& c = n_->children;
    auto it = std::lower_bound(c.begin(), c.end(), x);
    return it != c.end() && *it == x;
  }

  friend bool operator==(const HFSet& a, const HFSet& b) { return a.n_ == b.n_; }
  friend std::strong_ordering operator<=>(const HFSet& a, const HFSet& b) {
    return compare(a.n_, b.n_);
  }

 private:
  explicit HFSet(const detail::HFNode* n) : n_(n) {}

  static std::strong_ordering compare(const detail::HFNode* a, const detail::HFNode* b) {
    if (a == b) return std::strong_ordering::equal;
    if (auto c = a->rank <=> b->rank; c != 0) return c;
    const auto& x = a->children;
    const auto& y = b->children;
    std::size_t n = std::min(x.size(), y.size());
    for (std::size_t i = 0; i < n; ++i)
      if (auto c = compare(x[i].n_, y[i].n_); c != 0) return c;
    return x.size() <=> y.size();
  }

  const detail::HFNode* n_;
};

namespace detail {
inline InternTable<HFNode>& hf_table() {
  static InternTable<HFNode> t;
  return t;
}
}  // namespace detail

inline HFSet HFSet::make(std::vector<HFSet> children) {
  std::sort(children.begin(), children.end());
  children.erase(std::unique(children.begin(), children.end()), children.end());
  detail::InternKey key;
  key.reserve(children.size());
  for (const auto& c : children) key.push_back(reinterpret_cast<std::uintptr_t>(c.n_));
  const detail::HFNode* n = detail::hf_table().intern(std::move(key), [&] {
    detail::HFNode node;
    for (const auto& c : children) node.rank = std::max(node.rank, c.rank() + 1);
    node.children = children;
    return node;
  });
  return HFSet(n);
}

inline HFSet::HFSet() : n_(nullptr) {
  static const detail::HFNode* empty_node = [] {
    return detail::hf_table().intern({}, [] { return detail::HFNode{}; });
  }();
  n_ = empty_node;
}

inline HFSet hf_make(std::vector<HFSet> children) { return HFSet::make(std::move(children)); }
inline std::size_t hf_rank(const HFSet& x) { return x.rank(); }

inline HFSet hf_singleton(const HFSet& a) { return HFSet::make({a}); }
inline HFSet hf_pair(const HFSet& a, const HFSet& b) { return HFSet::make({a, b}); }
inline HFSet kpair(const HFSet& a, const HFSet& b) {
  return hf_pair(hf_singleton(a), hf_pair(a, b));
}

inline std::optional<std::pair<HFSet, HFSet>> kpair_decode(const HFSet& p) {
  const auto& c = p.children();
  if (c.size() == 1) {
    const auto& s = c[0].children();
    if (s.size() != 1) return std::nullopt;
    return std::make_pair(s[0], s[0]);
  }
  if (c.size() != 2) return std::nullopt;
  // {a} has lower rank or sorts first among equal rank siblings; try both.
  for (int k = 0; k < 2; ++k) {
    const auto& single = c[k];
    const auto& dbl = c[1 - k];
    if (single.size() != 1 || dbl.size() != 2) continue;
    const HFSet& a = single.children()[0];
    if (!dbl.contains(a)) continue;
    const HFSet& b = dbl.children()[0] == a ? dbl.children()[1] : dbl.children()[0];
    return std::make_pair(a, b);
  }
  return std::nullopt;
}

inline HFSet hf_union(const HFSet& a, const HFSet& b) {
  std::vector<HFSet> c = a.children();
  c.insert(c.end(), b.children().begin(), b.children().end());
  return HFSet::make(std::move(c));
}

inline HFSet nat_encode(std::size_t k) {
  static std::vector<HFSet> cache{HFSet()};
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  while (cache.size() <= k) {
    std::vector<HFSet> c(cache.begin(), cache.end());
    cache.push_back(HFSet::make(std::move(c)));
  }
  return cache[k];
}

inline std::optional<std::size_t> nat_decode(const HFSet& x) {
  if (nat_encode(x.rank()) == x) return x.rank();
  return std::nullopt;
}

inline bool is_transitive(const HFSet& x) {
  for (const auto& y : x.children())
    for (const auto& z : y.children())
      if (!x.contains(z)) return false;
  return true;
}

// Elements of the transitive closure of the given sets, canonically sorted.
inline std::vector<HFSet> transitive_closure(const std::vector<HFSet>& roots) {
  std::unordered_set<std::uint32_t> seen;
  std::vector<HFSet> out, stack;
  for (const auto& r : roots)
    for (const auto& c : r.children()) stack.push_back(c);
  while (!stack.empty()) {
    HFSet x = stack.back();
    stack.pop_back();
    if (!seen.insert(x.id()).second) continue;
    out.push_back(x);
    for (const auto& c : x.children()) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

constexpr std::size_t kDefaultStageCap = 5;

// V_n, canonically sorted. |V_5| = 65536 is the largest stage built by default.
inline std::vector<HFSet> v_stage(std::size_t n, std::size_t cap = kDefaultStageCap) {
  if (n > cap)
    throw ResourceError("v_stage(" + std::to_string(n) + ") exceeds the stage cap " +
                        std::to_string(cap));
  static std::vector<std::vector<HFSet>> cache{{}};
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  while (cache.size() <= n) {
    const auto& prev = cache.back();
    if (prev.size() >= 63) throw ResourceError("v_stage: powerset too large");
    std::size_t m = prev.size();
    std::vector<HFSet> next;
    next.reserve(std::size_t{1} << m);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
      std::vector<HFSet> c;
      for (std::size_t i = 0; i < m; ++i)
        if (mask >> i & 1U) c.push_back(prev[i]);
      next.push_back(HFSet::make(std::move(c)));
    }
    std::sort(next.begin(), next.end());
    cache.push_back(std::move(next));
  }
  return cache[n];
}

inline std::string to_sexpr(const HFSet& x) {
  std::string s = "(hf";
  for (const auto& c : x.children()) {
    s += ' ';
    s += to_sexpr(c);
  }
  s += ')';
  return s;
}

inline HFSet hf_from_sexp(const Sexp& e) {
  expect_list(e, "hf");
  std::vector<HFSet> c;
  for (std::size_t i = 1; i < e.items.size(); ++i) c.push_back(hf_from_sexp(e.items[i]));
  return HFSet::make(std::move(c));
}

inline HFSet parse_hf(std::string_view text) { return hf_from_sexp(read_sexp(text)); }

}  // namespace forcelab

template <>
struct std::hash<forcelab::HFSet> {
  std::size_t operator()(const forcelab::HFSet& x) const noexcept { return x.id(); }
};
