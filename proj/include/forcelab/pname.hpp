#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hfset.hpp"
#include "intern.hpp"
#include "sexpr.hpp"

namespace forcelab {

class PName;
struct PNameEntry;

namespace detail {
struct PNameNode;
}

// A name: a hereditarily finite set of (name, condition-index) pairs.
class PName {
 public:
  using Entry = PNameEntry;

  PName();
  static PName make(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const;
  std::size_t size() const { return entries().size(); }
  bool empty() const { return entries().empty(); }
  std::size_t rank() const;
  std::uint32_t id() const;

  friend bool operator==(const PName& a, const PName& b) { return a.n_ == b.n_; }
  friend std::strong_ordering operator<=>(const PName& a, const PName& b) {
    return compare(a.n_, b.n_);
  }

 private:
  explicit PName(const detail::PNameNode* n) : n_(n) {}
  static std::strong_ordering compare(const detail::PNameNode* a, const detail::PNameNode* b);

  const detail::PNameNode* n_;
};

struct PNameEntry {
  PName name;
  std::uint32_t cond;
  friend bool operator==(const PNameEntry&, const PNameEntry&) = default;
  friend std::strong_ordering operator<=>(const PNameEntry& a, const PNameEntry& b) {
    if (auto c = a.name <=> b.name; c != 0) return c;
    return a.cond <=> b.cond;
  }
};

namespace detail {
struct PNameNode {
  std::vector<PName::Entry> entries;
  std::size_t rank = 0;
  std::uint32_t id = 0;
};
inline InternTable<PNameNode>& pname_table() {
  static InternTable<PNameNode> t;
  return t;
}
}  // namespace detail

inline const std::vector<PName::Entry>& PName::entries() const { return n_->entries; }
inline std::size_t PName::rank() const { return n_->rank; }
inline std::uint32_t PName::id() const { return n_->id; }

inline std::strong_ordering PName::compare(const detail::PNameNode* a,
                                           const detail::PNameNode* b) {
  if (a == b) return std::strong_ordering::equal;
  if (auto c = a->rank <=> b->rank; c != 0) return c;
  const auto& x = a->entries;
  const auto& y = b->entries;
  std::size_t n = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = compare(x[i].name.n_, y[i].name.n_); c != 0) return c;
    if (auto c = x[i].cond <=> y[i].cond; c != 0) return c;
  }
  return x.size() <=> y.size();
}

inline PName PName::make(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  detail::InternKey key;
  key.reserve(entries.size() * 2);
  for (const auto& e : entries) {
    key.push_back(reinterpret_cast<std::uintptr_t>(e.name.n_));
    key.push_back(e.cond);
  }
  const detail::PNameNode* n = detail::pname_table().intern(std::move(key), [&] {
    detail::PNameNode node;
    for (const auto& e : entries) node.rank = std::max(node.rank, e.name.rank() + 1);
    node.entries = entries;
    return node;
  });
  return PName(n);
}

inline PName::PName() : n_(nullptr) {
  static const detail::PNameNode* empty_node = [] {
    return detail::pname_table().intern({}, [] { return detail::PNameNode{}; });
  }();
  n_ = empty_node;
}

// A class name: same shape as a name, used as a unary predicate symbol.
struct ClassName {
  std::string ident;
  std::vector<PName::Entry> entries;

  ClassName() = default;
  ClassName(std::string id, std::vector<PName::Entry> es) : ident(std::move(id)), entries(std::move(es)) {
    std::sort(entries.begin(), entries.end());
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  }
};

constexpr std::uint32_t kOne = 0;

inline PName check_name(const HFSet& x) {
  static std::unordered_map<std::uint32_t, PName> cache;
  static std::mutex mu;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(x.id());
    if (it != cache.end()) return it->second;
  }
  std::vector<PName::Entry> es;
  for (const auto& y : x.children()) es.push_back({check_name(y), kOne});
  PName n = PName::make(std::move(es));
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(x.id(), n);
  return n;
}

inline PName condition_check(std::size_t p) { return check_name(nat_encode(p)); }

inline PName op_name(const PName& s, const PName& t) {
  PName single = PName::make({{s, kOne}});
  PName dbl = PName::make({{s, kOne}, {t, kOne}});
  return PName::make({{single, kOne}, {dbl, kOne}});
}

inline PName name_union(const PName& a, const PName& b) {
  std::vector<PName::Entry> es = a.entries();
  es.insert(es.end(), b.entries().begin(), b.entries().end());
  return PName::make(std::move(es));
}

// The smallest subname-closed set containing the seeds, canonically sorted.
inline std::vector<PName> subname_closure(const std::vector<PName>& seeds) {
  std::unordered_set<std::uint32_t> seen;
  std::vector<PName> out, stack(seeds.begin(), seeds.end());
  while (!stack.empty()) {
    PName n = stack.back();
    stack.pop_back();
    if (!seen.insert(n.id()).second) continue;
    out.push_back(n);
    for (const auto& e : n.entries()) stack.push_back(e.name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string to_sexpr(const PName& n) {
  std::string s = "(name";
  for (const auto& e : n.entries()) {
    s += " (pair ";
    s += to_sexpr(e.name);
    s += ' ';
    s += std::to_string(e.cond);
    s += ')';
  }
  s += ')';
  return s;
}

inline PName name_from_sexp(const Sexp& e) {
  if (e.head_is("check")) {
    if (e.items.size() != 2) throw ParseError("(check <hf>) takes one argument", e.pos);
    return check_name(hf_from_sexp(e.items[1]));
  }
  if (e.head_is("opname")) {
    if (e.items.size() != 3) throw ParseError("(opname <name> <name>) takes two arguments", e.pos);
    return op_name(name_from_sexp(e.items[1]), name_from_sexp(e.items[2]));
  }
  expect_list(e, "name");
  std::vector<PName::Entry> es;
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    const Sexp& p = e.items[i];
    if (!p.head_is("pair") || p.items.size() != 3)
      throw ParseError("expected (pair <name> <cond-id>)", p.pos);
    std::size_t c = parse_index(p.items[2]);
    if (c > UINT32_MAX) throw ParseError("condition index out of range", p.items[2].pos);
    es.push_back({name_from_sexp(p.items[1]), static_cast<std::uint32_t>(c)});
  }
  return PName::make(std::move(es));
}

inline PName parse_name(std::string_view text) { return name_from_sexp(read_sexp(text)); }

}  // namespace forcelab

template <>
struct std::hash<forcelab::PName> {
  std::size_t operator()(const forcelab::PName& x) const noexcept { return x.id(); }
};
