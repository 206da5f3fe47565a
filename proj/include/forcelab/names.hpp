#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bits.hpp"
#include "errors.hpp"
#include "hfset.hpp"
#include "pname.hpp"
#include "poset.hpp"

namespace forcelab {

struct NameUniverse {
  std::vector<PName> names;

  NameUniverse() = default;
  explicit NameUniverse(std::vector<PName> ns) : names(std::move(ns)) {
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    for (std::size_t i = 0; i < names.size(); ++i) index_.emplace(names[i].id(), i);
  }
  std::size_t size() const { return names.size(); }
  bool contains(const PName& n) const { return index_.count(n.id()) > 0; }
  std::size_t index(const PName& n) const { return index_.at(n.id()); }
  bool subname_closed() const {
    for (const auto& n : names)
      for (const auto& e : n.entries())
        if (!contains(e.name)) return false;
    return true;
  }

 private:
  std::unordered_map<std::uint32_t, std::size_t> index_;
};

constexpr std::size_t kDefaultNameBudget = 20000;

// All names of rank <= rho over P: N_0 = {empty}, N_{k+1} = subsets of N_k x P.
inline NameUniverse name_universe(const ForcingNotion& P, std::size_t rho,
                                  std::size_t budget = kDefaultNameBudget) {
  std::vector<PName> level{PName()};
  for (std::size_t k = 0; k < rho; ++k) {
    std::size_t pairs = level.size() * P.size();
    if (pairs >= 63 || (std::size_t{1} << pairs) > budget)
      throw ResourceError("name universe of rank " + std::to_string(k + 1) + " has 2^" +
                          std::to_string(pairs) + " names, over the budget of " + std::to_string(budget));
    std::vector<PName::Entry> cells;
    for (const auto& n : level)
      for (std::size_t p = 0; p < P.size(); ++p) cells.push_back({n, static_cast<std::uint32_t>(p)});
    std::vector<PName> next;
    next.reserve(std::size_t{1} << pairs);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs); ++mask) {
      std::vector<PName::Entry> es;
      for (std::size_t i = 0; i < pairs; ++i)
        if (mask >> i & 1U) es.push_back(cells[i]);
      next.push_back(PName::make(std::move(es)));
    }
    level = std::move(next);
  }
  return NameUniverse(std::move(level));
}

inline NameUniverse seeded_universe(const std::vector<PName>& seeds, std::size_t budget = kDefaultNameBudget) {
  auto closed = subname_closure(seeds);
  if (closed.size() > budget) throw ResourceError("seeded name universe exceeds the budget");
  return NameUniverse(std::move(closed));
}

inline NameUniverse merge_universes(const NameUniverse& a, const std::vector<PName>& extra) {
  std::vector<PName> all = a.names;
  auto more = subname_closure(extra);
  all.insert(all.end(), more.begin(), more.end());
  return NameUniverse(std::move(all));
}

inline HFSet eval_name(const PName& n, const CondSet& G,
                       std::unordered_map<std::uint32_t, HFSet>& memo) {
  if (auto it = memo.find(n.id()); it != memo.end()) return it->second;
  std::vector<HFSet> c;
  for (const auto& e : n.entries())
    if (G.test(e.cond)) c.push_back(eval_name(e.name, G, memo));
  HFSet v = HFSet::make(std::move(c));
  memo.emplace(n.id(), v);
  return v;
}

inline HFSet eval_name(const PName& n, const CondSet& G) {
  std::unordered_map<std::uint32_t, HFSet> memo;
  return eval_name(n, G, memo);
}

inline std::vector<HFSet> eval_class(const ClassName& c, const CondSet& G) {
  std::unordered_map<std::uint32_t, HFSet> memo;
  std::vector<HFSet> out;
  for (const auto& e : c.entries)
    if (G.test(e.cond)) out.push_back(eval_name(e.name, G, memo));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline ClassName g_dot(const ForcingNotion& P) {
  std::vector<PName::Entry> es;
  for (std::size_t p = 0; p < P.size(); ++p)
    es.push_back({condition_check(p), static_cast<std::uint32_t>(p)});
  return ClassName("G", std::move(es));
}

namespace detail {
inline const CollapseInfo& collapse_info(const ForcingNotion& P) {
  if (!P.collapse()) throw DomainError("this operation needs a collapse notion");
  return *P.collapse();
}
}  // namespace detail

// {<op(n, m), e_{n,m}>}
inline PName eps_dot(const ForcingNotion& P) {
  const auto& c = detail::collapse_info(P);
  std::vector<PName::Entry> es;
  for (const auto& [ij, cond] : c.sup_in)
    es.push_back({op_name(check_name(nat_encode(ij.first)), check_name(nat_encode(ij.second))),
                  static_cast<std::uint32_t>(cond)});
  return PName::make(std::move(es));
}

// {<n, a_n>}
inline PName a_dot(const ForcingNotion& P) {
  const auto& c = detail::collapse_info(P);
  std::vector<PName::Entry> es;
  for (const auto& [i, cond] : c.sup_a)
    es.push_back({check_name(nat_encode(i)), static_cast<std::uint32_t>(cond)});
  return PName::make(std::move(es));
}

// {<k, (n -> a)> | k < n}: the name of the number that the generic maps to a.
inline PName n_dot(const ForcingNotion& P, const HFSet& a) {
  const auto& c = detail::collapse_info(P);
  auto t = std::lower_bound(c.targets.begin(), c.targets.end(), a);
  if (t == c.targets.end() || *t != a) throw DomainError("n_dot: parameter is outside the collapsed stage");
  std::size_t target = static_cast<std::size_t>(t - c.targets.begin());
  std::vector<PName::Entry> es;
  for (std::size_t n = 0; n < c.clock; ++n) {
    auto cond = c.singleton(n, target);
    if (!cond) continue;
    for (std::size_t k = 0; k < n; ++k)
      es.push_back({check_name(nat_encode(k)), static_cast<std::uint32_t>(*cond)});
  }
  return PName::make(std::move(es));
}

}  // namespace forcelab
