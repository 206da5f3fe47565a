#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bits.hpp"
#include "errors.hpp"
#include "hfset.hpp"
#include "sexpr.hpp"

namespace forcelab {

struct ConditionTag {
  enum class Kind : std::uint8_t { Plain, Top, CollapseFn, SupIn, SupA };
  Kind kind = Kind::Plain;
  std::vector<int> fn;  // CollapseFn: clock position -> target index, or -1
  std::size_t i = 0, j = 0;
};

struct CollapseInfo {
  std::size_t stage = 0;
  std::size_t clock = 0;
  std::vector<HFSet> targets;
  std::vector<HFSet> A;
  std::map<std::vector<int>, std::size_t> fn_index;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> sup_in;
  std::map<std::size_t, std::size_t> sup_a;

  std::optional<std::size_t> singleton(std::size_t n, std::size_t target) const {
    std::vector<int> f(clock, -1);
    f[n] = static_cast<int>(target);
    auto it = fn_index.find(f);
    if (it == fn_index.end()) return std::nullopt;
    return it->second;
  }
};

// Finite preorder with a largest element at index 0.
class ForcingNotion {
 public:
  ForcingNotion() = default;

  // `le` lists generating pairs (p, q) meaning p <= q; the reflexive-transitive closure is taken.
  static ForcingNotion from_relation(std::vector<std::string> labels,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& le) {
    std::size_t n = labels.size();
    if (n == 0) throw DomainError("a forcing notion needs at least one condition");
    std::vector<CondSet> down(n, CondSet(n));
    for (std::size_t p = 0; p < n; ++p) down[p].set(p);
    for (auto [p, q] : le) {
      if (p >= n || q >= n) throw DomainError("order pair refers to an unknown condition");
      down[q].set(p);
    }
    // Warshall closure on down-sets: if r <= q and q <= p then r <= p.
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t p = 0; p < n; ++p)
        if (down[p].test(q)) down[p] |= down[q];
    return from_down_sets(std::move(labels), std::move(down));
  }

  static ForcingNotion from_down_sets(std::vector<std::string> labels, std::vector<CondSet> down) {
    ForcingNotion P;
    std::size_t n = labels.size();
    P.labels_ = std::move(labels);
    P.down_ = std::move(down);
    P.up_.assign(n, CondSet(n));
    for (std::size_t p = 0; p < n; ++p)
      P.down_[p].for_each([&](std::size_t q) { P.up_[q].set(p); });
    if (!P.down_[0].all()) throw DomainError("condition 0 (one) is not above every condition");
    P.tags_.assign(n, ConditionTag{});
    P.tags_[0].kind = ConditionTag::Kind::Top;
    return P;
  }

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t p) const { return labels_[p]; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<std::size_t> index_of(std::string_view label) const {
    for (std::size_t p = 0; p < labels_.size(); ++p)
      if (labels_[p] == label) return p;
    return std::nullopt;
  }

  bool le(std::size_t p, std::size_t q) const { return down_[q].test(p); }
  bool equivalent(std::size_t p, std::size_t q) const { return le(p, q) && le(q, p); }
  const CondSet& down(std::size_t p) const { return down_[p]; }
  const CondSet& up(std::size_t p) const { return up_[p]; }
  bool compatible(std::size_t p, std::size_t q) const { return down_[p].intersects(down_[q]); }
  CondSet all() const { return CondSet(size(), true); }
  CondSet none() const { return CondSet(size()); }

  CondSet up_closure(const CondSet& x) const {
    CondSet r(size());
    x.for_each([&](std::size_t p) { r |= up_[p]; });
    return r;
  }
  CondSet down_closure(const CondSet& x) const {
    CondSet r(size());
    x.for_each([&](std::size_t p) { r |= down_[p]; });
    return r;
  }
  // {p : below p no condition lies in x}
  CondSet no_extension_in(const CondSet& x) const { return up_closure(x).complement(); }
  // {p : x is dense below p}
  CondSet dense_interior(const CondSet& x) const {
    return up_closure(up_closure(x).complement()).complement();
  }
  bool is_dense(const CondSet& d) const { return dense_interior(d).all(); }
  bool is_dense_below(const CondSet& d, std::size_t p) const { return dense_interior(d).test(p); }

  std::vector<std::size_t> minimal_elements() const {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < size(); ++p)
      if (down_[p].subset_of(up_[p])) out.push_back(p);
    return out;
  }

  const ConditionTag& tag(std::size_t p) const { return tags_[p]; }
  void set_tag(std::size_t p, ConditionTag t) { tags_[p] = std::move(t); }
  const std::optional<CollapseInfo>& collapse() const { return collapse_; }
  void set_collapse(CollapseInfo c) { collapse_ = std::move(c); }

 private:
  std::vector<std::string> labels_;
  std::vector<CondSet> down_, up_;
  std::vector<ConditionTag> tags_;
  std::optional<CollapseInfo> collapse_;
};

// First (p, q) with p not <= q although every extension of p is compatible with q.
inline std::optional<std::pair<std::size_t, std::size_t>> is_separative(const ForcingNotion& P) {
  for (std::size_t p = 0; p < P.size(); ++p)
    for (std::size_t q = 0; q < P.size(); ++q) {
      if (P.le(p, q)) continue;
      bool witness = false;
      P.down(p).for_each([&](std::size_t r) {
        if (!P.compatible(r, q)) witness = true;
      });
      if (!witness) return std::make_pair(p, q);
    }
  return std::nullopt;
}

inline bool is_dense(const ForcingNotion& P, const CondSet& d) { return P.is_dense(d); }
inline bool is_dense_below(const ForcingNotion& P, const CondSet& d, std::size_t p) {
  return P.is_dense_below(d, p);
}

struct Filter {
  CondSet members;
  std::size_t generator = 0;
};

// In a finite preorder the generic filters are the upward closures of minimal conditions.
inline std::vector<Filter> generic_filters(const ForcingNotion& P) {
  std::vector<Filter> out;
  std::vector<bool> covered(P.size(), false);
  for (std::size_t m : P.minimal_elements()) {
    if (covered[m]) continue;
    P.down(m).for_each([&](std::size_t q) { covered[q] = true; });
    out.push_back({P.up(m), m});
  }
  return out;
}

inline bool is_filter(const ForcingNotion& P, const CondSet& f) {
  if (f.none()) return false;
  if (P.up_closure(f) != f) return false;
  bool ok = true;
  f.for_each([&](std::size_t a) {
    f.for_each([&](std::size_t b) {
      if (ok && !(P.down(a) & P.down(b)).intersects(f)) ok = false;
    });
  });
  return ok;
}

struct FilterAudit {
  bool ok = true;
  std::string detail;
  std::size_t dense_sets_checked = 0;
};

// Exhaustive over all subsets when |P| <= exhaustive_limit, otherwise sampled dense sets.
inline FilterAudit verify_generic_filters(const ForcingNotion& P, const std::vector<Filter>& fs,
                                          std::uint64_t seed = 1, std::size_t samples = 2000,
                                          std::size_t exhaustive_limit = 12) {
  FilterAudit a;
  std::size_t n = P.size();
  for (const auto& f : fs)
    if (!is_filter(P, f.members)) {
      a.ok = false;
      a.detail = "returned set generated by " + P.label(f.generator) + " is not a filter";
      return a;
    }
  auto check_dense = [&](const CondSet& d) {
    ++a.dense_sets_checked;
    for (const auto& f : fs)
      if (!f.members.intersects(d)) {
        a.ok = false;
        a.detail = "filter generated by " + P.label(f.generator) + " misses a dense set";
        return false;
      }
    return true;
  };
  if (n <= exhaustive_limit) {
    std::vector<CondSet> dense;
    std::vector<CondSet> maximal;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
      CondSet s(n);
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1U) s.set(i);
      if (P.is_dense(s)) {
        if (!check_dense(s)) return a;
        dense.push_back(s);
      }
      if (is_filter(P, s)) maximal.push_back(s);
    }
    std::vector<CondSet> maxf;
    for (const auto& f : maximal) {
      bool is_max = true;
      for (const auto& g : maximal)
        if (f != g && f.subset_of(g)) is_max = false;
      if (is_max) maxf.push_back(f);
    }
    for (const auto& f : maxf) {
      bool listed = std::any_of(fs.begin(), fs.end(), [&](const Filter& g) { return g.members == f; });
      if (listed) continue;
      bool misses = std::any_of(dense.begin(), dense.end(), [&](const CondSet& d) { return !f.intersects(d); });
      if (!misses) {
        a.ok = false;
        a.detail = "an omitted maximal filter meets every dense set";
        return a;
      }
    }
    return a;
  }
  std::mt19937_64 rng(seed);
  auto mins = P.minimal_elements();
  for (std::size_t s = 0; s < samples; ++s) {
    CondSet d(n);
    for (std::size_t m : mins) {
      auto cls = (P.down(m) & P.up(m)).indices();
      d.set(cls[rng() % cls.size()]);
    }
    for (std::size_t i = 0; i < n; ++i)
      if (rng() & 1U) d.set(i);
    if (!P.is_dense(d)) {
      a.ok = false;
      a.detail = "sampler produced a non-dense set";
      return a;
    }
    if (!check_dense(d)) return a;
  }
  return a;
}

struct CollapseOptions {
  std::size_t budget = 20000;
  // Keep sup tokens whose defining set of collapse functions is empty.
  bool keep_empty_suprema = false;
};

namespace detail {
inline std::string fn_label(const std::vector<int>& f) {
  std::string s = "f";
  bool any = false;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] < 0) continue;
    s += any ? "," : ":";
    s += std::to_string(i) + ">" + std::to_string(f[i]);
    any = true;
  }
  return any ? s : "one";
}

inline std::size_t count_partial_injections(std::size_t k, std::size_t limit) {
  // sum_j C(k,j) * k!/(k-j)!
  double total = 0, c = 1, perm = 1;
  for (std::size_t j = 0; j <= k; ++j) {
    total += c * perm;
    if (total > static_cast<double>(limit)) return limit + 1;
    c = c * static_cast<double>(k - j) / static_cast<double>(j + 1);
    perm *= static_cast<double>(k - j);
  }
  return static_cast<std::size_t>(total);
}
}  // namespace detail

// The finite analogue of Coll(omega, V_n) augmented by sup conditions e_{i,j} and a_i.
inline ForcingNotion build_collapse(std::size_t n, const std::vector<HFSet>& A,
                                    const CollapseOptions& opt = {}) {
  std::vector<HFSet> targets = v_stage(n);
  for (const auto& a : A)
    if (!std::binary_search(targets.begin(), targets.end(), a))
      throw DomainError("A must be a subset of V_" + std::to_string(n));
  std::size_t k = targets.size();
  if (detail::count_partial_injections(k, opt.budget) > opt.budget)
    throw ResourceError("collapse notion over V_" + std::to_string(n) + " exceeds the condition budget");

  std::vector<std::vector<int>> fns;
  std::vector<int> cur(k, -1);
  std::vector<bool> used(k, false);
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (pos == k) {
      fns.push_back(cur);
      return;
    }
    cur[pos] = -1;
    self(self, pos + 1);
    for (std::size_t t = 0; t < k; ++t) {
      if (used[t]) continue;
      used[t] = true;
      cur[pos] = static_cast<int>(t);
      self(self, pos + 1);
      used[t] = false;
    }
    cur[pos] = -1;
  };
  rec(rec, 0);

  std::vector<HFSet> Asorted = A;
  std::sort(Asorted.begin(), Asorted.end());
  Asorted.erase(std::unique(Asorted.begin(), Asorted.end()), Asorted.end());
  auto in_A = [&](int t) { return std::binary_search(Asorted.begin(), Asorted.end(), targets[static_cast<std::size_t>(t)]); };

  CollapseInfo info;
  info.stage = n;
  info.clock = k;
  info.targets = targets;
  info.A = Asorted;

  std::vector<std::string> labels;
  std::vector<ConditionTag> tags;
  for (std::size_t i = 0; i < fns.size(); ++i) {
    info.fn_index[fns[i]] = i;
    labels.push_back(detail::fn_label(fns[i]));
    ConditionTag t;
    t.kind = i == 0 ? ConditionTag::Kind::Top : ConditionTag::Kind::CollapseFn;
    t.fn = fns[i];
    tags.push_back(t);
  }
  auto realises_in = [&](const std::vector<int>& f, std::size_t i, std::size_t j) {
    return f[i] >= 0 && f[j] >= 0 &&
           targets[static_cast<std::size_t>(f[j])].contains(targets[static_cast<std::size_t>(f[i])]);
  };
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      bool inhabited = std::any_of(fns.begin(), fns.end(), [&](const auto& f) { return realises_in(f, i, j); });
      if (!inhabited && !opt.keep_empty_suprema) continue;
      info.sup_in[{i, j}] = labels.size();
      labels.push_back("e:" + std::to_string(i) + "," + std::to_string(j));
      ConditionTag t;
      t.kind = ConditionTag::Kind::SupIn;
      t.i = i;
      t.j = j;
      tags.push_back(t);
    }
  for (std::size_t i = 0; i < k; ++i) {
    bool inhabited = !Asorted.empty();
    if (!inhabited && !opt.keep_empty_suprema) continue;
    info.sup_a[i] = labels.size();
    labels.push_back("a:" + std::to_string(i));
    ConditionTag t;
    t.kind = ConditionTag::Kind::SupA;
    t.i = i;
    tags.push_back(t);
  }
  if (labels.size() > opt.budget)
    throw ResourceError("collapse notion exceeds the condition budget");

  std::size_t total = labels.size();
  std::vector<CondSet> down(total, CondSet(total));
  auto extends = [](const std::vector<int>& f, const std::vector<int>& g) {
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g[i] >= 0 && f[i] != g[i]) return false;
    return true;
  };
  for (std::size_t g = 0; g < fns.size(); ++g)
    for (std::size_t f = 0; f < fns.size(); ++f)
      if (extends(fns[f], fns[g])) down[g].set(f);
  for (std::size_t p = fns.size(); p < total; ++p) {
    down[p].set(p);
    down[0].set(p);
    const ConditionTag& t = tags[p];
    for (std::size_t f = 0; f < fns.size(); ++f) {
      bool below = t.kind == ConditionTag::Kind::SupIn
                       ? realises_in(fns[f], t.i, t.j)
                       : fns[f][t.i] >= 0 && in_A(fns[f][t.i]);
      if (below) down[p].set(f);
    }
  }
  ForcingNotion P = ForcingNotion::from_down_sets(std::move(labels), std::move(down));
  for (std::size_t p = 0; p < total; ++p) P.set_tag(p, tags[p]);
  P.set_collapse(std::move(info));
  return P;
}

inline std::string to_sexpr(const ForcingNotion& P) {
  std::string s = "(poset (elems";
  for (const auto& l : P.labels()) s += " " + l;
  s += ") (one " + P.label(0) + ") (le";
  for (std::size_t p = 0; p < P.size(); ++p)
    for (std::size_t q = 0; q < P.size(); ++q)
      if (p != q && P.le(p, q)) s += " (" + P.label(p) + " " + P.label(q) + ")";
  return s + "))";
}

inline ForcingNotion poset_from_sexp(const Sexp& e) {
  expect_list(e, "poset");
  std::vector<std::string> labels;
  std::optional<std::string> one;
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::size_t> pair_pos;
  bool have_elems = false;
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    const Sexp& c = e.items[i];
    if (c.head_is("elems")) {
      have_elems = true;
      for (std::size_t j = 1; j < c.items.size(); ++j) {
        if (!c.items[j].is_atom()) throw ParseError("condition labels must be atoms", c.items[j].pos);
        if (std::find(labels.begin(), labels.end(), c.items[j].atom) != labels.end())
          throw ParseError("duplicate condition '" + c.items[j].atom + "'", c.items[j].pos);
        labels.push_back(c.items[j].atom);
      }
    } else if (c.head_is("one")) {
      if (c.items.size() != 2 || !c.items[1].is_atom()) throw ParseError("expected (one <label>)", c.pos);
      one = c.items[1].atom;
    } else if (c.head_is("le")) {
      for (std::size_t j = 1; j < c.items.size(); ++j) {
        const Sexp& pr = c.items[j];
        if (!pr.is_list || pr.items.size() != 2 || !pr.items[0].is_atom() || !pr.items[1].is_atom())
          throw ParseError("expected (<lower> <upper>)", pr.pos);
        pairs.emplace_back(pr.items[0].atom, pr.items[1].atom);
        pair_pos.push_back(pr.pos);
      }
    } else {
      throw ParseError("unknown poset clause", c.pos);
    }
  }
  if (!have_elems || labels.empty()) throw ParseError("poset has no (elems ...)", e.pos);
  if (!one) throw ParseError("poset has no (one ...)", e.pos);
  auto it = std::find(labels.begin(), labels.end(), *one);
  if (it == labels.end()) throw ParseError("(one " + *one + ") is not an element", e.pos);
  std::rotate(labels.begin(), it, it + 1);
  std::vector<std::pair<std::size_t, std::size_t>> le;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    auto a = std::find(labels.begin(), labels.end(), pairs[k].first);
    auto b = std::find(labels.begin(), labels.end(), pairs[k].second);
    if (a == labels.end() || b == labels.end()) throw ParseError("order pair names an unknown condition", pair_pos[k]);
    le.emplace_back(static_cast<std::size_t>(a - labels.begin()), static_cast<std::size_t>(b - labels.begin()));
  }
  try {
    return ForcingNotion::from_relation(std::move(labels), le);
  } catch (const DomainError& err) {
    throw ParseError(err.what(), e.pos);
  }
}

inline ForcingNotion parse_poset(std::string_view text) { return poset_from_sexp(read_sexp(text)); }

}  // namespace forcelab
