#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "bits.hpp"
#include "errors.hpp"
#include "etr.hpp"
#include "formula.hpp"
#include "names.hpp"
#include "pname.hpp"
#include "poset.hpp"

namespace forcelab {

enum class AtomKind : std::uint8_t { In, Eq, Sub };

inline const char* atom_kind_name(AtomKind k) {
  switch (k) {
    case AtomKind::In: return "in";
    case AtomKind::Eq: return "eq";
    case AtomKind::Sub: return "sub";
  }
  return "?";
}

// Recursion stage of the pair (s, t): by maximum rank, then by the ranks lexicographically.
inline std::tuple<std::size_t, std::size_t, std::size_t> pair_stage_key(const PName& s, const PName& t) {
  return {std::max(s.rank(), t.rank()), s.rank(), t.rank()};
}

// The forcing relation over a finite notion: atomic statements are tabulated (lazily, by the
// rank-ordered recursion) and composite formulas are decided by the first-order clauses.
class ForcingRelation {
 public:
  ForcingRelation(std::shared_ptr<const ForcingNotion> P, NameUniverse N,
                  std::vector<ClassName> classes = {})
      : P_(std::move(P)), N_(std::move(N)) {
    classes_.push_back(g_dot(*P_));
    for (auto& c : classes) add_class(std::move(c));
  }

  const ForcingNotion& notion() const { return *P_; }
  std::shared_ptr<const ForcingNotion> notion_ptr() const { return P_; }
  const NameUniverse& universe() const { return N_; }

  void add_class(ClassName c) {
    for (auto& existing : classes_)
      if (existing.ident == c.ident) {
        existing = std::move(c);
        class_memo_.clear();
        memo_.clear();
        return;
      }
    classes_.push_back(std::move(c));
  }
  const ClassName& class_name(const std::string& ident) const {
    for (const auto& c : classes_)
      if (c.ident == ident) return c;
    throw DomainError("unknown class name '" + ident + "'");
  }
  const std::vector<ClassName>& classes() const { return classes_; }

  const CondSet& in(const PName& s, const PName& t) { return atom(AtomKind::In, s, t); }
  const CondSet& eq(const PName& s, const PName& t) { return atom(AtomKind::Eq, s, t); }
  const CondSet& sub(const PName& s, const PName& t) { return atom(AtomKind::Sub, s, t); }

  const CondSet& atom(AtomKind k, const PName& s, const PName& t) {
    auto& table = tables_[static_cast<std::size_t>(k)];
    auto key = pair_key(s, t);
    if (auto it = table.find(key); it != table.end()) return it->second;
    CondSet v = clause(k, s, t);
    return table.emplace(key, std::move(v)).first->second;
  }

  // Recomputes one atomic clause from the current table contents.
  CondSet clause(AtomKind k, const PName& s, const PName& t) {
    const ForcingNotion& P = *P_;
    switch (k) {
      case AtomKind::In: {
        CondSet x = P.none();
        for (const auto& e : t.entries()) x |= P.down(e.cond) & eq(s, e.name);
        return P.dense_interior(x);
      }
      case AtomKind::Sub: {
        CondSet r = P.all();
        for (const auto& e : s.entries()) {
          CondSet reach = P.up_closure(in(e.name, t));
          // p qualifies iff every q <= p, r lies in the upward closure of the in-set.
          CondSet bad = P.down(e.cond);
          bad.subtract(reach);
          r.subtract(P.up_closure(bad));
        }
        return r;
      }
      case AtomKind::Eq: {
        return sub(s, t) & sub(t, s);
      }
    }
    return P.none();
  }

  CondSet class_membership(const PName& s, const ClassName& c) {
    auto key = std::make_pair(c.ident, s.id());
    if (auto it = class_memo_.find(key); it != class_memo_.end()) return it->second;
    const ForcingNotion& P = *P_;
    CondSet x = P.none();
    for (const auto& e : c.entries) x |= P.down(e.cond) & eq(s, e.name);
    CondSet v = P.dense_interior(x);
    class_memo_.emplace(key, v);
    return v;
  }

  // Conditions forcing f. NameConst terms must come from the universe; quantifiers range over it.
  const CondSet& forcing_set(const Formula& f) {
    if (auto it = memo_.find(f.id()); it != memo_.end()) return it->second;
    CondSet v = compute(f);
    return memo_.emplace(f.id(), std::move(v)).first->second;
  }

  bool forces(std::size_t p, const Formula& f) { return forcing_set(f).test(p); }

  // Corrupts one stored entry; used to exercise the audit.
  void override_entry(AtomKind k, const PName& s, const PName& t, std::size_t p, bool value) {
    atom(k, s, t);
    tables_[static_cast<std::size_t>(k)][pair_key(s, t)].set(p, value);
    memo_.clear();
    class_memo_.clear();
  }

  std::size_t table_size() const {
    return tables_[0].size() + tables_[1].size() + tables_[2].size();
  }

  struct Row {
    AtomKind kind;
    PName s, t;
    CondSet value;
  };
  std::vector<Row> rows() const {
    std::vector<Row> out;
    for (std::size_t k = 0; k < 3; ++k)
      for (const auto& [key, v] : tables_[k]) out.push_back({static_cast<AtomKind>(k), key_names_.at(key).first, key_names_.at(key).second, v});
    std::sort(out.begin(), out.end(), [](const Row& a, const Row& b) {
      return std::tie(a.kind, a.s, a.t) < std::tie(b.kind, b.s, b.t);
    });
    return out;
  }

  // Fills the table for all pairs of universe names in recursion order.
  void materialize() {
    for (const auto& [s, t] : staged_pairs()) {
      in(s, t);
      sub(s, t);
      eq(s, t);
    }
  }

  std::vector<std::pair<PName, PName>> staged_pairs() const {
    std::vector<std::pair<PName, PName>> pairs;
    pairs.reserve(N_.size() * N_.size());
    for (const auto& s : N_.names)
      for (const auto& t : N_.names) pairs.emplace_back(s, t);
    std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
      return pair_stage_key(a.first, a.second) < pair_stage_key(b.first, b.second);
    });
    return pairs;
  }

 private:
  std::uint64_t pair_key(const PName& s, const PName& t) {
    std::uint64_t k = (static_cast<std::uint64_t>(s.id()) << 32) | t.id();
    key_names_.try_emplace(k, s, t);
    return k;
  }

  PName universe_name(const Term& t) const {
    if (t.is_var()) throw DomainError("free variable '" + t.var + "' in a forced formula");
    if (t.is_ground()) throw DomainError("ground constant in a forcing-language formula");
    if (!N_.contains(t.name)) throw DomainError("name constant outside the name universe: " + to_sexpr(t.name));
    return t.name;
  }

  template <class F>
  void for_each_instance(const std::vector<std::string>& vars, F&& f) {
    std::vector<std::size_t> idx(vars.size(), 0);
    if (N_.size() == 0) return;
    for (;;) {
      std::map<std::string, Term> b;
      for (std::size_t i = 0; i < vars.size(); ++i) b.emplace(vars[i], Term::of_name(N_.names[idx[i]]));
      if (!f(b)) return;
      std::size_t i = 0;
      while (i < idx.size() && ++idx[i] == N_.size()) idx[i++] = 0;
      if (i == idx.size()) return;
    }
  }

  CondSet compute(const Formula& f) {
    const ForcingNotion& P = *P_;
    switch (f.kind()) {
      case FKind::Eq: return eq(universe_name(f.terms()[0]), universe_name(f.terms()[1]));
      case FKind::In: return in(universe_name(f.terms()[0]), universe_name(f.terms()[1]));
      case FKind::InClass: return class_membership(universe_name(f.terms()[0]), class_name(f.ident()));
      case FKind::InG: return class_membership(universe_name(f.terms()[0]), classes_[0]);
      case FKind::Tr: throw DomainError("truth-predicate atoms are not part of the forcing language");
      case FKind::Not: return P.no_extension_in(forcing_set(f.kids()[0]));
      case FKind::And: {
        CondSet r = P.all();
        for (const auto& k : f.kids()) r &= forcing_set(k);
        return r;
      }
      case FKind::Or: {
        // not AND not
        CondSet r = P.all();
        for (const auto& k : f.kids()) r &= P.no_extension_in(forcing_set(k));
        return P.no_extension_in(r);
      }
      case FKind::Forall: {
        CondSet r = P.all();
        for_each_instance(f.vars(), [&](const std::map<std::string, Term>& b) {
          r &= forcing_set(substitute(f.kids()[0], b));
          return r.any();
        });
        return r;
      }
      case FKind::Exists: {
        // not forall not
        CondSet r = P.all();
        for_each_instance(f.vars(), [&](const std::map<std::string, Term>& b) {
          r &= P.no_extension_in(forcing_set(substitute(f.kids()[0], b)));
          return r.any();
        });
        return P.no_extension_in(r);
      }
    }
    return P.none();
  }

  struct PairHash {
    std::size_t operator()(const std::pair<std::string, std::uint32_t>& k) const {
      return hash_mix(std::hash<std::string>{}(k.first), k.second);
    }
  };

  std::shared_ptr<const ForcingNotion> P_;
  NameUniverse N_;
  std::vector<ClassName> classes_;
  std::unordered_map<std::uint64_t, CondSet> tables_[3];
  std::unordered_map<std::uint64_t, std::pair<PName, PName>> key_names_;
  std::unordered_map<std::uint32_t, CondSet> memo_;
  std::unordered_map<std::pair<std::string, std::uint32_t>, CondSet, PairHash> class_memo_;
};

// Builds the relation over a subname-closed universe and tabulates every atomic pair.
inline ForcingRelation atomic_forcing(std::shared_ptr<const ForcingNotion> P, NameUniverse N,
                                      std::vector<ClassName> classes = {}) {
  if (!N.subname_closed()) {
    for (const auto& n : N.names)
      for (const auto& e : n.entries())
        if (!N.contains(e.name))
          throw ClosureError("name universe is not subname-closed: missing " + to_sexpr(e.name));
  }
  for (const auto& n : N.names)
    for (const auto& e : n.entries())
      if (e.cond >= P->size()) throw DomainError("name mentions an unknown condition index");
  ForcingRelation R(std::move(P), std::move(N), std::move(classes));
  R.materialize();
  return R;
}

// The atomic relation as a recursion instance: stage alpha holds (p, kind, pair) for the pairs
// of the alpha-th stage key. Equality is decided from the two inclusion clauses inline, so every
// read goes to a strictly earlier slice.
struct AtomicEtrInstance {
  RecursionInstance<std::tuple<std::size_t, AtomKind, std::size_t>> instance;
  std::vector<std::pair<PName, PName>> pairs;
  std::vector<std::size_t> pair_stage;
  std::size_t conditions = 0;

  std::size_t index(std::size_t pair, AtomKind k, std::size_t p) const {
    return (pair * 3 + static_cast<std::size_t>(k)) * conditions + p;
  }
};

inline std::shared_ptr<AtomicEtrInstance> atomic_forcing_instance(const ForcingNotion& P, const NameUniverse& N) {
  auto out = std::make_shared<AtomicEtrInstance>();
  AtomicEtrInstance& A = *out;
  A.conditions = P.size();
  for (const auto& s : N.names)
    for (const auto& t : N.names) A.pairs.emplace_back(s, t);
  std::stable_sort(A.pairs.begin(), A.pairs.end(), [](const auto& a, const auto& b) {
    return pair_stage_key(a.first, a.second) < pair_stage_key(b.first, b.second);
  });
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> stage_of_key;
  for (const auto& pr : A.pairs) stage_of_key.emplace(pair_stage_key(pr.first, pr.second), 0);
  std::size_t st = 0;
  for (auto& kv : stage_of_key) kv.second = st++;
  std::unordered_map<std::uint64_t, std::size_t> pair_index;
  for (std::size_t i = 0; i < A.pairs.size(); ++i) {
    A.pair_stage.push_back(stage_of_key.at(pair_stage_key(A.pairs[i].first, A.pairs[i].second)));
    pair_index.emplace((static_cast<std::uint64_t>(A.pairs[i].first.id()) << 32) | A.pairs[i].second.id(), i);
  }
  for (std::size_t i = 0; i < A.pairs.size(); ++i)
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t p = 0; p < P.size(); ++p) A.instance.domain.emplace_back(i, static_cast<AtomKind>(k), p);
  A.instance.label = "atomic-forcing";
  A.instance.length = st;
  const AtomicEtrInstance* self = out.get();
  const ForcingNotion* PP = &P;
  A.instance.step = [self, PP, pair_index](std::size_t x, const EtrView& view) -> bool {
    const ForcingNotion& P = *PP;
    auto [pi, kind, p] = self->instance.domain[x];
    if (self->pair_stage[pi] != view.stage()) return false;
    auto lookup = [&](const PName& s, const PName& t, AtomKind k, std::size_t q) {
      std::size_t j = pair_index.at((static_cast<std::uint64_t>(s.id()) << 32) | t.id());
      return view.contains(self->pair_stage[j], self->index(j, k, q));
    };
    auto in_at = [&](const PName& s, const PName& t, std::size_t p0) {
      // the q with q <= r and q forcing s = rho for some <rho, r> in t are dense below p0
      bool dense = true;
      P.down(p0).for_each([&](std::size_t q) {
        if (!dense) return;
        bool found = false;
        P.down(q).for_each([&](std::size_t r0) {
          if (found) return;
          for (const auto& e : t.entries())
            if (P.le(r0, e.cond) && lookup(s, e.name, AtomKind::Eq, r0)) {
              found = true;
              return;
            }
        });
        if (!found) dense = false;
      });
      return dense;
    };
    auto sub_at = [&](const PName& s, const PName& t, std::size_t p0) {
      for (const auto& e : s.entries()) {
        bool ok = true;
        (P.down(p0) & P.down(e.cond)).for_each([&](std::size_t q1) {
          if (!ok) return;
          bool found = false;
          P.down(q1).for_each([&](std::size_t q) {
            if (!found && lookup(e.name, t, AtomKind::In, q)) found = true;
          });
          if (!found) ok = false;
        });
        if (!ok) return false;
      }
      return true;
    };
    const auto& [s, t] = self->pairs[pi];
    switch (kind) {
      case AtomKind::In: return in_at(s, t, p);
      case AtomKind::Sub: return sub_at(s, t, p);
      case AtomKind::Eq: return sub_at(s, t, p) && sub_at(t, s, p);
    }
    return false;
  };
  return out;
}

struct AuditReport {
  bool ok = true;
  std::size_t checks = 0;
  std::vector<std::string> failures;

  void fail(std::string s) {
    ok = false;
    if (failures.size() < 20) failures.push_back(std::move(s));
  }
};

struct AuditOptions {
  std::vector<Formula> pool;       // sentences for modus ponens and decidedness
  std::size_t max_triples = 50000;  // equality axioms are sampled beyond this
  std::uint64_t seed = 7;
};

// Checks that the tabulated relation is the solution of its clauses and obeys the logical laws.
inline AuditReport audit_forcing_relation(ForcingRelation& R, const AuditOptions& opt = {}) {
  AuditReport rep;
  const ForcingNotion& P = R.notion();
  auto describe = [&](AtomKind k, const PName& s, const PName& t, std::size_t p) {
    return std::string(atom_kind_name(k)) + " " + to_sexpr(s) + " " + to_sexpr(t) + " at " + P.label(p);
  };
  for (const auto& row : R.rows()) {
    ++rep.checks;
    row.value.for_each([&](std::size_t p) {
      if (!P.down(p).subset_of(row.value)) {
        std::size_t q = static_cast<std::size_t>((P.down(p) & row.value.complement()).first());
        rep.fail("downward closure: " + describe(row.kind, row.s, row.t, p) + " but not at " + P.label(q));
      }
    });
    CondSet d = P.dense_interior(row.value);
    if (!d.subset_of(row.value)) {
      std::size_t p = static_cast<std::size_t>((d & row.value.complement()).first());
      rep.fail("density: forced densely below but not at " + describe(row.kind, row.s, row.t, p));
    }
    CondSet again = R.clause(row.kind, row.s, row.t);
    if (again != row.value) {
      CondSet diff = (again | row.value) & (again & row.value).complement();
      rep.fail("recursion clause disagrees with the table: " +
               describe(row.kind, row.s, row.t, static_cast<std::size_t>(diff.first())));
    }
  }

  const auto& N = R.universe().names;
  auto implies = [&](const CondSet& a, const CondSet& b) { return P.no_extension_in(a & P.no_extension_in(b)); };
  auto iff = [&](const CondSet& a, const CondSet& b) { return implies(a, b) & implies(b, a); };
  std::size_t n = N.size();
  std::mt19937_64 rng(opt.seed);
  bool exhaustive = n * n * n <= opt.max_triples;
  std::size_t total = exhaustive ? n * n * n : opt.max_triples;
  for (std::size_t i = 0; i < n; ++i) {
    ++rep.checks;
    if (!R.eq(N[i], N[i]).all()) rep.fail("reflexivity fails for " + to_sexpr(N[i]));
  }
  for (std::size_t c = 0; c < total && n > 0; ++c) {
    std::size_t a, b, e;
    if (exhaustive) {
      a = c / (n * n);
      b = c / n % n;
      e = c % n;
    } else {
      a = rng() % n;
      b = rng() % n;
      e = rng() % n;
    }
    const PName &s = N[a], &t = N[b], &u = N[e];
    rep.checks += 4;
    const CondSet& st = R.eq(s, t);
    if (!implies(st, R.eq(t, s)).all())
      rep.fail("symmetry fails for " + to_sexpr(s) + ", " + to_sexpr(t));
    if (!implies(st & R.eq(t, u), R.eq(s, u)).all())
      rep.fail("transitivity fails for " + to_sexpr(s) + ", " + to_sexpr(t) + ", " + to_sexpr(u));
    if (!implies(st, iff(R.in(u, s), R.in(u, t))).all())
      rep.fail("substitution (member side) fails for " + to_sexpr(s) + ", " + to_sexpr(t));
    if (!implies(st, iff(R.in(s, u), R.in(t, u))).all())
      rep.fail("substitution (element side) fails for " + to_sexpr(s) + ", " + to_sexpr(t));
  }

  for (const auto& phi : opt.pool) {
    ++rep.checks;
    const CondSet f = R.forcing_set(phi);
    const CondSet nf = R.forcing_set(f_not(phi));
    if (!P.is_dense(f | nf)) rep.fail("not densely decided: " + to_sexpr(phi));
    if (!P.down_closure(f).subset_of(f)) rep.fail("composite forcing not downward closed: " + to_sexpr(phi));
    if (!P.dense_interior(f).subset_of(f)) rep.fail("composite forcing not closed under density: " + to_sexpr(phi));
  }
  for (const auto& phi : opt.pool)
    for (const auto& psi : opt.pool) {
      ++rep.checks;
      CondSet lhs = R.forcing_set(phi) & R.forcing_set(f_implies(phi, psi));
      if (!lhs.subset_of(R.forcing_set(psi))) rep.fail("modus ponens fails: " + to_sexpr(phi) + " => " + to_sexpr(psi));
    }
  return rep;
}

}  // namespace forcelab
