#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bits.hpp"
#include "coding.hpp"
#include "errors.hpp"
#include "evaluator.hpp"
#include "forcing.hpp"
#include "names.hpp"
#include "poset.hpp"
#include "truth.hpp"

namespace forcelab {

// The quotient of the name universe by =_G, with membership and class extensions read off the
// forcing table, alongside the direct evaluation of every name.
class GenericExtension {
 public:
  using Elem = std::size_t;

  GenericExtension(ForcingRelation& R, CondSet G) : R_(&R), G_(std::move(G)) {
    const auto& names = R.universe().names;
    std::size_t n = names.size();
    cls_.assign(n, SIZE_MAX);
    for (std::size_t i = 0; i < n; ++i) {
      if (cls_[i] != SIZE_MAX) continue;
      std::size_t c = reps_.size();
      reps_.push_back(i);
      for (std::size_t j = i; j < n; ++j)
        if (cls_[j] == SIZE_MAX && R.eq(names[i], names[j]).intersects(G_)) cls_[j] = c;
    }
    std::size_t k = reps_.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        bool e = R.eq(names[i], names[j]).intersects(G_);
        if (e != (cls_[i] == cls_[j])) throw DomainError("=_G is not an equivalence relation on the universe");
      }
    member_.assign(k * k, false);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) member_[a * k + b] = R.in(names[reps_[a]], names[reps_[b]]).intersects(G_);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (R.in(names[i], names[j]).intersects(G_) != member_[cls_[i] * k + cls_[j]])
          throw DomainError("=_G is not a congruence for membership");
    for (const auto& c : R.classes()) {
      std::vector<bool> ext(k, false);
      for (std::size_t i = 0; i < n; ++i) {
        bool in = R.class_membership(names[i], c).intersects(G_);
        if (i == reps_[cls_[i]]) ext[cls_[i]] = in;
        else if (ext[cls_[i]] != in) throw DomainError("=_G is not a congruence for class '" + c.ident + "'");
      }
      class_ext_.emplace(c.ident, std::move(ext));
    }
    domain_.resize(k);
    for (std::size_t a = 0; a < k; ++a) domain_[a] = a;
    std::unordered_map<std::uint32_t, HFSet> memo;
    for (const auto& nm : names) values_.push_back(eval_name(nm, G_, memo));
  }

  const CondSet& filter() const { return G_; }
  std::size_t size() const { return reps_.size(); }
  const PName& representative(std::size_t c) const { return R_->universe().names[reps_[c]]; }
  std::size_t class_of(const PName& n) const { return cls_[R_->universe().index(n)]; }
  HFSet direct_value(std::size_t c) const { return values_[reps_[c]]; }
  bool contains(std::size_t a, std::size_t b) const { return member_[a * reps_.size() + b]; }
  bool in_class_ext(const std::string& id, std::size_t a) const {
    auto it = class_ext_.find(id);
    if (it == class_ext_.end()) throw DomainError("unknown class name '" + id + "'");
    return it->second[a];
  }

  // Model interface for Evaluator.
  const std::vector<std::size_t>& domain() const { return domain_; }
  std::size_t ground(const HFSet&) const { throw DomainError("ground constant in a forcing-language formula"); }
  std::size_t name(const PName& n) const {
    if (!R_->universe().contains(n)) throw DomainError("name constant outside the name universe");
    return class_of(n);
  }
  bool eq(std::size_t a, std::size_t b) const { return a == b; }
  bool member(std::size_t a, std::size_t b) const { return contains(a, b); }
  bool in_class(const std::string& id, std::size_t a) const { return in_class_ext(id, a); }
  bool in_generic(std::size_t a) const { return in_class_ext("G", a); }
  bool tr(std::size_t, std::size_t, std::size_t) const { throw DomainError("truth-predicate atom in a forcing-language formula"); }
  std::uint64_t key(std::size_t a) const { return a; }

  bool satisfies(const Formula& f) const {
    Evaluator<GenericExtension> ev(*this, true);
    return ev.eval(f);
  }

  // Every name's class maps to its direct evaluation; returns a description of the first failure.
  std::optional<std::string> check_isomorphism() const {
    const auto& names = R_->universe().names;
    std::map<HFSet, std::size_t> back;
    for (std::size_t c = 0; c < reps_.size(); ++c) {
      auto [it, fresh] = back.emplace(direct_value(c), c);
      if (!fresh) return "two classes evaluate to " + to_sexpr(direct_value(c));
    }
    for (std::size_t i = 0; i < names.size(); ++i)
      if (values_[i] != direct_value(cls_[i])) return "name " + to_sexpr(names[i]) + " evaluates differently from its class representative";
    for (std::size_t a = 0; a < reps_.size(); ++a)
      for (std::size_t b = 0; b < reps_.size(); ++b)
        if (contains(a, b) != direct_value(b).contains(direct_value(a)))
          return "membership differs between the quotient and direct evaluation";
    for (const auto& c : R_->classes()) {
      auto direct = eval_class(c, G_);
      for (std::size_t a = 0; a < reps_.size(); ++a) {
        bool d = std::binary_search(direct.begin(), direct.end(), direct_value(a));
        // Direct class evaluation may contain values outside the universe's image; only the
        // universe's classes are compared.
        if (d != in_class_ext(c.ident, a)) return "class '" + c.ident + "' differs between the quotient and direct evaluation";
      }
    }
    return std::nullopt;
  }

 private:
  ForcingRelation* R_;
  CondSet G_;
  std::vector<std::size_t> cls_;
  std::vector<std::size_t> reps_;
  std::vector<bool> member_;
  std::map<std::string, std::vector<bool>> class_ext_;
  std::vector<std::size_t> domain_;
  std::vector<HFSet> values_;
};

inline GenericExtension extension(ForcingRelation& R, const Filter& G) { return GenericExtension(R, G.members); }

struct TruthLemmaFailure {
  std::size_t generator;
  Formula formula;
  bool forced;
  bool holds;
};

// For every generic filter: the extension satisfies phi iff some member of the filter forces it.
inline std::optional<TruthLemmaFailure> truth_lemma_check(ForcingRelation& R, const std::vector<Formula>& sentences,
                                                          std::vector<GenericExtension>* cache = nullptr) {
  std::vector<GenericExtension> local;
  std::vector<GenericExtension>& exts = cache ? *cache : local;
  if (exts.empty())
    for (const auto& G : generic_filters(R.notion())) exts.emplace_back(R, G.members);
  for (const auto& f : sentences) {
    if (!f.free_vars().empty()) throw DomainError("truth_lemma_check needs sentences");
    const CondSet& forced = R.forcing_set(f);
    for (const auto& M : exts) {
      bool h = M.satisfies(f);
      bool fz = forced.intersects(M.filter());
      if (h != fz) {
        std::size_t gen = 0;
        for (const auto& G : generic_filters(R.notion()))
          if (G.members == M.filter()) gen = G.generator;
        return TruthLemmaFailure{gen, f, fz, h};
      }
    }
  }
  return std::nullopt;
}

inline std::optional<TruthLemmaFailure> truth_lemma_check(ForcingRelation& R, const Formula& f) {
  return truth_lemma_check(R, std::vector<Formula>{f});
}

// The name of a tuple of names: empty, a single name, or op(first, tuple(rest)).
inline PName tuple_name(const std::vector<PName>& ts, std::size_t from = 0) {
  if (from >= ts.size()) return PName();
  if (from + 1 == ts.size()) return ts[from];
  return op_name(ts[from], tuple_name(ts, from + 1));
}

inline PName formula_check(const Formula& f) { return check_name(formula_code(f)); }

// The class name {(op(phi-check, tuple), p) : p forces phi(tuple)} over the pool's instances in
// the relation's universe.
class TruthName {
 public:
  TruthName(ForcingRelation& R, std::vector<Formula> pool) : R_(&R), pool_(std::move(pool)) {
    if (!is_subformula_closed(pool_)) throw ClosureError("truth_name needs a subformula-closed pool");
    const auto& N = R.universe().names;
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      checks_.push_back(formula_check(pool_[i]));
      const auto& fv = pool_[i].free_vars();
      std::vector<std::size_t> idx(fv.size(), 0);
      if (!fv.empty() && N.empty()) continue;
      for (;;) {
        std::vector<PName> tup;
        std::map<std::string, Term> b;
        for (std::size_t k = 0; k < fv.size(); ++k) {
          tup.push_back(N[idx[k]]);
          b.emplace(fv[k], Term::of_name(N[idx[k]]));
        }
        PName key = op_name(checks_[i], tuple_name(tup));
        const CondSet& fs = R.forcing_set(fv.empty() ? pool_[i] : substitute(pool_[i], b));
        fs.for_each([&](std::size_t p) { by_formula_[i].push_back({key, static_cast<std::uint32_t>(p)}); });
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == N.size()) idx[k++] = 0;
        if (k == idx.size()) break;
      }
    }
  }

  ClassName class_name() const {
    std::vector<PName::Entry> all;
    for (const auto& [i, es] : by_formula_) all.insert(all.end(), es.begin(), es.end());
    return ClassName("T", std::move(all));
  }

  const std::vector<Formula>& pool() const { return pool_; }

  // p forces op(phi-check, tuple) in the class, pruned to entries built from the same formula.
  CondSet star_forcing_set(std::size_t pos, const std::vector<PName>& tup) const {
    return membership(pos, op_name(checks_[pos], tuple_name(tup)), true);
  }

  // The same set computed against every entry of the class, for checking the pruning.
  CondSet star_forcing_set_unpruned(std::size_t pos, const std::vector<PName>& tup) const {
    return membership(pos, op_name(checks_[pos], tuple_name(tup)), false);
  }

 private:
  CondSet membership(std::size_t pos, const PName& key, bool pruned) const {
    const ForcingNotion& P = R_->notion();
    CondSet x = P.none();
    for (const auto& [i, es] : by_formula_) {
      if (pruned && i != pos) continue;
      for (const auto& e : es) x |= P.down(e.cond) & R_->eq(key, e.name);
    }
    return P.dense_interior(x);
  }

  ForcingRelation* R_;
  std::vector<Formula> pool_;
  std::vector<PName> checks_;
  std::map<std::size_t, std::vector<PName::Entry>> by_formula_;
};

struct TruthNameReport {
  bool ok = true;
  std::size_t checks = 0;
  std::string failure;
};

// In every generic extension the pairs (phi, classes) with op(phi-check, tuple) in T's extension
// satisfy the Tarski clauses over the pool; and forcing membership in T agrees with forcing phi.
inline TruthNameReport check_truth_name(ForcingRelation& R, const TruthName& T) {
  TruthNameReport rep;
  const auto& pool = T.pool();
  const auto& N = R.universe().names;
  auto fail = [&](std::string s) {
    if (rep.ok) rep.failure = std::move(s);
    rep.ok = false;
  };
  // star[pos][instance index over universe names]
  std::vector<std::vector<CondSet>> star(pool.size());
  auto instances = [&](std::size_t arity) {
    std::size_t n = 1;
    for (std::size_t k = 0; k < arity; ++k) n *= N.size();
    return n;
  };
  auto tuple_at = [&](std::size_t arity, std::size_t code) {
    std::vector<PName> tup;
    for (std::size_t k = 0; k < arity; ++k) {
      tup.push_back(N[code % N.size()]);
      code /= N.size();
    }
    return tup;
  };
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& fv = pool[i].free_vars();
    std::size_t m = instances(fv.size());
    for (std::size_t c = 0; c < m; ++c) {
      auto tup = tuple_at(fv.size(), c);
      std::map<std::string, Term> b;
      for (std::size_t k = 0; k < fv.size(); ++k) b.emplace(fv[k], Term::of_name(tup[k]));
      CondSet s = T.star_forcing_set(i, tup);
      const CondSet& direct = R.forcing_set(fv.empty() ? pool[i] : substitute(pool[i], b));
      ++rep.checks;
      if (s != direct) fail("forcing membership in T differs from forcing " + to_sexpr(pool[i]));
      star[i].push_back(std::move(s));
    }
  }
  std::unordered_map<std::uint32_t, std::size_t> pos;
  for (std::size_t i = 0; i < pool.size(); ++i) pos.emplace(pool[i].id(), i);
  for (const auto& G : generic_filters(R.notion())) {
    GenericExtension M(R, G.members);
    // T_G as a predicate on (pool position, tuple of classes), through the canonical representatives.
    auto Tg = [&](std::size_t i, const std::vector<std::size_t>& cls) {
      std::size_t code = 0;
      for (std::size_t k = cls.size(); k-- > 0;) code = code * N.size() + R.universe().index(M.representative(cls[k]));
      return star[i][code].intersects(G.members);
    };
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const Formula& f = pool[i];
      const auto& fv = f.free_vars();
      std::size_t m = instances(fv.size());
      for (std::size_t c = 0; c < m; ++c) {
        auto tup = tuple_at(fv.size(), c);
        std::vector<std::size_t> cls;
        for (const auto& t : tup) cls.push_back(M.class_of(t));
        bool v = star[i][c].intersects(G.members);
        ++rep.checks;
        if (v != Tg(i, cls)) {
          fail("T's extension does not respect =_G at " + to_sexpr(f));
          continue;
        }
        auto env_of = [&](const Formula& g, const std::map<std::string, std::size_t>& extra) {
          std::vector<std::size_t> out;
          for (const auto& x : g.free_vars()) {
            if (auto it = extra.find(x); it != extra.end()) out.push_back(it->second);
            else out.push_back(cls[static_cast<std::size_t>(std::find(fv.begin(), fv.end(), x) - fv.begin())]);
          }
          return out;
        };
        auto sub = [&](const Formula& g, const std::map<std::string, std::size_t>& extra) {
          return Tg(pos.at(g.id()), env_of(g, extra));
        };
        bool expect = false;
        switch (f.kind()) {
          case FKind::Not: expect = !sub(f.kids()[0], {}); break;
          case FKind::And:
            expect = true;
            for (const auto& k : f.kids()) expect = expect && sub(k, {});
            break;
          case FKind::Or:
            for (const auto& k : f.kids()) expect = expect || sub(k, {});
            break;
          case FKind::Forall:
          case FKind::Exists: {
            bool universal = f.kind() == FKind::Forall;
            const auto& vars = f.vars();
            std::vector<std::size_t> idx(vars.size(), 0);
            expect = universal;
            for (;;) {
              std::map<std::string, std::size_t> extra;
              for (std::size_t k = 0; k < vars.size(); ++k) extra[vars[k]] = idx[k];
              if (sub(f.kids()[0], extra) != universal) {
                expect = !universal;
                break;
              }
              std::size_t k = 0;
              while (k < idx.size() && ++idx[k] == M.size()) idx[k++] = 0;
              if (k == idx.size() || vars.empty()) break;
            }
            break;
          }
          default: {
            Evaluator<GenericExtension> ev(M);
            Evaluator<GenericExtension>::Env env;
            for (std::size_t k = 0; k < fv.size(); ++k) env.push_back({fv[k], cls[k]});
            expect = ev.eval(f, env);
          }
        }
        if (v != expect) fail("T's extension violates a Tarski clause at " + to_sexpr(f));
      }
    }
  }
  return rep;
}

}  // namespace forcelab
