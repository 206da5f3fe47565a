#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bits.hpp"
#include "errors.hpp"
#include "etr.hpp"
#include "evaluator.hpp"
#include "formula.hpp"
#include "hfset.hpp"

namespace forcelab {

using Valuation = std::map<std::string, HFSet>;

// A finite first-order structure (domain, real membership, named unary predicates), optionally
// backed by a store answering truth-predicate atoms.
struct FiniteStructure {
  using Elem = HFSet;

  std::vector<HFSet> elements;
  std::map<std::string, std::unordered_set<HFSet>> predicates;
  std::function<bool(const HFSet&, const HFSet&, const HFSet&)> tr_store;

  FiniteStructure() = default;
  explicit FiniteStructure(std::vector<HFSet> dom) : elements(std::move(dom)) {}

  const std::vector<HFSet>& domain() const { return elements; }
  HFSet ground(const HFSet& x) const { return x; }
  HFSet name(const PName&) const { throw DomainError("name constants have no value in a ground structure"); }
  bool eq(const HFSet& a, const HFSet& b) const { return a == b; }
  bool member(const HFSet& a, const HFSet& b) const { return b.contains(a); }
  bool in_class(const std::string& id, const HFSet& a) const {
    auto it = predicates.find(id);
    if (it == predicates.end()) throw DomainError("structure has no predicate '" + id + "'");
    return it->second.count(a) > 0;
  }
  bool in_generic(const HFSet&) const { throw DomainError("the generic-filter predicate is not available in a ground structure"); }
  bool tr(const HFSet& a, const HFSet& b, const HFSet& c) const {
    if (!tr_store) throw DomainError("truth-predicate atom without a backing store");
    return tr_store(a, b, c);
  }
  std::uint64_t key(const HFSet& x) const { return x.id(); }
};

inline FiniteStructure ground_structure(std::size_t n, const std::vector<HFSet>& A = {}) {
  FiniteStructure M(v_stage(n));
  M.predicates["A"] = std::unordered_set<HFSet>(A.begin(), A.end());
  return M;
}

inline bool eval_formula(const FiniteStructure& M, const Formula& f, const Valuation& v) {
  for (const auto& x : f.free_vars())
    if (!v.count(x)) throw DomainError("valuation does not cover free variable '" + x + "'");
  Evaluator<FiniteStructure> ev(M);
  Evaluator<FiniteStructure>::Env env;
  for (const auto& [k, x] : v) env.push_back({k, x});
  return ev.eval(f, env);
}

inline bool is_subformula_closed(const std::vector<Formula>& pool) {
  std::unordered_set<std::uint32_t> ids;
  for (const auto& f : pool) ids.insert(f.id());
  for (const auto& f : pool)
    for (const auto& k : f.kids())
      if (!ids.count(k.id())) return false;
  return true;
}

inline std::vector<Formula> subformula_closure(const std::vector<Formula>& roots) {
  std::vector<Formula> out;
  std::unordered_set<std::uint32_t> seen;
  for (const auto& r : roots)
    for (const auto& f : subformulas(r))
      if (seen.insert(f.id()).second) out.push_back(f);
  return out;
}

// Flat indexing of (pool formula, valuation of its free variables over a domain).
class PoolIndex {
 public:
  PoolIndex(std::vector<Formula> pool, std::vector<HFSet> domain)
      : pool_(std::move(pool)), domain_(std::move(domain)) {
    for (std::size_t i = 0; i < domain_.size(); ++i) dom_index_.emplace(domain_[i].id(), i);
    std::size_t off = 0;
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      if (pos_.count(pool_[i].id())) throw DomainError("pool lists a formula twice");
      pos_.emplace(pool_[i].id(), i);
      offsets_.push_back(off);
      std::size_t n = 1;
      for (std::size_t k = 0; k < pool_[i].free_vars().size(); ++k) {
        if (domain_.size() && n > (std::size_t{1} << 40) / domain_.size())
          throw ResourceError("too many valuations for the pool");
        n *= domain_.size();
      }
      off += n;
    }
    offsets_.push_back(off);
  }

  const std::vector<Formula>& pool() const { return pool_; }
  const std::vector<HFSet>& domain() const { return domain_; }
  std::size_t size() const { return offsets_.back(); }

  std::optional<std::size_t> position(const Formula& f) const {
    auto it = pos_.find(f.id());
    if (it == pos_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<std::size_t> dom_index(const HFSet& x) const {
    auto it = dom_index_.find(x.id());
    if (it == dom_index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index(std::size_t pos, const std::vector<std::size_t>& digits) const {
    std::size_t k = 0;
    for (std::size_t i = digits.size(); i-- > 0;) k = k * domain_.size() + digits[i];
    return offsets_[pos] + k;
  }

  std::pair<std::size_t, std::vector<std::size_t>> decode(std::size_t flat) const {
    std::size_t pos = static_cast<std::size_t>(std::upper_bound(offsets_.begin(), offsets_.end(), flat) - offsets_.begin()) - 1;
    std::size_t k = flat - offsets_[pos];
    std::vector<std::size_t> digits(pool_[pos].free_vars().size());
    for (auto& d : digits) {
      d = k % domain_.size();
      k /= domain_.size();
    }
    return {pos, digits};
  }

  Valuation valuation(std::size_t pos, const std::vector<std::size_t>& digits) const {
    Valuation v;
    const auto& fv = pool_[pos].free_vars();
    for (std::size_t i = 0; i < fv.size(); ++i) v.emplace(fv[i], domain_[digits[i]]);
    return v;
  }

  std::optional<std::size_t> index_of(const Formula& f, const Valuation& v) const {
    auto pos = position(f);
    if (!pos) return std::nullopt;
    std::vector<std::size_t> digits;
    for (const auto& x : f.free_vars()) {
      auto it = v.find(x);
      if (it == v.end()) return std::nullopt;
      auto d = dom_index(it->second);
      if (!d) return std::nullopt;
      digits.push_back(*d);
    }
    return index(*pos, digits);
  }

 private:
  std::vector<Formula> pool_;
  std::vector<HFSet> domain_;
  std::unordered_map<std::uint32_t, std::size_t> dom_index_;
  std::unordered_map<std::uint32_t, std::size_t> pos_;
  std::vector<std::size_t> offsets_;
};

// The set of (formula, valuation) pairs declared true, over a pool and a domain of values.
struct TruthPredicate {
  std::shared_ptr<const PoolIndex> index;
  CondSet truth;

  bool holds(const Formula& f, const Valuation& v) const {
    auto i = index->index_of(f, v);
    if (!i) throw DomainError("query outside the pool: " + to_sexpr(f));
    return truth.test(*i);
  }
  friend bool operator==(const TruthPredicate& a, const TruthPredicate& b) { return a.truth == b.truth; }
};

namespace detail {

// Reads a pool entry at the digits induced by the bindings in env, keyed by variable name.
struct DigitEnv {
  std::vector<std::pair<std::string, std::size_t>> b;
  std::size_t at(const std::string& v) const {
    for (auto it = b.rbegin(); it != b.rend(); ++it)
      if (it->first == v) return it->second;
    throw DomainError("unbound variable '" + v + "'");
  }
  std::vector<std::size_t> digits(const Formula& f) const {
    std::vector<std::size_t> d;
    for (const auto& v : f.free_vars()) d.push_back(at(v));
    return d;
  }
};

// One Tarski clause for a compound formula, with subformula truth supplied by `sub`.
template <class Sub>
bool tarski_clause(const Formula& f, DigitEnv& env, std::size_t dom_size, Sub&& sub) {
  switch (f.kind()) {
    case FKind::Not: return !sub(f.kids()[0], env);
    case FKind::And:
      for (const auto& k : f.kids())
        if (!sub(k, env)) return false;
      return true;
    case FKind::Or:
      for (const auto& k : f.kids())
        if (sub(k, env)) return true;
      return false;
    case FKind::Forall:
    case FKind::Exists: {
      bool universal = f.kind() == FKind::Forall;
      const auto& vars = f.vars();
      if (vars.empty()) return sub(f.kids()[0], env);
      if (dom_size == 0) return universal;
      std::size_t base = env.b.size();
      for (const auto& v : vars) env.b.emplace_back(v, 0);
      std::vector<std::size_t> idx(vars.size(), 0);
      bool result = universal;
      for (;;) {
        for (std::size_t i = 0; i < vars.size(); ++i) env.b[base + i].second = idx[i];
        if (sub(f.kids()[0], env) != universal) {
          result = !universal;
          break;
        }
        std::size_t i = 0;
        while (i < idx.size() && ++idx[i] == dom_size) idx[i++] = 0;
        if (i == idx.size()) break;
      }
      env.b.resize(base);
      return result;
    }
    default:
      throw DomainError("tarski_clause on an atom");
  }
}

}  // namespace detail

// Truth of atoms of the pool in M at a flat index.
inline bool atomic_truth(const FiniteStructure& M, const PoolIndex& I, std::size_t pos,
                         const std::vector<std::size_t>& digits) {
  return eval_formula(M, I.pool()[pos], I.valuation(pos, digits));
}

// The recursion whose unique solution is the Tarskian truth predicate, staged by formula rank.
inline RecursionInstance<std::size_t> tarski_instance(const FiniteStructure& M, std::shared_ptr<const PoolIndex> I) {
  if (!is_subformula_closed(I->pool())) throw ClosureError("tarski_truth needs a subformula-closed pool");
  RecursionInstance<std::size_t> inst;
  inst.label = "tarski-truth";
  std::size_t max_rank = 0;
  for (const auto& f : I->pool()) max_rank = std::max(max_rank, f.rank());
  inst.length = max_rank + 1;
  inst.domain.resize(I->size());
  for (std::size_t i = 0; i < I->size(); ++i) inst.domain[i] = i;
  const FiniteStructure* MM = &M;
  auto stage_of = std::make_shared<std::vector<std::uint32_t>>(I->size());
  for (std::size_t x = 0; x < I->size(); ++x) (*stage_of)[x] = static_cast<std::uint32_t>(I->pool()[I->decode(x).first].rank());
  inst.step = [MM, I, stage_of](std::size_t x, const EtrView& view) -> bool {
    if ((*stage_of)[x] != view.stage()) return false;
    auto [pos, digits] = I->decode(x);
    const Formula& f = I->pool()[pos];
    if (is_atomic(f.kind())) return atomic_truth(*MM, *I, pos, digits);
    detail::DigitEnv env;
    for (std::size_t i = 0; i < f.free_vars().size(); ++i) env.b.emplace_back(f.free_vars()[i], digits[i]);
    auto sub = [&](const Formula& g, detail::DigitEnv& e) {
      std::size_t gp = *I->position(g);
      return view.contains(g.rank(), I->index(gp, e.digits(g)));
    };
    return detail::tarski_clause(f, env, I->domain().size(), sub);
  };
  return inst;
}

inline TruthPredicate tarski_truth(const FiniteStructure& M, const std::vector<Formula>& pool) {
  auto I = std::make_shared<const PoolIndex>(pool, M.domain());
  auto inst = tarski_instance(M, I);
  EtrSolution sol = etr_solve(inst);
  TruthPredicate T{I, CondSet(I->size())};
  for (const auto& s : sol.slices) T.truth |= s;
  return T;
}

// The same predicate by direct evaluation, for cross-checking.
inline TruthPredicate tarski_truth_direct(const FiniteStructure& M, const std::vector<Formula>& pool) {
  auto I = std::make_shared<const PoolIndex>(pool, M.domain());
  TruthPredicate T{I, CondSet(I->size())};
  for (std::size_t x = 0; x < I->size(); ++x) {
    auto [pos, digits] = I->decode(x);
    if (eval_formula(M, pool[pos], I->valuation(pos, digits))) T.truth.set(x);
  }
  return T;
}

// First pool entry violating a Tarski clause relative to the predicate itself, if any.
inline std::optional<std::size_t> check_tarski_clauses(const FiniteStructure& M, const TruthPredicate& T) {
  const PoolIndex& I = *T.index;
  for (std::size_t x = 0; x < I.size(); ++x) {
    auto [pos, digits] = I.decode(x);
    const Formula& f = I.pool()[pos];
    bool expect;
    if (is_atomic(f.kind())) {
      expect = atomic_truth(M, I, pos, digits);
    } else {
      detail::DigitEnv env;
      for (std::size_t i = 0; i < f.free_vars().size(); ++i) env.b.emplace_back(f.free_vars()[i], digits[i]);
      auto sub = [&](const Formula& g, detail::DigitEnv& e) { return T.truth.test(I.index(*I.position(g), e.digits(g))); };
      expect = detail::tarski_clause(f, env, I.domain().size(), sub);
    }
    if (expect != T.truth.test(x)) return x;
  }
  return std::nullopt;
}

// A recursion given by a formula phi(x) read over (V_n, in, A, S): "S" is the union of the earlier
// slices and "S.k" the k-th slice.
inline RecursionInstance<HFSet> formula_recursion(std::vector<HFSet> domain, std::vector<HFSet> A,
                                                  Formula phi, std::size_t length, std::string var = "x") {
  struct Model {
    using Elem = HFSet;
    const std::vector<HFSet>* dom;
    const std::unordered_map<std::uint32_t, std::size_t>* index;
    const std::unordered_set<HFSet>* A;
    const EtrView* view;
    const std::vector<HFSet>& domain() const { return *dom; }
    HFSet ground(const HFSet& x) const { return x; }
    HFSet name(const PName&) const { throw DomainError("name constant in a recursion formula"); }
    bool eq(const HFSet& a, const HFSet& b) const { return a == b; }
    bool member(const HFSet& a, const HFSet& b) const { return b.contains(a); }
    bool in_class(const std::string& id, const HFSet& a) const {
      if (id == "A") return A->count(a) > 0;
      auto it = index->find(a.id());
      if (id == "S") return it != index->end() && view->in_any_earlier(it->second);
      if (id.size() > 2 && id.compare(0, 2, "S.") == 0) {
        std::size_t k = std::stoul(id.substr(2));
        return it != index->end() && view->contains(k, it->second);
      }
      throw DomainError("unknown predicate '" + id + "' in a recursion formula");
    }
    bool in_generic(const HFSet&) const { throw DomainError("generic-filter atom in a recursion formula"); }
    bool tr(const HFSet&, const HFSet&, const HFSet&) const { throw DomainError("truth atom in a recursion formula"); }
    std::uint64_t key(const HFSet& x) const { return x.id(); }
  };
  for (const auto& v : phi.free_vars())
    if (v != var) throw DomainError("recursion formula has a free variable other than '" + var + "'");
  RecursionInstance<HFSet> inst;
  inst.label = "formula:" + to_sexpr(phi);
  inst.length = length;
  inst.domain = std::move(domain);
  auto index = std::make_shared<std::unordered_map<std::uint32_t, std::size_t>>();
  for (std::size_t i = 0; i < inst.domain.size(); ++i) index->emplace(inst.domain[i].id(), i);
  auto Aset = std::make_shared<std::unordered_set<HFSet>>(A.begin(), A.end());
  auto dom = std::make_shared<std::vector<HFSet>>(inst.domain);
  inst.step = [index, Aset, dom, phi, var](std::size_t x, const EtrView& view) {
    Model m{dom.get(), index.get(), Aset.get(), &view};
    Evaluator<Model> ev(m);
    Evaluator<Model>::Env env{{var, (*dom)[x]}};
    return ev.eval(phi, env);
  };
  return inst;
}

}  // namespace forcelab
