#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bits.hpp"
#include "coding.hpp"
#include "definability.hpp"
#include "errors.hpp"
#include "etr.hpp"
#include "evaluator.hpp"
#include "formula.hpp"
#include "hfset.hpp"
#include "truth.hpp"

namespace forcelab {

// The setting for iterated truth: a base stage V_n with predicate A, a pool that may mention the
// truth predicate, and the number of stages. Formulas with at most one free variable are
// addressable from truth atoms. The domain is the transitive closure of V_n, the addressable
// codes and the stage numerals.
class IteratedSetting {
 public:
  IteratedSetting(std::size_t n, std::vector<HFSet> A, std::vector<Formula> pool, std::size_t stages)
      : A_(std::move(A)), pool_(std::move(pool)), stages_(stages) {
    if (!is_subformula_closed(pool_)) throw ClosureError("iterated truth needs a subformula-closed pool");
    std::vector<HFSet> roots = v_stage(n);
    for (std::size_t i = 0; i < pool_.size(); ++i)
      if (pool_[i].free_vars().size() <= 1) {
        HFSet c = formula_code(pool_[i]);
        code_pos_.emplace(c.id(), i);
        addressable_.push_back(i);
        roots.push_back(c);
      }
    for (std::size_t a = 0; a < stages_; ++a) roots.push_back(nat_encode(a));
    auto tc = transitive_closure(roots);
    tc.insert(tc.end(), roots.begin(), roots.end());
    std::sort(tc.begin(), tc.end());
    tc.erase(std::unique(tc.begin(), tc.end()), tc.end());
    index_ = std::make_shared<const PoolIndex>(pool_, tc);
    for (const auto& a : A_)
      if (!index_->dom_index(a)) throw DomainError("A is not a subset of the domain");
    A_set_.insert(A_.begin(), A_.end());
    max_rank_ = 0;
    for (const auto& f : pool_) max_rank_ = std::max(max_rank_, f.rank());
  }

  const std::vector<Formula>& pool() const { return pool_; }
  const std::vector<HFSet>& domain() const { return index_->domain(); }
  const std::vector<HFSet>& A() const { return A_; }
  bool in_A(const HFSet& x) const { return A_set_.count(x) > 0; }
  std::size_t stages() const { return stages_; }
  std::size_t span() const { return max_rank_ + 1; }
  std::shared_ptr<const PoolIndex> index() const { return index_; }
  const std::vector<std::size_t>& addressable() const { return addressable_; }

  struct Address {
    std::size_t stage;
    std::size_t pos;
    Valuation valuation;
  };

  // Reads truth-atom arguments as (stage, addressable pool formula, valuation); nullopt if they do
  // not have that shape.
  std::optional<Address> address(const HFSet& x, const HFSet& y, const HFSet& z) const {
    auto a = nat_decode(x);
    if (!a) return std::nullopt;
    auto it = code_pos_.find(y.id());
    if (it == code_pos_.end()) return std::nullopt;
    const Formula& f = pool_[it->second];
    Valuation v;
    if (f.free_vars().empty()) {
      if (!z.empty()) return std::nullopt;
    } else {
      if (!index_->dom_index(z)) return std::nullopt;
      v.emplace(f.free_vars()[0], z);
    }
    return Address{*a, it->second, std::move(v)};
  }

  Address decode(const HFSet& x, const HFSet& y, const HFSet& z) const {
    auto a = nat_decode(x);
    if (!a) throw EncodingError("truth-atom stage is not a natural number");
    Formula f = formula_decode(y);
    if (!code_pos_.count(y.id())) throw EncodingError("truth atom names a formula outside the addressable pool: " + to_sexpr(f));
    auto r = address(x, y, z);
    if (!r) throw EncodingError("truth-atom valuation does not decode for " + to_sexpr(f));
    return *r;
  }

  std::optional<std::size_t> code_position(const HFSet& y) const {
    auto it = code_pos_.find(y.id());
    if (it == code_pos_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<HFSet> A_;
  std::unordered_set<HFSet> A_set_;
  std::vector<Formula> pool_;
  std::size_t stages_;
  std::shared_ptr<const PoolIndex> index_;
  std::unordered_map<std::uint32_t, std::size_t> code_pos_;
  std::vector<std::size_t> addressable_;
  std::size_t max_rank_ = 0;
};

struct IteratedTruthPredicate {
  std::shared_ptr<const PoolIndex> index;
  std::vector<CondSet> stages;

  bool holds(std::size_t beta, const Formula& f, const Valuation& v) const {
    auto i = index->index_of(f, v);
    if (!i) throw DomainError("query outside the pool: " + to_sexpr(f));
    return stages.at(beta).test(*i);
  }
  friend bool operator==(const IteratedTruthPredicate& a, const IteratedTruthPredicate& b) { return a.stages == b.stages; }
};

namespace detail {

template <class TrFn>
bool iterated_atom(const IteratedSetting& S, const Formula& f, const Valuation& v, TrFn&& tr) {
  auto val = [&](const Term& t) -> HFSet {
    if (t.is_var()) return v.at(t.var);
    if (t.is_ground()) return t.ground;
    throw DomainError("name constant in an iterated-truth formula");
  };
  switch (f.kind()) {
    case FKind::Eq: return val(f.terms()[0]) == val(f.terms()[1]);
    case FKind::In: return val(f.terms()[1]).contains(val(f.terms()[0]));
    case FKind::InClass:
      if (f.ident() != "A") throw DomainError("structure has no predicate '" + f.ident() + "'");
      return S.in_A(val(f.terms()[0]));
    case FKind::Tr: return tr(val(f.terms()[0]), val(f.terms()[1]), val(f.terms()[2]));
    default: throw DomainError("the generic-filter predicate is not available in a ground structure");
  }
}

inline bool iterated_atom(const IteratedSetting& S, const IteratedTruthPredicate& T, std::size_t beta,
                          const Formula& f, const Valuation& v) {
  return iterated_atom(S, f, v, [&](const HFSet& x, const HFSet& y, const HFSet& z) {
    auto ad = S.address(x, y, z);
    if (!ad || ad->stage >= beta) return false;
    return T.stages[ad->stage].test(*S.index()->index_of(S.pool()[ad->pos], ad->valuation));
  });
}

}  // namespace detail

// Stage-major recursion: entry (beta, phi, a) lives at stage beta * span + rank(phi).
inline RecursionInstance<std::size_t> iterated_instance(std::shared_ptr<const IteratedSetting> S) {
  const PoolIndex& I = *S->index();
  RecursionInstance<std::size_t> inst;
  inst.label = "iterated-truth";
  inst.length = S->stages() * S->span();
  inst.domain.resize(S->stages() * I.size());
  for (std::size_t i = 0; i < inst.domain.size(); ++i) inst.domain[i] = i;
  auto stage_of = std::make_shared<std::vector<std::uint32_t>>(inst.domain.size());
  for (std::size_t x = 0; x < inst.domain.size(); ++x)
    (*stage_of)[x] = static_cast<std::uint32_t>(x / I.size() * S->span() + I.pool()[I.decode(x % I.size()).first].rank());
  inst.step = [S, stage_of](std::size_t x, const EtrView& view) -> bool {
    if ((*stage_of)[x] != view.stage()) return false;
    const PoolIndex& I = *S->index();
    std::size_t beta = x / I.size();
    auto [pos, digits] = I.decode(x % I.size());
    const Formula& f = I.pool()[pos];
    if (is_atomic(f.kind()))
      return detail::iterated_atom(*S, f, I.valuation(pos, digits), [&](const HFSet& a, const HFSet& b, const HFSet& c) {
        auto ad = S->address(a, b, c);
        if (!ad || ad->stage >= beta) return false;
        const Formula& g = S->pool()[ad->pos];
        return view.contains(ad->stage * S->span() + g.rank(), ad->stage * I.size() + *I.index_of(g, ad->valuation));
      });
    detail::DigitEnv env;
    for (std::size_t i = 0; i < f.free_vars().size(); ++i) env.b.emplace_back(f.free_vars()[i], digits[i]);
    auto sub = [&](const Formula& g, detail::DigitEnv& e) {
      return view.contains(beta * S->span() + g.rank(), beta * I.size() + I.index(*I.position(g), e.digits(g)));
    };
    return detail::tarski_clause(f, env, I.domain().size(), sub);
  };
  return inst;
}

inline IteratedTruthPredicate iterated_truth_etr(std::shared_ptr<const IteratedSetting> S) {
  auto inst = iterated_instance(S);
  EtrSolution sol = etr_solve(inst, 1e8);
  const PoolIndex& I = *S->index();
  IteratedTruthPredicate T{S->index(), std::vector<CondSet>(S->stages(), CondSet(I.size()))};
  for (const auto& slice : sol.slices)
    slice.for_each([&](std::size_t x) { T.stages[x / I.size()].set(x % I.size()); });
  return T;
}

// The same predicate stage by stage, each stage a Tarskian evaluation whose truth atoms read the
// finished earlier stages.
inline IteratedTruthPredicate iterated_truth_direct(const IteratedSetting& S) {
  const PoolIndex& I = *S.index();
  IteratedTruthPredicate T{S.index(), {}};
  for (std::size_t beta = 0; beta < S.stages(); ++beta) {
    FiniteStructure M(I.domain());
    M.predicates["A"] = std::unordered_set<HFSet>(S.A().begin(), S.A().end());
    M.tr_store = [&](const HFSet& a, const HFSet& b, const HFSet& c) {
      auto ad = S.address(a, b, c);
      if (!ad || ad->stage >= beta) return false;
      return T.stages[ad->stage].test(*I.index_of(S.pool()[ad->pos], ad->valuation));
    };
    Evaluator<FiniteStructure> ev(M, true);
    CondSet cur(I.size());
    for (std::size_t x = 0; x < I.size(); ++x) {
      auto [pos, digits] = I.decode(x);
      Evaluator<FiniteStructure>::Env env;
      const auto& fv = I.pool()[pos].free_vars();
      for (std::size_t i = 0; i < fv.size(); ++i) env.push_back({fv[i], I.domain()[digits[i]]});
      if (ev.eval(I.pool()[pos], env)) cur.set(x);
    }
    T.stages.push_back(std::move(cur));
  }
  return T;
}

inline IteratedTruthPredicate iterated_truth(std::shared_ptr<const IteratedSetting> S) { return iterated_truth_etr(S); }

struct IteratedViolation {
  std::size_t stage;
  Formula formula;
  Valuation valuation;
  std::string clause;
};

// Checks the four defining clauses (atoms, truth atoms, connectives, quantifiers) pool-wide.
inline std::optional<IteratedViolation> check_iterated_clauses(const IteratedSetting& S, const IteratedTruthPredicate& T) {
  const PoolIndex& I = *S.index();
  for (std::size_t beta = 0; beta < T.stages.size(); ++beta)
    for (std::size_t x = 0; x < I.size(); ++x) {
      auto [pos, digits] = I.decode(x);
      const Formula& f = I.pool()[pos];
      bool expect;
      std::string clause;
      if (f.kind() == FKind::Tr) {
        clause = "truth-atom";
        expect = detail::iterated_atom(S, T, beta, f, I.valuation(pos, digits));
      } else if (is_atomic(f.kind())) {
        clause = "atomic";
        expect = detail::iterated_atom(S, T, beta, f, I.valuation(pos, digits));
      } else {
        clause = f.kind() == FKind::Forall || f.kind() == FKind::Exists ? "quantifier" : "boolean";
        detail::DigitEnv env;
        for (std::size_t i = 0; i < f.free_vars().size(); ++i) env.b.emplace_back(f.free_vars()[i], digits[i]);
        auto sub = [&](const Formula& g, detail::DigitEnv& e) { return T.stages[beta].test(I.index(*I.position(g), e.digits(g))); };
        expect = detail::tarski_clause(f, env, I.domain().size(), sub);
      }
      if (expect != T.stages[beta].test(x)) return IteratedViolation{beta, f, I.valuation(pos, digits), clause};
    }
  return std::nullopt;
}

// Rewrites truth atoms at stage beta into a disjunction over earlier stages and addressable pool
// formulas, identifying stage and formula by their defining formulas rather than as parameters.
class IteratedTranslator {
 public:
  IteratedTranslator(std::shared_ptr<const IteratedSetting> S, std::size_t stage_cap) : S_(std::move(S)), cap_(stage_cap) {}

  Formula translate(std::size_t beta, const Formula& f) {
    if (beta > cap_) throw DomainError("stage " + std::to_string(beta) + " exceeds the stage cap");
    auto key = std::make_pair(beta, f.id());
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Formula out = compute(beta, f);
    memo_.emplace(key, out);
    return out;
  }

 private:
  Formula compute(std::size_t beta, const Formula& f) {
    switch (f.kind()) {
      case FKind::Tr: return truth_atom(beta, f);
      case FKind::Eq:
      case FKind::In:
      case FKind::InClass:
      case FKind::InG: return f;
      case FKind::Not: return f_not(translate(beta, f.kids()[0]));
      case FKind::And:
      case FKind::Or: {
        std::vector<Formula> ks;
        for (const auto& k : f.kids()) ks.push_back(translate(beta, k));
        return f.kind() == FKind::And ? f_and(std::move(ks)) : f_or(std::move(ks));
      }
      case FKind::Forall: return f_forall(f.vars(), translate(beta, f.kids()[0]));
      case FKind::Exists: return f_exists(f.vars(), translate(beta, f.kids()[0]));
    }
    throw DomainError("bad formula");
  }

  Formula truth_atom(std::size_t beta, const Formula& f) {
    const Term& s = f.terms()[0];
    const Term& t = f.terms()[1];
    const Term& u = f.terms()[2];
    if (t.is_ground() && !S_->code_position(t.ground))
      throw DomainError("pool escape: truth atom names a formula outside the addressable pool");
    std::vector<std::string> taken;
    for (const auto& x : {s, t, u})
      if (x.is_var()) taken.push_back(x.var);
    std::vector<Formula> ds;
    for (std::size_t xi = 0; xi < beta; ++xi)
      for (std::size_t pos : S_->addressable()) {
        const Formula& psi = S_->pool()[pos];
        if (t.is_ground() && *S_->code_position(t.ground) != pos) continue;
        Formula inner = translate(xi, psi);
        Formula val;
        if (psi.free_vars().empty()) {
          val = f_and({theta_formula(HFSet(), u), inner});
        } else {
          std::string w = "tr.w";
          const auto& bound = inner.bound_vars();
          while (std::find(taken.begin(), taken.end(), w) != taken.end() ||
                 std::find(bound.begin(), bound.end(), w) != bound.end())
            w += "'";
          Formula body = rename_free(inner, psi.free_vars()[0], w);
          val = f_exists({w}, f_and({f_eq(var(w), u), body}));
        }
        ds.push_back(f_and({theta_formula(nat_encode(xi), s), theta_formula(formula_code(psi), t), val}));
      }
    return f_or(std::move(ds));
  }

  std::shared_ptr<const IteratedSetting> S_;
  std::size_t cap_;
  std::map<std::pair<std::size_t, std::uint32_t>, Formula> memo_;
};

// Tr(beta, phi, a) read off the translations, evaluated over the setting's structure without any
// truth predicate.
inline IteratedTruthPredicate iterated_translate_predicate(std::shared_ptr<const IteratedSetting> S, std::size_t stage_cap,
                                                           const std::vector<std::size_t>& positions = {}) {
  const PoolIndex& I = *S->index();
  IteratedTranslator tr(S, stage_cap);
  FiniteStructure M(I.domain());
  M.predicates["A"] = std::unordered_set<HFSet>(S->A().begin(), S->A().end());
  Evaluator<FiniteStructure> ev(M, true);
  std::vector<bool> wanted(I.pool().size(), positions.empty());
  for (auto p : positions) wanted.at(p) = true;
  IteratedTruthPredicate T{S->index(), std::vector<CondSet>(S->stages(), CondSet(I.size()))};
  for (std::size_t beta = 0; beta < S->stages(); ++beta)
    for (std::size_t x = 0; x < I.size(); ++x) {
      auto [pos, digits] = I.decode(x);
      if (!wanted[pos]) continue;
      Formula g = tr.translate(beta, I.pool()[pos]);
      Evaluator<FiniteStructure>::Env env;
      const auto& fv = I.pool()[pos].free_vars();
      for (std::size_t i = 0; i < fv.size(); ++i) env.push_back({fv[i], I.domain()[digits[i]]});
      if (ev.eval(g, env)) T.stages[beta].set(x);
    }
  return T;
}

inline Formula iterated_translate(std::shared_ptr<const IteratedSetting> S, std::size_t beta, const Formula& phi,
                                  std::size_t stage_cap) {
  IteratedTranslator tr(std::move(S), stage_cap);
  return tr.translate(beta, phi);
}

}  // namespace forcelab
