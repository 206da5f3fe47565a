#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "forcing.hpp"
#include "formula.hpp"
#include "names.hpp"
#include "poset.hpp"
#include "truth.hpp"

namespace forcelab {

struct Star8Options {
  std::size_t node_budget = 200000;
};

namespace detail {

class Star8 {
 public:
  Star8(const ForcingNotion& P, std::size_t budget) : P_(P), budget_(budget) {
    const auto& c = collapse_info(P);
    clock_ = c.clock;
    eps_ = eps_dot(P);
    adot_ = a_dot(P);
  }

  std::size_t clock() const { return clock_; }
  const PName& eps() const { return eps_; }
  const PName& adot() const { return adot_; }

  Formula run(const Formula& f, const std::map<std::string, PName>& slots) {
    std::vector<std::uint32_t> key{f.id()};
    for (const auto& v : f.free_vars()) {
      auto it = slots.find(v);
      if (it == slots.end()) throw DomainError("star translation: no slot for free variable '" + v + "'");
      key.push_back(it->second.id());
    }
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (++nodes_ > budget_) throw ResourceError("star translation exceeds the node budget of " + std::to_string(budget_));
    Formula out = compute(f, slots);
    memo_.emplace(std::move(key), out);
    return out;
  }

 private:
  PName term_name(const Term& t, const std::map<std::string, PName>& slots) const {
    if (t.is_var()) return slots.at(t.var);
    if (t.is_ground()) return n_dot(P_, t.ground);
    throw DomainError("star translation: name constant in a first-order formula");
  }

  Formula compute(const Formula& f, const std::map<std::string, PName>& slots) {
    switch (f.kind()) {
      case FKind::Eq: return f_eq(Term::of_name(term_name(f.terms()[0], slots)), Term::of_name(term_name(f.terms()[1], slots)));
      case FKind::In:
        return f_in(Term::of_name(op_name(term_name(f.terms()[0], slots), term_name(f.terms()[1], slots))), Term::of_name(eps_));
      case FKind::InClass:
        if (f.ident() != "A") throw DomainError("star translation: unknown predicate '" + f.ident() + "'");
        return f_in(Term::of_name(term_name(f.terms()[0], slots)), Term::of_name(adot_));
      case FKind::InG:
      case FKind::Tr: throw DomainError("star translation: not a first-order formula over (in, A)");
      case FKind::Not: return f_not(run(f.kids()[0], slots));
      case FKind::And:
      case FKind::Or: {
        std::vector<Formula> ks;
        for (const auto& k : f.kids()) ks.push_back(run(k, slots));
        return f.kind() == FKind::And ? f_and(std::move(ks)) : f_or(std::move(ks));
      }
      case FKind::Forall:
      case FKind::Exists: {
        const auto& vars = f.vars();
        std::vector<Formula> ks;
        std::vector<std::size_t> idx(vars.size(), 0);
        for (;;) {
          auto inner = slots;
          for (std::size_t i = 0; i < vars.size(); ++i) inner[vars[i]] = check_name(nat_encode(idx[i]));
          ks.push_back(run(f.kids()[0], inner));
          std::size_t i = 0;
          while (i < idx.size() && ++idx[i] == clock_) idx[i++] = 0;
          if (i == idx.size()) break;
        }
        return f.kind() == FKind::Forall ? f_and(std::move(ks)) : f_or(std::move(ks));
      }
    }
    throw DomainError("bad formula");
  }

  struct KeyHash {
    std::size_t operator()(const std::vector<std::uint32_t>& v) const {
      std::size_t h = v.size();
      for (auto x : v) h = hash_mix(h, x);
      return h;
    }
  };

  const ForcingNotion& P_;
  std::size_t budget_;
  std::size_t clock_ = 0;
  std::size_t nodes_ = 0;
  PName eps_, adot_;
  std::unordered_map<std::vector<std::uint32_t>, Formula, KeyHash> memo_;
};

}  // namespace detail

// The translation of a first-order formula over (in, A) into the quantifier-free infinitary
// forcing language of the collapse notion, with free variables filled from `slots`.
inline Formula star8_translate(const Formula& phi, const ForcingNotion& P, const std::map<std::string, PName>& slots,
                               const Star8Options& opt = {}) {
  detail::Star8 s(P, opt.node_budget);
  return s.run(phi, slots);
}

// The collapse notion F_A for a stage, its canonical names, and the atomic forcing relation over
// the subname closure of every name the translations can mention.
class CollapseForcing {
 public:
  CollapseForcing(std::size_t n, const std::vector<HFSet>& A, const CollapseOptions& copt = {},
                  const Star8Options& sopt = {})
      : P_(std::make_shared<const ForcingNotion>(build_collapse(n, A, copt))), star_(*P_, sopt.node_budget) {
    const auto& c = detail::collapse_info(*P_);
    std::vector<PName> seeds{star_.eps(), star_.adot()};
    std::vector<PName> atoms;
    for (const auto& a : c.targets) atoms.push_back(n_dot(*P_, a));
    for (std::size_t m = 0; m < c.clock; ++m) atoms.push_back(check_name(nat_encode(m)));
    for (const auto& x : atoms)
      for (const auto& y : atoms) seeds.push_back(op_name(x, y));
    seeds.insert(seeds.end(), atoms.begin(), atoms.end());
    R_ = std::make_unique<ForcingRelation>(P_, seeded_universe(seeds));
  }

  const ForcingNotion& notion() const { return *P_; }
  ForcingRelation& relation() { return *R_; }
  const std::vector<HFSet>& domain() const { return detail::collapse_info(*P_).targets; }

  Formula translate(const Formula& phi, const Valuation& v) {
    std::map<std::string, PName> slots;
    for (const auto& [x, a] : v) slots.emplace(x, n_dot(*P_, a));
    return star_.run(phi, slots);
  }
  Formula translate_with(const Formula& phi, const std::map<std::string, PName>& slots) { return star_.run(phi, slots); }

  const CondSet& forcing_set(const Formula& phi, const Valuation& v) { return R_->forcing_set(translate(phi, v)); }

 private:
  std::shared_ptr<const ForcingNotion> P_;
  detail::Star8 star_;
  std::unique_ptr<ForcingRelation> R_;
};

// Tr(phi, a) iff the top condition forces the translation of phi at the names n_a.
inline TruthPredicate forcing_truth(CollapseForcing& C, const std::vector<Formula>& pool) {
  auto I = std::make_shared<const PoolIndex>(pool, C.domain());
  TruthPredicate T{I, CondSet(I->size())};
  for (std::size_t x = 0; x < I->size(); ++x) {
    auto [pos, digits] = I->decode(x);
    if (C.forcing_set(pool[pos], I->valuation(pos, digits)).test(kOne)) T.truth.set(x);
  }
  return T;
}

inline TruthPredicate forcing_truth(std::size_t n, const std::vector<HFSet>& A, const std::vector<Formula>& pool,
                                    const CollapseOptions& copt = {}) {
  CollapseForcing C(n, A, copt);
  return forcing_truth(C, pool);
}

struct InvarianceFailure {
  std::size_t condition;
  Formula formula;
  Valuation valuation;
};

// Every condition forces each translated pool instance iff the top condition does.
inline std::optional<InvarianceFailure> invariance_check(CollapseForcing& C, const std::vector<Formula>& pool) {
  PoolIndex I(pool, C.domain());
  for (std::size_t x = 0; x < I.size(); ++x) {
    auto [pos, digits] = I.decode(x);
    Valuation v = I.valuation(pos, digits);
    const CondSet& s = C.forcing_set(pool[pos], v);
    if (s.none() || s.all()) continue;
    bool top = s.test(kOne);
    for (std::size_t p = 0; p < s.universe(); ++p)
      if (s.test(p) != top) return InvarianceFailure{p, pool[pos], v};
  }
  return std::nullopt;
}

inline std::optional<InvarianceFailure> invariance_check(std::size_t n, const std::vector<HFSet>& A,
                                                         const std::vector<Formula>& pool) {
  CollapseForcing C(n, A);
  return invariance_check(C, pool);
}

}  // namespace forcelab
