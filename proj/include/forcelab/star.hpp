#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "formula.hpp"
#include "hfset.hpp"
#include "pname.hpp"
#include "poset.hpp"

namespace forcelab {

struct StarTranslation {
  PName a, b;
  std::size_t nodes = 0;
};

struct StarOptions {
  std::size_t node_budget = 2'000'000;
};

namespace detail {

struct SNode;
using SPtr = std::shared_ptr<const SNode>;

enum class LitKind : std::uint8_t { Eq, In, Sub, InG };

struct SNode {
  enum class Kind : std::uint8_t { Lit, And, Or } kind = Kind::Lit;
  LitKind lit = LitKind::Eq;
  bool neg = false;
  PName a, b;
  std::size_t cond = 0;
  std::vector<SPtr> kids;
};

class StarPipeline {
 public:
  StarPipeline(const ForcingNotion& P, const StarOptions& opt) : P_(P), opt_(opt) {
    for (std::size_t p = 0; p < P.size(); ++p) check_to_cond_.emplace(condition_check(p).id(), p);
  }

  StarTranslation run(const Formula& phi) {
    Formula g = eliminate_generic(phi);
    SPtr nnf = push_negations(g, false);
    SPtr pos = expand_negated(nnf);
    SPtr eqs = positive_to_equalities(pos);
    auto [a, b] = to_names(eqs);
    return {a, b, nodes_};
  }

 private:
  // Pass 1: sigma in G becomes OR_p (p-check in G and sigma = p-check), unless sigma is a condition check.
  Formula eliminate_generic(const Formula& f) {
    switch (f.kind()) {
      case FKind::InG: {
        const Term& t = f.terms()[0];
        if (!t.is_name()) throw DomainError("star translation needs name constants");
        if (check_to_cond_.count(t.name.id())) return f;
        std::vector<Formula> alts;
        for (std::size_t p = 0; p < P_.size(); ++p) {
          Term pc = Term::of_name(condition_check(p));
          alts.push_back(f_and({f_in_g(pc), f_eq(t, pc)}));
        }
        return f_or(std::move(alts));
      }
      case FKind::Eq:
      case FKind::In:
        return f;
      case FKind::Not:
      case FKind::And:
      case FKind::Or: {
        std::vector<Formula> ks;
        for (const auto& k : f.kids()) ks.push_back(eliminate_generic(k));
        return Formula::build(f.kind(), {}, "", std::move(ks), {});
      }
      default:
        throw DomainError("star translation applies to quantifier-free sentences over =, in and G: " + to_sexpr(f));
    }
  }

  SPtr make(SNode n) {
    if (++nodes_ > opt_.node_budget) throw ResourceError("star translation exceeds its node budget");
    return std::make_shared<const SNode>(std::move(n));
  }
  SPtr lit(LitKind k, bool neg, const PName& a, const PName& b, std::size_t cond = 0) {
    SNode n;
    n.kind = SNode::Kind::Lit;
    n.lit = k;
    n.neg = neg;
    n.a = a;
    n.b = b;
    n.cond = cond;
    return make(std::move(n));
  }
  SPtr junction(SNode::Kind k, std::vector<SPtr> kids) {
    SNode n;
    n.kind = k;
    n.kids = std::move(kids);
    return make(std::move(n));
  }

  static PName name_of(const Term& t) {
    if (!t.is_name()) throw DomainError("star translation needs name constants");
    return t.name;
  }

  // Pass 2: de Morgan, leaving negations only on atoms.
  SPtr push_negations(const Formula& f, bool neg) {
    switch (f.kind()) {
      case FKind::Eq: return lit(LitKind::Eq, neg, name_of(f.terms()[0]), name_of(f.terms()[1]));
      case FKind::In: return lit(LitKind::In, neg, name_of(f.terms()[0]), name_of(f.terms()[1]));
      case FKind::InG: return lit(LitKind::InG, neg, PName(), PName(), check_to_cond_.at(f.terms()[0].name.id()));
      case FKind::Not: return push_negations(f.kids()[0], !neg);
      case FKind::And:
      case FKind::Or: {
        bool conj = (f.kind() == FKind::And) != neg;
        std::vector<SPtr> ks;
        for (const auto& k : f.kids()) ks.push_back(push_negations(k, neg));
        return junction(conj ? SNode::Kind::And : SNode::Kind::Or, std::move(ks));
      }
      default:
        throw DomainError("unexpected formula in star translation");
    }
  }

  static std::size_t measure(LitKind k, const PName& a, const PName& b) {
    std::size_t base = 3 * (a.rank() + b.rank());
    switch (k) {
      case LitKind::Eq: return base + 2;
      case LitKind::Sub: return base + 1;
      default: return base;
    }
  }

  // Pass 3: negated =, sub and in are unfolded into positive literals and negated G-atoms.
  SPtr expand_negated(const SPtr& n) {
    if (n->kind != SNode::Kind::Lit) {
      std::vector<SPtr> ks;
      for (const auto& k : n->kids) ks.push_back(expand_negated(k));
      return junction(n->kind, std::move(ks));
    }
    if (!n->neg || n->lit == LitKind::InG) return n;
    return negated(n->lit, n->a, n->b, SIZE_MAX);
  }

  SPtr negated(LitKind k, const PName& s, const PName& t, std::size_t bound) {
    std::size_t m = measure(k, s, t);
    if (m >= bound) throw Error("star translation: negated-atom measure did not decrease");
    auto key = std::make_tuple(static_cast<int>(k), s.id(), t.id());
    if (auto it = neg_memo_.find(key); it != neg_memo_.end()) return it->second;
    SPtr out;
    switch (k) {
      case LitKind::Eq:
        out = junction(SNode::Kind::Or, {negated(LitKind::Sub, s, t, m), negated(LitKind::Sub, t, s, m)});
        break;
      case LitKind::Sub: {
        std::vector<SPtr> alts;
        for (const auto& e : s.entries())
          alts.push_back(junction(SNode::Kind::And, {lit(LitKind::InG, false, PName(), PName(), e.cond),
                                                     negated(LitKind::In, e.name, t, m)}));
        out = junction(SNode::Kind::Or, std::move(alts));
        break;
      }
      case LitKind::In: {
        std::vector<SPtr> parts;
        for (const auto& e : t.entries())
          parts.push_back(junction(SNode::Kind::Or, {lit(LitKind::InG, true, PName(), PName(), e.cond),
                                                     negated(LitKind::Eq, s, e.name, m)}));
        out = junction(SNode::Kind::And, std::move(parts));
        break;
      }
      case LitKind::InG:
        break;
    }
    neg_memo_.emplace(key, out);
    return out;
  }

  // Pass 4: every literal becomes an equality of names.
  SPtr positive_to_equalities(const SPtr& n) {
    if (auto it = pos_memo_.find(n.get()); it != pos_memo_.end()) return it->second;
    SPtr out;
    if (n->kind != SNode::Kind::Lit) {
      std::vector<SPtr> ks;
      for (const auto& k : n->kids) ks.push_back(positive_to_equalities(k));
      out = junction(n->kind, std::move(ks));
    } else {
      switch (n->lit) {
        case LitKind::Eq: out = n; break;
        case LitKind::In:
          out = lit(LitKind::Eq, false, n->b, name_union(n->b, PName::make({{n->a, kOne}})));
          break;
        case LitKind::InG: {
          PName lhs = PName::make({{PName(), static_cast<std::uint32_t>(n->cond)}});
          PName rhs = n->neg ? PName() : PName::make({{PName(), kOne}});
          out = lit(LitKind::Eq, false, lhs, rhs);
          break;
        }
        case LitKind::Sub:
          throw Error("star translation: stray inclusion literal");
      }
    }
    pos_memo_.emplace(n.get(), out);
    return out;
  }

  // Pass 5: conjunctions and disjunctions of equalities become a single equality.
  std::pair<PName, PName> to_names(const SPtr& n) {
    if (auto it = name_memo_.find(n.get()); it != name_memo_.end()) return it->second;
    std::pair<PName, PName> out;
    if (n->kind == SNode::Kind::Lit) {
      out = {n->a, n->b};
    } else {
      std::vector<PName> as, bs;
      for (std::size_t i = 0; i < n->kids.size(); ++i) {
        auto [a, b] = to_names(n->kids[i]);
        PName idx = check_name(nat_encode(i));
        as.push_back(op_name(idx, a));
        bs.push_back(op_name(idx, b));
      }
      if (n->kind == SNode::Kind::And) {
        std::vector<PName::Entry> ea, eb;
        for (const auto& x : as) ea.push_back({x, kOne});
        for (const auto& x : bs) eb.push_back({x, kOne});
        out = {PName::make(std::move(ea)), PName::make(std::move(eb))};
      } else {
        std::vector<PName::Entry> all;
        for (const auto& x : as) all.push_back({x, kOne});
        for (const auto& x : bs) all.push_back({x, kOne});
        PName u = PName::make(all);
        std::vector<PName::Entry> ua;
        for (std::size_t j = 0; j < n->kids.size(); ++j) {
          std::vector<PName::Entry> uj;
          for (const auto& x : as) uj.push_back({x, kOne});
          for (std::size_t i = 0; i < bs.size(); ++i)
            if (i != j) uj.push_back({bs[i], kOne});
          ua.push_back({PName::make(std::move(uj)), kOne});
        }
        std::vector<PName::Entry> ub = ua;
        ub.push_back({u, kOne});
        out = {PName::make(std::move(ua)), PName::make(std::move(ub))};
      }
    }
    name_memo_.emplace(n.get(), out);
    return out;
  }

  const ForcingNotion& P_;
  StarOptions opt_;
  std::size_t nodes_ = 0;
  std::unordered_map<std::uint32_t, std::size_t> check_to_cond_;
  std::map<std::tuple<int, std::uint32_t, std::uint32_t>, SPtr> neg_memo_;
  std::unordered_map<const SNode*, SPtr> pos_memo_;
  std::unordered_map<const SNode*, std::pair<PName, PName>> name_memo_;
};

}  // namespace detail

// Reduces a quantifier-free sentence over =, in and G to a single equation a = b between names
// such that p forces the sentence iff p forces a = b.
inline StarTranslation star_translate(const Formula& phi, const ForcingNotion& P, const StarOptions& opt = {}) {
  return detail::StarPipeline(P, opt).run(phi);
}

}  // namespace forcelab
