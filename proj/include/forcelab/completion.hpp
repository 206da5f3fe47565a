#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bits.hpp"
#include "errors.hpp"
#include "forcing.hpp"
#include "poset.hpp"

namespace forcelab {

// Regular open downsets of a separative notion, with the embedding p -> RO(down(p)).
class RegularOpenAlgebra {
 public:
  explicit RegularOpenAlgebra(const ForcingNotion& P) : P_(&P) {}

  const ForcingNotion& notion() const { return *P_; }

  CondSet regularize(const CondSet& x) const { return P_->dense_interior(P_->down_closure(x)); }
  bool is_element(const CondSet& x) const { return P_->down_closure(x) == x && regularize(x) == x; }

  CondSet zero() const { return P_->none(); }
  CondSet one() const { return P_->all(); }
  CondSet meet(const CondSet& a, const CondSet& b) const { return a & b; }
  CondSet join(const CondSet& a, const CondSet& b) const { return regularize(a | b); }
  CondSet complement(const CondSet& a) const { return P_->no_extension_in(a); }
  bool le(const CondSet& a, const CondSet& b) const { return a.subset_of(b); }
  CondSet embed(std::size_t p) const { return regularize(P_->down(p)); }

  // All elements; only for small notions.
  std::vector<CondSet> elements(std::size_t max_conditions = 20) const {
    std::size_t n = P_->size();
    if (n > max_conditions) throw ResourceError("too many conditions to enumerate the completion");
    std::vector<CondSet> out;
    std::unordered_map<CondSet, bool, CondSetHash> seen;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      CondSet x(n);
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1U) x.set(i);
      if (P_->down_closure(x) != x || regularize(x) != x) continue;
      if (seen.emplace(x, true).second) out.push_back(x);
    }
    return out;
  }

 private:
  const ForcingNotion* P_;
};

inline RegularOpenAlgebra boolean_completion(const ForcingNotion& P) {
  if (auto bad = is_separative(P))
    throw DomainError("notion is not separative: " + P.label(bad->first) + " is not below " +
                      P.label(bad->second) + " yet every extension is compatible with it");
  return RegularOpenAlgebra(P);
}

// First violated Boolean-algebra law over the enumerated elements, if any.
inline std::optional<std::string> check_boolean_algebra(const RegularOpenAlgebra& B, const std::vector<CondSet>& els) {
  auto member = [&](const CondSet& x) { return B.is_element(x); };
  if (!member(B.zero()) || !member(B.one())) return "0 or 1 is not regular open";
  for (const auto& a : els) {
    CondSet c = B.complement(a);
    if (!member(c)) return "complement leaves the algebra";
    if (B.meet(a, c) != B.zero()) return "a and not-a is not 0";
    if (B.join(a, c) != B.one()) return "a or not-a is not 1";
    if (B.complement(c) != a) return "double complement differs";
    for (const auto& b : els) {
      CondSet m = B.meet(a, b), j = B.join(a, b);
      if (!member(m) || !member(j)) return "meet or join leaves the algebra";
      if (m != B.meet(b, a) || j != B.join(b, a)) return "commutativity fails";
      if (B.join(a, m) != a || B.meet(a, j) != a) return "absorption fails";
      if (B.le(a, b) != (m == a)) return "order is not the lattice order";
      for (const auto& c2 : els) {
        if (B.meet(a, B.join(b, c2)) != B.join(m, B.meet(a, c2))) return "distributivity fails";
        if (B.join(a, B.join(b, c2)) != B.join(j, c2)) return "join is not associative";
      }
    }
  }
  return std::nullopt;
}

// First failure of: i order-preserving, reflecting order, preserving incompatibility, dense image.
inline std::optional<std::string> check_embedding(const RegularOpenAlgebra& B, const std::vector<CondSet>& els) {
  const ForcingNotion& P = B.notion();
  for (std::size_t p = 0; p < P.size(); ++p) {
    CondSet ip = B.embed(p);
    if (ip.none()) return "i(" + P.label(p) + ") is 0";
    for (std::size_t q = 0; q < P.size(); ++q) {
      CondSet iq = B.embed(q);
      if (P.le(p, q) != B.le(ip, iq)) return "i does not match the order at (" + P.label(p) + ", " + P.label(q) + ")";
      if (P.compatible(p, q) != B.meet(ip, iq).any())
        return "i does not preserve incompatibility at (" + P.label(p) + ", " + P.label(q) + ")";
      if ((ip == iq) != P.equivalent(p, q)) return "i identifies inequivalent conditions";
    }
  }
  for (const auto& b : els) {
    if (b.none()) continue;
    bool below = false;
    for (std::size_t p = 0; p < P.size() && !below; ++p) below = B.le(B.embed(p), b);
    if (!below) return "image of i is not dense";
  }
  return std::nullopt;
}

// Boolean values of atomic statements, by recursion on names.
class BooleanValues {
 public:
  BooleanValues(const RegularOpenAlgebra& B) : B_(B) {}

  const CondSet& in(const PName& s, const PName& t) {
    auto k = key(s, t);
    if (auto it = in_.find(k); it != in_.end()) return it->second;
    CondSet v = B_.zero();
    for (const auto& e : t.entries()) v = B_.join(v, B_.meet(eq(s, e.name), B_.embed(e.cond)));
    return in_.emplace(k, std::move(v)).first->second;
  }
  const CondSet& sub(const PName& s, const PName& t) {
    auto k = key(s, t);
    if (auto it = sub_.find(k); it != sub_.end()) return it->second;
    CondSet v = B_.one();
    for (const auto& e : s.entries()) v = B_.meet(v, B_.join(B_.complement(B_.embed(e.cond)), in(e.name, t)));
    return sub_.emplace(k, std::move(v)).first->second;
  }
  const CondSet& eq(const PName& s, const PName& t) {
    auto k = key(s, t);
    if (auto it = eq_.find(k); it != eq_.end()) return it->second;
    CondSet v = B_.meet(sub(s, t), sub(t, s));
    return eq_.emplace(k, std::move(v)).first->second;
  }
  const CondSet& value(AtomKind k, const PName& s, const PName& t) {
    switch (k) {
      case AtomKind::In: return in(s, t);
      case AtomKind::Eq: return eq(s, t);
      case AtomKind::Sub: return sub(s, t);
    }
    return in(s, t);
  }

 private:
  static std::uint64_t key(const PName& s, const PName& t) {
    return (static_cast<std::uint64_t>(s.id()) << 32) | t.id();
  }
  const RegularOpenAlgebra& B_;
  std::unordered_map<std::uint64_t, CondSet> in_, sub_, eq_;
};

inline BooleanValues boolean_values(const RegularOpenAlgebra& B) { return BooleanValues(B); }

// p forces the statement iff i(p) <= its Boolean value; first disagreement, if any.
inline std::optional<std::string> check_values_against_forcing(const RegularOpenAlgebra& B, BooleanValues& V,
                                                               ForcingRelation& R) {
  const ForcingNotion& P = B.notion();
  for (const auto& s : R.universe().names)
    for (const auto& t : R.universe().names)
      for (AtomKind k : {AtomKind::In, AtomKind::Eq, AtomKind::Sub}) {
        const CondSet& val = V.value(k, s, t);
        if (!B.is_element(val)) return std::string("Boolean value is not regular open");
        const CondSet& forced = R.atom(k, s, t);
        for (std::size_t p = 0; p < P.size(); ++p)
          if (B.le(B.embed(p), val) != forced.test(p))
            return std::string(atom_kind_name(k)) + " " + to_sexpr(s) + " " + to_sexpr(t) + " at " + P.label(p);
      }
  return std::nullopt;
}

struct LindenbaumReport {
  bool all_regular = true;
  bool surjective = false;
  std::size_t image_size = 0;
  std::size_t algebra_size = 0;
};

// lambda(phi) = {p : p forces phi}; checks it lands in the completion and whether it covers it.
inline LindenbaumReport lindenbaum_check(const RegularOpenAlgebra& B, ForcingRelation& R,
                                         const std::vector<Formula>& sentences) {
  LindenbaumReport rep;
  auto els = B.elements();
  rep.algebra_size = els.size();
  std::unordered_map<CondSet, bool, CondSetHash> image;
  for (const auto& phi : sentences) {
    const CondSet& v = R.forcing_set(phi);
    if (!B.is_element(v)) rep.all_regular = false;
    image.emplace(v, true);
  }
  rep.image_size = image.size();
  rep.surjective = true;
  for (const auto& b : els)
    if (!image.count(b)) rep.surjective = false;
  return rep;
}

// Sentences OR_{p in S} (p-check in G), one per set S of conditions (small notions only).
inline std::vector<Formula> generic_membership_sentences(const ForcingNotion& P) {
  std::vector<Formula> out;
  std::size_t n = P.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<Formula> alts;
    for (std::size_t p = 0; p < n; ++p)
      if (mask >> p & 1U) alts.push_back(f_in_g(Term::of_name(condition_check(p))));
    out.push_back(f_or(std::move(alts)));
  }
  return out;
}

}  // namespace forcelab
