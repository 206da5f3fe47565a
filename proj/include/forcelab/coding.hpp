#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "formula.hpp"
#include "hfset.hpp"
#include "pname.hpp"

namespace forcelab {

// Formulas as hereditarily finite sets: <tag, payload> Kuratowski pairs with lists built from pairs.
namespace coding {

inline HFSet list(const std::vector<HFSet>& xs) {
  HFSet out;
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) out = kpair(*it, out);
  return out;
}

inline std::vector<HFSet> unlist(HFSet x) {
  std::vector<HFSet> out;
  while (!x.empty()) {
    auto p = kpair_decode(x);
    if (!p) throw EncodingError("malformed list code");
    out.push_back(p->first);
    x = p->second;
  }
  return out;
}

inline HFSet byte(unsigned char c) {
  std::vector<HFSet> bits;
  for (std::size_t i = 0; i < 8; ++i)
    if (c >> i & 1U) bits.push_back(nat_encode(i));
  return HFSet::make(std::move(bits));
}

inline HFSet string(const std::string& s) {
  std::vector<HFSet> bs;
  for (unsigned char c : s) bs.push_back(byte(c));
  return list(bs);
}

inline std::string unstring(const HFSet& x) {
  std::string s;
  for (const auto& b : unlist(x)) {
    unsigned v = 0;
    for (const auto& bit : b.children()) {
      auto k = nat_decode(bit);
      if (!k || *k >= 8) throw EncodingError("malformed byte code");
      v |= 1U << *k;
    }
    s.push_back(static_cast<char>(v));
  }
  return s;
}

inline HFSet name(const PName& n) {
  std::vector<HFSet> es;
  for (const auto& e : n.entries()) es.push_back(kpair(name(e.name), nat_encode(e.cond)));
  return HFSet::make(std::move(es));
}

inline PName unname(const HFSet& x) {
  std::vector<PName::Entry> es;
  for (const auto& c : x.children()) {
    auto p = kpair_decode(c);
    if (!p) throw EncodingError("malformed name code");
    auto cond = nat_decode(p->second);
    if (!cond) throw EncodingError("malformed condition code");
    es.push_back({unname(p->first), static_cast<std::uint32_t>(*cond)});
  }
  return PName::make(std::move(es));
}

inline HFSet term(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Var: return kpair(nat_encode(0), string(t.var));
    case Term::Kind::Ground: return kpair(nat_encode(1), t.ground);
    case Term::Kind::Name: return kpair(nat_encode(2), name(t.name));
  }
  throw EncodingError("bad term");
}

inline Term unterm(const HFSet& x) {
  auto p = kpair_decode(x);
  if (!p) throw EncodingError("malformed term code");
  auto tag = nat_decode(p->first);
  if (!tag || *tag > 2) throw EncodingError("unknown term tag");
  if (*tag == 0) {
    std::string v = unstring(p->second);
    if (!detail::valid_identifier(v)) throw EncodingError("malformed variable code");
    return Term::variable(v);
  }
  if (*tag == 1) return Term::constant(p->second);
  return Term::of_name(unname(p->second));
}

}  // namespace coding

inline HFSet formula_code(const Formula& f) {
  static std::unordered_map<std::uint32_t, HFSet> cache;
  static std::mutex mu;
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(f.id()); it != cache.end()) return it->second;
  }
  std::vector<HFSet> payload;
  if (is_atomic(f.kind())) {
    for (const auto& t : f.terms()) payload.push_back(coding::term(t));
    if (f.kind() == FKind::InClass) payload.push_back(coding::string(f.ident()));
  } else if (f.kind() == FKind::Forall || f.kind() == FKind::Exists) {
    std::vector<HFSet> vs;
    for (const auto& v : f.vars()) vs.push_back(coding::string(v));
    payload.push_back(coding::list(vs));
    payload.push_back(formula_code(f.kids()[0]));
  } else {
    for (const auto& k : f.kids()) payload.push_back(formula_code(k));
  }
  HFSet code = kpair(nat_encode(static_cast<std::size_t>(f.kind())), coding::list(payload));
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(f.id(), code);
  return code;
}

inline Formula formula_decode(const HFSet& x) {
  auto p = kpair_decode(x);
  if (!p) throw EncodingError("not a formula code");
  auto tag = nat_decode(p->first);
  if (!tag || *tag > static_cast<std::size_t>(FKind::Exists)) throw EncodingError("unknown formula tag");
  FKind k = static_cast<FKind>(*tag);
  std::vector<HFSet> items = coding::unlist(p->second);
  auto terms = [&](std::size_t n) {
    if (items.size() != n) throw EncodingError("wrong arity in formula code");
    std::vector<Term> ts;
    for (std::size_t i = 0; i < n; ++i) ts.push_back(coding::unterm(items[i]));
    return ts;
  };
  switch (k) {
    case FKind::Eq: return Formula::build(k, terms(2), "", {}, {});
    case FKind::In: return Formula::build(k, terms(2), "", {}, {});
    case FKind::InG: return Formula::build(k, terms(1), "", {}, {});
    case FKind::Tr: return Formula::build(k, terms(3), "", {}, {});
    case FKind::InClass: {
      if (items.size() != 2) throw EncodingError("wrong arity in formula code");
      std::string id = coding::unstring(items[1]);
      if (!detail::valid_identifier(id)) throw EncodingError("malformed class identifier");
      return f_in_class(coding::unterm(items[0]), id);
    }
    case FKind::Not:
      if (items.size() != 1) throw EncodingError("wrong arity in formula code");
      return f_not(formula_decode(items[0]));
    case FKind::And:
    case FKind::Or: {
      std::vector<Formula> ks;
      for (const auto& i : items) ks.push_back(formula_decode(i));
      return Formula::build(k, {}, "", std::move(ks), {});
    }
    case FKind::Forall:
    case FKind::Exists: {
      if (items.size() != 2) throw EncodingError("wrong arity in formula code");
      std::vector<std::string> vs;
      for (const auto& v : coding::unlist(items[0])) {
        std::string s = coding::unstring(v);
        if (!detail::valid_identifier(s)) throw EncodingError("malformed variable code");
        vs.push_back(s);
      }
      try {
        return Formula::build(k, {}, "", {formula_decode(items[1])}, [&] {
          check_binder(vs);
          return vs;
        }());
      } catch (const DomainError& e) {
        throw EncodingError(e.what());
      }
    }
  }
  throw EncodingError("unknown formula tag");
}

// Values of the free variables (in sorted order): none -> empty set, one -> the value itself,
// several -> a list.
inline HFSet valuation_code(const std::vector<HFSet>& values) {
  if (values.empty()) return HFSet();
  if (values.size() == 1) return values[0];
  return coding::list(values);
}

}  // namespace forcelab
