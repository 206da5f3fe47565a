#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "formula.hpp"

namespace forcelab {

namespace detail {
struct U64VecHash {
  std::size_t operator()(const std::vector<std::uint64_t>& v) const {
    std::size_t h = v.size();
    for (auto x : v) h = hash_mix(h, std::hash<std::uint64_t>{}(x));
    return h;
  }
};
}  // namespace detail

// Tarskian evaluation over any finite model exposing domain(), eq, member, in_class, in_generic,
// tr, ground, name and key. Quantifiers range over domain().
template <class M>
class Evaluator {
 public:
  using Elem = typename M::Elem;
  struct Binding {
    std::string var;
    Elem value;
  };
  using Env = std::vector<Binding>;

  explicit Evaluator(const M& m, bool memoize = false) : m_(m), memoize_(memoize) {}

  bool eval(const Formula& f, Env& env) {
    if (!memoize_ || is_atomic(f.kind())) return compute(f, env);
    std::vector<std::uint64_t> k;
    k.reserve(f.free_vars().size() + 1);
    k.push_back(f.id());
    for (const auto& v : f.free_vars()) k.push_back(m_.key(lookup(v, env)));
    if (auto it = memo_.find(k); it != memo_.end()) return it->second;
    bool r = compute(f, env);
    memo_.emplace(std::move(k), r);
    return r;
  }

  bool eval(const Formula& f) {
    Env env;
    return eval(f, env);
  }

  Elem value(const Term& t, const Env& env) const {
    switch (t.kind) {
      case Term::Kind::Var: return lookup(t.var, env);
      case Term::Kind::Ground: return m_.ground(t.ground);
      case Term::Kind::Name: return m_.name(t.name);
    }
    throw DomainError("bad term");
  }

 private:
  Elem lookup(const std::string& v, const Env& env) const {
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->var == v) return it->value;
    throw DomainError("unbound variable '" + v + "'");
  }

  bool quantify(const Formula& f, Env& env, bool universal) {
    const auto& vars = f.vars();
    const auto& dom = m_.domain();
    std::size_t base = env.size();
    if (vars.empty()) return eval(f.kids()[0], env);
    if (dom.empty()) return universal;
    std::vector<std::size_t> idx(vars.size(), 0);
    for (const auto& v : vars) env.push_back({v, dom[0]});
    bool result = universal;
    for (;;) {
      for (std::size_t i = 0; i < vars.size(); ++i) env[base + i].value = dom[idx[i]];
      bool r = eval(f.kids()[0], env);
      if (r != universal) {
        result = !universal;
        break;
      }
      std::size_t i = 0;
      while (i < idx.size() && ++idx[i] == dom.size()) idx[i++] = 0;
      if (i == idx.size()) break;
    }
    env.resize(base);
    return result;
  }

  bool compute(const Formula& f, Env& env) {
    switch (f.kind()) {
      case FKind::Eq: return m_.eq(value(f.terms()[0], env), value(f.terms()[1], env));
      case FKind::In: return m_.member(value(f.terms()[0], env), value(f.terms()[1], env));
      case FKind::InClass: return m_.in_class(f.ident(), value(f.terms()[0], env));
      case FKind::InG: return m_.in_generic(value(f.terms()[0], env));
      case FKind::Tr:
        return m_.tr(value(f.terms()[0], env), value(f.terms()[1], env), value(f.terms()[2], env));
      case FKind::Not: return !eval(f.kids()[0], env);
      case FKind::And:
        for (const auto& k : f.kids())
          if (!eval(k, env)) return false;
        return true;
      case FKind::Or:
        for (const auto& k : f.kids())
          if (eval(k, env)) return true;
        return false;
      case FKind::Forall: return quantify(f, env, true);
      case FKind::Exists: return quantify(f, env, false);
    }
    return false;
  }

  const M& m_;
  bool memoize_;
  std::unordered_map<std::vector<std::uint64_t>, bool, detail::U64VecHash> memo_;
};

}  // namespace forcelab
