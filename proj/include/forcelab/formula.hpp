#pragma once

#include <algorithm>
#include <cctype>
#include <iterator>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "hfset.hpp"
#include "intern.hpp"
#include "pname.hpp"
#include "sexpr.hpp"

namespace forcelab {

namespace detail {
inline std::uint32_t symbol_id(const std::string& s) {
  static std::unordered_map<std::string, std::uint32_t> ids;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto [it, fresh] = ids.emplace(s, static_cast<std::uint32_t>(ids.size()));
  return it->second;
}
}  // namespace detail

struct Term {
  enum class Kind : std::uint8_t { Var, Ground, Name };

  Kind kind = Kind::Var;
  std::string var;
  HFSet ground;
  PName name;

  static Term variable(std::string v) {
    Term t;
    t.kind = Kind::Var;
    t.var = std::move(v);
    return t;
  }
  static Term constant(const HFSet& x) {
    Term t;
    t.kind = Kind::Ground;
    t.ground = x;
    return t;
  }
  static Term of_name(const PName& n) {
    Term t;
    t.kind = Kind::Name;
    t.name = n;
    return t;
  }

  bool is_var() const { return kind == Kind::Var; }
  bool is_ground() const { return kind == Kind::Ground; }
  bool is_name() const { return kind == Kind::Name; }

  friend bool operator==(const Term& a, const Term& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Kind::Var: return a.var == b.var;
      case Kind::Ground: return a.ground == b.ground;
      case Kind::Name: return a.name == b.name;
    }
    return false;
  }
};

enum class FKind : std::uint8_t { Eq, In, InClass, InG, Tr, Not, And, Or, Forall, Exists };

inline bool is_atomic(FKind k) { return k <= FKind::Tr; }

class Formula;

namespace detail {
struct FormulaNode {
  FKind kind = FKind::And;
  std::vector<Term> terms;
  std::string ident;
  std::vector<Formula> kids;
  std::vector<std::string> vars;
  std::size_t rank = 0;
  std::vector<std::string> free;
  std::vector<std::string> bound;
  std::uint32_t id = 0;
};
inline InternTable<FormulaNode>& formula_table() {
  static InternTable<FormulaNode> t;
  return t;
}
}  // namespace detail

// Immutable, hash-consed formula; structurally equal formulas are pointer-equal.
class Formula {
 public:
  Formula() : n_(nullptr) {}

  FKind kind() const { return n_->kind; }
  const std::vector<Term>& terms() const { return n_->terms; }
  const std::string& ident() const { return n_->ident; }
  const std::vector<Formula>& kids() const { return n_->kids; }
  const std::vector<std::string>& vars() const { return n_->vars; }
  std::size_t rank() const { return n_->rank; }
  const std::vector<std::string>& free_vars() const { return n_->free; }
  const std::vector<std::string>& bound_vars() const { return n_->bound; }
  bool is_sentence() const { return n_->free.empty(); }
  std::uint32_t id() const { return n_->id; }
  bool valid() const { return n_ != nullptr; }

  friend bool operator==(const Formula& a, const Formula& b) { return a.n_ == b.n_; }

  static Formula build(FKind kind, std::vector<Term> terms, std::string ident,
                       std::vector<Formula> kids, std::vector<std::string> vars);

 private:
  explicit Formula(const detail::FormulaNode* n) : n_(n) {}
  const detail::FormulaNode* n_;
};

namespace detail {
inline void sorted_union(std::vector<std::string>& acc, const std::vector<std::string>& add) {
  std::vector<std::string> out;
  std::set_union(acc.begin(), acc.end(), add.begin(), add.end(), std::back_inserter(out));
  acc = std::move(out);
}
}  // namespace detail

inline Formula Formula::build(FKind kind, std::vector<Term> terms, std::string ident,
                              std::vector<Formula> kids, std::vector<std::string> vars) {
  detail::InternKey key;
  key.push_back(static_cast<std::uintptr_t>(kind));
  key.push_back(terms.size());
  for (const auto& t : terms) {
    key.push_back(static_cast<std::uintptr_t>(t.kind));
    switch (t.kind) {
      case Term::Kind::Var: key.push_back(detail::symbol_id(t.var)); break;
      case Term::Kind::Ground: key.push_back(t.ground.id()); break;
      case Term::Kind::Name: key.push_back(t.name.id()); break;
    }
  }
  key.push_back(detail::symbol_id(ident));
  key.push_back(kids.size());
  for (const auto& k : kids) key.push_back(reinterpret_cast<std::uintptr_t>(k.n_));
  key.push_back(vars.size());
  for (const auto& v : vars) key.push_back(detail::symbol_id(v));

  const detail::FormulaNode* n = detail::formula_table().intern(std::move(key), [&] {
    detail::FormulaNode node;
    node.kind = kind;
    node.terms = terms;
    node.ident = ident;
    node.kids = kids;
    node.vars = vars;
    if (is_atomic(kind)) {
      for (const auto& t : terms)
        if (t.is_var()) node.free.push_back(t.var);
      std::sort(node.free.begin(), node.free.end());
      node.free.erase(std::unique(node.free.begin(), node.free.end()), node.free.end());
    } else {
      std::size_t r = 0;
      for (const auto& k : kids) {
        r = std::max(r, k.rank());
        detail::sorted_union(node.free, k.free_vars());
        detail::sorted_union(node.bound, k.bound_vars());
      }
      node.rank = r + 1;
      if (kind == FKind::Forall || kind == FKind::Exists) {
        std::vector<std::string> vs = vars;
        std::sort(vs.begin(), vs.end());
        std::vector<std::string> rest;
        std::set_difference(node.free.begin(), node.free.end(), vs.begin(), vs.end(),
                            std::back_inserter(rest));
        node.free = std::move(rest);
        detail::sorted_union(node.bound, vs);
      }
    }
    return node;
  });
  return Formula(n);
}

inline Formula f_eq(Term a, Term b) { return Formula::build(FKind::Eq, {std::move(a), std::move(b)}, "", {}, {}); }
inline Formula f_in(Term a, Term b) { return Formula::build(FKind::In, {std::move(a), std::move(b)}, "", {}, {}); }
inline Formula f_in_class(Term a, std::string cls) {
  return Formula::build(FKind::InClass, {std::move(a)}, std::move(cls), {}, {});
}
inline Formula f_in_g(Term a) { return Formula::build(FKind::InG, {std::move(a)}, "", {}, {}); }
inline Formula f_tr(Term a, Term b, Term c) {
  return Formula::build(FKind::Tr, {std::move(a), std::move(b), std::move(c)}, "", {}, {});
}
inline Formula f_not(Formula f) { return Formula::build(FKind::Not, {}, "", {f}, {}); }
inline Formula f_and(std::vector<Formula> fs) { return Formula::build(FKind::And, {}, "", std::move(fs), {}); }
inline Formula f_or(std::vector<Formula> fs) { return Formula::build(FKind::Or, {}, "", std::move(fs), {}); }

inline void check_binder(const std::vector<std::string>& vars) {
  std::vector<std::string> vs = vars;
  std::sort(vs.begin(), vs.end());
  if (std::adjacent_find(vs.begin(), vs.end()) != vs.end())
    throw DomainError("quantifier block binds a variable twice");
}
inline Formula f_forall(std::vector<std::string> vars, Formula f) {
  check_binder(vars);
  return Formula::build(FKind::Forall, {}, "", {f}, std::move(vars));
}
inline Formula f_exists(std::vector<std::string> vars, Formula f) {
  check_binder(vars);
  return Formula::build(FKind::Exists, {}, "", {f}, std::move(vars));
}
inline Formula f_true() { return f_and({}); }
inline Formula f_false() { return f_or({}); }
inline Formula f_implies(Formula a, Formula b) { return f_or({f_not(a), b}); }
inline Formula f_iff(Formula a, Formula b) { return f_and({f_implies(a, b), f_implies(b, a)}); }

inline Term var(std::string v) { return Term::variable(std::move(v)); }

inline std::size_t formula_rank(const Formula& f) { return f.rank(); }

inline std::vector<std::string> free_variables(const Formula& f) { return f.free_vars(); }

// Replaces free variables by closed terms. Targeting a variable that is bound anywhere in f is an error.
inline Formula substitute(const Formula& f, const std::map<std::string, Term>& b) {
  for (const auto& [v, t] : b) {
    if (t.is_var()) throw DomainError("substitute: replacement for '" + v + "' is not closed");
    if (std::binary_search(f.bound_vars().begin(), f.bound_vars().end(), v))
      throw DomainError("substitute: variable '" + v + "' is bound in the formula");
  }
  std::unordered_map<std::uint32_t, Formula> memo;
  auto go = [&](auto&& self, const Formula& g) -> Formula {
    bool touched = false;
    for (const auto& v : g.free_vars())
      if (b.count(v)) {
        touched = true;
        break;
      }
    if (!touched) return g;
    if (auto it = memo.find(g.id()); it != memo.end()) return it->second;
    Formula out;
    if (is_atomic(g.kind())) {
      std::vector<Term> ts = g.terms();
      for (auto& t : ts)
        if (t.is_var())
          if (auto it = b.find(t.var); it != b.end()) t = it->second;
      out = Formula::build(g.kind(), std::move(ts), g.ident(), {}, {});
    } else {
      std::vector<Formula> ks;
      ks.reserve(g.kids().size());
      for (const auto& k : g.kids()) ks.push_back(self(self, k));
      out = Formula::build(g.kind(), {}, g.ident(), std::move(ks), g.vars());
    }
    memo.emplace(g.id(), out);
    return out;
  };
  return go(go, f);
}

inline Formula substitute(const Formula& f, const std::string& v, const Term& t) {
  return substitute(f, std::map<std::string, Term>{{v, t}});
}

// Renames free occurrences of `from` to the variable `to`; `to` must not occur bound in f.
inline Formula rename_free(const Formula& f, const std::string& from, const std::string& to) {
  if (from == to) return f;
  if (std::binary_search(f.bound_vars().begin(), f.bound_vars().end(), to))
    throw DomainError("rename_free: '" + to + "' is bound in the formula");
  auto go = [&](auto&& self, const Formula& g) -> Formula {
    if (!std::binary_search(g.free_vars().begin(), g.free_vars().end(), from)) return g;
    if (is_atomic(g.kind())) {
      std::vector<Term> ts = g.terms();
      for (auto& t : ts)
        if (t.is_var() && t.var == from) t.var = to;
      return Formula::build(g.kind(), std::move(ts), g.ident(), {}, {});
    }
    std::vector<Formula> ks;
    for (const auto& k : g.kids()) ks.push_back(self(self, k));
    return Formula::build(g.kind(), {}, g.ident(), std::move(ks), g.vars());
  };
  return go(go, f);
}

// Subformulas, each listed once, children before parents.
inline std::vector<Formula> subformulas(const Formula& f) {
  std::vector<Formula> out;
  std::unordered_map<std::uint32_t, bool> seen;
  auto go = [&](auto&& self, const Formula& g) -> void {
    if (seen.count(g.id())) return;
    seen[g.id()] = true;
    for (const auto& k : g.kids()) self(self, k);
    out.push_back(g);
  };
  go(go, f);
  return out;
}

inline std::string to_sexpr(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Var: return "(var " + t.var + ")";
    case Term::Kind::Ground: return "(const " + to_sexpr(t.ground) + ")";
    case Term::Kind::Name: return "(name " + to_sexpr(t.name) + ")";
  }
  return {};
}

inline std::string to_sexpr(const Formula& f) {
  auto terms = [&] {
    std::string s;
    for (const auto& t : f.terms()) s += ' ' + to_sexpr(t);
    return s;
  };
  auto kids = [&] {
    std::string s;
    for (const auto& k : f.kids()) s += ' ' + to_sexpr(k);
    return s;
  };
  auto vars = [&] {
    std::string s = "(";
    for (std::size_t i = 0; i < f.vars().size(); ++i) {
      if (i) s += ' ';
      s += f.vars()[i];
    }
    return s + ")";
  };
  switch (f.kind()) {
    case FKind::Eq: return "(=" + terms() + ")";
    case FKind::In: return "(in" + terms() + ")";
    case FKind::InClass: return "(in-class " + to_sexpr(f.terms()[0]) + " " + f.ident() + ")";
    case FKind::InG: return "(in-G" + terms() + ")";
    case FKind::Tr: return "(tr" + terms() + ")";
    case FKind::Not: return "(not" + kids() + ")";
    case FKind::And: return "(and" + kids() + ")";
    case FKind::Or: return "(or" + kids() + ")";
    case FKind::Forall: return "(forall " + vars() + kids() + ")";
    case FKind::Exists: return "(exists " + vars() + kids() + ")";
  }
  return {};
}

namespace detail {

inline bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '\'' && c != '.')
      return false;
  return true;
}

inline const std::string& ident_atom(const Sexp& e, const char* what) {
  if (!e.is_atom() || !valid_identifier(e.atom))
    throw ParseError(std::string("expected ") + what, e.pos);
  return e.atom;
}

inline void arity(const Sexp& e, std::size_t n) {
  if (e.items.size() != n + 1)
    throw ParseError("(" + e.head() + " ...) expects " + std::to_string(n) + " argument(s)", e.pos);
}

}  // namespace detail

inline Term term_from_sexp(const Sexp& e) {
  if (e.head_is("var")) {
    detail::arity(e, 1);
    return Term::variable(detail::ident_atom(e.items[1], "a variable identifier"));
  }
  if (e.head_is("const")) {
    detail::arity(e, 1);
    return Term::constant(hf_from_sexp(e.items[1]));
  }
  if (e.head_is("name")) {
    detail::arity(e, 1);
    return Term::of_name(name_from_sexp(e.items[1]));
  }
  throw ParseError("expected a term: (var x), (const <hf>) or (name <name>)", e.pos);
}

inline Formula formula_from_sexp(const Sexp& e) {
  if (!e.is_list || e.items.empty() || !e.items[0].is_atom())
    throw ParseError("expected a formula", e.pos);
  const std::string& h = e.head();
  auto kids = [&](std::size_t from) {
    std::vector<Formula> ks;
    for (std::size_t i = from; i < e.items.size(); ++i) ks.push_back(formula_from_sexp(e.items[i]));
    return ks;
  };
  if (h == "=") {
    detail::arity(e, 2);
    return f_eq(term_from_sexp(e.items[1]), term_from_sexp(e.items[2]));
  }
  if (h == "in") {
    detail::arity(e, 2);
    return f_in(term_from_sexp(e.items[1]), term_from_sexp(e.items[2]));
  }
  if (h == "in-class") {
    detail::arity(e, 2);
    return f_in_class(term_from_sexp(e.items[1]), detail::ident_atom(e.items[2], "a class identifier"));
  }
  if (h == "in-G") {
    detail::arity(e, 1);
    return f_in_g(term_from_sexp(e.items[1]));
  }
  if (h == "tr") {
    detail::arity(e, 3);
    return f_tr(term_from_sexp(e.items[1]), term_from_sexp(e.items[2]), term_from_sexp(e.items[3]));
  }
  if (h == "not") {
    detail::arity(e, 1);
    return f_not(formula_from_sexp(e.items[1]));
  }
  if (h == "and") return f_and(kids(1));
  if (h == "or") return f_or(kids(1));
  if (h == "forall" || h == "exists") {
    detail::arity(e, 2);
    const Sexp& vs = e.items[1];
    if (!vs.is_list) throw ParseError("expected a variable list", vs.pos);
    std::vector<std::string> names;
    for (const auto& v : vs.items) names.push_back(detail::ident_atom(v, "a variable identifier"));
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ParseError("variable bound twice in one block", vs.pos);
    Formula body = formula_from_sexp(e.items[2]);
    return h == "forall" ? f_forall(std::move(names), body) : f_exists(std::move(names), body);
  }
  throw ParseError("unknown formula head '" + h + "'", e.pos);
}

inline Formula parse_formula(std::string_view text) { return formula_from_sexp(read_sexp(text)); }

inline std::vector<Formula> parse_formulas(std::string_view text) {
  std::vector<Formula> out;
  for (const auto& e : read_sexps(text)) out.push_back(formula_from_sexp(e));
  return out;
}

}  // namespace forcelab
