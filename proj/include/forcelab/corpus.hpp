#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "formula.hpp"
#include "names.hpp"
#include "pname.hpp"
#include "poset.hpp"
#include "truth.hpp"

namespace forcelab {

struct CorpusNotion {
  std::string name;
  ForcingNotion notion;
  bool separative = true;
};

namespace detail {

// A separative partial order given by the atom sets of its elements (element 0 is the top), blown
// up by giving element i mult[i] equivalent copies.
inline ForcingNotion blow_up(const std::vector<std::string>& names, const std::vector<unsigned>& atoms,
                             const std::vector<std::size_t>& mult) {
  std::vector<std::string> labels;
  std::vector<std::size_t> base;
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t k = 0; k < mult[i]; ++k) {
      labels.push_back(k == 0 ? names[i] : names[i] + std::string(k, '\''));
      base.push_back(i);
    }
  std::vector<std::pair<std::size_t, std::size_t>> le;
  for (std::size_t p = 0; p < labels.size(); ++p)
    for (std::size_t q = 0; q < labels.size(); ++q)
      if ((atoms[base[p]] & ~atoms[base[q]]) == 0) le.emplace_back(p, q);
  return ForcingNotion::from_relation(std::move(labels), le);
}

inline std::string mult_suffix(const std::vector<std::size_t>& mult) {
  std::string s;
  bool plain = true;
  for (auto m : mult) plain = plain && m == 1;
  if (plain) return s;
  s = "[";
  for (std::size_t i = 0; i < mult.size(); ++i) s += (i ? "," : "") + std::to_string(mult[i]);
  return s + "]";
}

}  // namespace detail

// All separative preorders with at most five conditions, up to isomorphism: blow-ups of the five
// separative partial orders with a top and at most five elements.
inline std::vector<CorpusNotion> separative_corpus() {
  struct Shape {
    std::string name;
    std::vector<std::string> elems;
    std::vector<unsigned> atoms;
    std::vector<std::vector<std::size_t>> mults;
  };
  std::vector<Shape> shapes{
      {"trivial", {"1"}, {1}, {{1}, {2}, {3}, {4}, {5}}},
      {"fork", {"1", "a", "b"}, {3, 1, 2}, {{1, 1, 1}, {2, 1, 1}, {1, 2, 1}, {3, 1, 1}, {1, 3, 1}, {2, 2, 1}, {1, 2, 2}}},
      {"fork3", {"1", "a", "b", "c"}, {7, 1, 2, 4}, {{1, 1, 1, 1}, {2, 1, 1, 1}, {1, 2, 1, 1}}},
      {"fork3-pair", {"1", "ab", "a", "b", "c"}, {7, 3, 1, 2, 4}, {{1, 1, 1, 1, 1}}},
      {"fork4", {"1", "a", "b", "c", "d"}, {15, 1, 2, 4, 8}, {{1, 1, 1, 1, 1}}},
  };
  std::vector<CorpusNotion> out;
  for (const auto& s : shapes)
    for (const auto& m : s.mults) out.push_back({s.name + detail::mult_suffix(m), detail::blow_up(s.elems, s.atoms, m), true});
  return out;
}

// Small notions that are not separative, for the truth-lemma sweep only.
inline std::vector<CorpusNotion> nonseparative_extras() {
  return {
      {"chain", ForcingNotion::from_relation({"1", "a"}, {{1, 0}}), false},
      {"diamond", ForcingNotion::from_relation({"1", "a", "b", "c"}, {{1, 0}, {2, 0}, {3, 1}, {3, 2}}), false},
  };
}

// The rank <= 1 names together with the check names of the conditions.
inline NameUniverse corpus_universe(const ForcingNotion& P) {
  NameUniverse base = name_universe(P, 1);
  std::vector<PName> checks;
  for (std::size_t p = 0; p < P.size(); ++p) checks.push_back(condition_check(p));
  return merge_universes(base, checks);
}

inline Term nm(const PName& n) { return Term::of_name(n); }

inline PName pick_name(const NameUniverse& N, std::mt19937_64& rng) {
  return N.names[std::uniform_int_distribution<std::size_t>(0, N.size() - 1)(rng)];
}

// A random quantifier-free sentence over the universe's names and the generic filter.
inline Formula random_qf_sentence(const ForcingNotion& P, const NameUniverse& N, std::mt19937_64& rng, std::size_t depth) {
  std::uniform_int_distribution<int> d6(0, 5);
  if (depth == 0 || d6(rng) < 2) {
    switch (d6(rng) % 3) {
      case 0: return f_eq(nm(pick_name(N, rng)), nm(pick_name(N, rng)));
      case 1: return f_in(nm(pick_name(N, rng)), nm(pick_name(N, rng)));
      default: {
        std::bernoulli_distribution coin(0.5);
        if (coin(rng)) return f_in_g(nm(condition_check(std::uniform_int_distribution<std::size_t>(0, P.size() - 1)(rng))));
        return f_in_g(nm(pick_name(N, rng)));
      }
    }
  }
  switch (d6(rng) % 3) {
    case 0: return f_not(random_qf_sentence(P, N, rng, depth - 1));
    case 1:
    case 2: {
      std::size_t k = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
      std::vector<Formula> ks;
      for (std::size_t i = 0; i < k; ++i) ks.push_back(random_qf_sentence(P, N, rng, depth - 1));
      return d6(rng) % 2 ? f_and(std::move(ks)) : f_or(std::move(ks));
    }
  }
  return f_true();
}

// At least 40 sentences: atoms, generic-filter atoms, negations, conjunctions, disjunctions and
// quantified sentences over the universe.
inline std::vector<Formula> truth_lemma_pool(const ForcingNotion& P, const NameUniverse& N, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Formula> out;
  auto x = var("x"), y = var("y");
  for (std::size_t p = 0; p < P.size(); ++p) out.push_back(f_in_g(nm(condition_check(p))));
  for (int i = 0; i < 8; ++i) out.push_back(f_eq(nm(pick_name(N, rng)), nm(pick_name(N, rng))));
  for (int i = 0; i < 8; ++i) out.push_back(f_in(nm(pick_name(N, rng)), nm(pick_name(N, rng))));
  for (int i = 0; i < 3; ++i) out.push_back(f_in_g(nm(pick_name(N, rng))));
  for (int i = 0; i < 5; ++i) out.push_back(f_not(random_qf_sentence(P, N, rng, 1)));
  for (int i = 0; i < 5; ++i) out.push_back(f_and({random_qf_sentence(P, N, rng, 1), random_qf_sentence(P, N, rng, 1)}));
  for (int i = 0; i < 3; ++i) out.push_back(f_or({random_qf_sentence(P, N, rng, 1), random_qf_sentence(P, N, rng, 1)}));
  PName one = condition_check(kOne);
  out.push_back(f_exists({"x"}, f_and({f_in_g(x), f_not(f_eq(x, nm(one)))})));
  out.push_back(f_forall({"x"}, f_eq(x, x)));
  out.push_back(f_exists({"x"}, f_forall({"y"}, f_not(f_in(y, x)))));
  out.push_back(f_forall({"x", "y"}, f_implies(f_eq(x, y), f_eq(y, x))));
  out.push_back(f_forall({"x"}, f_implies(f_in_g(x), f_in_g(nm(one)))));
  for (int i = 0; i < 4; ++i) {
    PName s = pick_name(N, rng), t = pick_name(N, rng);
    out.push_back(f_forall({"x"}, f_implies(f_in(x, nm(s)), f_in(x, nm(t)))));
    out.push_back(f_exists({"x"}, f_and({f_in(x, nm(s)), f_in_g(x)})));
  }
  out.push_back(f_forall({"x"}, f_exists({"y"}, f_or({f_in(x, y), f_eq(x, y)}))));
  return out;
}

inline std::vector<HFSet> all_subsets(const std::vector<HFSet>& xs) {
  std::vector<HFSet> out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << xs.size()); ++m) {
    std::vector<HFSet> s;
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (m >> i & 1U) s.push_back(xs[i]);
    out.push_back(HFSet::make(std::move(s)));
  }
  return out;
}

// A subformula-closed first-order pool over (in, A).
inline std::vector<Formula> first_order_pool() {
  const char* text = R"(
    (in (var x) (var y))
    (= (var x) (var y))
    (in-class (var x) A)
    (not (in (var x) (var x)))
    (and (in (var x) (var y)) (in-class (var y) A))
    (or (in-class (var x) A) (= (var x) (var y)))
    (exists (y) (in (var y) (var x)))
    (forall (y) (or (not (in (var y) (var x))) (in-class (var y) A)))
    (exists (x) (forall (y) (not (in (var y) (var x)))))
    (forall (x) (exists (y) (or (in (var x) (var y)) (= (var x) (var y)))))
    (forall (x y) (or (not (= (var x) (var y))) (= (var y) (var x))))
    (exists (x) (and (in-class (var x) A) (exists (y) (in (var y) (var x)))))
    (forall (x) (or (not (in-class (var x) A)) (exists (y) (in (var x) (var y)))))
    (exists (z) (and (in (var x) (var z)) (in (var z) (var y))))
  )";
  return subformula_closure(parse_formulas(text));
}

// Atomic formulas and their negations, for the truth-telling game.
inline std::vector<Formula> atomic_negation_pool() {
  return subformula_closure(parse_formulas("(not (in (var x) (var y))) (not (= (var x) (var y)))"));
}

}  // namespace forcelab
