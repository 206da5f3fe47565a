#include <gtest/gtest.h>

#include "forcelab/coding.hpp"
#include "forcelab/corpus.hpp"
#include "forcelab/definability.hpp"
#include "forcelab/formula.hpp"
#include "forcelab/truth.hpp"

using namespace forcelab;

TEST(Formula, InterningAndRank) {
  Formula a = parse_formula("(in (var x) (var y))");
  Formula b = f_in(var("x"), var("y"));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rank(), 0U);
  EXPECT_EQ(f_not(a).rank(), 1U);
  EXPECT_EQ(f_and({}).rank(), 1U);
  EXPECT_EQ(f_forall({"x"}, f_not(a)).rank(), 2U);
}

TEST(Formula, FreeVariables) {
  Formula f = parse_formula("(exists (y) (and (in (var y) (var x)) (= (var z) (var y))))");
  EXPECT_EQ(f.free_vars(), (std::vector<std::string>{"x", "z"}));
  EXPECT_EQ(f.bound_vars(), (std::vector<std::string>{"y"}));
}

TEST(Formula, SubstitutionRespectsBinding) {
  Formula f = parse_formula("(and (in (var x) (var y)) (exists (x) (= (var x) (var y))))");
  Formula g = substitute(f, "y", Term::constant(HFSet()));
  EXPECT_EQ(g.free_vars(), (std::vector<std::string>{"x"}));
  EXPECT_THROW(substitute(f, "x", var("w")), DomainError);
}

TEST(Formula, SexprRoundTrip) {
  for (const auto& f : first_order_pool()) EXPECT_EQ(parse_formula(to_sexpr(f)), f);
}

TEST(Formula, ParseErrors) {
  EXPECT_THROW(parse_formula("(in (var x))"), ParseError);
  EXPECT_THROW(parse_formula("(forall (x x) (= (var x) (var x)))"), ParseError);
  EXPECT_THROW(parse_formula("(frob (var x))"), ParseError);
  EXPECT_THROW(parse_formula("(= (var 9x) (var y))"), ParseError);
}

TEST(Formula, SubformulaClosure) {
  auto pool = first_order_pool();
  EXPECT_TRUE(is_subformula_closed(pool));
  EXPECT_GE(pool.size(), 25U);
  std::vector<Formula> broken{f_not(f_eq(var("x"), var("y")))};
  EXPECT_FALSE(is_subformula_closed(broken));
}

TEST(Coding, FormulaCodesAreInjectiveAndRoundTrip) {
  auto pool = first_order_pool();
  pool.push_back(parse_formula("(tr (const (hf)) (var y) (name (name (pair (name) 0))))"));
  pool.push_back(parse_formula("(in-G (name (name (pair (name) 2))))"));
  for (const auto& f : pool) EXPECT_EQ(formula_decode(formula_code(f)), f);
  for (const auto& f : pool)
    for (const auto& g : pool) EXPECT_EQ(formula_code(f) == formula_code(g), f == g);
}

TEST(Coding, MalformedCodesAreRejected) {
  EXPECT_THROW(formula_decode(HFSet()), EncodingError);
  EXPECT_THROW(formula_decode(kpair(nat_encode(40), HFSet())), EncodingError);
  EXPECT_THROW(formula_decode(kpair(nat_encode(0), HFSet())), EncodingError);
}

TEST(Definability, ThetaDefinesEachSetOfTheThirdStage) {
  auto v = v_stage(3);
  FiniteStructure M(v);
  for (const auto& a : v)
    for (const auto& b : v) EXPECT_EQ(eval_formula(M, theta_formula(a), {{"x", b}}), a == b);
}

TEST(Definability, DisjunctionOfThetasIsMembership) {
  auto v = v_stage(3);
  FiniteStructure M(v);
  for (const auto& a : v) {
    std::vector<Formula> alts;
    for (const auto& u : a.children()) alts.push_back(theta_formula(u, var("z")));
    Formula f = f_or(alts);
    for (const auto& b : v) EXPECT_EQ(eval_formula(M, f, {{"z", b}}), a.contains(b));
  }
}

TEST(Definability, ThetaHasNoParameters) {
  Formula t = theta_formula(nat_encode(3));
  EXPECT_EQ(t.free_vars(), (std::vector<std::string>{"x"}));
  EXPECT_EQ(to_sexpr(t).find("const"), std::string::npos);
}
