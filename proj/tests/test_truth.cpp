#include <gtest/gtest.h>

#include "forcelab/collapse_truth.hpp"
#include "forcelab/corpus.hpp"
#include "forcelab/iterated.hpp"
#include "forcelab/suites.hpp"
#include "forcelab/truth.hpp"

using namespace forcelab;

namespace {

std::vector<Formula> no_tr_pool() {
  return subformula_closure(parse_formulas(
      "(in-class (var x) A)"
      "(exists (y) (and (in (var y) (var x)) (in-class (var y) A)))"
      "(forall (y) (or (not (in (var y) (var x))) (= (var y) (var z))))"
      "(not (= (var x) (var y)))"
      "(exists (x) (forall (y) (not (in (var y) (var x)))))"));
}

// Reference iterated truth: plain recursion on (stage, formula, valuation) over the domain.
bool iterated_oracle(const IteratedSetting& S, std::size_t beta, const Formula& f, Valuation v) {
  auto val = [&](const Term& t) { return t.is_var() ? v.at(t.var) : t.ground; };
  switch (f.kind()) {
    case FKind::Eq: return val(f.terms()[0]) == val(f.terms()[1]);
    case FKind::In: return val(f.terms()[1]).contains(val(f.terms()[0]));
    case FKind::InClass: return S.in_A(val(f.terms()[0]));
    case FKind::Tr: {
      auto s = nat_decode(val(f.terms()[0]));
      if (!s || *s >= beta) return false;
      auto pos = S.code_position(val(f.terms()[1]));
      if (!pos) return false;
      const Formula& g = S.pool()[*pos];
      HFSet z = val(f.terms()[2]);
      Valuation w;
      if (g.free_vars().empty()) {
        if (!z.empty()) return false;
      } else {
        const auto& dom = S.domain();
        if (!std::binary_search(dom.begin(), dom.end(), z)) return false;
        w[g.free_vars()[0]] = z;
      }
      return iterated_oracle(S, *s, g, w);
    }
    case FKind::Not: return !iterated_oracle(S, beta, f.kids()[0], v);
    case FKind::And:
      for (const auto& k : f.kids())
        if (!iterated_oracle(S, beta, k, v)) return false;
      return true;
    case FKind::Or:
      for (const auto& k : f.kids())
        if (iterated_oracle(S, beta, k, v)) return true;
      return false;
    case FKind::Forall:
    case FKind::Exists: {
      bool all = f.kind() == FKind::Forall;
      std::vector<std::string> rest(f.vars().begin() + 1, f.vars().end());
      Formula body = rest.empty() ? f.kids()[0] : (all ? f_forall(rest, f.kids()[0]) : f_exists(rest, f.kids()[0]));
      for (const auto& x : S.domain()) {
        Valuation w = v;
        w[f.vars()[0]] = x;
        if (iterated_oracle(S, beta, body, w) != all) return !all;
      }
      return all;
    }
    default: throw DomainError("oracle: unsupported formula");
  }
}

}  // namespace

TEST(Tarski, RecursionMatchesDirectEvaluation) {
  auto pool = first_order_pool();
  auto V = v_stage(3);
  for (const auto& A : {std::vector<HFSet>{}, std::vector<HFSet>{V[1], V[3]}}) {
    FiniteStructure M = ground_structure(3, A);
    TruthPredicate T = tarski_truth(M, pool);
    EXPECT_EQ(T, tarski_truth_direct(M, pool));
    EXPECT_FALSE(check_tarski_clauses(M, T));
    const PoolIndex& I = *T.index;
    for (std::size_t x = 0; x < I.size(); ++x) {
      auto [pos, digits] = I.decode(x);
      EXPECT_EQ(T.truth.test(x), eval_formula(M, pool[pos], I.valuation(pos, digits)));
    }
  }
}

TEST(Tarski, ClauseCheckCatchesFlippedEntry) {
  auto pool = first_order_pool();
  FiniteStructure M = ground_structure(2);
  TruthPredicate T = tarski_truth(M, pool);
  for (std::size_t x : {std::size_t{0}, T.index->size() / 2, T.index->size() - 1}) {
    TruthPredicate bad = T;
    bad.truth.set(x, !bad.truth.test(x));
    EXPECT_TRUE(check_tarski_clauses(M, bad));
  }
}

TEST(Tarski, PoolMustBeClosed) {
  FiniteStructure M = ground_structure(2);
  EXPECT_THROW(tarski_truth(M, {parse_formula("(not (in (var x) (var y)))")}), ClosureError);
}

TEST(Tarski, PoolIndexRoundTrip) {
  PoolIndex I(first_order_pool(), v_stage(2));
  for (std::size_t x = 0; x < I.size(); ++x) {
    auto [pos, digits] = I.decode(x);
    EXPECT_EQ(I.index(pos, digits), x);
    EXPECT_EQ(I.index_of(I.pool()[pos], I.valuation(pos, digits)), x);
  }
}

TEST(CollapseTruth, ForcingTruthIsTarskiTruth) {
  auto pool = no_tr_pool();
  auto V = v_stage(2);
  for (const auto& A : std::vector<std::vector<HFSet>>{{}, {V[0]}, {V[1]}, V}) {
    TruthPredicate F = forcing_truth(2, A, pool);
    TruthPredicate T = tarski_truth(ground_structure(2, A), pool);
    EXPECT_EQ(F.truth, T.truth);
    EXPECT_FALSE(invariance_check(2, A, pool));
  }
}

TEST(CollapseTruth, WrongParameterIsDetected) {
  auto pool = no_tr_pool();
  auto V = v_stage(2);
  TruthPredicate F = forcing_truth(2, {V[0]}, pool);
  TruthPredicate T = tarski_truth(ground_structure(2, {V[1]}), pool);
  EXPECT_NE(F.truth, T.truth);
}

TEST(CollapseTruth, CheckNamesOfNumeralsAreNotInvariant) {
  // Plugging a numeral check name in place of an n-dot name leaves the statement undecided.
  auto V = v_stage(2);
  CollapseForcing C(2, {V[0]});
  Formula inA = parse_formula("(in-class (var x) A)");
  const CondSet& by_numeral = C.relation().forcing_set(C.translate_with(inA, {{"x", check_name(nat_encode(0))}}));
  EXPECT_FALSE(by_numeral.none());
  EXPECT_FALSE(by_numeral.all());
  for (const auto& a : V) {
    const CondSet& by_param = C.forcing_set(inA, {{"x", a}});
    EXPECT_TRUE(by_param.none() || by_param.all());
    EXPECT_EQ(by_param.all(), a == V[0]);
  }
}

TEST(CollapseTruth, StageThreeIsOverBudget) {
  EXPECT_THROW(CollapseForcing(4, {}), ResourceError);
}

TEST(Iterated, RecursionMatchesOracle) {
  auto pool = detail::iterated_pool();
  auto V = v_stage(2);
  auto S = std::make_shared<const IteratedSetting>(2, std::vector<HFSet>{V[1]}, pool, 4);
  IteratedTruthPredicate T = iterated_truth(S);
  EXPECT_EQ(T, iterated_truth_direct(*S));
  EXPECT_FALSE(check_iterated_clauses(*S, T));
  const PoolIndex& I = *S->index();
  for (std::size_t beta = 0; beta < 4; ++beta)
    for (std::size_t x = 0; x < I.size(); x += 7) {
      auto [pos, digits] = I.decode(x);
      EXPECT_EQ(T.stages[beta].test(x), iterated_oracle(*S, beta, pool[pos], I.valuation(pos, digits)))
          << beta << " " << to_sexpr(pool[pos]);
    }
}

TEST(Iterated, StagesSeeOnlyEarlierStages) {
  auto pool = detail::iterated_pool();
  auto S = std::make_shared<const IteratedSetting>(2, std::vector<HFSet>{}, pool, 4);
  IteratedTruthPredicate T = iterated_truth(S);
  Formula top = parse_formula("(forall (x) (= (var x) (var x)))");
  Formula at_zero = f_tr(Term::constant(nat_encode(0)), Term::constant(formula_code(top)), Term::constant(HFSet()));
  Formula sees_top = f_exists({"s"}, f_tr(var("s"), Term::constant(formula_code(top)), Term::constant(HFSet())));
  for (std::size_t beta = 0; beta < 4; ++beta) {
    EXPECT_EQ(T.holds(beta, at_zero, {}), beta > 0);
    EXPECT_EQ(T.holds(beta, sees_top, {}), beta > 0);
    EXPECT_TRUE(T.holds(beta, top, {}));
  }
}

TEST(Iterated, TranslationAgrees) {
  auto pool = detail::iterated_pool();
  auto V = v_stage(2);
  auto S = std::make_shared<const IteratedSetting>(2, std::vector<HFSet>{V[0]}, pool, 3);
  EXPECT_EQ(iterated_translate_predicate(S, 3), iterated_truth(S));
}

TEST(Iterated, CorruptionIsDetected) {
  auto pool = detail::iterated_pool();
  auto S = std::make_shared<const IteratedSetting>(2, std::vector<HFSet>{}, pool, 3);
  IteratedTruthPredicate T = iterated_truth(S);
  T.stages[1].set(5, !T.stages[1].test(5));
  EXPECT_TRUE(check_iterated_clauses(*S, T));
}

TEST(Iterated, DecodeRejectsForeignCodes) {
  auto pool = detail::iterated_pool();
  IteratedSetting S(2, {}, pool, 3);
  HFSet foreign = formula_code(parse_formula("(in (var q) (var q))"));
  EXPECT_FALSE(S.address(nat_encode(0), foreign, HFSet()));
  EXPECT_THROW(S.decode(nat_encode(0), foreign, HFSet()), EncodingError);
  EXPECT_THROW(S.decode(hf_singleton(hf_singleton(HFSet())), foreign, HFSet()), EncodingError);
  EXPECT_THROW(IteratedSetting(2, {}, {parse_formula("(not (in (var x) (var y)))")}, 2), ClosureError);
}
