#include <gtest/gtest.h>

#include <random>

#include "forcelab/completion.hpp"
#include "forcelab/corpus.hpp"
#include "forcelab/extension.hpp"
#include "forcelab/forcing.hpp"
#include "forcelab/star.hpp"

using namespace forcelab;

namespace {

// Semantic oracle: evaluate a sentence directly in the generic extension given by G, with
// quantifiers over the values of the universe's names.
bool holds_in(const NameUniverse& N, const CondSet& G, const Formula& f) {
  auto val = [&](const Term& t) { return eval_name(t.name, G); };
  switch (f.kind()) {
    case FKind::Eq: return val(f.terms()[0]) == val(f.terms()[1]);
    case FKind::In: return val(f.terms()[1]).contains(val(f.terms()[0]));
    case FKind::InG:
    case FKind::InClass: {
      auto k = nat_decode(val(f.terms()[0]));
      return k && *k < G.universe() && G.test(*k);
    }
    case FKind::Not: return !holds_in(N, G, f.kids()[0]);
    case FKind::And:
      for (const auto& k : f.kids())
        if (!holds_in(N, G, k)) return false;
      return true;
    case FKind::Or:
      for (const auto& k : f.kids())
        if (holds_in(N, G, k)) return true;
      return false;
    case FKind::Forall:
    case FKind::Exists: {
      bool all = f.kind() == FKind::Forall;
      const auto& v = f.vars()[0];
      Formula body = f.vars().size() == 1 ? f.kids()[0]
                                          : (all ? f_forall({f.vars().begin() + 1, f.vars().end()}, f.kids()[0])
                                                 : f_exists({f.vars().begin() + 1, f.vars().end()}, f.kids()[0]));
      for (const auto& n : N.names)
        if (holds_in(N, G, substitute(body, v, Term::of_name(n))) != all) return !all;
      return all;
    }
    default: throw DomainError("oracle: unsupported formula");
  }
}

// p forces f iff f holds in every generic extension whose filter contains p.
CondSet semantic_forcing(const ForcingNotion& P, const NameUniverse& N, const Formula& f) {
  CondSet out = P.all();
  for (const auto& G : generic_filters(P))
    if (!holds_in(N, G.members, f))
      G.members.for_each([&](std::size_t p) { out.set(p, false); });
  return out;
}

ForcingRelation relation_for(const ForcingNotion& P) {
  auto ptr = std::make_shared<const ForcingNotion>(P);
  return atomic_forcing(ptr, corpus_universe(P));
}

}  // namespace

TEST(Forcing, AtomicTableMatchesSemantics) {
  for (const auto& c : separative_corpus()) {
    if (c.notion.size() > 4) continue;
    auto R = relation_for(c.notion);
    const auto& N = R.universe();
    for (const auto& s : N.names)
      for (const auto& t : N.names) {
        EXPECT_EQ(R.eq(s, t), semantic_forcing(c.notion, N, f_eq(nm(s), nm(t)))) << c.name;
        EXPECT_EQ(R.in(s, t), semantic_forcing(c.notion, N, f_in(nm(s), nm(t)))) << c.name;
      }
  }
}

TEST(Forcing, RandomSentencesMatchSemantics) {
  std::mt19937_64 rng(11);
  auto notions = separative_corpus();
  for (const auto& e : nonseparative_extras()) notions.push_back(e);
  for (const auto& c : notions) {
    auto R = relation_for(c.notion);
    for (int i = 0; i < 40; ++i) {
      Formula f = random_qf_sentence(c.notion, R.universe(), rng, 3);
      EXPECT_EQ(R.forcing_set(f), semantic_forcing(c.notion, R.universe(), f)) << c.name << " " << to_sexpr(f);
    }
  }
}

TEST(Forcing, QuantifiedSentencesMatchSemantics) {
  auto P = parse_poset("(poset (elems 1 a b) (one 1) (le (a 1) (b 1)))");
  auto R = relation_for(P);
  PName c0 = condition_check(1);
  std::vector<Formula> fs{
      parse_formula("(exists (x) (in-G (var x)))"),
      parse_formula("(forall (x) (exists (y) (= (var x) (var y))))"),
      parse_formula("(exists (x) (and (in-G (var x)) (not (= (var x) (name (name))))))"),
      parse_formula("(forall (x y) (or (not (in (var x) (var y))) (not (= (var x) (var y)))))"),
      f_exists({"x"}, f_and({f_in_g(var("x")), f_eq(var("x"), nm(c0))})),
  };
  for (const auto& f : fs) EXPECT_EQ(R.forcing_set(f), semantic_forcing(P, R.universe(), f)) << to_sexpr(f);
}

TEST(Forcing, AuditAcceptsTableAndCatchesCorruption) {
  for (const auto& c : separative_corpus()) {
    if (c.notion.size() > 3) continue;
    auto R = relation_for(c.notion);
    EXPECT_TRUE(audit_forcing_relation(R).ok) << c.name;
    const auto& N = R.universe();
    PName s = N.names[1], t = N.names[N.size() - 1];
    bool cur = R.eq(s, t).test(0);
    R.override_entry(AtomKind::Eq, s, t, 0, !cur);
    EXPECT_FALSE(audit_forcing_relation(R).ok) << c.name;
  }
}

TEST(Forcing, RejectsUnclosedUniverse) {
  auto P = std::make_shared<const ForcingNotion>(parse_poset("(poset (elems 1 a) (one 1) (le (a 1)))"));
  PName inner = parse_name("(name (pair (name) 0))");
  NameUniverse N(std::vector<PName>{PName::make({{inner, 1}})});
  EXPECT_THROW(atomic_forcing(P, N), ClosureError);
}

TEST(Forcing, EtrInstanceAgreesWithTable) {
  for (const auto& c : separative_corpus()) {
    if (c.notion.size() > 3) continue;
    auto R = relation_for(c.notion);
    auto inst = atomic_forcing_instance(c.notion, R.universe());
    auto sol = etr_solve(inst->instance);
    EXPECT_FALSE(verify_solution(inst->instance, sol));
    for (std::size_t i = 0; i < inst->pairs.size(); ++i) {
      auto [s, t] = inst->pairs[i];
      std::size_t a = inst->pair_stage[i];
      for (std::size_t p = 0; p < c.notion.size(); ++p) {
        EXPECT_EQ(sol.contains(a, inst->index(i, AtomKind::In, p)), R.in(s, t).test(p));
        EXPECT_EQ(sol.contains(a, inst->index(i, AtomKind::Eq, p)), R.eq(s, t).test(p));
      }
    }
  }
}

TEST(StarTranslation, PreservesForcing) {
  std::mt19937_64 rng(5);
  for (const auto& c : separative_corpus()) {
    if (c.notion.size() > 4) continue;
    const auto& P = c.notion;
    NameUniverse base = corpus_universe(P);
    for (int i = 0; i < 15; ++i) {
      Formula f = random_qf_sentence(P, base, rng, 3);
      auto st = star_translate(f, P);
      auto N = merge_universes(base, {st.a, st.b});
      auto R = atomic_forcing(std::make_shared<const ForcingNotion>(P), N);
      EXPECT_EQ(R.eq(st.a, st.b), R.forcing_set(f)) << c.name << " " << to_sexpr(f);
      for (const auto& G : generic_filters(P))
        EXPECT_EQ(eval_name(st.a, G.members) == eval_name(st.b, G.members), holds_in(N, G.members, f));
    }
  }
}

TEST(Completion, RegularOpenAlgebraLaws) {
  for (const auto& c : separative_corpus()) {
    if (c.notion.size() > 5) continue;
    auto B = boolean_completion(c.notion);
    auto els = B.elements();
    EXPECT_FALSE(check_boolean_algebra(B, els)) << c.name;
    EXPECT_FALSE(check_embedding(B, els)) << c.name;
  }
  EXPECT_THROW(boolean_completion(nonseparative_extras()[0].notion), DomainError);
}

TEST(Completion, BooleanValuesMatchForcing) {
  for (const auto& c : separative_corpus()) {
    if (c.notion.size() > 4) continue;
    auto R = relation_for(c.notion);
    auto B = boolean_completion(c.notion);
    auto V = boolean_values(B);
    EXPECT_FALSE(check_values_against_forcing(B, V, R)) << c.name;
  }
}

TEST(Completion, GenericMembershipSentencesCoverTheAlgebra) {
  auto P = parse_poset("(poset (elems 1 a b) (one 1) (le (a 1) (b 1)))");
  auto R = relation_for(P);
  auto B = boolean_completion(P);
  auto rep = lindenbaum_check(B, R, generic_membership_sentences(P));
  EXPECT_TRUE(rep.all_regular);
  EXPECT_TRUE(rep.surjective);
  EXPECT_EQ(rep.algebra_size, 4U);
}

TEST(TruthLemma, HoldsAcrossCorpus) {
  auto notions = separative_corpus();
  for (const auto& e : nonseparative_extras()) notions.push_back(e);
  for (const auto& c : notions) {
    auto R = relation_for(c.notion);
    auto pool = truth_lemma_pool(c.notion, R.universe(), 3);
    auto fail = truth_lemma_check(R, pool);
    EXPECT_FALSE(fail) << c.name << " " << (fail ? to_sexpr(fail->formula) : "");
  }
}

TEST(TruthLemma, DetectsCorruptedRelation) {
  auto P = parse_poset("(poset (elems 1 a b) (one 1) (le (a 1) (b 1)))");
  auto clean = relation_for(P);
  std::vector<GenericExtension> exts;
  for (const auto& G : generic_filters(P)) exts.emplace_back(clean, G.members);
  auto bad = relation_for(P);
  PName x = condition_check(1);
  Formula f = f_in_g(nm(x));
  EXPECT_FALSE(truth_lemma_check(bad, {f}, &exts));
  for (std::size_t p = 0; p < P.size(); ++p) bad.override_entry(AtomKind::Eq, x, x, p, false);
  EXPECT_TRUE(truth_lemma_check(bad, {f_eq(nm(x), nm(x))}, &exts));
}

TEST(Extensions, QuotientAgreesWithDirectEvaluation) {
  for (const auto& c : separative_corpus()) {
    if (c.notion.size() > 4) continue;
    auto R = relation_for(c.notion);
    for (const auto& G : generic_filters(c.notion)) {
      auto M = extension(R, G);
      EXPECT_FALSE(M.check_isomorphism()) << c.name;
    }
  }
}
