#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "collapse_truth.hpp"
#include "completion.hpp"
#include "corpus.hpp"
#include "errors.hpp"
#include "etr.hpp"
#include "extension.hpp"
#include "forcing.hpp"
#include "games.hpp"
#include "iterated.hpp"
#include "names.hpp"
#include "poset.hpp"
#include "star.hpp"
#include "truth.hpp"

namespace forcelab {

enum class Status : std::uint8_t { Pass, Fail, SkippedBudget };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::SkippedBudget: return "skipped-budget";
  }
  return "fail";
}

struct ReportRow {
  std::string claim_id;
  std::string anchor;
  Status status = Status::Pass;
  std::size_t checks = 0;
  std::optional<std::string> counterexample;
  double runtime_ms = 0;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  std::size_t star_sentences = 200;
  std::size_t random_trees = 1000;
  std::size_t max_tree_nodes = 200;
  std::size_t max_clock = 3;
  std::size_t iterated_stages = 5;
  bool collapse_stage3 = true;
};

namespace detail {

class RowBuilder {
 public:
  RowBuilder(std::string id, std::string anchor) : start_(std::chrono::steady_clock::now()) {
    row_.claim_id = std::move(id);
    row_.anchor = std::move(anchor);
  }
  void check(bool ok, const std::function<std::string()>& what) {
    ++row_.checks;
    if (!ok && row_.status != Status::Fail) {
      row_.status = Status::Fail;
      row_.counterexample = what();
    }
  }
  void add_checks(std::size_t n) { row_.checks += n; }
  void skip(const std::string& why) {
    if (row_.status == Status::Pass) {
      row_.status = Status::SkippedBudget;
      row_.counterexample = why;
    }
  }
  bool failed() const { return row_.status == Status::Fail; }
  ReportRow done() {
    row_.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    return row_;
  }

 private:
  ReportRow row_;
  std::chrono::steady_clock::time_point start_;
};

template <class F>
ReportRow run_row(const std::string& id, const std::string& anchor, F&& body) {
  RowBuilder b(id, anchor);
  try {
    body(b);
  } catch (const ResourceError& e) {
    b.skip(e.what());
  } catch (const std::exception& e) {
    b.check(false, [&] { return std::string("exception: ") + e.what(); });
  }
  return b.done();
}

inline std::vector<CorpusNotion> truth_lemma_notions() {
  auto out = separative_corpus();
  for (auto& n : nonseparative_extras()) out.push_back(std::move(n));
  return out;
}

}  // namespace detail

inline ReportRow suite_truth_lemma(const SuiteOptions& opt = {}) {
  return detail::run_row("truth-lemma", "truth-lemma", [&](detail::RowBuilder& b) {
    for (const auto& cn : detail::truth_lemma_notions()) {
      auto P = std::make_shared<const ForcingNotion>(cn.notion);
      ForcingRelation R = atomic_forcing(P, corpus_universe(*P));
      auto pool = truth_lemma_pool(*P, R.universe(), opt.seed);
      std::vector<GenericExtension> exts;
      for (const auto& G : generic_filters(*P)) {
        exts.emplace_back(R, G.members);
        auto iso = exts.back().check_isomorphism();
        b.check(!iso, [&] { return cn.name + ": " + *iso; });
      }
      for (const auto& f : pool) {
        auto r = truth_lemma_check(R, {f}, &exts);
        b.check(!r, [&] {
          return cn.name + ", filter generated by " + P->label(r->generator) + ": " + to_sexpr(r->formula) +
                 (r->forced ? " is forced but false" : " holds but is not forced");
        });
        auto n = truth_lemma_check(R, {f_not(f)}, &exts);
        b.check(!n, [&] { return cn.name + ": negation of " + to_sexpr(f); });
      }
      b.check(pool.size() >= 40, [&] { return cn.name + ": pool has fewer than 40 sentences"; });
    }
  });
}

inline ReportRow suite_star_translation(const SuiteOptions& opt = {}) {
  return detail::run_row("star-translation", "star-translation-soundness", [&](detail::RowBuilder& b) {
    std::mt19937_64 rng(opt.seed);
    for (const auto& cn : separative_corpus()) {
      auto P = std::make_shared<const ForcingNotion>(cn.notion);
      ForcingRelation R = atomic_forcing(P, corpus_universe(*P));
      for (std::size_t i = 0; i < opt.star_sentences; ++i) {
        Formula f = random_qf_sentence(*P, R.universe(), rng, 3);
        StarTranslation t = star_translate(f, *P);
        const CondSet& lhs = R.forcing_set(f);
        const CondSet& rhs = R.eq(t.a, t.b);
        b.check(lhs == rhs, [&] { return cn.name + ": " + to_sexpr(f); });
      }
    }
  });
}

inline ReportRow suite_boolean_completion(const SuiteOptions& = {}) {
  return detail::run_row("boolean-completion", "boolean-completion", [&](detail::RowBuilder& b) {
    for (const auto& cn : separative_corpus()) {
      auto P = std::make_shared<const ForcingNotion>(cn.notion);
      RegularOpenAlgebra B = boolean_completion(*P);
      auto els = B.elements();
      auto ba = check_boolean_algebra(B, els);
      b.check(!ba, [&] { return cn.name + ": " + *ba; });
      auto em = check_embedding(B, els);
      b.check(!em, [&] { return cn.name + ": " + *em; });
      ForcingRelation R = atomic_forcing(P, corpus_universe(*P));
      BooleanValues V = boolean_values(B);
      auto cv = check_values_against_forcing(B, V, R);
      b.check(!cv, [&] { return cn.name + ": " + *cv; });
      auto lb = lindenbaum_check(B, R, generic_membership_sentences(*P));
      b.check(lb.all_regular, [&] { return cn.name + ": a forcing set of a sentence is not regular open"; });
    }
  });
}

inline ReportRow suite_forcing_truth(const SuiteOptions& opt = {}) {
  return detail::run_row("forcing-truth", "forcing-derived-truth", [&](detail::RowBuilder& b) {
    auto pool = first_order_pool();
    b.check(pool.size() >= 25, [] { return std::string("first-order pool has fewer than 25 formulas"); });
    std::vector<std::size_t> stages{2};
    if (opt.collapse_stage3) stages.push_back(3);
    for (std::size_t n : stages) {
      auto V = v_stage(n);
      for (const auto& A : all_subsets(V)) {
        std::vector<HFSet> Av(A.children().begin(), A.children().end());
        CollapseForcing C(n, Av);
        FiniteStructure M = ground_structure(n, Av);
        TruthPredicate ft = forcing_truth(C, pool);
        TruthPredicate tt = tarski_truth(M, pool);
        b.check(ft == tt, [&] {
          CondSet d = ft.truth;
          for (std::size_t x = 0; x < d.universe(); ++x)
            if (ft.truth.test(x) != tt.truth.test(x)) {
              auto [pos, digits] = tt.index->decode(x);
              return "n=" + std::to_string(n) + ", A=" + to_sexpr(A) + ": " + to_sexpr(pool[pos]);
            }
          return std::string("mismatch");
        });
        auto inv = invariance_check(C, pool);
        b.check(!inv, [&] {
          return "n=" + std::to_string(n) + ", A=" + to_sexpr(A) + ": condition " + C.notion().label(inv->condition) +
                 " disagrees with the top on " + to_sexpr(inv->formula);
        });
      }
    }
  });
}

inline ReportRow suite_truth_name(const SuiteOptions& opt = {}) {
  return detail::run_row("truth-name", "truth-predicate-name", [&](detail::RowBuilder& b) {
    auto pool = subformula_closure(parse_formulas(R"(
      (= (var x) (var y))
      (not (in (var x) (var y)))
      (and (in (var x) (var y)) (in-G (var x)))
      (or (= (var x) (var y)) (in-G (var y)))
      (exists (y) (in (var y) (var x)))
      (forall (x) (exists (y) (or (= (var x) (var y)) (in (var x) (var y)))))
    )"));
    std::mt19937_64 rng(opt.seed);
    for (const auto& cn : separative_corpus()) {
      auto P = std::make_shared<const ForcingNotion>(cn.notion);
      NameUniverse full = name_universe(*P, 1);
      std::vector<PName> seeds{PName()};
      for (std::size_t p = 0; p < P->size() && seeds.size() < 4; ++p) seeds.push_back(condition_check(p));
      while (seeds.size() < 8) seeds.push_back(pick_name(full, rng));
      ForcingRelation R = atomic_forcing(P, seeded_universe(seeds));
      TruthName T(R, pool);
      auto rep = check_truth_name(R, T);
      b.add_checks(rep.checks);
      b.check(rep.ok, [&] { return cn.name + ": " + rep.failure; });
    }
  });
}

namespace detail {

inline std::vector<Formula> iterated_pool() {
  Formula top = parse_formula("(forall (x) (= (var x) (var x)))");
  Formula inA = parse_formula("(in-class (var x) A)");
  Formula nonempty = parse_formula("(exists (y) (in (var y) (var x)))");
  auto code = [](const Formula& f) { return Term::constant(formula_code(f)); };
  Term empty = Term::constant(HFSet());
  Formula tr_inA = f_tr(var("s"), code(inA), var("z"));
  Formula sees_top = f_exists({"s"}, f_tr(var("s"), code(top), empty));
  Formula all_A = f_forall({"z"}, f_implies(f_in_class(var("z"), "A"), tr_inA));
  Formula sees_sees = f_exists({"u"}, f_tr(var("u"), code(sees_top), empty));
  Formula some_nonempty = f_exists({"s", "w"}, f_tr(var("s"), code(nonempty), var("w")));
  Formula at_one = f_tr(Term::constant(nat_encode(1)), code(all_A), var("v"));
  Formula at_two = f_tr(Term::constant(nat_encode(2)), code(sees_top), empty);
  Formula at_zero = f_tr(Term::constant(nat_encode(0)), code(top), empty);
  return subformula_closure({top, inA, nonempty, tr_inA, sees_top, all_A, sees_sees, some_nonempty, at_one, at_two,
                             at_zero, f_not(sees_sees), f_and({sees_top, f_not(at_two)})});
}

}  // namespace detail

inline ReportRow suite_iterated_truth(const SuiteOptions& opt = {}) {
  return detail::run_row("iterated-truth", "iterated-truth", [&](detail::RowBuilder& b) {
    auto pool = detail::iterated_pool();
    auto V = v_stage(3);
    for (const auto& A : {std::vector<HFSet>{}, std::vector<HFSet>{V[0], V[2]}, V}) {
      auto S = std::make_shared<const IteratedSetting>(3, A, pool, opt.iterated_stages);
      IteratedTruthPredicate T = iterated_truth(S);
      auto v = check_iterated_clauses(*S, T);
      b.check(!v, [&] {
        return "stage " + std::to_string(v->stage) + ", " + v->clause + " clause fails at " + to_sexpr(v->formula);
      });
      IteratedTruthPredicate D = iterated_translate_predicate(S, opt.iterated_stages);
      b.check(D == T, [&] {
        const PoolIndex& I = *S->index();
        for (std::size_t beta = 0; beta < T.stages.size(); ++beta)
          for (std::size_t x = 0; x < I.size(); ++x)
            if (T.stages[beta].test(x) != D.stages[beta].test(x))
              return "stage " + std::to_string(beta) + ": translation disagrees at " + to_sexpr(I.pool()[I.decode(x).first]);
        return std::string("mismatch");
      });
    }
  });
}

inline ReportRow suite_etr(const SuiteOptions& opt = {}) {
  return detail::run_row("etr-engine", "etr-solutions", [&](detail::RowBuilder& b) {
    auto verify = [&](const auto& inst, const std::string& what) {
      EtrSolution s = etr_solve(inst);
      auto bad = verify_solution(inst, s);
      b.check(!bad, [&] { return what + ": solution fails at stage " + std::to_string(bad->first); });
      return s;
    };
    // Cumulative hierarchy: x enters when all its members are already in.
    {
      auto inst = formula_recursion(v_stage(4), {}, parse_formula("(forall (y) (or (not (in (var y) (var x))) (in-class (var y) S)))"), 4);
      EtrSolution s = verify(inst, "cumulative hierarchy");
      CondSet seen(inst.domain.size());
      for (std::size_t a = 0; a < 4; ++a) {
        seen |= s.slices[a];
        b.check(seen.count() == v_stage(a + 1).size(), [&] { return "cumulative hierarchy stage " + std::to_string(a); });
      }
    }
    {
      auto V = v_stage(3);
      auto inst = formula_recursion(V, {V[1]}, parse_formula("(in-class (var x) A)"), 3);
      verify(inst, "constant A");
    }
    {
      FiniteStructure M = ground_structure(2, {HFSet()});
      auto pool = first_order_pool();
      auto I = std::make_shared<const PoolIndex>(pool, M.domain());
      verify(tarski_instance(M, I), "tarski truth");
      b.check(tarski_truth(M, pool) == tarski_truth_direct(M, pool), [] { return std::string("tarski truth: ETR differs from direct evaluation"); });
    }
    for (const auto& cn : separative_corpus()) {
      auto P = std::make_shared<const ForcingNotion>(cn.notion);
      NameUniverse N = corpus_universe(*P);
      auto A = atomic_forcing_instance(*P, N);
      EtrSolution s = verify(A->instance, cn.name + " atomic forcing");
      ForcingRelation R = atomic_forcing(P, N);
      bool same = true;
      for (std::size_t i = 0; i < A->pairs.size() && same; ++i)
        for (AtomKind k : {AtomKind::In, AtomKind::Eq, AtomKind::Sub}) {
          const CondSet& direct = R.atom(k, A->pairs[i].first, A->pairs[i].second);
          for (std::size_t p = 0; p < P->size(); ++p)
            if (s.slices[A->pair_stage[i]].test(A->index(i, k, p)) != direct.test(p)) same = false;
        }
      b.check(same, [&] { return cn.name + ": atomic forcing via ETR differs from the direct table"; });
    }
    {
      auto V = v_stage(3);
      auto S = std::make_shared<const IteratedSetting>(3, std::vector<HFSet>{V[1]}, detail::iterated_pool(), opt.iterated_stages);
      auto inst = iterated_instance(S);
      EtrSolution s = etr_solve(inst, 1e8);
      auto bad = verify_solution(inst, s);
      b.check(!bad, [&] { return std::string("iterated truth instance fails verification"); });
      b.check(iterated_truth_etr(S) == iterated_truth_direct(*S), [] { return std::string("iterated truth: ETR differs from direct computation"); });
    }
    {
      std::mt19937_64 rng(opt.seed);
      for (int i = 0; i < 20; ++i) {
        GameTree T = random_game_tree(rng, 100);
        auto rank = continuous_rank(T);
        verify(zermelo_instance(T, rank), "zermelo");
      }
    }
  });
}

inline ReportRow suite_games(const SuiteOptions& opt = {}) {
  return detail::run_row("clopen-determinacy", "clopen-determinacy", [&](detail::RowBuilder& b) {
    std::mt19937_64 rng(opt.seed);
    for (std::size_t i = 0; i < opt.random_trees; ++i) {
      GameTree T = random_game_tree(rng, opt.max_tree_nodes);
      ZermeloSolution z = zermelo_solve(T);
      auto bad = check_labels(T, z.labels);
      b.check(!bad, [&] { return "tree " + std::to_string(i) + ": label at node " + std::to_string(*bad) + " is not a fixpoint"; });
      Player w = z.root_winner();
      auto v = verify_strategy(T, w == Player::I ? z.strategy_I : z.strategy_II, w);
      b.check(v.ok, [&] { return "tree " + std::to_string(i) + ": the winner's strategy loses"; });
      auto l = verify_strategy(T, w == Player::I ? z.strategy_II : z.strategy_I, opponent(w));
      b.check(!l.ok, [&] { return "tree " + std::to_string(i) + ": the loser's strategy wins"; });
    }
    FiniteStructure M = ground_structure(2);
    auto pool = atomic_negation_pool();
    TruthPredicate truth = tarski_truth(M, pool);
    for (std::size_t clock = 1; clock <= opt.max_clock; ++clock) {
      TruthGame g = truth_telling_game(M, pool, clock);
      ZermeloSolution z = zermelo_solve(g.tree);
      b.check(z.root_winner() == Player::II, [&] { return "clock " + std::to_string(clock) + ": the interrogator wins"; });
      auto v = verify_strategy(g.tree, z.strategy_II, Player::II);
      b.check(v.ok, [&] { return "clock " + std::to_string(clock) + ": the truth-teller's strategy loses"; });
      auto ex = extract_verdicts(g, z.strategy_II);
      b.check(ex.play_independent, [&] { return "clock " + std::to_string(clock) + ": verdicts depend on the play"; });
      for (const auto& [entry, verdict] : ex.verdicts)
        b.check(verdict == truth.truth.test(entry), [&, entry = entry] {
          return "clock " + std::to_string(clock) + ": extracted verdict differs from truth at " +
                 to_sexpr(pool[g.index->decode(entry).first]);
        });
    }
  });
}

inline ReportRow suite_forcing_laws(const SuiteOptions& opt = {}) {
  return detail::run_row("forcing-laws", "forcing-relation-laws", [&](detail::RowBuilder& b) {
    for (const auto& cn : separative_corpus()) {
      auto P = std::make_shared<const ForcingNotion>(cn.notion);
      ForcingRelation R = atomic_forcing(P, corpus_universe(*P));
      AuditOptions ao;
      ao.pool = truth_lemma_pool(*P, R.universe(), opt.seed);
      ao.seed = opt.seed;
      AuditReport rep = audit_forcing_relation(R, ao);
      b.add_checks(rep.checks);
      b.check(rep.ok, [&] { return cn.name + ": " + rep.failures.front(); });
    }
    for (const auto& A : all_subsets(v_stage(2))) {
      CollapseForcing C(2, std::vector<HFSet>(A.children().begin(), A.children().end()));
      C.relation().materialize();
      AuditReport rep = audit_forcing_relation(C.relation());
      b.add_checks(rep.checks);
      b.check(rep.ok, [&] { return "collapse n=2, A=" + to_sexpr(A) + ": " + rep.failures.front(); });
    }
  });
}

struct Criterion {
  int number;
  std::string title;
  std::function<ReportRow(const SuiteOptions&)> run;
};

inline std::vector<Criterion> acceptance_criteria() {
  return {
      {1, "truth lemma over every generic filter", suite_truth_lemma},
      {2, "star translation soundness", suite_star_translation},
      {3, "Boolean completion coherence", suite_boolean_completion},
      {4, "forcing-derived truth and invariance", suite_forcing_truth},
      {5, "truth-predicate name", suite_truth_name},
      {6, "iterated truth", suite_iterated_truth},
      {7, "ETR engine", suite_etr},
      {8, "clopen determinacy", suite_games},
      {9, "forcing-relation laws", suite_forcing_laws},
  };
}

}  // namespace forcelab
