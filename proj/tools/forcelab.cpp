#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "forcelab/suites.hpp"

using namespace forcelab;
using json = nlohmann::ordered_json;

namespace {

struct Config {
  std::string poset, names, formula, condition, A, pool, game, out;
  std::size_t stage = 2, clock = 2, stages = 5, max_poset = 5, max_name_rank = 1;
  std::uint64_t seed = 1;
  std::size_t budget_names = kDefaultNameBudget, budget_conditions = 20000, budget_nodes = 2'000'000,
              budget_steps = kDefaultEtrBudget;
  bool timings = false;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Inline s-expression text, or the contents of the named file.
std::string text_or_file(const std::string& v) {
  std::ifstream probe(v);
  return probe ? slurp(v) : v;
}

template <class F>
auto parsing(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw Error("parse error in " + what + ": " + e.what());
  }
}

std::shared_ptr<const ForcingNotion> load_poset(const Config& c) {
  if (c.poset.empty()) throw Error("--poset is required");
  return std::make_shared<const ForcingNotion>(parsing(c.poset, [&] { return parse_poset(slurp(c.poset)); }));
}

NameUniverse load_universe(const Config& c, const ForcingNotion& P) {
  if (c.names.empty()) {
    NameUniverse base = name_universe(P, c.max_name_rank, c.budget_names);
    std::vector<PName> checks;
    for (std::size_t p = 0; p < P.size(); ++p) checks.push_back(condition_check(p));
    return merge_universes(base, checks);
  }
  std::vector<PName> seeds;
  parsing(c.names, [&] {
    for (const auto& e : read_sexps(slurp(c.names))) seeds.push_back(name_from_sexp(e));
    return 0;
  });
  return seeded_universe(seeds, c.budget_names);
}

std::vector<Formula> load_pool(const Config& c) {
  if (c.pool.empty()) throw Error("--pool is required");
  return subformula_closure(parsing(c.pool, [&] { return parse_formulas(slurp(c.pool)); }));
}

std::vector<HFSet> load_A(const Config& c) {
  if (c.A.empty()) return {};
  HFSet a = parsing("--A", [&] { return parse_hf(text_or_file(c.A)); });
  return {a.children().begin(), a.children().end()};
}

std::vector<ReportRow> run_force(const Config& c, json& extra) {
  auto P = load_poset(c);
  ForcingRelation R = atomic_forcing(P, load_universe(c, *P));
  std::vector<ReportRow> rows;
  rows.push_back(detail::run_row("forcing-audit", "forcing-relation-laws", [&](detail::RowBuilder& b) {
    AuditReport rep = audit_forcing_relation(R, {{}, 50000, c.seed});
    b.add_checks(rep.checks);
    b.check(rep.ok, [&] { return rep.failures.front(); });
  }));
  extra["conditions"] = P->size();
  extra["names"] = R.universe().size();
  if (!c.formula.empty()) {
    Formula f = parsing("--formula", [&] { return parse_formula(text_or_file(c.formula)); });
    const CondSet& s = R.forcing_set(f);
    json forced = json::array();
    s.for_each([&](std::size_t p) { forced.push_back(P->label(p)); });
    extra["formula"] = to_sexpr(f);
    extra["forced_by"] = forced;
    if (!c.condition.empty()) {
      auto p = P->index_of(c.condition);
      if (!p) throw Error("unknown condition '" + c.condition + "'");
      extra["condition"] = c.condition;
      extra["forces"] = s.test(*p);
    }
    if (f.free_vars().empty())
      rows.push_back(detail::run_row("truth-lemma", "truth-lemma", [&](detail::RowBuilder& b) {
        auto r = truth_lemma_check(R, f);
        b.check(!r, [&] { return "filter generated by " + P->label(r->generator); });
      }));
  }
  return rows;
}

std::vector<ReportRow> run_translate(const Config& c, json& extra) {
  auto P = load_poset(c);
  if (c.formula.empty()) throw Error("--formula is required");
  Formula f = parsing("--formula", [&] { return parse_formula(text_or_file(c.formula)); });
  ForcingRelation R(P, load_universe(c, *P));
  StarOptions so;
  so.node_budget = c.budget_nodes;
  std::vector<ReportRow> rows;
  rows.push_back(detail::run_row("star-translation", "star-translation-soundness", [&](detail::RowBuilder& b) {
    StarTranslation t = star_translate(f, *P, so);
    extra["a"] = to_sexpr(t.a);
    extra["b"] = to_sexpr(t.b);
    extra["nodes"] = t.nodes;
    b.check(R.forcing_set(f) == R.eq(t.a, t.b), [&] { return to_sexpr(f); });
  }));
  return rows;
}

std::vector<ReportRow> run_complete(const Config& c, json& extra) {
  auto P = load_poset(c);
  std::vector<ReportRow> rows;
  rows.push_back(detail::run_row("boolean-completion", "boolean-completion", [&](detail::RowBuilder& b) {
    RegularOpenAlgebra B = boolean_completion(*P);
    auto els = B.elements();
    extra["algebra_size"] = els.size();
    auto ba = check_boolean_algebra(B, els);
    b.check(!ba, [&] { return *ba; });
    auto em = check_embedding(B, els);
    b.check(!em, [&] { return *em; });
    ForcingRelation R = atomic_forcing(P, load_universe(c, *P));
    BooleanValues V = boolean_values(B);
    auto cv = check_values_against_forcing(B, V, R);
    b.check(!cv, [&] { return *cv; });
    if (P->size() <= 12) {
      auto lb = lindenbaum_check(B, R, generic_membership_sentences(*P));
      extra["lindenbaum_image"] = lb.image_size;
      extra["lindenbaum_surjective"] = lb.surjective;
      b.check(lb.all_regular, [] { return std::string("a forcing set is not regular open"); });
    }
  }));
  return rows;
}

std::vector<ReportRow> run_truth(const Config& c, json& extra) {
  auto pool = load_pool(c);
  auto A = load_A(c);
  std::vector<ReportRow> rows;
  CollapseOptions co;
  co.budget = c.budget_conditions;
  rows.push_back(detail::run_row("forcing-truth", "forcing-derived-truth", [&](detail::RowBuilder& b) {
    CollapseForcing C(c.stage, A, co);
    extra["conditions"] = C.notion().size();
    TruthPredicate ft = forcing_truth(C, pool);
    TruthPredicate tt = tarski_truth(ground_structure(c.stage, A), pool);
    b.add_checks(tt.index->size());
    b.check(ft == tt, [] { return std::string("forcing-derived truth differs from Tarskian truth"); });
    auto inv = invariance_check(C, pool);
    b.check(!inv, [&] { return "condition " + C.notion().label(inv->condition) + " on " + to_sexpr(inv->formula); });
  }));
  return rows;
}

std::vector<ReportRow> run_iterated(const Config& c, json& extra) {
  auto pool = load_pool(c);
  auto A = load_A(c);
  std::vector<ReportRow> rows;
  auto S = std::make_shared<const IteratedSetting>(c.stage, A, pool, c.stages);
  extra["domain"] = S->domain().size();
  extra["entries"] = S->index()->size();
  IteratedTruthPredicate T;
  rows.push_back(detail::run_row("iterated-etr", "etr-solutions", [&](detail::RowBuilder& b) {
    auto inst = iterated_instance(S);
    EtrSolution s = etr_solve(inst, c.budget_steps);
    b.check(!verify_solution(inst, s), [] { return std::string("solution fails verification"); });
    T = iterated_truth_etr(S);
    b.check(T == iterated_truth_direct(*S), [] { return std::string("ETR differs from direct computation"); });
  }));
  rows.push_back(detail::run_row("iterated-clauses", "iterated-truth", [&](detail::RowBuilder& b) {
    if (T.stages.empty()) T = iterated_truth_direct(*S);
    auto v = check_iterated_clauses(*S, T);
    b.check(!v, [&] { return "stage " + std::to_string(v->stage) + ": " + v->clause + " at " + to_sexpr(v->formula); });
  }));
  rows.push_back(detail::run_row("iterated-translation", "iterated-truth", [&](detail::RowBuilder& b) {
    if (T.stages.empty()) T = iterated_truth_direct(*S);
    b.check(iterated_translate_predicate(S, c.stages) == T, [] { return std::string("translation disagrees"); });
  }));
  return rows;
}

std::vector<ReportRow> run_game(const Config& c, json& extra) {
  std::vector<ReportRow> rows;
  if (!c.game.empty()) {
    GameTree T = parsing(c.game, [&] { return parse_game(slurp(c.game)); });
    rows.push_back(detail::run_row("zermelo", "clopen-determinacy", [&](detail::RowBuilder& b) {
      ZermeloSolution z = zermelo_solve(T);
      extra["root_winner"] = player_name(z.root_winner());
      extra["rank"] = continuous_rank(T)[T.root];
      b.check(!check_labels(T, z.labels), [] { return std::string("labels are not a fixpoint"); });
      Player w = z.root_winner();
      b.check(verify_strategy(T, w == Player::I ? z.strategy_I : z.strategy_II, w).ok,
              [] { return std::string("winner's strategy loses"); });
    }));
    return rows;
  }
  auto pool = c.pool.empty() ? atomic_negation_pool() : load_pool(c);
  auto A = load_A(c);
  rows.push_back(detail::run_row("truth-telling-game", "clopen-determinacy", [&](detail::RowBuilder& b) {
    FiniteStructure M = ground_structure(c.stage, A);
    TruthGameOptions go;
    go.node_budget = c.budget_nodes;
    TruthGame g = truth_telling_game(M, pool, c.clock, go);
    extra["nodes"] = g.tree.size();
    ZermeloSolution z = zermelo_solve(g.tree);
    extra["root_winner"] = player_name(z.root_winner());
    b.check(z.root_winner() == Player::II, [] { return std::string("the interrogator wins"); });
    b.check(verify_strategy(g.tree, z.strategy_II, Player::II).ok, [] { return std::string("truth-teller strategy loses"); });
    TruthPredicate truth = tarski_truth(M, pool);
    auto ex = extract_verdicts(g, z.strategy_II);
    extra["extracted"] = ex.verdicts.size();
    b.check(ex.play_independent, [] { return std::string("verdicts depend on the play"); });
    for (const auto& [e, v] : ex.verdicts)
      b.check(v == truth.truth.test(e), [&, e = e] { return "verdict differs at " + to_sexpr(pool[g.index->decode(e).first]); });
  }));
  return rows;
}

std::vector<ReportRow> run_oracle(const Config& c, json& extra) {
  std::vector<ReportRow> rows;
  std::size_t notions = 0;
  rows.push_back(detail::run_row("truth-lemma", "truth-lemma", [&](detail::RowBuilder& b) {
    auto corpus = separative_corpus();
    for (auto& n : nonseparative_extras()) corpus.push_back(std::move(n));
    for (const auto& cn : corpus) {
      if (cn.notion.size() > c.max_poset) continue;
      ++notions;
      auto P = std::make_shared<const ForcingNotion>(cn.notion);
      NameUniverse N = merge_universes(name_universe(*P, c.max_name_rank, c.budget_names), [&] {
        std::vector<PName> ch;
        for (std::size_t p = 0; p < P->size(); ++p) ch.push_back(condition_check(p));
        return ch;
      }());
      ForcingRelation R = atomic_forcing(P, std::move(N));
      for (const auto& f : truth_lemma_pool(*P, R.universe(), c.seed)) {
        auto r = truth_lemma_check(R, f);
        b.check(!r, [&] { return cn.name + ": " + to_sexpr(f); });
      }
    }
  }));
  extra["notions"] = notions;
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forcelab: finite forcing, truth predicates and clopen games"};
  app.require_subcommand(1);
  Config c;
  auto common = [&](CLI::App* s) {
    s->add_option("--seed", c.seed, "random seed");
    s->add_option("--out", c.out, "write the JSON report here instead of stdout");
    s->add_flag("--timings", c.timings, "include per-row runtimes in the report");
    s->add_option("--budget-names", c.budget_names, "name-universe budget")->check(CLI::PositiveNumber);
    s->add_option("--budget-conditions", c.budget_conditions, "condition budget")->check(CLI::PositiveNumber);
    s->add_option("--budget-nodes", c.budget_nodes, "node budget")->check(CLI::PositiveNumber);
    s->add_option("--budget-steps", c.budget_steps, "recursion step budget")->check(CLI::PositiveNumber);
  };
  auto* force = app.add_subcommand("force", "tabulate and audit an atomic forcing relation");
  auto* translate = app.add_subcommand("translate", "star-translate a quantifier-free sentence");
  auto* complete = app.add_subcommand("complete", "check the regular-open completion");
  auto* truth = app.add_subcommand("truth", "compare forcing-derived and Tarskian truth");
  auto* iterated = app.add_subcommand("iterated", "compute and check iterated truth");
  auto* game = app.add_subcommand("game", "solve a game tree or a truth-telling game");
  auto* oracle = app.add_subcommand("oracle", "truth-lemma sweep over the corpus");
  for (auto* s : {force, translate, complete, truth, iterated, game, oracle}) common(s);
  for (auto* s : {force, translate, complete}) {
    s->add_option("--poset", c.poset, "poset s-expression file")->required();
    s->add_option("--names", c.names, "file of names (default: rank <= 1 plus condition checks)");
  }
  for (auto* s : {force, translate}) s->add_option("--formula", c.formula, "formula text or file");
  force->add_option("--condition", c.condition, "condition label");
  for (auto* s : {truth, iterated, game}) {
    s->add_option("--stage", c.stage, "stage n of V_n");
    s->add_option("--A", c.A, "the predicate A as an hf set");
    s->add_option("--pool", c.pool, "pool file of formulas");
  }
  iterated->add_option("--stages", c.stages, "number of truth stages")->check(CLI::PositiveNumber);
  game->add_option("--clock", c.clock, "count-down clock");
  game->add_option("--game", c.game, "game tree s-expression file");
  oracle->add_option("--max-poset", c.max_poset, "largest notion size");
  oracle->add_option("--max-name-rank", c.max_name_rank, "name rank of the universe");

  CLI11_PARSE(app, argc, argv);

  std::string suite = app.get_subcommands().front()->get_name();
  json extra = json::object();
  std::vector<ReportRow> rows;
  try {
    if (suite == "force") rows = run_force(c, extra);
    else if (suite == "translate") rows = run_translate(c, extra);
    else if (suite == "complete") rows = run_complete(c, extra);
    else if (suite == "truth") rows = run_truth(c, extra);
    else if (suite == "iterated") rows = run_iterated(c, extra);
    else if (suite == "game") rows = run_game(c, extra);
    else rows = run_oracle(c, extra);
  } catch (const std::exception& e) {
    std::cerr << "forcelab: " << e.what() << "\n";
    return 2;
  }

  json report;
  report["schema"] = "forcelab-report/1";
  report["suite"] = suite;
  report["seed"] = c.seed;
  report["results"] = extra;
  json jrows = json::array();
  bool failed = false;
  for (const auto& r : rows) {
    json j;
    j["claim_id"] = r.claim_id;
    j["anchor"] = r.anchor;
    j["status"] = status_name(r.status);
    j["checks"] = r.checks;
    if (r.counterexample) j["counterexample"] = *r.counterexample;
    if (c.timings) j["runtime_ms"] = static_cast<long long>(r.runtime_ms);
    jrows.push_back(j);
    failed = failed || r.status == Status::Fail;
  }
  report["rows"] = jrows;
  std::string text = report.dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream o(c.out, std::ios::binary);
    if (!o) {
      std::cerr << "forcelab: cannot write '" << c.out << "'\n";
      return 2;
    }
    o << text;
  }
  return failed ? 1 : 0;
}
