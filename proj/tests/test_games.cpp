#include <gtest/gtest.h>

#include <random>

#include "forcelab/corpus.hpp"
#include "forcelab/games.hpp"

using namespace forcelab;

namespace {

// Backward induction by plain recursion.
Player minimax(const GameTree& T, std::uint32_t v) {
  const auto& n = T.nodes[v];
  if (n.terminal()) return n.winner;
  for (auto c : n.children)
    if (minimax(T, c) == n.mover) return n.mover;
  return opponent(n.mover);
}

const char* kExample =
    "(game (node 0 (mover I) (children 1 2)) (node 1 (mover II) (children 3 4))"
    " (terminal 2 (winner II)) (terminal 3 (winner I)) (terminal 4 (winner II)) (root 0))";

}  // namespace

TEST(Zermelo, SmallExample) {
  GameTree T = parse_game(kExample);
  auto z = zermelo_solve(T);
  EXPECT_EQ(z.root_winner(), Player::II);
  EXPECT_EQ(z.labels[1], Player::II);
  EXPECT_EQ(z.labels[3], Player::I);
  EXPECT_EQ(z.strategy_II.at(1), 4U);
  EXPECT_EQ(continuous_rank(T)[0], 2U);
}

TEST(Zermelo, RandomTreesMatchBackwardInduction) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 300; ++i) {
    GameTree T = random_game_tree(rng, 60);
    auto z = zermelo_solve(T);
    for (std::uint32_t v : postorder(T)) EXPECT_EQ(z.labels[v], minimax(T, v));
    EXPECT_FALSE(check_labels(T, z.labels));
    Player w = z.root_winner();
    EXPECT_TRUE(verify_strategy(T, w == Player::I ? z.strategy_I : z.strategy_II, w).ok);
    EXPECT_FALSE(verify_strategy(T, w == Player::I ? z.strategy_II : z.strategy_I, opponent(w)).ok);
  }
}

TEST(Zermelo, WrongLabelsAreRejected) {
  GameTree T = parse_game(kExample);
  auto z = zermelo_solve(T);
  auto labels = z.labels;
  labels[0] = Player::I;
  EXPECT_EQ(check_labels(T, labels), std::optional<std::uint32_t>(0));
}

TEST(Zermelo, LosingMoveGivesCounterLine) {
  GameTree T = parse_game(kExample);
  Strategy bad{{1, 3}};
  auto v = verify_strategy(T, bad, Player::II);
  EXPECT_FALSE(v.ok);
  EXPECT_EQ(v.counter_line, (std::vector<std::uint32_t>{0, 1, 3}));
}

TEST(GameTrees, SexprRoundTripAndValidation) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    GameTree T = random_game_tree(rng, 40);
    EXPECT_EQ(to_sexpr(parse_game(to_sexpr(T))), to_sexpr(T));
  }
  EXPECT_THROW(parse_game("(game (node 0 (mover I) (children 0)) (root 0))"), ParseError);
  EXPECT_THROW(parse_game("(game (terminal 0 (winner III)) (root 0))"), ParseError);
  EXPECT_THROW(parse_game("(game (terminal 1 (winner I)) (root 1))"), ParseError);
  EXPECT_THROW(parse_game("(game (terminal 0 (winner I))"), ParseError);
  GameTree dag;
  auto leaf = dag.add_terminal(Player::I);
  dag.root = dag.add_node(Player::I, {leaf, leaf});
  EXPECT_THROW(validate(dag), DomainError);
}

TEST(TruthGame, TruthTellerWinsAndVerdictsAreTrue) {
  FiniteStructure M = ground_structure(2);
  auto pool = atomic_negation_pool();
  TruthPredicate truth = tarski_truth(M, pool);
  for (std::size_t clock = 0; clock <= 3; ++clock) {
    TruthGame g = truth_telling_game(M, pool, clock);
    auto z = zermelo_solve(g.tree);
    EXPECT_EQ(z.root_winner(), Player::II) << clock;
    auto ex = extract_verdicts(g, z.strategy_II);
    EXPECT_TRUE(ex.play_independent);
    if (clock >= 2) EXPECT_EQ(ex.verdicts.size(), truth.index->size());
    for (const auto& [entry, verdict] : ex.verdicts) EXPECT_EQ(verdict, truth.truth.test(entry));
  }
}

TEST(TruthGame, QuantifiedPool) {
  FiniteStructure M = ground_structure(2, {HFSet()});
  auto pool = subformula_closure(parse_formulas("(exists (y) (and (in (var y) (var x)) (in-class (var y) A)))"));
  TruthPredicate truth = tarski_truth(M, pool);
  TruthGame g = truth_telling_game(M, pool, 3);
  auto z = zermelo_solve(g.tree);
  EXPECT_EQ(z.root_winner(), Player::II);
  auto ex = extract_verdicts(g, z.strategy_II);
  EXPECT_TRUE(ex.play_independent);
  for (const auto& [entry, verdict] : ex.verdicts) EXPECT_EQ(verdict, truth.truth.test(entry));
}

TEST(TruthGame, LyingLoses) {
  // Redirect the truth-teller's first answer to the opposite verdict on the same entry.
  FiniteStructure M = ground_structure(2);
  auto pool = atomic_negation_pool();
  TruthGame g = truth_telling_game(M, pool, 1);
  auto z = zermelo_solve(g.tree);
  Strategy lie = z.strategy_II;
  bool changed = false;
  for (auto& [node, child] : lie) {
    for (auto alt : g.tree.nodes[node].children)
      if (alt != child && g.notes[alt].entry == g.notes[child].entry && g.notes[alt].verdict != g.notes[child].verdict &&
          !z.labels.empty() && z.labels[alt] == Player::I) {
        child = alt;
        changed = true;
        break;
      }
    if (changed) break;
  }
  ASSERT_TRUE(changed);
  EXPECT_FALSE(verify_strategy(g.tree, lie, Player::II).ok);
}

TEST(TruthGame, NeedsClosedPool) {
  EXPECT_THROW(truth_telling_game(ground_structure(1), {parse_formula("(not (in (var x) (var y)))")}, 1), ClosureError);
}
