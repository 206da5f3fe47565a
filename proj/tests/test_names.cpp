#include <gtest/gtest.h>

#include "forcelab/corpus.hpp"
#include "forcelab/names.hpp"

using namespace forcelab;

namespace {
ForcingNotion fork_notion() { return parse_poset("(poset (elems 1 a b) (one 1) (le (a 1) (b 1)))"); }
}  // namespace

TEST(Names, RankOneUniverseSize) {
  auto P = fork_notion();
  EXPECT_EQ(name_universe(P, 0).size(), 1U);
  EXPECT_EQ(name_universe(P, 1).size(), 8U);
  EXPECT_THROW(name_universe(P, 2), ResourceError);
  EXPECT_TRUE(name_universe(P, 1).subname_closed());
}

TEST(Names, CheckNamesEvaluateToTheirSet) {
  auto P = fork_notion();
  for (const auto& G : generic_filters(P))
    for (const auto& x : v_stage(4)) EXPECT_EQ(eval_name(check_name(x), G.members), x);
}

TEST(Names, EvaluationFollowsTheFilter) {
  auto P = fork_notion();
  PName n = parse_name("(name (pair (name) 1) (pair (name (pair (name) 0)) 2))");
  CondSet Ga = P.up(1), Gb = P.up(2);
  EXPECT_EQ(eval_name(n, Ga), hf_singleton(HFSet()));
  EXPECT_EQ(eval_name(n, Gb), hf_singleton(hf_singleton(HFSet())));
}

TEST(Names, OpNameEvaluatesToOrderedPair) {
  auto P = fork_notion();
  auto x = nat_encode(1), y = nat_encode(2);
  for (const auto& G : generic_filters(P))
    EXPECT_EQ(eval_name(op_name(check_name(x), check_name(y)), G.members), kpair(x, y));
}

TEST(Names, SexprRoundTripAndErrors) {
  for (const auto& n : corpus_universe(fork_notion()).names) EXPECT_EQ(parse_name(to_sexpr(n)), n);
  EXPECT_THROW(parse_name("(name (pair (name)))"), ParseError);
  EXPECT_THROW(parse_name("(name (pair (name) x))"), ParseError);
}

TEST(Names, SeededUniverseIsClosed) {
  PName inner = parse_name("(name (pair (name) 0))");
  PName outer = PName::make({{inner, 1}});
  auto N = seeded_universe({outer});
  EXPECT_TRUE(N.subname_closed());
  EXPECT_TRUE(N.contains(inner));
  EXPECT_TRUE(N.contains(PName()));
  EXPECT_EQ(N.size(), 3U);
  EXPECT_THROW(seeded_universe({outer}, 2), ResourceError);
}

TEST(Names, CollapseNamesDenoteTheCollapse) {
  auto C = build_collapse(2, {hf_singleton(HFSet())});
  const auto& info = *C.collapse();
  for (const auto& G : generic_filters(C)) {
    // The generic enumerates V_2; recover it from the values of the n-dot names.
    std::map<std::size_t, HFSet> g;
    for (const auto& a : v_stage(2)) {
      auto k = nat_decode(eval_name(n_dot(C, a), G.members));
      ASSERT_TRUE(k);
      EXPECT_LT(*k, info.clock);
      EXPECT_TRUE(g.emplace(*k, a).second);
    }
    HFSet eps = eval_name(eps_dot(C), G.members);
    HFSet As = eval_name(a_dot(C), G.members);
    for (const auto& [i, a] : g) {
      EXPECT_EQ(As.contains(nat_encode(i)), a == hf_singleton(HFSet()));
      for (const auto& [j, b] : g) EXPECT_EQ(eps.contains(kpair(nat_encode(i), nat_encode(j))), b.contains(a));
    }
  }
}
