#include <gtest/gtest.h>

#include "forcelab/etr.hpp"
#include "forcelab/truth.hpp"

using namespace forcelab;

namespace {

// S_alpha = {x : x == alpha, or x - 1 in some earlier slice}.
RecursionInstance<int> staircase(std::size_t n, std::size_t len) {
  RecursionInstance<int> inst;
  inst.label = "staircase";
  inst.length = len;
  for (std::size_t i = 0; i < n; ++i) inst.domain.push_back(static_cast<int>(i));
  inst.step = [](std::size_t x, const EtrView& v) { return x == v.stage() || (x > 0 && v.in_any_earlier(x - 1)); };
  return inst;
}

}  // namespace

TEST(Etr, StaircaseMatchesDirectLoop) {
  auto inst = staircase(12, 6);
  auto sol = etr_solve(inst);
  std::vector<bool> seen(12, false);
  for (std::size_t a = 0; a < 6; ++a) {
    std::vector<bool> now(12, false);
    for (std::size_t x = 0; x < 12; ++x) now[x] = x == a || (x > 0 && seen[x - 1]);
    for (std::size_t x = 0; x < 12; ++x) EXPECT_EQ(sol.contains(a, x), now[x]) << a << " " << x;
    for (std::size_t x = 0; x < 12; ++x) seen[x] = seen[x] || now[x];
  }
  EXPECT_EQ(sol.steps, 72U);
}

TEST(Etr, VerifyFindsFirstDisagreement) {
  auto inst = staircase(8, 4);
  auto sol = etr_solve(inst);
  EXPECT_FALSE(verify_solution(inst, sol));
  sol.slices[2].set(7);
  auto bad = verify_solution(inst, sol);
  ASSERT_TRUE(bad);
  EXPECT_EQ(*bad, std::make_pair(std::size_t{2}, std::size_t{7}));
}

TEST(Etr, Uniqueness) {
  // Any candidate satisfying the recursion equals the computed solution.
  auto inst = staircase(5, 3);
  auto sol = etr_solve(inst);
  std::size_t total = 15;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << total); ++mask) {
    EtrSolution cand;
    for (std::size_t a = 0; a < 3; ++a) {
      CondSet s(5);
      for (std::size_t x = 0; x < 5; ++x)
        if (mask >> (a * 5 + x) & 1U) s.set(x);
      cand.slices.push_back(s);
    }
    if (!verify_solution(inst, cand)) EXPECT_EQ(cand.slices, sol.slices);
  }
}

TEST(Etr, ReadingTheCurrentStageIsRejected) {
  RecursionInstance<int> inst{"bad", 2, {0, 1}, [](std::size_t x, const EtrView& v) { return v.contains(v.stage(), x); }};
  EXPECT_THROW(etr_solve(inst), DomainError);
}

TEST(Etr, BudgetIsEnforced) {
  EXPECT_THROW(etr_solve(staircase(1000, 1000), 10000), ResourceError);
}

TEST(Etr, LexStage) {
  EXPECT_EQ(lex_stage(0, 3, 5), 3U);
  EXPECT_EQ(lex_stage(2, 1, 5), 11U);
}

TEST(Etr, CumulativeHierarchyByFormulaRecursion) {
  // S_k = {x : x subset of the union of earlier slices} recovers V_k.
  auto dom = v_stage(4);
  RecursionInstance<HFSet> inst;
  inst.label = "V";
  inst.length = 5;
  inst.domain = dom;
  inst.step = [&](std::size_t x, const EtrView& v) {
    for (const auto& c : dom[x].children()) {
      auto i = std::lower_bound(dom.begin(), dom.end(), c) - dom.begin();
      if (!v.in_any_earlier(static_cast<std::size_t>(i))) return false;
    }
    return true;
  };
  auto sol = etr_solve(inst);
  std::vector<std::size_t> sizes{1, 2, 4, 16, 16};
  for (std::size_t a = 0; a < 5; ++a) {
    // Slice a holds the sets of rank <= a, i.e. V_{a+1}.
    EXPECT_EQ(sol.slices[a].count(), sizes[a]) << a;
  }
}
