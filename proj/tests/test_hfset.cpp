#include <gtest/gtest.h>

#include <random>
#include <set>

#include "forcelab/bits.hpp"
#include "forcelab/hfset.hpp"
#include "forcelab/sexpr.hpp"

using namespace forcelab;

namespace {

// Independent model: a set as a sorted vector of canonical strings.
std::string naive(const HFSet& x) {
  std::set<std::string> parts;
  for (const auto& c : x.children()) parts.insert(naive(c));
  std::string s = "{";
  for (const auto& p : parts) s += p + ",";
  return s + "}";
}

HFSet random_set(std::mt19937_64& rng, int depth) {
  std::vector<HFSet> kids;
  int n = depth == 0 ? 0 : static_cast<int>(rng() % 4);
  for (int i = 0; i < n; ++i) kids.push_back(random_set(rng, depth - 1));
  return HFSet::make(kids);
}

}  // namespace

TEST(HFSet, StageSizes) {
  std::vector<std::size_t> expect{0, 1, 2, 4, 16, 65536};
  for (std::size_t n = 0; n <= 5; ++n) EXPECT_EQ(v_stage(n).size(), expect[n]);
  EXPECT_THROW(v_stage(6), ResourceError);
}

TEST(HFSet, InterningMatchesExtensionality) {
  std::mt19937_64 rng(3);
  std::vector<HFSet> xs;
  for (int i = 0; i < 300; ++i) xs.push_back(random_set(rng, 4));
  for (const auto& a : xs)
    for (const auto& b : xs) {
      EXPECT_EQ(a == b, naive(a) == naive(b));
      EXPECT_EQ(a.id() == b.id(), a == b);
    }
}

TEST(HFSet, CanonicalOrderIsTotalAndRankFirst) {
  auto v = v_stage(4);
  for (std::size_t i = 1; i < v.size(); ++i) {
    EXPECT_LT(v[i - 1], v[i]);
    EXPECT_LE(v[i - 1].rank(), v[i].rank());
  }
}

TEST(HFSet, DuplicateChildrenCollapse) {
  HFSet e;
  EXPECT_EQ(HFSet::make({e, e}), hf_singleton(e));
  EXPECT_EQ(hf_pair(e, e), hf_singleton(e));
}

TEST(HFSet, KuratowskiPairsRoundTrip) {
  auto v = v_stage(3);
  for (const auto& a : v)
    for (const auto& b : v) {
      auto d = kpair_decode(kpair(a, b));
      ASSERT_TRUE(d);
      EXPECT_EQ(d->first, a);
      EXPECT_EQ(d->second, b);
    }
  EXPECT_FALSE(kpair_decode(HFSet::make({HFSet(), hf_singleton(HFSet()), hf_singleton(hf_singleton(HFSet()))})));
}

TEST(HFSet, Naturals) {
  for (std::size_t k = 0; k < 40; ++k) {
    HFSet n = nat_encode(k);
    EXPECT_EQ(n.size(), k);
    EXPECT_EQ(n.rank(), k);
    EXPECT_EQ(nat_decode(n), k);
    EXPECT_TRUE(is_transitive(n));
  }
  EXPECT_FALSE(nat_decode(hf_singleton(hf_singleton(HFSet()))));
}

TEST(HFSet, StagesAreTransitive) {
  for (std::size_t n = 0; n <= 4; ++n) EXPECT_TRUE(is_transitive(HFSet::make(v_stage(n))));
}

TEST(HFSet, TransitiveClosure) {
  HFSet two = nat_encode(2);
  auto tc = transitive_closure({hf_singleton(two)});
  std::set<HFSet> got(tc.begin(), tc.end());
  EXPECT_EQ(got, (std::set<HFSet>{two, nat_encode(1), nat_encode(0)}));
}

TEST(HFSet, SexprRoundTrip) {
  for (const auto& x : v_stage(4)) EXPECT_EQ(parse_hf(to_sexpr(x)), x);
  EXPECT_EQ(parse_hf("(hf (hf) (hf))"), hf_singleton(HFSet()));
}

TEST(HFSet, MalformedInputReportsPosition) {
  try {
    parse_hf("(hf (hf) (oops))");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 9U);
  }
  EXPECT_THROW(parse_hf("(hf"), ParseError);
  EXPECT_THROW(parse_hf("(hf) extra"), ParseError);
}

TEST(CondSet, BasicAlgebra) {
  CondSet a(70), b(70);
  a.set(1);
  a.set(65);
  b.set(65);
  EXPECT_TRUE(b.subset_of(a));
  EXPECT_TRUE(a.intersects(b));
  EXPECT_EQ(a.count(), 2U);
  CondSet c = a.complement();
  EXPECT_EQ(c.count(), 68U);
  EXPECT_FALSE(c.test(65));
  EXPECT_TRUE(CondSet(70, true).all());
  EXPECT_EQ(a.indices(), (std::vector<std::size_t>{1, 65}));
}
