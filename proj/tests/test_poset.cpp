#include <gtest/gtest.h>

#include "forcelab/corpus.hpp"
#include "forcelab/poset.hpp"

using namespace forcelab;

namespace {

ForcingNotion fork_notion() { return parse_poset("(poset (elems 1 a b) (one 1) (le (a 1) (b 1)))"); }

// Brute-force separativity straight from the definition.
bool separative_naive(const ForcingNotion& P) {
  for (std::size_t p = 0; p < P.size(); ++p)
    for (std::size_t q = 0; q < P.size(); ++q) {
      if (P.le(p, q)) continue;
      bool witness = false;
      for (std::size_t r = 0; r < P.size(); ++r)
        if (P.le(r, p) && !P.compatible(r, q)) witness = true;
      if (!witness) return false;
    }
  return true;
}

std::vector<CondSet> subsets_of(std::size_t n) {
  std::vector<CondSet> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    CondSet s(n);
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1U) s.set(i);
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(Poset, ParsesAndClosesOrder) {
  auto P = parse_poset("(poset (elems 1 a b c) (one 1) (le (a 1) (b a) (c b)))");
  EXPECT_EQ(P.size(), 4U);
  EXPECT_TRUE(P.le(3, 0));
  EXPECT_TRUE(P.le(3, 1));
  EXPECT_FALSE(P.le(1, 3));
  EXPECT_EQ(parse_poset(to_sexpr(P)).size(), 4U);
}

TEST(Poset, RejectsMalformed) {
  EXPECT_THROW(parse_poset("(poset (elems 1 a) (one 1) (le (a 1)"), ParseError);
  EXPECT_THROW(parse_poset("(poset (elems 1 a) (one 1) (le (a z)))"), Error);
  EXPECT_THROW(parse_poset("(poset (elems 1 a b) (one 1) (le (a 1)))"), Error);
}

TEST(Poset, CorpusIsSeparativeAndExtrasAreNot) {
  auto corpus = separative_corpus();
  EXPECT_EQ(corpus.size(), 17U);
  for (const auto& c : corpus) {
    EXPECT_TRUE(separative_naive(c.notion)) << c.name;
    EXPECT_FALSE(is_separative(c.notion)) << c.name;
  }
  for (const auto& c : nonseparative_extras()) {
    EXPECT_FALSE(separative_naive(c.notion)) << c.name;
    EXPECT_TRUE(is_separative(c.notion)) << c.name;
  }
}

TEST(Poset, DenseInteriorMatchesDefinition) {
  for (const auto& c : separative_corpus()) {
    const auto& P = c.notion;
    if (P.size() > 6) continue;
    for (const auto& d : subsets_of(P.size())) {
      CondSet interior = P.dense_interior(d);
      for (std::size_t p = 0; p < P.size(); ++p) {
        bool dense = true;
        for (std::size_t q = 0; q < P.size(); ++q) {
          if (!P.le(q, p)) continue;
          bool hit = false;
          for (std::size_t r = 0; r < P.size(); ++r)
            if (P.le(r, q) && d.test(r)) hit = true;
          dense = dense && hit;
        }
        EXPECT_EQ(interior.test(p), dense);
      }
    }
  }
}

TEST(Poset, GenericFiltersAreExhaustivelyVerified) {
  for (const auto& c : separative_corpus()) {
    auto fs = generic_filters(c.notion);
    auto audit = verify_generic_filters(c.notion, fs);
    EXPECT_TRUE(audit.ok) << c.name << ": " << audit.detail;
  }
}

TEST(Poset, MissingGenericFilterIsDetected) {
  auto P = fork_notion();
  auto fs = generic_filters(P);
  ASSERT_EQ(fs.size(), 2U);
  fs.pop_back();
  // A maximal filter that meets every dense set is now omitted.
  EXPECT_FALSE(verify_generic_filters(P, fs).ok);
  fs = generic_filters(P);
  fs[0].members = P.all();
  EXPECT_FALSE(verify_generic_filters(P, fs).ok);
}

TEST(Poset, FilterPredicate) {
  auto P = fork_notion();
  EXPECT_TRUE(is_filter(P, P.up(1)));
  EXPECT_FALSE(is_filter(P, P.all()));
  EXPECT_FALSE(is_filter(P, P.none()));
  CondSet only_a(3);
  only_a.set(1);
  EXPECT_FALSE(is_filter(P, only_a));
}

TEST(Poset, CollapseShape) {
  auto C = build_collapse(1, {});
  ASSERT_TRUE(C.collapse());
  EXPECT_EQ(C.tag(0).kind, ConditionTag::Kind::Top);
  EXPECT_THROW(build_collapse(2, {nat_encode(5)}), DomainError);
  EXPECT_THROW(build_collapse(4, {}), ResourceError);
  auto fs = generic_filters(C);
  EXPECT_TRUE(verify_generic_filters(C, fs).ok);
}
