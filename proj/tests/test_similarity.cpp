#include "soundscape/similarity.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "soundscape/errors.hpp"

namespace soundscape {
namespace {

TEST(Cosine, Examples) {
  const std::vector<double> a{1, 0}, b{0, 1}, c{1, 1}, neg{-1, 0};
  EXPECT_DOUBLE_EQ(cosine(a, a), 1.0);
  EXPECT_DOUBLE_EQ(cosine(a, b), 0.0);
  EXPECT_DOUBLE_EQ(cosine(a, neg), -1.0);
  EXPECT_NEAR(cosine(c, a), 0.70710678, 1e-8);
  EXPECT_THROW(cosine(std::vector<double>{0, 0}, a), DegenerateVectorError);
  EXPECT_THROW(cosine(std::vector<double>{1, 0, 0}, a), ArgumentError);
}

TEST(Cosine, SymmetricBoundedScaleInvariant) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> s(0.01, 100);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> u(1 + rng() % 50), v;
    for (auto& x : u) x = g(rng);
    v.resize(u.size());
    for (auto& x : v) x = g(rng);
    const double c = cosine(u, v);
    EXPECT_EQ(c, cosine(v, u));
    EXPECT_GE(c, -1.0);
    EXPECT_LE(c, 1.0);
    const double k = s(rng);
    auto ku = u;
    for (auto& x : ku) x *= k;
    EXPECT_NEAR(cosine(ku, v), c, 1e-12);
    EXPECT_LE(cosine(u, u), 1.0);
  }
}

TEST(PairIndex, CanonicalOrder) {
  const auto idx = PairIndex::over({"C", "A", "B", "A"});
  EXPECT_EQ(idx.sites(), (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_EQ(idx.pairs(), (std::vector<SitePair>{{"A", "B"}, {"A", "C"}, {"B", "C"}}));
  EXPECT_TRUE(idx.is_complete());
}

TEST(PairwiseSimilarity, ThreeSites) {
  const VectorsBySite v{{"A", {1, 0}}, {"B", {0, 1}}, {"C", {1, 1}}};
  const auto pv = pairwise_similarity(v, "test");
  EXPECT_EQ(pv.comparison_id(), "test");
  ASSERT_EQ(pv.size(), 3u);
  EXPECT_EQ(pv.index().pairs()[0], (SitePair{"A", "B"}));
  EXPECT_NEAR(pv.values()[0], 0.0, 1e-15);
  EXPECT_NEAR(pv.values()[1], 0.70710678, 1e-8);
  EXPECT_NEAR(pv.values()[2], 0.70710678, 1e-8);
}

TEST(PairwiseSimilarity, Errors) {
  EXPECT_THROW(pairwise_similarity({{"A", {1, 0}}}), ArgumentError);
  try {
    pairwise_similarity({{"A", {1, 0}}, {"Zero", {0, 0}}});
    FAIL();
  } catch (const DegenerateVectorError& e) {
    EXPECT_NE(std::string(e.what()).find("Zero"), std::string::npos);
  }
}

TEST(PairwiseSimilarity, MatchesBruteForceEnumeration) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g;
  for (std::size_t n = 2; n <= 6; ++n) {
    VectorsBySite items;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v(4);
      for (auto& x : v) x = g(rng);
      items["s" + std::to_string(n - i)] = v;
    }
    const auto pv = pairwise_similarity(items);
    std::vector<std::string> ids;
    for (const auto& [id, v] : items) ids.push_back(id);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j, ++k) {
        ASSERT_EQ(pv.index().pairs()[k], (SitePair{ids[i], ids[j]}));
        const auto& a = items[ids[i]];
        const auto& b = items[ids[j]];
        double dot = 0, na = 0, nb = 0;
        for (std::size_t d = 0; d < a.size(); ++d) {
          dot += a[d] * b[d];
          na += a[d] * a[d];
          nb += b[d] * b[d];
        }
        EXPECT_NEAR(pv.values()[k], dot / std::sqrt(na * nb), 1e-12);
      }
    }
    EXPECT_EQ(k, n * (n - 1) / 2);
  }
}

TEST(CategorySimilarity, AbsoluteDifference) {
  const std::map<std::string, BgaVector> v{{"A", {0.55, 0.15, 0.5}}, {"B", {0.15, 0.15, 1.0}}};
  EXPECT_NEAR(bga_category_pair_similarity(v, BgaCategory::kBio).values()[0], 0.6, 1e-15);
  EXPECT_NEAR(bga_category_pair_similarity(v, BgaCategory::kGeo).values()[0], 1.0, 1e-15);
  EXPECT_NEAR(bga_category_pair_similarity(v, BgaCategory::kAnthro).values()[0], 0.5, 1e-15);
}

TEST(PairVector, RestrictionAndValidation) {
  const VectorsBySite v{{"A", {1, 0}}, {"B", {0, 1}}, {"C", {1, 1}}, {"D", {1, 2}}};
  const auto pv = pairwise_similarity(v);
  const auto sub = pv.restricted_to({"A", "C", "D"});
  ASSERT_EQ(sub.size(), 3u);
  EXPECT_EQ(sub.index().pairs(), PairIndex::over({"A", "C", "D"}).pairs());
  EXPECT_EQ(sub.values()[0], pv.values()[1]);
  EXPECT_TRUE(sub.index().is_complete());

  EXPECT_THROW(PairVector(PairIndex::over({"A", "B"}), {0.1, 0.2}, "x"), ArgumentError);
  EXPECT_THROW(PairVector(PairIndex::over({"A", "B"}), {std::nan("")}, "x"), ArgumentError);
}

TEST(DistributionVectors, UnionOfClasses) {
  std::map<std::string, ClassDistribution> d;
  d["A"] = ClassDistribution{{{"Road", 1.0}}, 1};
  d["B"] = ClassDistribution{{{"Building", 0.5}, {"Road", 0.5}}, 2};
  const auto v = distribution_vectors(d);
  EXPECT_EQ(v.at("A"), (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(v.at("B"), (std::vector<double>{0.5, 0.5}));
}

TEST(PairCsv, CanonicalRows) {
  const auto pv = pairwise_similarity({{"A", {1, 0}}, {"B", {0, 1}}, {"C", {1, 1}}});
  std::ostringstream out;
  write_pair_csv(out, pv);
  const std::string s = out.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "site_i,site_j,value");
  EXPECT_NE(s.find("A,B,0\n"), std::string::npos);
  EXPECT_NE(s.find("B,C,0.70710678118654"), std::string::npos);
}

}  // namespace
}  // namespace soundscape
