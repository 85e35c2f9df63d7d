#include "soundscape/stats.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "soundscape/errors.hpp"

namespace soundscape {
namespace {

TEST(Pearson, Examples) {
  const std::vector<double> a{1, 2, 3}, b{2, 4, 6}, c{3, 2, 1};
  EXPECT_DOUBLE_EQ(pearson_r(a, b), 1.0);
  EXPECT_DOUBLE_EQ(pearson_r(a, c), -1.0);
  EXPECT_NEAR(pearson_r(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}), 0.8,
              1e-15);
}

TEST(Pearson, Errors) {
  const std::vector<double> a{1, 2, 3}, flat{5, 5, 5};
  EXPECT_THROW(pearson_r(a, flat), DegenerateSeriesError);
  EXPECT_THROW(pearson_r(a, std::vector<double>{1, 2}), ArgumentError);
  EXPECT_THROW(pearson_r(std::vector<double>{1, 2}, std::vector<double>{2, 1}), ArgumentError);
}

TEST(Pearson, AgreesWithClosedFormAndIsAffineInvariant) {
  std::mt19937_64 rng(51);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> coef(0.1, 10);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(3 + rng() % 200), y(x.size());
    const double rho = std::uniform_real_distribution<double>(-1, 1)(rng);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = g(rng);
      y[i] = rho * x[i] + g(rng);
    }
    const double r = pearson_r(x, y);
    EXPECT_NEAR(r, oracle::pearson_closed_form(x, y), 1e-12);
    EXPECT_EQ(r, pearson_r(y, x));
    EXPECT_LE(std::abs(r), 1.0);

    const double a = coef(rng), b = g(rng) * 100;
    auto ax = x;
    for (auto& v : ax) v = a * v + b;
    EXPECT_NEAR(pearson_r(ax, y), r, 1e-12);
    for (auto& v : ax) v = -v;
    EXPECT_NEAR(pearson_r(ax, y), -r, 1e-12);
  }
}

TEST(PValueT, ZeroCorrelation) {
  const auto res = p_value_t(0.0, 50);
  EXPECT_EQ(res.t, 0.0);
  EXPECT_EQ(res.p, 1.0);
  EXPECT_FALSE(res.saturated);
}

TEST(PValueT, MatchesQuadrature) {
  const auto res = p_value_t(0.5, 100);
  EXPECT_NEAR(res.t, 5.71548, 1e-5);
  const double expected = oracle::student_t_two_sided(res.t, 98);
  EXPECT_NEAR(res.p, expected, 1e-6 * expected);

  for (double r : {-0.9, -0.3, 0.01, 0.2, 0.7}) {
    for (std::size_t n : {3u, 5u, 30u, 400u}) {
      const auto t = p_value_t(r, n);
      const double q = oracle::student_t_two_sided(t.t, static_cast<double>(n - 2));
      EXPECT_NEAR(t.p, q, 1e-6 * q) << r << " " << n;
    }
  }
}

TEST(PValueT, MonotoneInAbsR) {
  for (std::size_t n : {5u, 20u, 1000u}) {
    double prev = 1.0;
    for (int k = 1; k < 100; ++k) {
      const double r = k / 100.0;
      const auto pos = p_value_t(r, n), neg = p_value_t(-r, n);
      EXPECT_EQ(pos.p, neg.p);
      EXPECT_LE(pos.p, prev);
      EXPECT_GT(pos.p, 0.0);
      prev = pos.p;
    }
  }
}

TEST(PValueT, Saturation) {
  const auto one = p_value_t(1.0, 10);
  EXPECT_TRUE(one.saturated);
  EXPECT_EQ(one.p, std::numeric_limits<double>::min());
  const auto tiny = p_value_t(0.999999, 100000);
  EXPECT_TRUE(tiny.saturated);
  EXPECT_GT(tiny.p, 0.0);
  EXPECT_THROW(p_value_t(0.5, 2), ArgumentError);
  EXPECT_THROW(p_value_t(1.5, 10), ArgumentError);
}

TEST(IncompleteBeta, KnownValues) {
  EXPECT_NEAR(regularized_incomplete_beta(1, 1, 0.3), 0.3, 1e-15);
  EXPECT_NEAR(regularized_incomplete_beta(2, 1, 0.5), 0.25, 1e-15);
  EXPECT_NEAR(regularized_incomplete_beta(0.5, 0.5, 0.5), 0.5, 1e-14);
  EXPECT_EQ(regularized_incomplete_beta(3, 4, 0.0), 0.0);
  EXPECT_EQ(regularized_incomplete_beta(3, 4, 1.0), 1.0);
}

PairVector random_series(std::mt19937_64& rng, std::size_t n_sites, std::string id) {
  std::vector<std::string> sites;
  for (std::size_t i = 0; i < n_sites; ++i) sites.push_back("s" + std::to_string(100 + i));
  auto idx = PairIndex::over(sites);
  std::normal_distribution<double> g;
  std::vector<double> v(idx.size());
  for (auto& x : v) x = g(rng);
  return PairVector(idx, std::move(v), std::move(id));
}

TEST(Mantel, IdenticalSeriesHasMinimalP) {
  std::mt19937_64 rng(61);
  const auto x = random_series(rng, 10, "x");
  const auto res = mantel_permutation_test(x, x, 99, 42, 1);
  EXPECT_DOUBLE_EQ(res.r, 1.0);
  EXPECT_EQ(res.at_least_as_extreme, 0u);
  EXPECT_DOUBLE_EQ(res.p, 0.01);
}

TEST(Mantel, DeterministicAndThreadIndependent) {
  std::mt19937_64 rng(62);
  const auto x = random_series(rng, 12, "x");
  const auto y = random_series(rng, 12, "y");
  const auto one = mantel_permutation_test(x, y, 2999, 7, 1);
  for (unsigned threads : {1u, 2u, 3u, 8u, 0u}) {
    const auto other = mantel_permutation_test(x, y, 2999, 7, threads);
    EXPECT_EQ(other.at_least_as_extreme, one.at_least_as_extreme);
    EXPECT_EQ(other.p, one.p);
    EXPECT_EQ(other.r, one.r);
  }
  const auto reseeded = mantel_permutation_test(x, y, 2999, 8, 1);
  EXPECT_EQ(reseeded.r, one.r);
  EXPECT_GT(one.p, 0.0);
  EXPECT_LE(one.p, 1.0);
  EXPECT_GE(one.p, 1.0 / 3000.0);
}

TEST(Mantel, Errors) {
  std::mt19937_64 rng(63);
  const auto x = random_series(rng, 5, "x");
  EXPECT_THROW(mantel_permutation_test(x, x, 98, 1), ArgumentError);
  const auto small = random_series(rng, 4, "small");
  EXPECT_THROW(mantel_permutation_test(x, small, 99, 1), ArgumentError);
  const auto flat = PairVector(x.index(), std::vector<double>(x.size(), 0.3), "flat");
  EXPECT_THROW(mantel_permutation_test(x, flat, 99, 1), DegenerateSeriesError);
}

Manifest city_manifest() {
  Manifest m;
  for (auto [id, city] : {std::pair{"L1", "London"}, {"L2", "London"}, {"T1", "Tokyo"},
                          {"T2", "Tokyo"}}) {
    SiteRecord s;
    s.site_id = id;
    s.city = city;
    s.audio_path = "a.wav";
    m.sites.push_back(s);
  }
  return m;
}

TEST(Stratify, PerCityAndAll) {
  const auto idx = PairIndex::over({"L1", "L2", "T1", "T2"});
  std::vector<double> v(idx.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<double>(k);
  const PairVector pv(idx, v, "c");
  const auto strata = stratify_by_city(pv, city_manifest());
  ASSERT_EQ(strata.size(), 3u);
  EXPECT_EQ(strata.at("London").size(), 1u);
  EXPECT_EQ(strata.at("Tokyo").size(), 1u);
  EXPECT_EQ(strata.at("ALL").size(), 6u);
  EXPECT_EQ(strata.at("Tokyo").values()[0], 5.0);
  EXPECT_EQ(strata.at("Tokyo").index().pairs()[0], (SitePair{"T1", "T2"}));
}

TEST(Stratify, Errors) {
  const PairVector pv(PairIndex::over({"L1", "X9"}), {0.5}, "c");
  EXPECT_THROW(stratify_by_city(pv, city_manifest()), ArgumentError);
  auto m = city_manifest();
  m.sites[0].city = "ALL";
  const PairVector ok(PairIndex::over({"L1", "L2"}), {0.5}, "c");
  EXPECT_THROW(stratify_by_city(ok, m), ArgumentError);
}

TEST(Correlate, FillsResult) {
  std::mt19937_64 rng(64);
  const auto x = random_series(rng, 8, "x");
  const auto y = random_series(rng, 8, "y");
  const auto res = correlate(x, y, "x~y", "ALL", 199, 3, 2);
  EXPECT_EQ(res.comparison_id, "x~y");
  EXPECT_EQ(res.n_sites, 8u);
  EXPECT_EQ(res.n_pairs, 28u);
  EXPECT_EQ(res.r, pearson_r(x, y));
  EXPECT_EQ(res.p_t, p_value_t(res.r, 28).p);
}

}  // namespace
}  // namespace soundscape
