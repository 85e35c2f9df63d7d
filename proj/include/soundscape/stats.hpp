#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "soundscape/manifest.hpp"
#include "soundscape/similarity.hpp"

namespace soundscape {

inline constexpr std::string_view kAllScope = "ALL";

/// Sample Pearson correlation. Throws DegenerateSeriesError when either series
/// is constant and ArgumentError for mismatched or too-short input.
double pearson_r(std::span<const double> x, std::span<const double> y);
/// Both vectors must share one PairIndex.
double pearson_r(const PairVector& x, const PairVector& y);

/// Regularized incomplete beta I_x(a, b). `y` is 1 - x, passed separately so
/// callers can keep precision when x is close to 1.
double regularized_incomplete_beta(double a, double b, double x, double y);
inline double regularized_incomplete_beta(double a, double b, double x) {
  return regularized_incomplete_beta(a, b, x, 1.0 - x);
}

struct TTestResult {
  double t = 0.0;
  /// Two-sided p in (0, 1].
  double p = 1.0;
  /// p fell below the smallest normal double (or |r| = 1) and was clamped.
  bool saturated = false;
};

/// Two-sided test of r = 0 with n_pairs - 2 degrees of freedom.
TTestResult p_value_t(double r, std::size_t n_pairs);

struct MantelResult {
  double r = 0.0;
  double p = 1.0;
  std::size_t permutations = 0;
  /// Replicates with |r_b| >= |r_obs|.
  std::size_t at_least_as_extreme = 0;
};

/// Permutes the site labels of y's matrix `permutations` times. Replicate b
/// uses Xoshiro256StarStar::for_replicate(seed, b), so the result does not
/// depend on `threads` (0 = hardware concurrency).
MantelResult mantel_permutation_test(const PairVector& x, const PairVector& y,
                                     std::size_t permutations, std::uint64_t seed,
                                     unsigned threads = 0);

/// Per-city sub-series plus the full series under "ALL". Cross-city pairs only
/// appear in ALL.
std::map<std::string, PairVector> stratify_by_city(const PairVector& pairs,
                                                   const Manifest& manifest);

struct CorrelationResult {
  std::string comparison_id;
  std::string scope;
  double r = 0.0;
  double p_t = 1.0;
  bool p_t_saturated = false;
  double p_perm = 1.0;
  std::size_t n_sites = 0;
  std::size_t n_pairs = 0;
  std::size_t permutations = 0;
  std::uint64_t seed = 0;
};

/// pearson_r, p_value_t and the Mantel test on one pair of series.
CorrelationResult correlate(const PairVector& x, const PairVector& y, std::string comparison_id,
                            std::string scope, std::size_t permutations, std::uint64_t seed,
                            unsigned threads = 0);

}  // namespace soundscape
