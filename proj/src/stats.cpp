#include "soundscape/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>
#include <vector>

#include "soundscape/errors.hpp"
#include "soundscape/rng.hpp"

namespace soundscape {
namespace {

// Continued fraction for I_x(a, b), modified Lentz. Converges quickly for
// x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

// Exact test, so constant input never reaches the variance sums, where
// rounding of the mean can leave a tiny nonzero spread.
bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

// Centered x against y's matrix under a site permutation; the denominator is
// permutation invariant, so only this sum changes between replicates.
class MantelStatistic {
 public:
  MantelStatistic(const PairVector& x, const PairVector& y) : n_(x.index().sites().size()) {
    const auto& xs = x.values();
    const auto& ys = y.values();
    if (is_constant(xs) || is_constant(ys)) {
      throw DegenerateSeriesError("Mantel test on a constant series");
    }
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double sxx = 0.0, syy = 0.0;
    centered_x_.reserve(xs.size());
    for (double v : xs) {
      centered_x_.push_back(v - mx);
      sxx += (v - mx) * (v - mx);
    }
    matrix_.assign(n_ * n_, 0.0);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j, ++k) {
        const double c = ys[k] - my;
        matrix_[i * n_ + j] = c;
        matrix_[j * n_ + i] = c;
        syy += c * c;
      }
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
      throw DegenerateSeriesError("Mantel test on a constant series");
    }
    scale_ = std::sqrt(sxx) * std::sqrt(syy);
  }

  std::size_t sites() const noexcept { return n_; }

  double operator()(std::span<const std::size_t> perm) const {
    double sum = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double* row = matrix_.data() + perm[i] * n_;
      for (std::size_t j = i + 1; j < n_; ++j, ++k) sum += centered_x_[k] * row[perm[j]];
    }
    return sum / scale_;
  }

 private:
  std::size_t n_;
  std::vector<double> centered_x_;
  std::vector<double> matrix_;
  double scale_ = 1.0;
};

void require_same_index(const PairVector& x, const PairVector& y) {
  if (!(x.index() == y.index())) {
    throw ArgumentError("pair vectors '" + x.comparison_id() + "' and '" + y.comparison_id() +
                        "' are indexed over different pairs");
  }
}

}  // namespace

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("pearson_r on series of different length");
  if (x.size() < 3) throw ArgumentError("pearson_r needs at least 3 observations");
  if (is_constant(x) || is_constant(y)) {
    throw DegenerateSeriesError("pearson_r on a series with zero variance");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw DegenerateSeriesError("pearson_r on a series with zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pearson_r(const PairVector& x, const PairVector& y) {
  require_same_index(x, y);
  return pearson_r(x.values(), y.values());
}

double regularized_incomplete_beta(double a, double b, double x, double y) {
  if (!(a > 0.0) || !(b > 0.0)) throw ArgumentError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (y == 0.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

TTestResult p_value_t(double r, std::size_t n_pairs) {
  if (n_pairs < 3) throw ArgumentError("p_value_t needs at least 3 pairs");
  if (!std::isfinite(r) || std::abs(r) > 1.0) throw ArgumentError("correlation outside [-1, 1]");
  constexpr double kSmallest = std::numeric_limits<double>::min();
  const double df = static_cast<double>(n_pairs - 2);
  TTestResult out;
  if (std::abs(r) == 1.0) {
    out.t = std::copysign(std::numeric_limits<double>::infinity(), r);
    out.p = kSmallest;
    out.saturated = true;
    return out;
  }
  const double r2 = r * r;
  out.t = r * std::sqrt(df / (1.0 - r2));
  // x = df / (df + t^2) simplifies to 1 - r^2.
  out.p = r == 0.0 ? 1.0 : regularized_incomplete_beta(df / 2.0, 0.5, 1.0 - r2, r2);
  out.p = std::min(out.p, 1.0);
  if (!(out.p >= kSmallest)) {
    out.p = kSmallest;
    out.saturated = true;
  }
  return out;
}

MantelResult mantel_permutation_test(const PairVector& x, const PairVector& y,
                                     std::size_t permutations, std::uint64_t seed,
                                     unsigned threads) {
  require_same_index(x, y);
  if (!x.index().is_complete() || x.index().sites().size() < 3) {
    throw ArgumentError("Mantel test needs the full pair set over at least 3 sites");
  }
  if (permutations < 99) throw ArgumentError("Mantel test needs at least 99 permutations");

  const MantelStatistic stat(x, y);
  const std::size_t n = stat.sites();
  std::vector<std::size_t> identity(n);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  const double observed = stat(identity);
  // Rounding slack so exact ties (e.g. symmetric relabelings) count as ties.
  const double threshold = std::abs(observed) - 1e-12;

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, std::max<std::size_t>(1, permutations / 256)));

  std::vector<std::size_t> counts(threads, 0);
  auto work = [&](unsigned t) {
    std::vector<std::size_t> perm(n);
    std::size_t count = 0;
    for (std::size_t b = t; b < permutations; b += threads) {
      auto rng = Xoshiro256StarStar::for_replicate(seed, b);
      std::copy(identity.begin(), identity.end(), perm.begin());
      shuffle(std::span<std::size_t>(perm), rng);
      if (std::abs(stat(perm)) >= threshold) ++count;
    }
    counts[t] = count;
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
  }

  MantelResult out;
  out.r = pearson_r(x, y);
  out.permutations = permutations;
  out.at_least_as_extreme = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  out.p = static_cast<double>(1 + out.at_least_as_extreme) / static_cast<double>(permutations + 1);
  return out;
}

std::map<std::string, PairVector> stratify_by_city(const PairVector& pairs,
                                                   const Manifest& manifest) {
  std::map<std::string, std::set<std::string>> by_city;
  for (const auto& site : pairs.index().sites()) {
    const SiteRecord* rec = manifest.find(site);
    if (!rec) throw ArgumentError("site '" + site + "' is not in the manifest");
    if (rec->city == kAllScope) {
      throw ArgumentError("city name '" + std::string(kAllScope) + "' is reserved");
    }
    by_city[rec->city].insert(site);
  }
  std::map<std::string, PairVector> strata;
  for (const auto& [city, sites] : by_city) strata.emplace(city, pairs.restricted_to(sites));
  strata.emplace(std::string(kAllScope), pairs);
  return strata;
}

CorrelationResult correlate(const PairVector& x, const PairVector& y, std::string comparison_id,
                            std::string scope, std::size_t permutations, std::uint64_t seed,
                            unsigned threads) {
  const auto mantel = mantel_permutation_test(x, y, permutations, seed, threads);
  const auto t = p_value_t(mantel.r, x.size());
  CorrelationResult out;
  out.comparison_id = std::move(comparison_id);
  out.scope = std::move(scope);
  out.r = mantel.r;
  out.p_t = t.p;
  out.p_t_saturated = t.saturated;
  out.p_perm = mantel.p;
  out.n_sites = x.index().sites().size();
  out.n_pairs = x.size();
  out.permutations = permutations;
  out.seed = seed;
  return out;
}

}  // namespace soundscape
