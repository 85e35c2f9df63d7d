#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "soundscape/bga.hpp"

namespace soundscape {

struct SitePair {
  std::string first;
  std::string second;

  bool operator==(const SitePair&) const = default;
};

/// Upper-triangular site pairs in canonical order: sites sorted
/// lexicographically, pair (i, j) with i < j, i outer.
class PairIndex {
 public:
  PairIndex() = default;

  /// All n(n-1)/2 pairs over `site_ids` (duplicates are collapsed).
  static PairIndex over(std::vector<std::string> site_ids);

  const std::vector<SitePair>& pairs() const noexcept { return pairs_; }
  const std::vector<std::string>& sites() const noexcept { return sites_; }
  std::size_t size() const noexcept { return pairs_.size(); }

  /// Pairs whose two sites both satisfy `keep`, order preserved.
  template <typename Pred>
  std::vector<std::size_t> select(Pred keep) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      if (keep(pairs_[k].first) && keep(pairs_[k].second)) out.push_back(k);
    }
    return out;
  }

  /// True when the pairs are exactly every pair over sites() in canonical
  /// order, i.e. the series unpacks into a full symmetric matrix.
  bool is_complete() const;

  bool operator==(const PairIndex&) const = default;

 private:
  friend class PairVector;
  std::vector<std::string> sites_;
  std::vector<SitePair> pairs_;
};

/// One real per canonical pair, tagged with the comparison it realizes.
class PairVector {
 public:
  PairVector() = default;
  PairVector(PairIndex index, std::vector<double> values, std::string comparison_id);

  const PairIndex& index() const noexcept { return index_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::string& comparison_id() const noexcept { return comparison_id_; }
  std::size_t size() const noexcept { return values_.size(); }

  /// Sub-series over the pairs whose sites are both in `sites`.
  PairVector restricted_to(const std::set<std::string>& sites) const;

 private:
  PairIndex index_;
  std::vector<double> values_;
  std::string comparison_id_;
};

/// u.v / (|u||v|), clamped to [-1, 1].
double cosine(std::span<const double> u, std::span<const double> v);

using VectorsBySite = std::map<std::string, std::vector<double>>;

PairVector pairwise_similarity(const VectorsBySite& items, std::string comparison_id = {});

/// Per-category agreement 1 - |b_k(i) - b_k(j)|.
PairVector bga_category_pair_similarity(const std::map<std::string, BgaVector>& vectors,
                                        BgaCategory category, std::string comparison_id = {});

/// Dense vectors over the sorted union of class names, one per site.
VectorsBySite distribution_vectors(const std::map<std::string, ClassDistribution>& dists);
VectorsBySite bga_vectors(const std::map<std::string, BgaVector>& vectors);

/// `site_i,site_j,value` with a header row, canonical order, 17 digits.
void write_pair_csv(std::ostream& out, const PairVector& pv);

}  // namespace soundscape
