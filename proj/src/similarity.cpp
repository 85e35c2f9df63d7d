#include "soundscape/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "csv.hpp"
#include "soundscape/errors.hpp"

namespace soundscape {

PairIndex PairIndex::over(std::vector<std::string> site_ids) {
  std::sort(site_ids.begin(), site_ids.end());
  site_ids.erase(std::unique(site_ids.begin(), site_ids.end()), site_ids.end());
  PairIndex index;
  const std::size_t n = site_ids.size();
  index.pairs_.reserve(n * (n - (n > 0)) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) index.pairs_.push_back({site_ids[i], site_ids[j]});
  }
  index.sites_ = std::move(site_ids);
  return index;
}

bool PairIndex::is_complete() const {
  const std::size_t n = sites_.size();
  if (pairs_.size() != n * (n - (n > 0)) / 2) return false;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      if (pairs_[k].first != sites_[i] || pairs_[k].second != sites_[j]) return false;
    }
  }
  return true;
}

PairVector::PairVector(PairIndex index, std::vector<double> values, std::string comparison_id)
    : index_(std::move(index)), values_(std::move(values)), comparison_id_(std::move(comparison_id)) {
  if (values_.size() != index_.size()) {
    throw ArgumentError("pair vector has " + std::to_string(values_.size()) + " values for " +
                        std::to_string(index_.size()) + " pairs");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ArgumentError("pair vector holds a non-finite value");
  }
}

PairVector PairVector::restricted_to(const std::set<std::string>& sites) const {
  PairVector out;
  out.comparison_id_ = comparison_id_;
  for (const auto& s : index_.sites_) {
    if (sites.contains(s)) out.index_.sites_.push_back(s);
  }
  for (std::size_t k : index_.select([&](const std::string& s) { return sites.contains(s); })) {
    out.index_.pairs_.push_back(index_.pairs_[k]);
    out.values_.push_back(values_[k]);
  }
  return out;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ArgumentError("cosine of vectors with dims " + std::to_string(u.size()) + " and " +
                        std::to_string(v.size()));
  }
  if (u.empty()) throw DegenerateVectorError("cosine of empty vectors");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  const double denom = std::sqrt(uu) * std::sqrt(vv);
  if (!(denom > 0.0) || !std::isfinite(denom) || !std::isfinite(dot)) {
    throw DegenerateVectorError("cosine of a zero-norm or non-finite vector");
  }
  return std::clamp(dot / denom, -1.0, 1.0);
}

PairVector pairwise_similarity(const VectorsBySite& items, std::string comparison_id) {
  if (items.size() < 2) throw ArgumentError("pairwise similarity needs at least 2 sites");
  std::vector<std::string> ids;
  std::size_t dim = items.begin()->second.size();
  for (const auto& [id, v] : items) {
    if (v.size() != dim) {
      throw ArgumentError("site '" + id + "' has dim " + std::to_string(v.size()) +
                          ", expected " + std::to_string(dim));
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw DegenerateVectorError("site '" + id + "' has a zero-norm or non-finite vector");
    }
    ids.push_back(id);
  }
  auto index = PairIndex::over(std::move(ids));
  std::vector<double> values;
  values.reserve(index.size());
  for (const auto& p : index.pairs()) {
    values.push_back(cosine(items.at(p.first), items.at(p.second)));
  }
  return PairVector(std::move(index), std::move(values), std::move(comparison_id));
}

PairVector bga_category_pair_similarity(const std::map<std::string, BgaVector>& vectors,
                                        BgaCategory category, std::string comparison_id) {
  if (vectors.size() < 2) throw ArgumentError("pairwise similarity needs at least 2 sites");
  std::vector<std::string> ids;
  for (const auto& [id, b] : vectors) {
    const double c = b[category];
    if (!(c >= 0.0 && c <= 1.0)) {
      throw ArgumentError("site '" + id + "' has " + std::string(to_string(category)) +
                          " component outside [0, 1]");
    }
    ids.push_back(id);
  }
  auto index = PairIndex::over(std::move(ids));
  std::vector<double> values;
  values.reserve(index.size());
  for (const auto& p : index.pairs()) {
    values.push_back(1.0 - std::abs(vectors.at(p.first)[category] - vectors.at(p.second)[category]));
  }
  return PairVector(std::move(index), std::move(values), std::move(comparison_id));
}

VectorsBySite distribution_vectors(const std::map<std::string, ClassDistribution>& dists) {
  std::set<std::string> classes;
  for (const auto& [id, d] : dists) {
    for (const auto& entry : d.proportions) classes.insert(entry.first);
  }
  VectorsBySite out;
  for (const auto& [id, d] : dists) {
    std::vector<double> v;
    v.reserve(classes.size());
    for (const auto& c : classes) v.push_back(d[c]);
    out.emplace(id, std::move(v));
  }
  return out;
}

VectorsBySite bga_vectors(const std::map<std::string, BgaVector>& vectors) {
  VectorsBySite out;
  for (const auto& [id, b] : vectors) {
    const auto a = b.as_array();
    out.emplace(id, std::vector<double>(a.begin(), a.end()));
  }
  return out;
}

void write_pair_csv(std::ostream& out, const PairVector& pv) {
  out << "site_i,site_j,value\n";
  const auto& pairs = pv.index().pairs();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out << detail::csv_escape(pairs[k].first) << ',' << detail::csv_escape(pairs[k].second) << ','
        << format_real(pv.values()[k]) << '\n';
  }
}

}  // namespace soundscape
