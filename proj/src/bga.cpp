#include "soundscape/bga.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>

#include "json.hpp"
#include "soundscape/errors.hpp"

namespace soundscape {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

template <typename Map>
auto find_folded(const Map& map, std::string_view key) {
  const std::string folded = lower(key);
  return std::find_if(map.begin(), map.end(),
                      [&](const auto& entry) { return lower(entry.first) == folded; });
}

bool in_unit_interval(double w) { return w >= 0.0 && w <= 1.0; }

// "-" cells of the published table are 0.0.
BgaMatrix aerial_table() {
  BgaMatrix m(BgaView::kAerial);
  m.set_row("Grassland", {1.0, 0.3, 0.0});
  m.set_row("Forest/Vegetation", {1.0, 0.3, 0.0});
  m.set_row("Wetlands", {1.0, 0.3, 0.0});
  m.set_row("Waterbody", {0.3, 1.0, 0.0});
  m.set_row("Bare Land", {0.1, 0.1, 1.0});
  m.set_row("Road/Sidewalk", {0.1, 0.0, 1.0});
  m.set_row("Building", {0.1, 0.0, 1.0});
  m.set_row("Vehicles", {0.0, 0.0, 1.0});
  m.set_row("Cropland", {1.0, 0.0, 0.3});
  for (const char* name : {"Forest", "Vegetation"}) m.add_alias(name, "Forest/Vegetation");
  for (const char* name : {"Road", "Sidewalk"}) m.add_alias(name, "Road/Sidewalk");
  return m;
}

BgaMatrix street_table() {
  BgaMatrix m(BgaView::kStreet);
  m.set_row("Road", {0.0, 0.0, 1.0});
  m.set_row("Sidewalk", {0.3, 0.0, 1.0});
  m.set_row("Building", {0.3, 0.0, 1.0});
  m.set_row("Vegetation", {1.0, 0.3, 0.0});
  m.set_row("Waterbody", {1.0, 1.0, 0.0});
  m.set_row("Person", {0.0, 0.0, 1.0});
  m.set_row("Car, Truck, Bus, etc", {0.0, 0.0, 1.0});
  for (const char* name : {"Car", "Truck", "Bus", "Motorcycle", "Train", "Bicycle"}) {
    m.add_alias(name, "Car, Truck, Bus, etc");
  }
  return m;
}

void accumulate(BgaVector& acc, double weight, const BgaVector& row) {
  acc.bio += weight * row.bio;
  acc.geo += weight * row.geo;
  acc.anthro += weight * row.anthro;
}

}  // namespace

std::string_view to_string(BgaView view) {
  switch (view) {
    case BgaView::kAerial: return "aerial";
    case BgaView::kStreet: return "street";
    case BgaView::kAudioCustom: return "audio_custom";
  }
  return "unknown";
}

std::string_view to_string(BgaCategory category) {
  switch (category) {
    case BgaCategory::kBio: return "bio";
    case BgaCategory::kGeo: return "geo";
    case BgaCategory::kAnthro: return "anthro";
  }
  return "unknown";
}

BgaView parse_bga_view(std::string_view text) {
  for (auto v : {BgaView::kAerial, BgaView::kStreet, BgaView::kAudioCustom}) {
    if (to_string(v) == text) return v;
  }
  throw ArgumentError("unknown BGA view '" + std::string(text) + "'");
}

void BgaMatrix::set_row(std::string name, BgaVector weights) {
  for (double w : weights.as_array()) {
    if (!in_unit_interval(w)) {
      throw ConfigError("BGA weight for '" + name + "' outside [0, 1]");
    }
  }
  rows_.insert_or_assign(std::move(name), weights);
}

void BgaMatrix::add_alias(std::string alias, std::string row) {
  if (!rows_.contains(row)) throw ConfigError("alias target '" + row + "' is not a row");
  aliases_.insert_or_assign(std::move(alias), std::move(row));
}

std::optional<BgaVector> BgaMatrix::resolve(std::string_view class_name) const {
  if (auto it = rows_.find(std::string(class_name)); it != rows_.end()) return it->second;
  if (auto it = aliases_.find(std::string(class_name)); it != aliases_.end()) {
    return rows_.at(it->second);
  }
  if (auto it = find_folded(rows_, class_name); it != rows_.end()) return it->second;
  if (auto it = find_folded(aliases_, class_name); it != aliases_.end()) {
    return rows_.at(it->second);
  }
  return std::nullopt;
}

double BgaMatrix::max_weight() const {
  double best = 0.0;
  for (const auto& [name, w] : rows_) {
    for (double x : w.as_array()) best = std::max(best, x);
  }
  return best;
}

BgaMatrix bga_matrix_for_view(BgaView view) {
  switch (view) {
    case BgaView::kAerial: return aerial_table();
    case BgaView::kStreet: return street_table();
    case BgaView::kAudioCustom: break;
  }
  throw ArgumentError("no built-in BGA table for view '" + std::string(to_string(view)) + "'");
}

BgaMatrix bga_matrix_for_view(std::string_view view) {
  return bga_matrix_for_view(parse_bga_view(view));
}

BgaMatrix load_bga_matrix(std::istream& in) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid BGA table JSON (") + e.what() + ")");
  }
  if (!doc.is_object() || !doc.contains("view") || !doc["view"].is_string()) {
    throw ConfigError("BGA table needs a string 'view'");
  }
  BgaView view;
  try {
    view = parse_bga_view(doc["view"].get<std::string>());
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  const auto weights = doc.find("weights");
  if (weights == doc.end() || !weights->is_object()) {
    throw ConfigError("BGA table needs a 'weights' object");
  }
  BgaMatrix m(view);
  for (const auto& [name, triple] : weights->items()) {
    if (!triple.is_array() || triple.size() != 3 ||
        !std::all_of(triple.begin(), triple.end(), [](const json& x) { return x.is_number(); })) {
      throw ConfigError("BGA weights for '" + name + "' must be three numbers");
    }
    m.set_row(name, {triple[0].get<double>(), triple[1].get<double>(), triple[2].get<double>()});
  }
  if (m.empty()) throw ConfigError("BGA table has no rows");
  return m;
}

BgaMatrix load_bga_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open BGA table '" + path.string() + "'");
  try {
    return load_bga_matrix(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

BgaVector bga_vector(const ClassDistribution& p, const BgaMatrix& m, UnmappedTally* unmapped) {
  if (p.proportions.empty()) throw ArgumentError("class distribution is empty");
  double mass = 0.0;
  for (const auto& [name, share] : p.proportions) {
    if (!(share >= 0.0) || !std::isfinite(share)) {
      throw ArgumentError("class proportion for '" + name + "' is negative or non-finite");
    }
    mass += share;
  }
  if (!(mass > 0.0)) throw ArgumentError("class distribution has zero total mass");

  BgaVector out;
  for (const auto& [name, share] : p.proportions) {
    if (auto row = m.resolve(name)) {
      accumulate(out, share, *row);
    } else if (unmapped && share > 0.0) {
      ++(*unmapped)[name];
    }
  }
  return out;
}

BgaVector audio_bga_vector(const LabelProbabilities& lp, const BgaMatrix& m,
                           UnmappedTally* unmapped) {
  if (m.empty()) throw ConfigError("audio BGA table is empty");
  if (m.view() != BgaView::kAudioCustom) {
    throw ConfigError("audio BGA projection needs an audio_custom table");
  }
  if (lp.labels.empty()) throw ArgumentError("label probabilities for '" + lp.site_id + "' are empty");

  BgaVector out;
  for (const auto& [label, prob] : lp.labels) {
    if (!in_unit_interval(prob)) {
      throw ArgumentError("probability for label '" + label + "' outside [0, 1]");
    }
    if (auto row = m.resolve(label)) {
      accumulate(out, prob, *row);
    } else if (unmapped) {
      ++(*unmapped)[label];
    }
  }
  return out;
}

}  // namespace soundscape
