#include "soundscape/feature_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <utility>

#include "json.hpp"
#include "soundscape/errors.hpp"

namespace soundscape {
namespace {

using nlohmann::json;

std::string quoted(std::string_view s) { return json(std::string(s)).dump(); }

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

template <typename Fn>
auto with_path(const std::filesystem::path& path, Fn&& fn) {
  auto in = open_input(path);
  try {
    return fn(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// Calls fn(object, line_number) for every non-blank line.
template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError("line " + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) {
      throw FormatError("line " + std::to_string(line_no) + ": expected a JSON object");
    }
    try {
      fn(obj, line_no);
    } catch (const FormatError&) {
      throw;
    } catch (const json::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

const json& require(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw FormatError("line " + std::to_string(line_no) + ": missing field '" + key + "'");
  }
  return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line_no) {
  const auto& v = require(obj, key, line_no);
  if (!v.is_string()) {
    throw FormatError("line " + std::to_string(line_no) + ": field '" + key +
                      "' must be a string");
  }
  return v.get<std::string>();
}

std::size_t require_count(const json& obj, const char* key, std::size_t line_no) {
  const auto& v = require(obj, key, line_no);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw FormatError("line " + std::to_string(line_no) + ": field '" + key +
                      "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

double finite_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw FormatError(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw FormatError(where + ": non-finite value");
  return d;
}

std::vector<double> read_vector(const json& obj, std::size_t line_no) {
  const std::size_t dim = require_count(obj, "dim", line_no);
  if (dim == 0) throw FormatError("line " + std::to_string(line_no) + ": dim must be positive");
  const auto& arr = require(obj, "vector", line_no);
  if (!arr.is_array()) {
    throw FormatError("line " + std::to_string(line_no) + ": 'vector' must be an array");
  }
  if (arr.size() != dim) {
    throw FormatError("line " + std::to_string(line_no) + ": declared dim " +
                      std::to_string(dim) + " but vector has " + std::to_string(arr.size()) +
                      " values");
  }
  std::vector<double> v;
  v.reserve(dim);
  for (const auto& x : arr) v.push_back(finite_number(x, "line " + std::to_string(line_no)));
  return v;
}

void write_vector_fields(std::ostream& out, std::span<const double> v) {
  out << "\"dim\":" << v.size() << ",\"vector\":[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw ArgumentError("cannot serialize non-finite value");
    if (i) out << ',';
    out << format_real(v[i]);
  }
  out << ']';
}

// Dim consistency per (modality, model_id) within one store file.
class DimRegistry {
 public:
  void check(const std::string& key, std::size_t dim, std::size_t line_no) {
    auto [it, inserted] = dims_.emplace(key, dim);
    if (!inserted && it->second != dim) {
      throw FormatError("line " + std::to_string(line_no) + ": dim " + std::to_string(dim) +
                        " differs from earlier dim " + std::to_string(it->second) + " for " +
                        key);
    }
  }

 private:
  std::map<std::string, std::size_t> dims_;
};

void check_unit_interval(double p, const std::string& where) {
  if (!(p >= 0.0 && p <= 1.0)) throw FormatError(where + ": probability outside [0, 1]");
}

}  // namespace

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::kSound: return "sound";
    case Modality::kStreet: return "street";
    case Modality::kAerial: return "aerial";
    case Modality::kCombined: return "combined";
  }
  return "unknown";
}

Modality parse_modality(std::string_view text) {
  for (auto m : {Modality::kSound, Modality::kStreet, Modality::kAerial, Modality::kCombined}) {
    if (to_string(m) == text) return m;
  }
  throw FormatError("unknown modality '" + std::string(text) + "'");
}

std::string format_real(double v) {
  // "-0" would parse back as the integer 0 and lose the sign.
  if (v == 0.0 && std::signbit(v)) return "-0.0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_embeddings(std::ostream& out, std::span<const EmbeddingRecord> records) {
  for (const auto& r : records) {
    out << "{\"site_id\":" << quoted(r.site_id) << ",\"modality\":" << quoted(to_string(r.modality))
        << ",\"model_id\":" << quoted(r.model_id) << ',';
    write_vector_fields(out, r.vector);
    out << "}\n";
  }
}

std::vector<EmbeddingRecord> read_embeddings(std::istream& in) {
  std::vector<EmbeddingRecord> records;
  std::set<std::pair<std::string, Modality>> keys;
  DimRegistry dims;
  for_each_json_line(in, [&](const json& obj, std::size_t line_no) {
    EmbeddingRecord r;
    r.site_id = require_string(obj, "site_id", line_no);
    try {
      r.modality = parse_modality(require_string(obj, "modality", line_no));
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
    r.model_id = require_string(obj, "model_id", line_no);
    r.vector = read_vector(obj, line_no);
    if (!keys.emplace(r.site_id, r.modality).second) {
      throw FormatError("line " + std::to_string(line_no) + ": duplicate record for site '" +
                        r.site_id + "' modality '" + std::string(to_string(r.modality)) + "'");
    }
    dims.check(std::string(to_string(r.modality)) + "/" + r.model_id, r.dim(), line_no);
    records.push_back(std::move(r));
  });
  return records;
}

std::vector<EmbeddingRecord> read_embeddings(const std::filesystem::path& path) {
  return with_path(path, [](std::istream& in) { return read_embeddings(in); });
}

void write_clip_embeddings(std::ostream& out, std::span<const ClipEmbeddingRecord> records) {
  for (const auto& r : records) {
    out << "{\"site_id\":" << quoted(r.site_id) << ",\"clip\":" << r.clip
        << ",\"modality\":\"sound\",\"model_id\":" << quoted(r.model_id) << ',';
    write_vector_fields(out, r.vector);
    out << "}\n";
  }
}

std::vector<ClipEmbeddingRecord> read_clip_embeddings(std::istream& in) {
  std::vector<ClipEmbeddingRecord> records;
  std::set<std::pair<std::string, std::size_t>> keys;
  DimRegistry dims;
  for_each_json_line(in, [&](const json& obj, std::size_t line_no) {
    ClipEmbeddingRecord r;
    r.site_id = require_string(obj, "site_id", line_no);
    r.clip = require_count(obj, "clip", line_no);
    if (auto it = obj.find("modality"); it != obj.end() && *it != "sound") {
      throw FormatError("line " + std::to_string(line_no) + ": clip records must be sound");
    }
    r.model_id = require_string(obj, "model_id", line_no);
    r.vector = read_vector(obj, line_no);
    if (!keys.emplace(r.site_id, r.clip).second) {
      throw FormatError("line " + std::to_string(line_no) + ": duplicate clip " +
                        std::to_string(r.clip) + " for site '" + r.site_id + "'");
    }
    dims.check(r.model_id, r.vector.size(), line_no);
    records.push_back(std::move(r));
  });
  return records;
}

std::vector<ClipEmbeddingRecord> read_clip_embeddings(const std::filesystem::path& path) {
  return with_path(path, [](std::istream& in) { return read_clip_embeddings(in); });
}

void write_label_raster(std::ostream& out, const LabelRaster& raster) {
  out << "{\"width\":" << raster.width << ",\"height\":" << raster.height << ",\"legend\":{";
  bool first = true;
  for (const auto& [id, name] : raster.legend) {
    if (!first) out << ',';
    first = false;
    out << quoted(std::to_string(id)) << ':' << quoted(name);
  }
  out << "},\"rows\":[";
  for (std::size_t r = 0; r < raster.height; ++r) {
    out << (r ? ",[" : "[");
    for (std::size_t c = 0; c < raster.width; ++c) {
      if (c) out << ',';
      out << raster.at(r, c);
    }
    out << ']';
  }
  out << "]}\n";
}

LabelRaster read_label_raster(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid raster JSON (") + e.what() + ")");
  }
  if (!doc.is_object()) throw FormatError("raster must be a JSON object");
  try {
    LabelRaster r;
    r.width = require_count(doc, "width", 1);
    r.height = require_count(doc, "height", 1);
    const auto& legend = require(doc, "legend", 1);
    if (!legend.is_object()) throw FormatError("raster legend must be an object");
    for (const auto& [key, name] : legend.items()) {
      int id = 0;
      std::size_t used = 0;
      try {
        id = std::stoi(key, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != key.size() || key.empty()) {
        throw FormatError("legend key '" + key + "' is not an integer class id");
      }
      if (!name.is_string()) throw FormatError("legend name for id " + key + " must be a string");
      r.legend.emplace(id, name.get<std::string>());
    }
    const auto& rows = require(doc, "rows", 1);
    if (!rows.is_array() || rows.size() != r.height) {
      throw FormatError("raster declares height " + std::to_string(r.height) + " but has " +
                        std::to_string(rows.is_array() ? rows.size() : 0) + " rows");
    }
    r.cells.reserve(r.width * r.height);
    for (std::size_t y = 0; y < rows.size(); ++y) {
      const auto& row = rows[y];
      if (!row.is_array() || row.size() != r.width) {
        throw FormatError("raster row " + std::to_string(y) + " does not have width " +
                          std::to_string(r.width));
      }
      for (const auto& cell : row) {
        if (!cell.is_number_integer()) {
          throw FormatError("raster row " + std::to_string(y) + " holds a non-integer cell");
        }
        const int id = cell.get<int>();
        if (!r.legend.contains(id)) {
          throw FormatError("cell id " + std::to_string(id) + " in row " + std::to_string(y) +
                            " is missing from the legend");
        }
        r.cells.push_back(id);
      }
    }
    return r;
  } catch (const FormatError&) {
    throw;
  } catch (const json::exception& e) {
    throw FormatError(e.what());
  }
}

LabelRaster read_label_raster(const std::filesystem::path& path) {
  return with_path(path, [](std::istream& in) { return read_label_raster(in); });
}

void write_label_probabilities(std::ostream& out, std::span<const LabelProbabilities> records) {
  for (const auto& r : records) {
    out << "{\"site_id\":" << quoted(r.site_id) << ",\"labels\":{";
    bool first = true;
    for (const auto& [name, p] : r.labels) {
      if (!first) out << ',';
      first = false;
      out << quoted(name) << ':' << format_real(p);
    }
    out << "}}\n";
  }
}

std::vector<LabelProbabilities> read_label_probabilities(std::istream& in) {
  std::vector<LabelProbabilities> records;
  std::set<std::string> seen;
  for_each_json_line(in, [&](const json& obj, std::size_t line_no) {
    const std::string where = "line " + std::to_string(line_no);
    LabelProbabilities r;
    r.site_id = require_string(obj, "site_id", line_no);
    const auto& labels = require(obj, "labels", line_no);
    if (!labels.is_object() || labels.empty()) {
      throw FormatError(where + ": 'labels' must be a non-empty object");
    }
    for (const auto& [name, p] : labels.items()) {
      const double v = finite_number(p, where);
      check_unit_interval(v, where);
      r.labels.emplace(name, v);
    }
    if (!seen.insert(r.site_id).second) {
      throw FormatError(where + ": duplicate label record for site '" + r.site_id + "'");
    }
    records.push_back(std::move(r));
  });
  return records;
}

std::vector<LabelProbabilities> read_label_probabilities(const std::filesystem::path& path) {
  return with_path(path, [](std::istream& in) { return read_label_probabilities(in); });
}

void write_real_raster(std::ostream& out, const RealGrid& grid) {
  out << "{\"width\":" << grid.cols() << ",\"height\":" << grid.rows() << ",\"rows\":[";
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    out << (r ? ",[" : "[");
    auto row = grid.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_real(row[c]);
    }
    out << ']';
  }
  out << "]}\n";
}

RealGrid read_real_raster(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid raster JSON (") + e.what() + ")");
  }
  const std::size_t width = require_count(doc, "width", 1);
  const std::size_t height = require_count(doc, "height", 1);
  const auto& rows = require(doc, "rows", 1);
  if (!rows.is_array() || rows.size() != height) throw FormatError("raster height mismatch");
  RealGrid grid(height, width);
  for (std::size_t r = 0; r < height; ++r) {
    if (!rows[r].is_array() || rows[r].size() != width) {
      throw FormatError("raster row " + std::to_string(r) + " width mismatch");
    }
    for (std::size_t c = 0; c < width; ++c) {
      grid(r, c) = finite_number(rows[r][c], "raster row " + std::to_string(r));
    }
  }
  return grid;
}

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

std::vector<double> l2_normalize(std::span<const double> v) {
  const double norm = l2_norm(v);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DegenerateVectorError("cannot normalize a vector with zero or non-finite norm");
  }
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return out;
}

std::vector<double> aggregate_clip_embeddings(std::span<const std::vector<double>> clips) {
  if (clips.empty()) throw ArgumentError("at least one clip embedding is required");
  const std::size_t dim = clips.front().size();
  if (dim == 0) throw ArgumentError("clip embeddings must be non-empty");
  for (const auto& c : clips) {
    if (c.size() != dim) {
      throw ArgumentError("clip embedding dim " + std::to_string(c.size()) + " differs from " +
                          std::to_string(dim));
    }
  }
  // Summing each component in sorted order makes the result bit-identical for
  // any clip order.
  std::vector<double> mean(dim, 0.0);
  std::vector<double> column(clips.size());
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t k = 0; k < clips.size(); ++k) column[k] = clips[k][i];
    std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (double x : column) sum += x;
    mean[i] = sum / static_cast<double>(clips.size());
  }
  return l2_normalize(mean);
}

std::vector<double> combine_views(std::span<const double> street, std::span<const double> aerial) {
  if (street.size() != aerial.size()) {
    throw ArgumentError("street dim " + std::to_string(street.size()) + " differs from aerial dim " +
                        std::to_string(aerial.size()));
  }
  auto s = l2_normalize(street);
  auto a = l2_normalize(aerial);
  s.insert(s.end(), a.begin(), a.end());
  return l2_normalize(s);
}

}  // namespace soundscape
