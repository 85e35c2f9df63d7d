#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "soundscape/audio_dsp.hpp"

namespace soundscape {

enum class Modality { kSound, kStreet, kAerial, kCombined };

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view text);

/// Site-level latent vector produced by an external encoder.
struct EmbeddingRecord {
  std::string site_id;
  Modality modality = Modality::kSound;
  std::string model_id;
  std::vector<double> vector;

  std::size_t dim() const noexcept { return vector.size(); }
  bool operator==(const EmbeddingRecord&) const = default;
};

/// Per-clip sound embedding; many clips share a site_id.
struct ClipEmbeddingRecord {
  std::string site_id;
  std::size_t clip = 0;
  std::string model_id;
  std::vector<double> vector;

  bool operator==(const ClipEmbeddingRecord&) const = default;
};

/// Class-id raster as composed by a segmentation adapter. Row-major cells.
struct LabelRaster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::map<int, std::string> legend;
  std::vector<int> cells;

  int at(std::size_t row, std::size_t col) const { return cells[row * width + col]; }
  bool operator==(const LabelRaster&) const = default;
};

struct LabelProbabilities {
  std::string site_id;
  std::map<std::string, double> labels;

  bool operator==(const LabelProbabilities&) const = default;
};

/// "%.17g": the shortest fixed-width decimal form that round-trips binary64.
std::string format_real(double v);

// Embedding store: JSON Lines, one record per line, reals with 17 significant
// digits. Readers reject dim/length mismatches, non-finite values, duplicate
// (site_id, modality) keys and inconsistent dims within (modality, model_id).
void write_embeddings(std::ostream& out, std::span<const EmbeddingRecord> records);
std::vector<EmbeddingRecord> read_embeddings(std::istream& in);
std::vector<EmbeddingRecord> read_embeddings(const std::filesystem::path& path);

// Clip store: the embedding schema with an added integer "clip" field and
// modality fixed to "sound"; (site_id, clip) is unique.
void write_clip_embeddings(std::ostream& out, std::span<const ClipEmbeddingRecord> records);
std::vector<ClipEmbeddingRecord> read_clip_embeddings(std::istream& in);
std::vector<ClipEmbeddingRecord> read_clip_embeddings(const std::filesystem::path& path);

void write_label_raster(std::ostream& out, const LabelRaster& raster);
LabelRaster read_label_raster(std::istream& in);
LabelRaster read_label_raster(const std::filesystem::path& path);

void write_label_probabilities(std::ostream& out, std::span<const LabelProbabilities> records);
std::vector<LabelProbabilities> read_label_probabilities(std::istream& in);
std::vector<LabelProbabilities> read_label_probabilities(const std::filesystem::path& path);

/// Real-valued raster export (spectrogram debugging): the label raster layout
/// without a legend, `{"width":W,"height":H,"rows":[[...],...]}`.
void write_real_raster(std::ostream& out, const RealGrid& grid);
RealGrid read_real_raster(std::istream& in);

double l2_norm(std::span<const double> v);
std::vector<double> l2_normalize(std::span<const double> v);

/// Mean of the clip vectors, then unit-normalized.
std::vector<double> aggregate_clip_embeddings(std::span<const std::vector<double>> clips);

/// [unit(street); unit(aerial)] renormalized. The cosine between two combined
/// vectors is the mean of the per-view cosines.
std::vector<double> combine_views(std::span<const double> street, std::span<const double> aerial);

}  // namespace soundscape
