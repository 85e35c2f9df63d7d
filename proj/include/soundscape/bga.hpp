#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "soundscape/feature_store.hpp"
#include "soundscape/seg_features.hpp"

namespace soundscape {

enum class BgaView { kAerial, kStreet, kAudioCustom };
enum class BgaCategory { kBio, kGeo, kAnthro };

inline constexpr std::array<BgaCategory, 3> kBgaCategories{BgaCategory::kBio, BgaCategory::kGeo,
                                                           BgaCategory::kAnthro};

std::string_view to_string(BgaView view);
std::string_view to_string(BgaCategory category);
/// Throws ArgumentError for names other than aerial, street, audio_custom.
BgaView parse_bga_view(std::string_view text);

/// Biophony / geophony / anthrophony triple.
struct BgaVector {
  double bio = 0.0;
  double geo = 0.0;
  double anthro = 0.0;

  double operator[](BgaCategory c) const {
    switch (c) {
      case BgaCategory::kBio: return bio;
      case BgaCategory::kGeo: return geo;
      case BgaCategory::kAnthro: return anthro;
    }
    return 0.0;
  }
  std::array<double, 3> as_array() const { return {bio, geo, anthro}; }
  bool operator==(const BgaVector&) const = default;
};

/// Class name -> ecological weights. Lookup tries the exact row name, then the
/// alias table, then both again case-insensitively.
class BgaMatrix {
 public:
  BgaMatrix() = default;
  explicit BgaMatrix(BgaView view) : view_(view) {}

  BgaView view() const noexcept { return view_; }
  const std::map<std::string, BgaVector>& rows() const noexcept { return rows_; }
  const std::map<std::string, std::string>& aliases() const noexcept { return aliases_; }
  bool empty() const noexcept { return rows_.empty(); }

  /// Throws ConfigError unless every weight lies in [0, 1].
  void set_row(std::string name, BgaVector weights);
  /// Maps an emitted class name onto an existing row.
  void add_alias(std::string alias, std::string row);

  std::optional<BgaVector> resolve(std::string_view class_name) const;
  double max_weight() const;

 private:
  BgaView view_ = BgaView::kAudioCustom;
  std::map<std::string, BgaVector> rows_;
  std::map<std::string, std::string> aliases_;
};

/// The built-in aerial and street mappings. Any other view is an
/// ArgumentError; audio tables are user supplied.
BgaMatrix bga_matrix_for_view(BgaView view);
BgaMatrix bga_matrix_for_view(std::string_view view);

/// `{"view":"audio_custom","weights":{"bird":[1.0,0.0,0.0],...}}`
BgaMatrix load_bga_matrix(std::istream& in);
BgaMatrix load_bga_matrix(const std::filesystem::path& path);

/// Occurrences of class or label names that had no row in the matrix.
using UnmappedTally = std::map<std::string, std::size_t>;

/// Weighted sum of rows by class proportion, not renormalized. Classes without
/// a row contribute nothing and are counted in `unmapped` when given.
BgaVector bga_vector(const ClassDistribution& p, const BgaMatrix& m,
                     UnmappedTally* unmapped = nullptr);

/// Same aggregation over audio label probabilities using an audio_custom table.
BgaVector audio_bga_vector(const LabelProbabilities& lp, const BgaMatrix& m,
                           UnmappedTally* unmapped = nullptr);

}  // namespace soundscape
