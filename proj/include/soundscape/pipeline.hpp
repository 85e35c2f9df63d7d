#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "soundscape/audio_dsp.hpp"
#include "soundscape/bga.hpp"
#include "soundscape/manifest.hpp"
#include "soundscape/seg_features.hpp"
#include "soundscape/similarity.hpp"
#include "soundscape/stats.hpp"

namespace soundscape {

/// Feature directory layout:
///   embeddings.jsonl            site-level EmbeddingRecords
///   sound_clips.jsonl           optional per-clip sound embeddings
///   rasters/<site>.<view>.json  LabelRaster per site and view (street|aerial)
///   audio_labels.jsonl          optional LabelProbabilities
///   audio_bga.json              optional audio_custom BGA table
struct FeatureLayout {
  static constexpr const char* kEmbeddings = "embeddings.jsonl";
  static constexpr const char* kSoundClips = "sound_clips.jsonl";
  static constexpr const char* kRasterDir = "rasters";
  static constexpr const char* kAudioLabels = "audio_labels.jsonl";
  static constexpr const char* kAudioTable = "audio_bga.json";
};

struct RunConfig {
  std::filesystem::path manifest_path;
  std::filesystem::path features_dir;
  std::filesystem::path out_dir;
  SpectrogramConfig spectrogram;
  double clip_seconds = 10.0;
  FlagSet exclude = all_flags();
  std::size_t permutations = 9999;
  std::uint64_t seed = 42;
  std::vector<std::string> cities;
  bool strict_files = false;
  bool export_spectrograms = false;
  unsigned threads = 0;

  /// Which artifacts run_pipeline writes under out_dir.
  struct Outputs {
    bool features = true;
    bool series = true;
    bool report = true;
  } outputs;
};

/// Throws ConfigError when an invariant of the run configuration fails.
void validate(const RunConfig& cfg);

struct LoadedInputs {
  Manifest manifest;  // after exclusion policy and city filter
  std::size_t sites_before_filter = 0;
  std::map<std::string, std::vector<double>> sound, street, aerial;
  std::map<std::string, LabelRaster> street_rasters, aerial_rasters;
  std::map<std::string, LabelProbabilities> audio_labels;
  std::optional<BgaMatrix> audio_table;
  /// SHA-256 of every input file, keyed by its path as referenced in the run.
  std::map<std::string, std::string> digests;
  std::vector<std::string> warnings;
};

LoadedInputs load_inputs(const RunConfig& cfg);

struct SiteFeatures {
  std::map<std::string, ClassDistribution> distributions;
  std::map<std::string, BgaVector> bga;
  UnmappedTally unmapped;
};

struct FeatureTables {
  SiteFeatures street;
  SiteFeatures aerial;
  std::map<std::string, BgaVector> audio_bga;
  UnmappedTally audio_unmapped;
};

FeatureTables compute_features(const LoadedInputs& inputs);

/// Full (ALL-scope) similarity series keyed by series id: "sound",
/// "embed:street", "seg:aerial", "bga-bio:street", "audio_bga", ...
std::map<std::string, PairVector> build_series(const LoadedInputs& inputs,
                                               const FeatureTables& features,
                                               std::vector<std::string>* notes = nullptr);

struct Comparison {
  std::string id;
  std::string x_series;
  std::string y_series;
};

/// The comparison set in report order; audio_bga rows only when `with_audio`.
std::vector<Comparison> comparison_set(bool with_audio);

struct ReportRow {
  std::string scope;
  std::string comparison_id;
  double r = 0.0;
  double p_t = 1.0;
  bool p_t_saturated = false;
  double p_perm = 1.0;
  std::size_t n_sites = 0;
  std::size_t n_pairs = 0;

  bool operator<(const ReportRow& o) const {
    return std::tie(scope, comparison_id) < std::tie(o.scope, o.comparison_id);
  }
};

struct SkippedComparison {
  std::string scope;
  std::string comparison_id;
  std::string reason;
};

struct Report {
  std::vector<ReportRow> rows;  // sorted by (scope, comparison_id)
  std::vector<SkippedComparison> skipped;
  nlohmann::ordered_json metadata;
};

/// Complete-case correlation of every comparison for ALL and each city.
Report correlate_series(const std::map<std::string, PairVector>& series,
                        const Manifest& manifest, const RunConfig& cfg);

/// report.csv (6 significant digits) and report.json (17) in `out_dir`.
void emit_report(const Report& report, const std::filesystem::path& out_dir);

void write_features(const FeatureTables& features, const std::filesystem::path& out_dir);
void write_series(const std::map<std::string, PairVector>& series,
                  const std::filesystem::path& out_dir);
/// Log-Mel JSON per clip for every site whose audio file exists; returns the
/// number of files written.
std::size_t write_spectrograms(const Manifest& manifest, const RunConfig& cfg,
                               const std::filesystem::path& out_dir);

/// validate + features + similarity + correlate, writing everything under
/// cfg.out_dir.
Report run_pipeline(const RunConfig& cfg);

std::string sha256_file(const std::filesystem::path& path);

std::string_view tool_version();

}  // namespace soundscape
