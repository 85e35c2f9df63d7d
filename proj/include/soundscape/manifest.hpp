#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace soundscape {

/// Manual curation flags. A site carrying any flag in the active exclusion
/// policy is dropped before analysis.
enum class ExclusionFlag {
  kSpeechDominated,
  kIndoor,
  kTransientEvent,
  kAdverseConditions,
};

using FlagSet = std::set<ExclusionFlag>;

std::string_view to_string(ExclusionFlag flag);
/// Throws FormatError for anything outside the closed set of flag names.
ExclusionFlag parse_flag(std::string_view text);
/// Parses a separator-delimited list ("speech_dominated;indoor"). Empty text
/// yields an empty set.
FlagSet parse_flag_list(std::string_view text, char separator = ';');
FlagSet all_flags();

struct SiteRecord {
  std::string site_id;
  std::string city;
  double lat = 0.0;
  double lon = 0.0;
  std::optional<std::string> audio_path;
  std::optional<std::string> street_image_path;
  std::optional<std::string> aerial_image_path;
  FlagSet flags;

  bool operator==(const SiteRecord&) const = default;
};

struct Manifest {
  std::vector<SiteRecord> sites;
  std::string source_path;

  const SiteRecord* find(std::string_view site_id) const;
  bool operator==(const Manifest&) const = default;
};

inline constexpr std::string_view kManifestHeader =
    "site_id,city,lat,lon,audio_path,street_image_path,aerial_image_path,flags";

/// Parses the CSV manifest. Errors carry the 1-based row number counted with
/// the header as row 1.
Manifest load_manifest(std::istream& in, std::string source_path = "<stream>");
Manifest load_manifest(const std::filesystem::path& path);

void write_manifest(std::ostream& out, const Manifest& manifest);

struct Violation {
  std::string site_id;
  std::string message;
};

struct ValidationOptions {
  bool strict_files = false;
  /// Relative modality paths resolve against this directory.
  std::filesystem::path base_dir;
};

std::vector<Violation> validate_manifest(const Manifest& manifest,
                                         const ValidationOptions& options = {});

Manifest filter_sites(const Manifest& manifest, const FlagSet& policy);

}  // namespace soundscape
