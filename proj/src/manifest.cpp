#include "soundscape/manifest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "csv.hpp"
#include "soundscape/errors.hpp"

namespace soundscape {
namespace {

constexpr std::array<std::pair<ExclusionFlag, std::string_view>, 4> kFlagNames{{
    {ExclusionFlag::kSpeechDominated, "speech_dominated"},
    {ExclusionFlag::kIndoor, "indoor"},
    {ExclusionFlag::kTransientEvent, "transient_event"},
    {ExclusionFlag::kAdverseConditions, "adverse_conditions"},
}};

constexpr std::array<std::string_view, 8> kColumns{
    "site_id",           "city",
    "lat",               "lon",
    "audio_path",        "street_image_path",
    "aerial_image_path", "flags"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double parse_coordinate(std::string_view text, const char* name, std::size_t row) {
  text = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(value)) {
    throw LoadError(std::string("unparseable ") + name + " '" + std::string(text) + "'",
                    row);
  }
  return value;
}

std::optional<std::string> optional_path(std::string_view cell) {
  cell = trim(cell);
  if (cell.empty()) return std::nullopt;
  return std::string(cell);
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view to_string(ExclusionFlag flag) {
  for (const auto& [f, name] : kFlagNames) {
    if (f == flag) return name;
  }
  return "unknown";
}

ExclusionFlag parse_flag(std::string_view text) {
  text = trim(text);
  for (const auto& [f, name] : kFlagNames) {
    if (name == text) return f;
  }
  throw FormatError("unknown exclusion flag '" + std::string(text) + "'");
}

FlagSet parse_flag_list(std::string_view text, char separator) {
  FlagSet flags;
  text = trim(text);
  while (!text.empty()) {
    auto pos = text.find(separator);
    auto item = trim(text.substr(0, pos));
    if (!item.empty()) flags.insert(parse_flag(item));
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return flags;
}

FlagSet all_flags() {
  FlagSet flags;
  for (const auto& entry : kFlagNames) flags.insert(entry.first);
  return flags;
}

const SiteRecord* Manifest::find(std::string_view site_id) const {
  auto it = std::find_if(sites.begin(), sites.end(),
                         [&](const SiteRecord& s) { return s.site_id == site_id; });
  return it == sites.end() ? nullptr : &*it;
}

Manifest load_manifest(std::istream& in, std::string source_path) {
  Manifest manifest;
  manifest.source_path = std::move(source_path);

  std::vector<std::string> fields;
  std::size_t row = 1;
  try {
    if (!detail::read_csv_record(in, fields)) {
      throw LoadError("missing header", row);
    }
  } catch (const LoadError&) {
    throw;
  } catch (const FormatError& e) {
    throw LoadError(e.what(), row);
  }
  if (!fields.empty() && fields[0].starts_with("\xEF\xBB\xBF")) {
    fields[0].erase(0, 3);
  }

  std::array<std::size_t, kColumns.size()> column_of{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    auto it = std::find_if(fields.begin(), fields.end(), [&](const std::string& h) {
      return trim(h) == kColumns[c];
    });
    if (it == fields.end()) {
      throw LoadError("missing required column '" + std::string(kColumns[c]) + "'", row);
    }
    column_of[c] = static_cast<std::size_t>(it - fields.begin());
  }
  const std::size_t width = fields.size();

  while (true) {
    ++row;
    try {
      if (!detail::read_csv_record(in, fields)) break;
    } catch (const FormatError& e) {
      throw LoadError(e.what(), row);
    }
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
    if (fields.size() != width) {
      throw LoadError("expected " + std::to_string(width) + " fields, found " +
                          std::to_string(fields.size()),
                      row);
    }
    auto cell = [&](std::size_t c) -> std::string_view { return fields[column_of[c]]; };

    SiteRecord site;
    site.site_id = std::string(trim(cell(0)));
    site.city = std::string(trim(cell(1)));
    site.lat = parse_coordinate(cell(2), "latitude", row);
    site.lon = parse_coordinate(cell(3), "longitude", row);
    if (site.lat < -90.0 || site.lat > 90.0) throw LoadError("latitude out of range", row);
    if (site.lon < -180.0 || site.lon > 180.0) {
      throw LoadError("longitude out of range", row);
    }
    site.audio_path = optional_path(cell(4));
    site.street_image_path = optional_path(cell(5));
    site.aerial_image_path = optional_path(cell(6));
    try {
      site.flags = parse_flag_list(cell(7));
    } catch (const FormatError& e) {
      throw LoadError(e.what(), row);
    }
    manifest.sites.push_back(std::move(site));
  }
  return manifest;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open manifest '" + path.string() + "'");
  return load_manifest(in, path.string());
}

void write_manifest(std::ostream& out, const Manifest& manifest) {
  out << kManifestHeader << '\n';
  for (const auto& s : manifest.sites) {
    std::string flags;
    for (auto f : s.flags) {
      if (!flags.empty()) flags.push_back(';');
      flags += to_string(f);
    }
    out << detail::csv_escape(s.site_id) << ',' << detail::csv_escape(s.city) << ','
        << format_real(s.lat) << ',' << format_real(s.lon) << ','
        << detail::csv_escape(s.audio_path.value_or("")) << ','
        << detail::csv_escape(s.street_image_path.value_or("")) << ','
        << detail::csv_escape(s.aerial_image_path.value_or("")) << ',' << flags << '\n';
  }
}

std::vector<Violation> validate_manifest(const Manifest& manifest,
                                         const ValidationOptions& options) {
  std::vector<Violation> report;
  std::map<std::string, std::size_t> seen;

  for (const auto& s : manifest.sites) {
    if (s.site_id.empty()) report.push_back({s.site_id, "empty site_id"});
    if (!s.site_id.empty() && ++seen[s.site_id] == 2) {
      report.push_back({s.site_id, "duplicate site_id '" + s.site_id + "'"});
    }
    if (!(s.lat >= -90.0 && s.lat <= 90.0)) {
      report.push_back({s.site_id, "latitude out of range"});
    }
    if (!(s.lon >= -180.0 && s.lon <= 180.0)) {
      report.push_back({s.site_id, "longitude out of range"});
    }
    if (!s.audio_path && !s.street_image_path && !s.aerial_image_path) {
      report.push_back({s.site_id, "no modality path present"});
    }
    if (options.strict_files) {
      for (const auto* p : {&s.audio_path, &s.street_image_path, &s.aerial_image_path}) {
        if (!*p) continue;
        std::filesystem::path file(**p);
        if (file.is_relative()) file = options.base_dir / file;
        std::error_code ec;
        if (!std::filesystem::exists(file, ec)) {
          report.push_back({s.site_id, "referenced file does not exist: " + **p});
        }
      }
    }
  }
  return report;
}

Manifest filter_sites(const Manifest& manifest, const FlagSet& policy) {
  Manifest out;
  out.source_path = manifest.source_path;
  for (const auto& s : manifest.sites) {
    bool excluded = std::any_of(s.flags.begin(), s.flags.end(),
                                [&](ExclusionFlag f) { return policy.contains(f); });
    if (!excluded) out.sites.push_back(s);
  }
  return out;
}

}  // namespace soundscape
