#include "soundscape/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "soundscape/errors.hpp"
#include "soundscape/feature_store.hpp"
#include "soundscape/wav.hpp"

#ifndef SOUNDSCAPE_VERSION
#define SOUNDSCAPE_VERSION "0.0.0"
#endif

namespace soundscape {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr std::array<std::pair<const char*, Modality>, 2> kViews{{
    {"street", Modality::kStreet},
    {"aerial", Modality::kAerial},
}};

std::string format6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::ofstream open_output(const fs::path& path) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw InputError("cannot create directory '" + path.parent_path().string() + "'");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

void close_checked(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

std::string series_file_name(std::string_view id) {
  std::string name(id);
  std::replace(name.begin(), name.end(), ':', '_');
  return name + ".csv";
}

std::set<std::string> site_set(const PairVector& pv) {
  return {pv.index().sites().begin(), pv.index().sites().end()};
}

ordered_json flag_list(const FlagSet& flags) {
  ordered_json out = ordered_json::array();
  for (auto f : flags) out.push_back(std::string(to_string(f)));
  return out;
}

ordered_json tally_json(const UnmappedTally& tally) {
  ordered_json out = ordered_json::object();
  for (const auto& [name, n] : tally) out[name] = n;
  return out;
}

ordered_json make_metadata(const RunConfig& cfg, const LoadedInputs& inputs,
                           const FeatureTables& features, const std::vector<std::string>& notes,
                           const Report& report) {
  ordered_json meta;
  meta["tool"] = "soundscape";
  meta["version"] = std::string(tool_version());

  ordered_json config;
  config["manifest"] = cfg.manifest_path.generic_string();
  config["features"] = cfg.features_dir.generic_string();
  config["seed"] = cfg.seed;
  config["permutations"] = cfg.permutations;
  config["exclude"] = flag_list(cfg.exclude);
  config["cities"] = cfg.cities;
  config["strict_files"] = cfg.strict_files;
  ordered_json spec;
  spec["sample_rate_hz"] = cfg.spectrogram.sample_rate_hz;
  spec["n_fft"] = cfg.spectrogram.n_fft;
  spec["hop"] = cfg.spectrogram.hop;
  spec["n_mels"] = cfg.spectrogram.n_mels;
  spec["fmin_hz"] = cfg.spectrogram.fmin_hz;
  spec["fmax_hz"] = cfg.spectrogram.fmax_hz;
  spec["log_floor"] = cfg.spectrogram.log_floor;
  spec["clip_seconds"] = cfg.clip_seconds;
  config["spectrogram"] = spec;
  meta["config"] = config;

  ordered_json digests = ordered_json::object();
  for (const auto& [name, hex] : inputs.digests) digests[name] = hex;
  meta["input_sha256"] = digests;

  meta["sites"] = {{"in_manifest", inputs.sites_before_filter},
                   {"analyzed", inputs.manifest.sites.size()}};

  ordered_json legend;
  legend["p_t"] = "naive two-sided t-test on pair correlation; pairs are not independent";
  legend["p_perm"] = "Mantel permutation test over site labels";
  if (inputs.audio_table) {
    legend["audio_bga"] = "depends on the user-supplied audio BGA table, not a published mapping";
  }
  meta["legend"] = legend;

  ordered_json skipped = ordered_json::array();
  for (const auto& s : report.skipped) {
    skipped.push_back({{"scope", s.scope}, {"comparison_id", s.comparison_id}, {"reason", s.reason}});
  }
  meta["skipped"] = skipped;

  ordered_json unmapped;
  unmapped["street"] = tally_json(features.street.unmapped);
  unmapped["aerial"] = tally_json(features.aerial.unmapped);
  unmapped["audio"] = tally_json(features.audio_unmapped);
  meta["unmapped_classes"] = unmapped;

  ordered_json warnings = ordered_json::array();
  for (const auto& w : inputs.warnings) warnings.push_back(w);
  for (const auto& n : notes) warnings.push_back(n);
  meta["warnings"] = warnings;
  return meta;
}

void add_series(std::map<std::string, PairVector>& out, const std::string& id,
                const VectorsBySite& vectors) {
  if (vectors.size() >= 2) out.emplace(id, pairwise_similarity(vectors, id));
}

}  // namespace

std::string_view tool_version() { return SOUNDSCAPE_VERSION; }

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 initialization failed");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned i = 0; i < len; ++i) {
    hex.push_back(kHex[md[i] >> 4]);
    hex.push_back(kHex[md[i] & 0xF]);
  }
  return hex;
}

void validate(const RunConfig& cfg) {
  if (cfg.permutations < 99) throw ConfigError("permutation count must be at least 99");
  if (cfg.manifest_path.empty()) throw ConfigError("no manifest given");
  if (!(cfg.clip_seconds > 0.0)) throw ConfigError("clip length must be positive");
  try {
    validate(cfg.spectrogram, cfg.spectrogram.sample_rate_hz);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
}

LoadedInputs load_inputs(const RunConfig& cfg) {
  validate(cfg);
  LoadedInputs in;

  const Manifest full = load_manifest(cfg.manifest_path);
  in.digests["manifest"] = sha256_file(cfg.manifest_path);
  in.sites_before_filter = full.sites.size();

  const auto violations = validate_manifest(
      full, {.strict_files = cfg.strict_files, .base_dir = cfg.manifest_path.parent_path()});
  if (!violations.empty()) {
    std::string msg = "manifest '" + cfg.manifest_path.string() + "' is invalid:";
    for (const auto& v : violations) msg += "\n  " + v.site_id + ": " + v.message;
    throw InputError(msg);
  }

  in.manifest = filter_sites(full, cfg.exclude);
  if (!cfg.cities.empty()) {
    const std::set<std::string> wanted(cfg.cities.begin(), cfg.cities.end());
    std::erase_if(in.manifest.sites, [&](const SiteRecord& s) { return !wanted.contains(s.city); });
    for (const auto& city : wanted) {
      if (!std::any_of(in.manifest.sites.begin(), in.manifest.sites.end(),
                       [&](const SiteRecord& s) { return s.city == city; })) {
        throw InputError("no analyzable sites for city '" + city + "'");
      }
    }
  }
  std::set<std::string> sites;
  for (const auto& s : in.manifest.sites) sites.insert(s.site_id);

  const fs::path dir = cfg.features_dir;
  if (!dir.empty() && !fs::is_directory(dir)) {
    throw InputError("feature directory '" + dir.string() + "' does not exist");
  }
  auto track = [&](const fs::path& rel) {
    in.digests[rel.generic_string()] = sha256_file(dir / rel);
  };

  std::size_t ignored = 0;
  if (fs::exists(dir / FeatureLayout::kEmbeddings)) {
    track(FeatureLayout::kEmbeddings);
    for (auto& r : read_embeddings(dir / FeatureLayout::kEmbeddings)) {
      if (!sites.contains(r.site_id)) {
        ++ignored;
        continue;
      }
      switch (r.modality) {
        case Modality::kSound: in.sound.emplace(r.site_id, std::move(r.vector)); break;
        case Modality::kStreet: in.street.emplace(r.site_id, std::move(r.vector)); break;
        case Modality::kAerial: in.aerial.emplace(r.site_id, std::move(r.vector)); break;
        case Modality::kCombined:
          in.warnings.push_back("stored combined embedding for '" + r.site_id +
                                "' ignored; combined views are derived from street and aerial");
          break;
      }
    }
  }

  if (fs::exists(dir / FeatureLayout::kSoundClips)) {
    track(FeatureLayout::kSoundClips);
    std::map<std::string, std::map<std::size_t, std::vector<double>>> clips;
    for (auto& r : read_clip_embeddings(dir / FeatureLayout::kSoundClips)) {
      if (!sites.contains(r.site_id)) {
        ++ignored;
        continue;
      }
      clips[r.site_id].emplace(r.clip, std::move(r.vector));
    }
    for (const auto& [site, by_clip] : clips) {
      if (in.sound.contains(site)) continue;
      std::vector<std::vector<double>> vectors;
      for (const auto& entry : by_clip) vectors.push_back(entry.second);
      try {
        in.sound.emplace(site, aggregate_clip_embeddings(vectors));
      } catch (const InputError& e) {
        throw InputError("sound clips of site '" + site + "': " + e.what());
      }
    }
  }
  if (ignored > 0) {
    in.warnings.push_back(std::to_string(ignored) +
                          " embedding records refer to sites outside the analyzed set");
  }

  for (const auto& site : sites) {
    for (const auto& [view, modality] : kViews) {
      const fs::path rel = fs::path(FeatureLayout::kRasterDir) / (site + "." + view + ".json");
      if (!fs::exists(dir / rel)) continue;
      track(rel);
      auto raster = read_label_raster(dir / rel);
      (modality == Modality::kStreet ? in.street_rasters : in.aerial_rasters)
          .emplace(site, std::move(raster));
    }
  }

  const bool has_labels = fs::exists(dir / FeatureLayout::kAudioLabels);
  const bool has_table = fs::exists(dir / FeatureLayout::kAudioTable);
  if (has_labels && has_table) {
    track(FeatureLayout::kAudioLabels);
    track(FeatureLayout::kAudioTable);
    in.audio_table = load_bga_matrix(dir / FeatureLayout::kAudioTable);
    if (in.audio_table->view() != BgaView::kAudioCustom) {
      throw ConfigError("audio BGA table must declare view audio_custom");
    }
    for (auto& lp : read_label_probabilities(dir / FeatureLayout::kAudioLabels)) {
      if (sites.contains(lp.site_id)) in.audio_labels.emplace(lp.site_id, std::move(lp));
    }
  } else if (has_labels != has_table) {
    in.warnings.push_back(std::string("audio BGA path disabled: ") +
                          (has_labels ? FeatureLayout::kAudioTable : FeatureLayout::kAudioLabels) +
                          " is missing");
  }
  return in;
}

FeatureTables compute_features(const LoadedInputs& inputs) {
  FeatureTables out;
  const auto street_table = bga_matrix_for_view(BgaView::kStreet);
  const auto aerial_table = bga_matrix_for_view(BgaView::kAerial);
  auto project = [](const std::map<std::string, LabelRaster>& rasters, const BgaMatrix& table,
                    SiteFeatures& dst) {
    for (const auto& [site, raster] : rasters) {
      try {
        auto dist = class_distribution(raster);
        dst.bga.emplace(site, bga_vector(dist, table, &dst.unmapped));
        dst.distributions.emplace(site, std::move(dist));
      } catch (const InputError& e) {
        throw InputError("raster of site '" + site + "': " + e.what());
      }
    }
  };
  project(inputs.street_rasters, street_table, out.street);
  project(inputs.aerial_rasters, aerial_table, out.aerial);
  if (inputs.audio_table) {
    for (const auto& [site, lp] : inputs.audio_labels) {
      out.audio_bga.emplace(site, audio_bga_vector(lp, *inputs.audio_table, &out.audio_unmapped));
    }
  }
  return out;
}

std::map<std::string, PairVector> build_series(const LoadedInputs& inputs,
                                               const FeatureTables& features,
                                               std::vector<std::string>* notes) {
  std::map<std::string, PairVector> out;
  add_series(out, "sound", inputs.sound);
  add_series(out, "embed:street", inputs.street);
  add_series(out, "embed:aerial", inputs.aerial);

  VectorsBySite combined;
  for (const auto& [site, s] : inputs.street) {
    if (auto a = inputs.aerial.find(site); a != inputs.aerial.end()) {
      try {
        combined.emplace(site, combine_views(s, a->second));
      } catch (const InputError& e) {
        throw InputError("combined view of site '" + site + "': " + e.what());
      }
    }
  }
  add_series(out, "embed:combined", combined);

  // Sites whose BGA projection is all zero have no direction and drop out of
  // the cosine series only.
  auto nonzero = [&](const std::map<std::string, BgaVector>& bga, const std::string& label) {
    VectorsBySite v;
    for (const auto& [site, b] : bga) {
      if (b.bio > 0.0 || b.geo > 0.0 || b.anthro > 0.0) {
        const auto a = b.as_array();
        v.emplace(site, std::vector<double>(a.begin(), a.end()));
      } else if (notes) {
        notes->push_back(label + ": site '" + site + "' has an all-zero BGA vector");
      }
    }
    return v;
  };

  for (const auto& [view, modality] : kViews) {
    const auto& f = modality == Modality::kStreet ? features.street : features.aerial;
    const std::string v(view);
    add_series(out, "seg:" + v, distribution_vectors(f.distributions));
    add_series(out, "bga:" + v, nonzero(f.bga, "bga:" + v));
    if (f.bga.size() >= 2) {
      for (auto cat : kBgaCategories) {
        const std::string id = "bga-" + std::string(to_string(cat)) + ":" + v;
        out.emplace(id, bga_category_pair_similarity(f.bga, cat, id));
      }
    }
  }
  if (inputs.audio_table) add_series(out, "audio_bga", nonzero(features.audio_bga, "audio_bga"));
  return out;
}

std::vector<Comparison> comparison_set(bool with_audio) {
  std::vector<Comparison> out{
      {"embed:street~sound", "embed:street", "sound"},
      {"embed:aerial~sound", "embed:aerial", "sound"},
      {"embed:combined~sound", "embed:combined", "sound"},
      {"embed:aerial~street", "embed:aerial", "embed:street"},
  };
  for (const char* view : {"street", "aerial"}) {
    const std::string v(view);
    out.push_back({"seg:" + v + "~sound", "seg:" + v, "sound"});
    out.push_back({"bga:" + v + "~sound", "bga:" + v, "sound"});
    for (auto cat : kBgaCategories) {
      const std::string series = "bga-" + std::string(to_string(cat)) + ":" + v;
      out.push_back({series + "~sound", series, "sound"});
    }
    if (with_audio) out.push_back({"bga:" + v + "~audio_bga", "bga:" + v, "audio_bga"});
  }
  return out;
}

Report correlate_series(const std::map<std::string, PairVector>& series,
                        const Manifest& manifest, const RunConfig& cfg) {
  std::map<std::string, std::set<std::string>> scopes;
  for (const auto& s : manifest.sites) {
    scopes[std::string(kAllScope)].insert(s.site_id);
    if (s.city == kAllScope) {
      throw InputError("city name '" + std::string(kAllScope) + "' is reserved");
    }
    scopes[s.city].insert(s.site_id);
  }

  Report report;
  const bool with_audio = series.contains("audio_bga");
  for (const auto& cmp : comparison_set(with_audio)) {
    const auto x = series.find(cmp.x_series);
    const auto y = series.find(cmp.y_series);
    for (const auto& [scope, scope_sites] : scopes) {
      auto skip = [&](std::string reason) {
        report.skipped.push_back({scope, cmp.id, std::move(reason)});
      };
      if (x == series.end() || y == series.end()) {
        skip("series '" + (x == series.end() ? cmp.x_series : cmp.y_series) +
             "' is unavailable (fewer than 2 sites carry it)");
        continue;
      }
      std::set<std::string> common;
      const auto xs = site_set(x->second);
      for (const auto& site : y->second.index().sites()) {
        if (xs.contains(site) && scope_sites.contains(site)) common.insert(site);
      }
      if (common.size() < 3) {
        skip("only " + std::to_string(common.size()) + " complete-case sites");
        continue;
      }
      const auto xr = x->second.restricted_to(common);
      const auto yr = y->second.restricted_to(common);
      try {
        const auto c = correlate(xr, yr, cmp.id, scope, cfg.permutations, cfg.seed, cfg.threads);
        report.rows.push_back(
            {c.scope, c.comparison_id, c.r, c.p_t, c.p_t_saturated, c.p_perm, c.n_sites, c.n_pairs});
      } catch (const DegenerateSeriesError&) {
        skip("a similarity series is constant over the complete-case sites");
      }
    }
  }
  std::sort(report.rows.begin(), report.rows.end());
  std::stable_sort(report.skipped.begin(), report.skipped.end(),
                   [](const SkippedComparison& a, const SkippedComparison& b) {
                     return std::tie(a.scope, a.comparison_id) < std::tie(b.scope, b.comparison_id);
                   });
  return report;
}

void emit_report(const Report& report, const fs::path& out_dir) {
  {
    const fs::path path = out_dir / "report.csv";
    auto out = open_output(path);
    out << "scope,comparison_id,r,p_t,p_perm,n_sites,n_pairs\n";
    for (const auto& row : report.rows) {
      out << row.scope << ',' << row.comparison_id << ',' << format6(row.r) << ','
          << format6(row.p_t) << ',' << format6(row.p_perm) << ',' << row.n_sites << ','
          << row.n_pairs << '\n';
    }
    close_checked(out, path);
  }
  {
    const fs::path path = out_dir / "report.json";
    auto out = open_output(path);
    out << "{\n  \"metadata\": " << report.metadata.dump() << ",\n  \"rows\": [";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      const auto& row = report.rows[i];
      out << (i ? ",\n    " : "\n    ") << "{\"scope\":" << nlohmann::json(row.scope).dump()
          << ",\"comparison_id\":" << nlohmann::json(row.comparison_id).dump()
          << ",\"r\":" << format_real(row.r) << ",\"p_t\":" << format_real(row.p_t)
          << ",\"p_t_saturated\":" << (row.p_t_saturated ? "true" : "false")
          << ",\"p_perm\":" << format_real(row.p_perm) << ",\"n_sites\":" << row.n_sites
          << ",\"n_pairs\":" << row.n_pairs << '}';
    }
    out << (report.rows.empty() ? "]\n}\n" : "\n  ]\n}\n");
    close_checked(out, path);
  }
}

void write_features(const FeatureTables& features, const fs::path& out_dir) {
  const fs::path dist_path = out_dir / "features" / "class_distributions.jsonl";
  const fs::path bga_path = out_dir / "features" / "bga_vectors.jsonl";
  auto dist_out = open_output(dist_path);
  auto bga_out = open_output(bga_path);
  for (const auto& [view, modality] : kViews) {
    const auto& f = modality == Modality::kStreet ? features.street : features.aerial;
    for (const auto& [site, d] : f.distributions) {
      dist_out << "{\"site_id\":" << nlohmann::json(site).dump() << ",\"view\":\"" << view
               << "\",\"total_pixels\":" << d.total_pixels << ",\"proportions\":{";
      bool first = true;
      for (const auto& [name, p] : d.proportions) {
        dist_out << (first ? "" : ",") << nlohmann::json(name).dump() << ':' << format_real(p);
        first = false;
      }
      dist_out << "}}\n";
    }
    for (const auto& [site, b] : f.bga) {
      bga_out << "{\"site_id\":" << nlohmann::json(site).dump() << ",\"view\":\"" << view
              << "\",\"bio\":" << format_real(b.bio) << ",\"geo\":" << format_real(b.geo)
              << ",\"anthro\":" << format_real(b.anthro) << "}\n";
    }
  }
  for (const auto& [site, b] : features.audio_bga) {
    bga_out << "{\"site_id\":" << nlohmann::json(site).dump()
            << ",\"view\":\"audio_custom\",\"bio\":" << format_real(b.bio)
            << ",\"geo\":" << format_real(b.geo) << ",\"anthro\":" << format_real(b.anthro)
            << "}\n";
  }
  close_checked(dist_out, dist_path);
  close_checked(bga_out, bga_path);
}

void write_series(const std::map<std::string, PairVector>& series, const fs::path& out_dir) {
  for (const auto& [id, pv] : series) {
    const fs::path path = out_dir / "pairs" / series_file_name(id);
    auto out = open_output(path);
    write_pair_csv(out, pv);
    close_checked(out, path);
  }
}

std::size_t write_spectrograms(const Manifest& manifest, const RunConfig& cfg,
                               const fs::path& out_dir) {
  std::size_t written = 0;
  const fs::path base = cfg.manifest_path.parent_path();
  for (const auto& site : manifest.sites) {
    if (!site.audio_path) continue;
    fs::path audio(*site.audio_path);
    if (audio.is_relative()) audio = base / audio;
    if (!fs::exists(audio)) continue;
    const auto clips = segment_waveform(read_wav(audio), cfg.clip_seconds);
    for (std::size_t k = 0; k < clips.size(); ++k) {
      const auto spec = log_mel_spectrogram(clips[k], cfg.spectrogram);
      const fs::path path =
          out_dir / "spectrograms" / (site.site_id + ".clip" + std::to_string(k) + ".json");
      auto out = open_output(path);
      write_real_raster(out, spec.values);
      close_checked(out, path);
      ++written;
    }
  }
  return written;
}

Report run_pipeline(const RunConfig& cfg) {
  const auto inputs = load_inputs(cfg);
  const auto features = compute_features(inputs);
  std::vector<std::string> notes;
  const auto series = build_series(inputs, features, &notes);

  Report report;
  if (cfg.outputs.report) report = correlate_series(series, inputs.manifest, cfg);
  report.metadata = make_metadata(cfg, inputs, features, notes, report);

  if (cfg.outputs.features) write_features(features, cfg.out_dir);
  if (cfg.outputs.series) write_series(series, cfg.out_dir);
  if (cfg.export_spectrograms) write_spectrograms(inputs.manifest, cfg, cfg.out_dir);
  if (cfg.outputs.report) emit_report(report, cfg.out_dir);
  return report;
}

}  // namespace soundscape
