// soundscape: command-line front end for the soundscape/visual alignment
// pipeline. Exit codes: 0 success, 1 input error, 2 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "soundscape/audio_dsp.hpp"
#include "soundscape/errors.hpp"
#include "soundscape/feature_store.hpp"
#include "soundscape/manifest.hpp"
#include "soundscape/pipeline.hpp"
#include "soundscape/wav.hpp"

namespace {

namespace fs = std::filesystem;
using namespace soundscape;

constexpr int kInputError = 1;
constexpr int kInternalError = 2;

struct CommonOptions {
  std::string manifest;
  std::string features;
  std::string out;
  std::string exclude = "speech_dominated,indoor,transient_event,adverse_conditions";
  std::vector<std::string> cities;
  bool strict_files = false;
  std::uint64_t seed = 42;
  std::size_t permutations = 9999;
  unsigned threads = 0;
};

FlagSet parse_exclude(std::string text) {
  if (text == "none" || text.empty()) return {};
  std::replace(text.begin(), text.end(), ',', ';');
  return parse_flag_list(text);
}

void add_spectrogram_options(CLI::App* cmd, SpectrogramConfig& cfg, double& clip_seconds) {
  cmd->add_option("--sample-rate", cfg.sample_rate_hz, "expected input sample rate (Hz)")
      ->capture_default_str();
  cmd->add_option("--n-fft", cfg.n_fft, "STFT window length in samples")->capture_default_str();
  cmd->add_option("--hop", cfg.hop, "STFT hop in samples")->capture_default_str();
  cmd->add_option("--n-mels", cfg.n_mels, "Mel band count")->capture_default_str();
  cmd->add_option("--fmin", cfg.fmin_hz, "lowest Mel edge (Hz)")->capture_default_str();
  cmd->add_option("--fmax", cfg.fmax_hz, "highest Mel edge (Hz)")->capture_default_str();
  cmd->add_option("--log-floor", cfg.log_floor, "power floor before the logarithm")
      ->capture_default_str();
  cmd->add_option("--clip-seconds", clip_seconds, "clip length")->capture_default_str();
}

void add_run_options(CLI::App* cmd, CommonOptions& opt, bool stats) {
  cmd->add_option("--manifest", opt.manifest, "site manifest CSV")->required();
  cmd->add_option("--features", opt.features, "feature directory")->required();
  cmd->add_option("--out", opt.out, "output directory")->required();
  cmd->add_option("--exclude", opt.exclude,
                  "exclusion flags, comma separated, or 'none'")
      ->capture_default_str();
  cmd->add_option("--city", opt.cities, "restrict to a city (repeatable)");
  cmd->add_flag("--strict-files", opt.strict_files, "require referenced media files to exist");
  cmd->add_option("--threads", opt.threads, "worker threads for permutation tests (0 = auto)");
  if (stats) {
    cmd->add_option("--seed", opt.seed, "permutation seed")->capture_default_str();
    cmd->add_option("--permutations", opt.permutations, "Mantel permutations")
        ->capture_default_str();
  }
}

RunConfig make_config(const CommonOptions& opt) {
  RunConfig cfg;
  cfg.manifest_path = opt.manifest;
  cfg.features_dir = opt.features;
  cfg.out_dir = opt.out;
  cfg.exclude = parse_exclude(opt.exclude);
  cfg.cities = opt.cities;
  cfg.strict_files = opt.strict_files;
  cfg.seed = opt.seed;
  cfg.permutations = opt.permutations;
  cfg.threads = opt.threads;
  return cfg;
}

int run_validate(const std::string& manifest_path, bool strict_files) {
  const auto manifest = load_manifest(fs::path(manifest_path));
  const auto violations = validate_manifest(
      manifest, {.strict_files = strict_files, .base_dir = fs::path(manifest_path).parent_path()});
  for (const auto& v : violations) std::cout << v.site_id << ": " << v.message << '\n';
  if (!violations.empty()) {
    std::cerr << violations.size() << " violation(s) in " << manifest_path << '\n';
    return kInputError;
  }
  std::cout << "OK " << manifest.sites.size() << " sites\n";
  return 0;
}

int run_spectrogram(const std::vector<std::string>& audio, const std::string& out_dir,
                    const SpectrogramConfig& cfg, double clip_seconds, std::size_t patch_h,
                    std::size_t patch_w) {
  for (const auto& file : audio) {
    const auto clips = segment_waveform(read_wav(fs::path(file)), clip_seconds);
    const std::string stem = fs::path(file).stem().string();
    for (std::size_t k = 0; k < clips.size(); ++k) {
      const auto spec = log_mel_spectrogram(clips[k], cfg);
      const fs::path path = fs::path(out_dir) / (stem + ".clip" + std::to_string(k) + ".json");
      fs::create_directories(path.parent_path());
      std::ofstream out(path, std::ios::binary);
      if (!out) throw InputError("cannot write '" + path.string() + "'");
      write_real_raster(out, spec.values);
      std::cout << path.string() << ' ' << spec.values.rows() << 'x' << spec.values.cols();
      if (patch_h && patch_w) {
        std::cout << " patches=" << patchify(spec, patch_h, patch_w).count();
      }
      std::cout << '\n';
    }
    if (clips.empty()) std::cerr << file << ": shorter than half a clip, nothing written\n";
  }
  return 0;
}

int summarize(const Report& report, bool with_rows) {
  if (with_rows) {
    for (const auto& row : report.rows) {
      std::cout << row.scope << '\t' << row.comparison_id << "\tr=" << row.r
                << "\tp_t(naive)=" << row.p_t << "\tp_perm=" << row.p_perm
                << "\tn_sites=" << row.n_sites << '\n';
    }
  }
  for (const auto& s : report.skipped) {
    std::cerr << "skipped " << s.scope << ' ' << s.comparison_id << ": " << s.reason << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-modal soundscape / visual scene alignment analysis"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  std::string validate_manifest_path;
  bool validate_strict = false;
  auto* validate_cmd = app.add_subcommand("validate", "check a site manifest");
  validate_cmd->add_option("--manifest", validate_manifest_path, "site manifest CSV")->required();
  validate_cmd->add_flag("--strict-files", validate_strict, "require referenced files to exist");

  std::vector<std::string> audio;
  std::string spec_out;
  SpectrogramConfig spec_cfg;
  double clip_seconds = 10.0;
  std::size_t patch_h = 0, patch_w = 0;
  auto* spec_cmd = app.add_subcommand("spectrogram", "WAV -> log-Mel spectrogram JSON per clip");
  spec_cmd->add_option("--audio", audio, "WAV file (repeatable)")->required();
  spec_cmd->add_option("--out", spec_out, "output directory")->required();
  spec_cmd->add_option("--patch-h", patch_h, "report patch count for this patch height");
  spec_cmd->add_option("--patch-w", patch_w, "report patch count for this patch width");
  add_spectrogram_options(spec_cmd, spec_cfg, clip_seconds);

  CommonOptions features_opt, similarity_opt, correlate_opt, pipeline_opt;
  auto* features_cmd = app.add_subcommand("features", "rasters -> class distributions -> BGA");
  add_run_options(features_cmd, features_opt, false);
  auto* similarity_cmd = app.add_subcommand("similarity", "write pairwise similarity CSVs");
  add_run_options(similarity_cmd, similarity_opt, false);
  auto* correlate_cmd = app.add_subcommand("correlate", "correlation report");
  add_run_options(correlate_cmd, correlate_opt, true);
  auto* pipeline_cmd = app.add_subcommand("pipeline", "all stages");
  add_run_options(pipeline_cmd, pipeline_opt, true);
  bool export_spectrograms = false;
  pipeline_cmd->add_flag("--spectrograms", export_spectrograms,
                         "also export log-Mel spectrograms for manifest audio");
  SpectrogramConfig pipeline_spec;
  double pipeline_clip = 10.0;
  add_spectrogram_options(pipeline_cmd, pipeline_spec, pipeline_clip);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (*validate_cmd) return run_validate(validate_manifest_path, validate_strict);
    if (*spec_cmd) {
      return run_spectrogram(audio, spec_out, spec_cfg, clip_seconds, patch_h, patch_w);
    }
    if (*features_cmd) {
      auto cfg = make_config(features_opt);
      cfg.outputs = {.features = true, .series = false, .report = false};
      return summarize(run_pipeline(cfg), false);
    }
    if (*similarity_cmd) {
      auto cfg = make_config(similarity_opt);
      cfg.outputs = {.features = false, .series = true, .report = false};
      return summarize(run_pipeline(cfg), false);
    }
    if (*correlate_cmd) {
      auto cfg = make_config(correlate_opt);
      cfg.outputs = {.features = false, .series = false, .report = true};
      return summarize(run_pipeline(cfg), true);
    }
    if (*pipeline_cmd) {
      auto cfg = make_config(pipeline_opt);
      cfg.spectrogram = pipeline_spec;
      cfg.clip_seconds = pipeline_clip;
      cfg.export_spectrograms = export_spectrograms;
      return summarize(run_pipeline(cfg), true);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInternalError;
}
