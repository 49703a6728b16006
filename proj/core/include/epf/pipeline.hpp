#pragma once

#include "epf/marketdata.hpp"
#include "epf/pointmodels.hpp"
#include "epf/synth.hpp"
#include "epf/trading.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace epf {

inline constexpr const char* kVersion = "0.1.0";

struct ModelConfig {
  ModelKind kind = ModelKind::naive;
  RollingOptions options;
};

enum class ProbMethod { error_shift, qra };

struct ProbConfig {
  ProbMethod method = ProbMethod::error_shift;
  int lookback_days = 90;   // error history / QRA calibration window
  int num_levels = 99;      // percentile grid size
  int paths = 0;            // bootstrap ensemble size per day, 0 disables
  int paths_lookback = 90;
};

struct StrategyConfig {
  bool spread = false;
  std::optional<BatteryConfig> battery;
};

/// One experiment: data source, models, probabilistic layer, evaluation
/// range, strategies, seed, output directory. Parsed from a single JSON file
/// so runs stay diffable and archivable.
struct RunConfig {
  std::optional<std::filesystem::path> csv_path;
  std::optional<SynthSpec> synth;
  DateRange test_range{};
  std::vector<ModelConfig> models;
  ProbConfig prob;
  StrategyConfig strategies;
  std::uint64_t seed = 1;
  std::filesystem::path outdir = "out";

  void validate() const;
};

RunConfig parse_run_config_file(const std::filesystem::path& path);
RunConfig parse_run_config_json(const std::string& json_text);

/// Parse a standalone SynthSpec JSON object (the `generate` verb's config).
SynthSpec parse_synth_spec_json(const std::string& json_text);

/// Canonical JSON rendering of a config; hashing this gives the config hash
/// recorded in the manifest.
std::string canonical_config_json(const RunConfig& config);

struct RunArtifacts {
  std::vector<std::filesystem::path> files;
  std::string manifest_path;
};

/// Execute ingest -> point models -> probabilistic layer -> scoring ->
/// trading and write every declared artifact plus a manifest. Reruns of the
/// same config produce byte-identical outputs; on failure partial outputs are
/// removed and the stage is named in the error.
RunArtifacts run_pipeline(const RunConfig& config);

/// Re-run the config embedded in a previously written manifest.
RunArtifacts run_manifest(const std::filesystem::path& manifest_path,
                          const std::filesystem::path& outdir_override = {});

}  // namespace epf
