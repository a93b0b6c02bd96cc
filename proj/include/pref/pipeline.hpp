#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pref/data.hpp"
#include "pref/encode.hpp"
#include "pref/eval.hpp"

namespace pref {

enum class PcaFitMode { Source, Gallery };

std::string_view to_string(PcaFitMode mode);
PcaFitMode parse_pca_fit(std::string_view name);

inline constexpr std::array<int, 5> kPcaSweep = {20, 30, 40, 50, 60};

struct RunConfig {
  std::string subcommand;
  std::vector<std::filesystem::path> sources;
  std::optional<std::filesystem::path> target;
  int atoms = kDefaultAtoms;
  double lambda = kDefaultLambda;
  long iterations = kDefaultIterations;
  ResidualMetric metric = ResidualMetric::Cosine;
  Pooling pooling = Pooling::Average;
  int pca_dim = 50;
  PcaFitMode pca_fit = PcaFitMode::Source;
  bool spatial = false;
  int trials = kDefaultTrials;
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
  int jobs = 0;  // 0: available parallelism

  // Training monitor.
  std::size_t heldout = 500;
  long checkpoint_every = 0;  // 0: iterations / 100

  // Artifact inputs; default to `out`.
  std::optional<std::filesystem::path> dict_dir;
  std::optional<std::filesystem::path> encode_dir;

  // Evaluation extras.
  bool sweep_metrics = false;
  bool sweep_pca = false;
  bool dump_rankings = false;
  std::optional<ColorSpace> channel;
};

/// Checks the invariants that do not need any input file.
void validate(const RunConfig& cfg);

/// validate() plus u < k on the flag values.
void validate_dimensions(const RunConfig& cfg);

/// Everything that determines the artifacts; output locations are left out
/// so two runs into different directories echo the same config.
nlohmann::json config_echo(const RunConfig& cfg);

/// Learns one dictionary per colorspace from the source manifests and writes
/// the bundles plus `train_log.csv` into `out`.
void cmd_train_dict(const RunConfig& cfg, std::ostream& log);

/// Encodes the target manifest with the trained dictionaries, fits PCA and
/// writes the PCA models, pooled tables and the signature table.
void cmd_encode(const RunConfig& cfg, std::ostream& log);

/// Runs the evaluation protocol and writes report(s) and CMC CSV(s). Returns
/// the primary report (the first one when sweeping).
EvalReport cmd_evaluate(const RunConfig& cfg, std::ostream& log);

}  // namespace pref
