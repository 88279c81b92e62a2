#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdp/datagen.hpp"
#include "cdp/error.hpp"
#include "cdp/evaluation.hpp"
#include "cdp/features.hpp"
#include "cdp/learn.hpp"

namespace cdp {

std::string_view tool_version();

struct DataConfig {
  /// Built-in name or pcp file path.
  std::string group = "bs12";
  CollectionId collection = CollectionId::D0;
  std::size_t pairs = 2000;
  std::int64_t min_length = 5;
  std::int64_t max_length = 104;
  std::size_t pool_size = 0;
  std::int64_t d3_length_cap = 0;
  std::size_t max_restarts = 1000;
};

struct ModelConfig {
  /// tree, forest or ntnn.
  std::string family = "forest";
  std::string recipe = "c1";
  SplitCriterion criterion = SplitCriterion::entropy;
  /// "none", "auto" or a level count.
  std::string depth = "none";
  std::size_t trees = 10;
  ForestVote vote = ForestVote::vote;
  std::size_t patterns = 20;
  std::size_t width = 3;
  NtnnCriterion ntnn_criterion = NtnnCriterion::voting;
  NtnnOptimizeParams optimize;
};

/// Hyperparameter lists; an unset list means the model setting alone.
struct GridConfig {
  std::optional<std::vector<std::string>> groups;
  std::optional<std::vector<std::string>> families;
  std::optional<std::vector<std::string>> recipes;
  std::optional<std::vector<std::string>> criteria;
  std::optional<std::vector<std::string>> depths;
  std::optional<std::vector<std::string>> trees;
  std::optional<std::vector<std::string>> patterns;
  std::optional<std::vector<std::string>> widths;
  std::optional<std::vector<std::string>> ntnn_criteria;

  bool any() const;
};

struct ExperimentConfig {
  DataConfig data;
  ModelConfig model;
  GridConfig grid;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::filesystem::path out = "run";

  /// Sets `section.key` (or a top-level key) from its text values.
  /// CONFIG_ERROR on unknown keys or malformed values.
  void set(const std::string& key, const std::vector<std::string>& values);
  void set(const std::string& key, const std::string& value) { set(key, std::vector<std::string>{value}); }

  /// CONFIG_ERROR on out-of-range or inconsistent settings.
  void validate() const;

  /// Every resolved setting in config-file syntax.
  std::string snapshot() const;
  /// FNV-1a of the snapshot without `out` and `workers`, in hex.
  std::string hash() const;

  /// Full-size generation settings.
  void apply_full_scale();
};

/// Reads an INI-style file of `[section]` blocks and `key = value` lines.
void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

/// Depth limit for a training-set size.
std::optional<int> resolve_depth(const std::string& depth, std::size_t samples);

TrainingSet featurize(const FeatureRecipe& recipe, const Dataset& data, unsigned workers = 1);

struct TrainOutcome {
  Model model;
  /// Set for N-tuple networks.
  std::optional<NtnnRun> run;
};

/// `opt` is required for N-tuple networks only.
TrainOutcome train_model(const ModelConfig& mc, const FeatureRecipe& recipe, const Dataset& train,
                         const Dataset* opt, std::uint64_t seed, unsigned workers = 1);

std::string ntnn_run_json(const NtnnRun& run);

// ---- run directory ----

std::filesystem::path dataset_path(const ExperimentConfig& cfg, SplitId split);
std::filesystem::path default_model_path(const ExperimentConfig& cfg);

/// Writes `<out>/config/<command>.ini` and returns its path.
std::filesystem::path write_snapshot(const ExperimentConfig& cfg, const std::string& command);

/// Adds or replaces manifest entries for `files` (paths inside the run directory).
void update_manifest(const ExperimentConfig& cfg, const std::string& command,
                     const std::vector<std::filesystem::path>& files);

std::string file_digest(const std::filesystem::path& path);

// ---- commands ----

struct GenResult {
  std::vector<std::filesystem::path> files;
  std::array<std::size_t, 3> sizes{};
};

GenResult cmd_gen(const ExperimentConfig& cfg);

struct TrainResult {
  std::filesystem::path model_path;
  std::optional<NtnnRun> run;
};

TrainResult cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& train_path,
                      const std::filesystem::path& opt_path, const std::filesystem::path& model_path);

struct OptimizeResult {
  bool skipped = false;
  std::string message;
  NtnnRun run;
};

OptimizeResult cmd_optimize(const ExperimentConfig& cfg, const std::filesystem::path& model_path,
                            const std::filesystem::path& train_path, const std::filesystem::path& opt_path);

struct EvalResult {
  EvalReport report;
  std::filesystem::path text_path;
  std::filesystem::path json_path;
};

EvalResult cmd_eval(const ExperimentConfig& cfg, const std::filesystem::path& model_path,
                    const std::filesystem::path& data_path);

struct GridRow {
  std::string group;
  std::string family;
  std::string recipe;
  std::string settings;
  bool ok = false;
  double accuracy = 0;
  std::string error;
  bool best = false;
};

struct GridResult {
  std::vector<GridRow> rows;
  std::filesystem::path text_path;
  std::filesystem::path json_path;
};

/// Cells train on S_i (N-tuple networks optimize on S_o) and score on S_v;
/// missing datasets are generated first. CONFIG_ERROR on an empty grid.
GridResult cmd_grid(const ExperimentConfig& cfg);

std::string grid_text(const GridResult& g);

/// Summary of a group, a dataset file or a model file.
std::string cmd_inspect(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& data_path,
                        const std::optional<std::filesystem::path>& model_path);

/// Process exit status for a library error code.
int exit_code(ErrorCode code);

}  // namespace cdp
