#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "cdp/features.hpp"
#include "cdp/rng.hpp"

namespace cdp {

/// Prediction when no class strictly wins.
inline constexpr int kReserved = -1;

/// Feature rows with class labels 0..classes-1.
struct TrainingSet {
  std::vector<FeatureVector> rows;
  std::vector<int> labels;

  std::size_t size() const { return rows.size(); }
  std::size_t dimension() const { return rows.empty() ? 0 : rows.front().size(); }
  /// max label + 1, at least 2.
  int classes() const;
};

// ---- decision trees ----

enum class SplitCriterion { gini, entropy };
std::string_view to_string(SplitCriterion c);
SplitCriterion parse_split_criterion(std::string_view s);

struct TreeNode {
  /// -1 for a leaf.
  int feature = -1;
  double threshold = 0;
  int left = -1;
  int right = -1;
  /// Training samples per class that reached this node.
  std::vector<std::size_t> counts;
  /// Majority class (lowest label on ties).
  int label = 0;

  bool leaf() const { return feature < 0; }
};

struct TreeParams {
  SplitCriterion criterion = SplitCriterion::gini;
  /// Maximum number of split levels; unset means unlimited.
  std::optional<int> depth_limit;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
};

/// floor(log2(samples)) - 1, at least 1.
int default_depth_limit(std::size_t samples);

class DecisionTree {
 public:
  std::vector<TreeNode> nodes;
  int classes = 2;

  /// Goes left when x[feature] <= threshold.
  const TreeNode& leaf_for(const FeatureVector& x) const;
  int predict(const FeatureVector& x) const { return leaf_for(x).label; }
  std::size_t depth() const;
  std::size_t leaf_count() const;
};

/// Greedy CART with midpoint thresholds; a split is kept only if it strictly
/// lowers the impurity. EMPTY_DATA on no samples.
DecisionTree train_tree(const TrainingSet& data, const TreeParams& params);

// ---- random forests ----

enum class ForestVote { vote, average };
std::string_view to_string(ForestVote v);
ForestVote parse_forest_vote(std::string_view s);

struct ForestParams {
  std::size_t trees = 10;
  TreeParams tree;
  bool bootstrap = true;
  /// Candidate features per split; 0 selects round(sqrt(dimension)).
  std::size_t max_features = 0;
  ForestVote vote = ForestVote::vote;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
  std::size_t max_features = 0;
  ForestVote vote = ForestVote::vote;
  int classes = 2;

  /// Plurality vote (or mean leaf distribution); ties go to class 0.
  int predict(const FeatureVector& x) const;
};

ForestModel train_forest(const TrainingSet& data, const ForestParams& params);

// ---- N-tuple networks ----

using Pattern = std::vector<int>;

enum class NtnnCriterion { voting, log_voting };
std::string_view to_string(NtnnCriterion c);
NtnnCriterion parse_ntnn_criterion(std::string_view s);

/// All size-p subsets of {0..n-1} in lexicographic order.
std::vector<Pattern> all_patterns(std::size_t n, std::size_t p);

/// Projection key: per-column value codes.
struct TupleKey {
  static constexpr std::size_t kMaxWidth = 8;
  std::array<std::uint32_t, kMaxWidth> codes{};
  std::uint8_t width = 0;

  bool operator==(const TupleKey&) const = default;
};

struct TupleKeyHash {
  std::size_t operator()(const TupleKey& k) const noexcept;
};

using NtnnTable = std::unordered_map<TupleKey, std::uint32_t, TupleKeyHash>;

struct NtnnClassState {
  /// Seed of this class's permutation of all patterns.
  std::uint64_t permutation_seed = 0;
  /// Next position of the permuted list to try during optimization.
  std::size_t cursor = 0;
  std::vector<Pattern> active;
  /// tables[k] belongs to active[k].
  std::vector<NtnnTable> tables;
};

struct NtnnParams {
  std::size_t patterns = 20;  // M
  std::size_t width = 3;      // P
  NtnnCriterion criterion = NtnnCriterion::voting;
};

class NtnnModel {
 public:
  std::size_t dimension = 0;  // N
  NtnnParams params;
  /// Sorted distinct training values per column; a value's code is its index.
  std::vector<std::vector<double>> columns;
  std::vector<NtnnClassState> classes;
  /// Class whose list supplies the next optimization candidate.
  int next_class = 0;

  /// Codes for a row; values unseen in training map to kUnseen.
  static constexpr std::uint32_t kUnseen = 0xffffffffu;
  std::vector<std::uint32_t> encode(const FeatureVector& x) const;

  /// Per-class scores; counts or fixed-point logs, 0 for absent keys.
  std::vector<std::int64_t> scores(const FeatureVector& x) const;
  int predict(const FeatureVector& x) const;

  /// Table contents decoded back to feature values.
  std::map<std::vector<double>, std::uint32_t> table_entries(int cls, std::size_t k) const;
  /// Permuted pattern list of one class.
  std::vector<Pattern> pattern_list(int cls) const;
};

/// Score contribution of a count under a criterion; log counts use 32
/// fractional bits so that sums compare exactly.
std::int64_t table_score(std::uint32_t count, NtnnCriterion criterion);

/// Builds the column dictionaries and each class's tables for its first
/// `patterns` patterns. PATTERN_TOO_LARGE if width > dimension or > 8.
NtnnModel ntnn_train(const TrainingSet& data, const NtnnParams& params, std::uint64_t seed);

/// Trains with explicit per-class active patterns (no permutation).
NtnnModel ntnn_train_with_patterns(const TrainingSet& data, const NtnnParams& params,
                                   const std::vector<std::vector<Pattern>>& per_class);

struct NtnnOptimizeParams {
  double theta_alpha = 0.60;
  double theta_omega = 0.97;
  std::size_t restarts = 20;
  /// Candidate patterns to test; 0 means one full pass over every class list.
  std::size_t budget = 0;
  /// When false, reserved decisions are left out of the accuracy denominator.
  bool reserved_counts_wrong = true;
};

struct NtnnRun {
  std::size_t restarts_used = 0;
  double initial_accuracy = 0;
  double final_accuracy = 0;
  std::size_t tested = 0;
  std::size_t accepted = 0;
  /// "goal", "exhausted" or "budget".
  std::string stop_reason;
  /// Accuracy after every accepted swap.
  std::vector<double> history;
};

double ntnn_accuracy(const NtnnModel& model, const TrainingSet& data, bool reserved_counts_wrong = true);

/// Greedy pattern swapping against `opt`, resuming from the stored cursors.
NtnnRun ntnn_optimize(NtnnModel& model, const TrainingSet& train, const TrainingSet& opt,
                      const NtnnOptimizeParams& params);

/// Random restarts until S_o accuracy exceeds theta_alpha, then optimization.
/// RESTART_BUDGET_EXCEEDED if no restart qualifies.
std::pair<NtnnModel, NtnnRun> ntnn_fit(const TrainingSet& train, const TrainingSet& opt, const NtnnParams& params,
                                       const NtnnOptimizeParams& opt_params, std::uint64_t seed);

// ---- persistence ----

struct Model {
  std::variant<DecisionTree, ForestModel, NtnnModel> body;
  /// Group and feature recipe the model was trained for.
  std::string group;
  std::string recipe;

  std::string family() const;
  int predict(const FeatureVector& x) const;
};

inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const Model& m, const std::string& extra_json = "{}");
Model model_from_json(const std::string& text);
void save_model(const Model& m, const std::filesystem::path& path, const std::string& extra_json = "{}");
Model load_model(const std::filesystem::path& path);

}  // namespace cdp
